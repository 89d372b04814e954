// Scratch diagnostic: measures the linear-separability ceiling of reservoir
// features by training the decoder far past the single-pass protocol.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "emca/benchmark.hpp"
#include "emca/rng.hpp"

using namespace emca;

int main(int argc, char** argv) {
    int task = 1;
    int rule = -1;
    int epochs = 10;
    double lr = 0.001;
    int steps = 2;
    int copies = 4;
    int copy_width = 225;
    std::string proj = "one_to_one";
    int k = 1;
    uint64_t seed = 1;
    double rho = 0.9;
    double leak = 0.0;
    bool by_position = false;
    int window = 0;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        auto next = [&]() { return std::string(argv[++i]); };
        if (a == "--task") task = std::stoi(next());
        else if (a == "--rule") rule = std::stoi(next());
        else if (a == "--epochs") epochs = std::stoi(next());
        else if (a == "--lr") lr = std::stod(next());
        else if (a == "--steps") steps = std::stoi(next());
        else if (a == "--copies") copies = std::stoi(next());
        else if (a == "--copy-width") copy_width = std::stoi(next());
        else if (a == "--proj") proj = next();
        else if (a == "--k") k = std::stoi(next());
        else if (a == "--seed") seed = std::stoull(next());
        else if (a == "--rho") rho = std::stod(next());
        else if (a == "--leak") leak = std::stod(next());
        else if (a == "--by-position") by_position = true;
        else if (a == "--window") window = std::stoi(next());
        else { std::fprintf(stderr, "unknown arg %s\n", a.c_str()); return 1; }
    }

    TaskId id = task_from_index(task);
    const Vocab& vocab = task_vocab(id);
    TaskParams tp;
    auto samples = generate(id, tp, 1200, Rng::stream(seed, 101).next_u64());

    ProjectionKind pk = proj == "one_to_many"  ? ProjectionKind::one_to_many
                      : proj == "one_to_pattern" ? ProjectionKind::one_to_pattern
                                                 : ProjectionKind::one_to_one;

    size_t dim = 0;
    // Dense feature rows per sample position, plus target/mask bookkeeping.
    std::vector<std::vector<float>> feats;
    std::vector<int> targets;
    std::vector<uint8_t> is_train;
    feats.reserve(40000);

    auto add_sample = [&](const TaskSample& s, const std::vector<std::vector<int32_t>>& sparse,
                          bool train) {
        for (size_t t = 1; t < s.tokens.size(); ++t) {
            if (!s.mask[t]) continue;
            std::vector<float> row(dim, 0.0f);
            for (int32_t ix : sparse[t - 1]) row[static_cast<size_t>(ix)] = 1.0f;
            feats.push_back(std::move(row));
            targets.push_back(s.tokens[t]);
            is_train.push_back(train ? 1 : 0);
        }
    };
    auto add_sample_dense = [&](const TaskSample& s, const std::vector<std::vector<double>>& states,
                                bool train) {
        for (size_t t = 1; t < s.tokens.size(); ++t) {
            if (!s.mask[t]) continue;
            std::vector<float> row(dim);
            for (size_t i = 0; i < dim; ++i) row[i] = static_cast<float>(states[t - 1][i]);
            feats.push_back(std::move(row));
            targets.push_back(s.tokens[t]);
            is_train.push_back(train ? 1 : 0);
        }
    };

    if (rule >= 0 && window > 0) {
        // Variant under test: one feature per token from reca_run, decoder sees
        // the concatenation of the last `window` per-token features.
        RecaConfig cfg;
        cfg.rule = eca_rule(static_cast<uint64_t>(rule));
        cfg.steps_per_token = steps;
        cfg.projection = build_projection(pk, k, copies, static_cast<int>(vocab.size()),
                                          copy_width, Rng::stream(seed, 102).next_u64());
        size_t base = reca_feature_dim(cfg);
        dim = base * static_cast<size_t>(window);
        for (size_t si = 0; si < samples.size(); ++si) {
            const TaskSample& s = samples[si];
            auto sparse = reca_run(cfg, s.tokens);
            for (size_t t = 1; t < s.tokens.size(); ++t) {
                if (!s.mask[t]) continue;
                std::vector<float> row(dim, 0.0f);
                for (int wnd = 0; wnd < window; ++wnd) {
                    long src = static_cast<long>(t) - 1 - wnd;
                    if (src < 0) break;
                    size_t off = static_cast<size_t>(wnd) * base;
                    for (int32_t ix : sparse[static_cast<size_t>(src)])
                        row[off + static_cast<size_t>(ix)] = 1.0f;
                }
                feats.push_back(std::move(row));
                targets.push_back(s.tokens[t]);
                is_train.push_back(si < 960 ? 1 : 0);
            }
        }
    } else if (rule >= 0) {
        RecaConfig cfg;
        cfg.rule = eca_rule(static_cast<uint64_t>(rule));
        cfg.steps_per_token = steps;
        cfg.projection = build_projection(pk, k, copies, static_cast<int>(vocab.size()),
                                          copy_width, Rng::stream(seed, 102).next_u64());
        dim = reca_feature_dim(cfg);
        for (size_t i = 0; i < samples.size(); ++i)
            add_sample(samples[i], reca_run(cfg, samples[i].tokens), i < 960);
    } else {
        EsnParams p;
        p.spectral_radius = rho;
        p.leak = leak;
        p.seed = Rng::stream(seed, 103).next_u64();
        Esn esn = esn_init(p, static_cast<int>(vocab.size()));
        dim = static_cast<size_t>(p.size);
        for (size_t i = 0; i < samples.size(); ++i)
            add_sample_dense(samples[i], esn_run_tokens(esn, samples[i].tokens), i < 960);
    }

    DecoderConfig dc;
    dc.learn_rate = lr;
    Decoder dec = make_decoder(vocab.size(), dim);
    std::printf("dim %zu  positions %zu\n", dim, feats.size());
    std::vector<double> drow(dim);
    for (int e = 1; e <= epochs; ++e) {
        for (size_t i = 0; i < feats.size(); ++i) {
            if (!is_train[i]) continue;
            for (size_t j = 0; j < dim; ++j) drow[j] = feats[i][j];
            decoder_train_step(dec, drow, targets[i], dc);
        }
        size_t train_hit = 0;
        size_t train_n = 0;
        size_t test_hit = 0;
        size_t test_n = 0;
        for (size_t i = 0; i < feats.size(); ++i) {
            int p = decoder_predict(dec, feats[i]);
            if (is_train[i]) {
                ++train_n;
                if (p == targets[i]) ++train_hit;
            } else {
                ++test_n;
                if (p == targets[i]) ++test_hit;
            }
        }
        std::printf("epoch %2d  train %.4f  test %.4f\n", e,
                    double(train_hit) / double(train_n), double(test_hit) / double(test_n));
    }
    if (by_position) {
        // Accuracy bucketed by how many periods of context precede the target.
        std::vector<size_t> hit(6, 0);
        std::vector<size_t> cnt(6, 0);
        size_t row = 0;
        for (size_t i = 0; i < samples.size(); ++i) {
            const TaskSample& s = samples[i];
            size_t plen = 0;
            while (plen < s.mask.size() && !s.mask[plen]) ++plen;
            for (size_t t = 1; t < s.tokens.size(); ++t) {
                if (!s.mask[t]) continue;
                int p = decoder_predict(dec, feats[row]);
                if (i >= 960) {
                    size_t bucket = std::min<size_t>(5, t / plen - 1);
                    ++cnt[bucket];
                    if (p == targets[row]) ++hit[bucket];
                }
                ++row;
            }
        }
        for (size_t b = 0; b < 6; ++b)
            if (cnt[b])
                std::printf("  periods-seen %zu%s  acc %.4f  (n=%zu)\n", b + 1,
                            b == 5 ? "+" : " ", double(hit[b]) / double(cnt[b]), cnt[b]);
    }
    return 0;
}
