#include "emca/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "emca/parallel.hpp"

namespace emca {

namespace {

const char* projection_name(ProjectionKind kind) {
    switch (kind) {
        case ProjectionKind::one_to_one: return "one-to-one";
        case ProjectionKind::one_to_many: return "one-to-many";
        case ProjectionKind::one_to_pattern: return "one-to-pattern";
    }
    return "?";
}

std::string trimmed(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

// feature of the step before each supervised position, with its target
struct TestPoint {
    int target = 0;
    std::vector<int32_t> active;
    std::vector<float> dense;
};

}  // namespace

ModelConfig reca_model(uint8_t rule_number, int steps_per_token, int copies, int copy_width,
                       ProjectionKind projection, int k) {
    ModelConfig m;
    m.kind = ModelConfig::Kind::reca;
    m.rule = eca_rule(rule_number);
    m.steps_per_token = steps_per_token;
    m.copies = copies;
    m.copy_width = copy_width;
    m.projection = projection;
    m.k = k;
    m.label = "reca-rule" + std::to_string(rule_number) + "-I" + std::to_string(steps_per_token) +
              "-R" + std::to_string(copies) + "-L" + std::to_string(copy_width) + "-" +
              projection_name(projection);
    if (k != 1) m.label += "-k" + std::to_string(k);
    return m;
}

ModelConfig esn_model(int size, double spectral_radius, double leak) {
    ModelConfig m;
    m.kind = ModelConfig::Kind::esn;
    m.esn.size = size;
    m.esn.spectral_radius = spectral_radius;
    m.esn.leak = leak;
    m.label = "esn-K" + std::to_string(size) + "-rho" + trimmed(spectral_radius) + "-beta" +
              trimmed(leak);
    return m;
}

ModelConfig tuned_reca(TaskId task, uint8_t rule_number) {
    switch (task) {
        case TaskId::periodic:
            return reca_model(rule_number, 3, 12, 50, ProjectionKind::one_to_pattern, 5);
        case TaskId::symbol_count:
            return reca_model(rule_number, 4, 10, 45, ProjectionKind::one_to_one, 1);
        case TaskId::qa:
            return reca_model(rule_number, 2, 12, 75, ProjectionKind::one_to_one, 1);
        default:
            return reca_model(rule_number);
    }
}

RunResult run_benchmark(TaskId task, const ModelConfig& model, const BenchmarkConfig& cfg,
                        uint64_t seed) {
    auto t_start = std::chrono::steady_clock::now();
    if (cfg.train_sequences < 1 || cfg.test_sequences < 1)
        throw std::invalid_argument("benchmark needs at least one training and one test sequence");
    if (cfg.eval_every < 1) throw std::invalid_argument("evaluation cadence must be at least 1");

    const Vocab& vocab = task_vocab(task);
    int v = vocab.size();
    bool sparse = model.kind == ModelConfig::Kind::reca;

    uint64_t data_seed = Rng::stream(seed, 101).next_u64();
    auto samples =
        generate(task, cfg.task_params, cfg.train_sequences + cfg.test_sequences, data_seed);

    RecaConfig reca;
    Esn esn;
    int feature_dim = 0;
    if (sparse) {
        reca.rule = model.rule;
        reca.steps_per_token = model.steps_per_token;
        reca.projection = build_projection(model.projection, model.k, model.copies, v,
                                           model.copy_width, Rng::stream(seed, 102).next_u64());
        feature_dim = reca_feature_dim(reca);
    } else {
        EsnParams params = model.esn;
        params.seed = Rng::stream(seed, 103).next_u64();
        esn = esn_init(params, v);
        feature_dim = params.size;
    }

    std::vector<TestPoint> test_points;
    for (int s = cfg.train_sequences; s < cfg.train_sequences + cfg.test_sequences; ++s) {
        const TaskSample& sample = samples[s];
        if (sparse) {
            auto feats = reca_run(reca, sample.tokens);
            for (size_t t = 1; t < sample.tokens.size(); ++t)
                if (sample.mask[t]) {
                    TestPoint tp;
                    tp.target = sample.tokens[t];
                    tp.active = std::move(feats[t - 1]);
                    test_points.push_back(std::move(tp));
                }
        } else {
            auto states = esn_run_tokens(esn, sample.tokens);
            for (size_t t = 1; t < sample.tokens.size(); ++t)
                if (sample.mask[t]) {
                    TestPoint tp;
                    tp.target = sample.tokens[t];
                    tp.dense.assign(states[t - 1].begin(), states[t - 1].end());
                    test_points.push_back(std::move(tp));
                }
        }
    }
    if (test_points.empty()) throw std::runtime_error("test split has no masked positions");

    Decoder dec = make_decoder(v, feature_dim);
    std::vector<int> preds(test_points.size()), targets(test_points.size());
    for (size_t i = 0; i < test_points.size(); ++i) targets[i] = test_points[i].target;
    auto evaluate = [&] {
        for (size_t i = 0; i < test_points.size(); ++i)
            preds[i] = sparse ? decoder_predict(dec, test_points[i].active)
                              : decoder_predict(dec, test_points[i].dense);
        return masked_accuracy(preds, targets);
    };

    AccuracyCurve curve;
    size_t trained = 0;
    for (int s = 0; s < cfg.train_sequences; ++s) {
        const TaskSample& sample = samples[s];
        if (sparse) {
            auto feats = reca_run(reca, sample.tokens);
            for (size_t t = 1; t < sample.tokens.size(); ++t)
                if (sample.mask[t]) {
                    decoder_train_step(dec, feats[t - 1], sample.tokens[t], cfg.decoder);
                    ++trained;
                }
        } else {
            auto states = esn_run_tokens(esn, sample.tokens);
            for (size_t t = 1; t < sample.tokens.size(); ++t)
                if (sample.mask[t]) {
                    decoder_train_step(dec, states[t - 1], sample.tokens[t], cfg.decoder);
                    ++trained;
                }
        }
        if ((s + 1) % cfg.eval_every == 0) {
            curve.steps.push_back(s + 1);
            curve.accuracy.push_back(evaluate());
        }
    }
    if (trained == 0) throw std::runtime_error("training split has no supervised positions");
    if (curve.steps.empty() || curve.steps.back() != cfg.train_sequences) {
        curve.steps.push_back(cfg.train_sequences);
        curve.accuracy.push_back(evaluate());
    }

    RunResult res;
    res.task = task;
    res.model = model.label;
    res.seed = seed;
    res.curve = std::move(curve);
    res.wade_score = wade(res.curve.accuracy, cfg.checkpoints);
    res.final_accuracy = res.curve.accuracy.back();
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

std::vector<RunResult> run_seeds(TaskId task, const ModelConfig& model, const BenchmarkConfig& cfg,
                                 const std::vector<uint64_t>& seeds, int max_threads) {
    std::vector<RunResult> out(seeds.size());
    parallel_for(
        seeds.size(), [&](size_t i) { out[i] = run_benchmark(task, model, cfg, seeds[i]); },
        max_threads);
    return out;
}

Aggregate aggregate(const std::vector<RunResult>& runs) {
    if (runs.empty()) throw std::invalid_argument("no runs to aggregate");
    Aggregate a;
    for (const auto& r : runs) {
        a.mean_wade += r.wade_score;
        a.mean_final += r.final_accuracy;
    }
    a.mean_wade /= runs.size();
    a.mean_final /= runs.size();
    if (runs.size() > 1) {
        double sw = 0.0, sf = 0.0;
        for (const auto& r : runs) {
            sw += (r.wade_score - a.mean_wade) * (r.wade_score - a.mean_wade);
            sf += (r.final_accuracy - a.mean_final) * (r.final_accuracy - a.mean_final);
        }
        a.std_wade = std::sqrt(sw / (runs.size() - 1));
        a.std_final = std::sqrt(sf / (runs.size() - 1));
    }
    return a;
}

}  // namespace emca
