#include "emca/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <zlib.h>

#include "emca/rng.hpp"
#include "emca/tinynet.hpp"

namespace emca {

namespace {

size_t deflate_length(const uint8_t* data, size_t len) {
    z_stream zs{};
    if (deflateInit2(&zs, 9, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw std::runtime_error("deflate initialization failed");
    std::vector<uint8_t> out(deflateBound(&zs, static_cast<uLong>(len)));
    zs.next_in = const_cast<Bytef*>(data);
    zs.avail_in = static_cast<uInt>(len);
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = deflate(&zs, Z_FINISH);
    size_t produced = zs.total_out;
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw std::runtime_error("deflate did not finish");
    return produced;
}

// Offsets of the neighborhood cells around the center, row-major, center
// skipped. 1D windows span one row.
std::vector<std::pair<int, int>> neighborhood_offsets(const CaSpec& spec, int radius) {
    std::vector<std::pair<int, int>> offs;
    if (spec.dims == 1) {
        for (int dc = -radius; dc <= radius; ++dc)
            if (dc != 0) offs.emplace_back(0, dc);
    } else {
        for (int dr = -radius; dr <= radius; ++dr)
            for (int dc = -radius; dc <= radius; ++dc)
                if (dr != 0 || dc != 0) offs.emplace_back(dr, dc);
    }
    return offs;
}

uint64_t neighborhood_code(const Grid& g, int r, int c,
                           const std::vector<std::pair<int, int>>& offs) {
    uint64_t code = 0;
    for (const auto& [dr, dc] : offs) {
        int rr = (r + dr + g.spec.rows) % g.spec.rows;
        int cc = (c + dc + g.spec.cols) % g.spec.cols;
        code = code * g.spec.num_states + g.at(rr, cc);
    }
    return code;
}

}  // namespace

size_t compressed_length(const std::vector<uint8_t>& bytes) {
    return deflate_length(bytes.data(), bytes.size());
}

size_t compressed_length(const Grid& g) { return compressed_length(g.cells); }

double joint_score(const Grid& s1, const Grid& s2) {
    std::vector<uint8_t> both;
    both.reserve(s1.cells.size() + s2.cells.size());
    both.insert(both.end(), s1.cells.begin(), s1.cells.end());
    both.insert(both.end(), s2.cells.begin(), s2.cells.end());
    double c1 = static_cast<double>(compressed_length(s1));
    double c2 = static_cast<double>(compressed_length(s2));
    return (c1 + c2) / static_cast<double>(compressed_length(both));
}

Kmeans1d kmeans_1d(const std::vector<double>& values, int k, uint64_t seed) {
    if (k < 1) throw std::invalid_argument("cluster count must be positive");
    std::vector<double> distinct(values);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (static_cast<size_t>(k) > distinct.size())
        throw std::invalid_argument("more clusters than distinct values");

    Rng rng(seed);
    std::vector<double> centers;
    centers.push_back(distinct[rng.next_below(distinct.size())]);
    while (static_cast<int>(centers.size()) < k) {
        std::vector<double> d2(distinct.size());
        double total = 0.0;
        for (size_t i = 0; i < distinct.size(); ++i) {
            double best = std::numeric_limits<double>::max();
            for (double c : centers) best = std::min(best, (distinct[i] - c) * (distinct[i] - c));
            d2[i] = best;
            total += best;
        }
        double pick = rng.next_double() * total;
        size_t chosen = distinct.size() - 1;
        double acc = 0.0;
        for (size_t i = 0; i < distinct.size(); ++i) {
            acc += d2[i];
            if (d2[i] > 0.0 && acc >= pick) {
                chosen = i;
                break;
            }
        }
        centers.push_back(distinct[chosen]);
    }

    auto nearest = [&](double v) {
        int best = 0;
        double bd = std::numeric_limits<double>::max();
        for (int j = 0; j < k; ++j) {
            double d = (v - centers[j]) * (v - centers[j]);
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        return best;
    };

    for (int iter = 0; iter < 1000; ++iter) {
        std::vector<double> sum(k, 0.0);
        std::vector<int> count(k, 0);
        for (double v : values) {
            int j = nearest(v);
            sum[j] += v;
            ++count[j];
        }
        bool moved = false;
        for (int j = 0; j < k; ++j) {
            if (count[j] == 0) continue;
            double c = sum[j] / count[j];
            if (c != centers[j]) moved = true;
            centers[j] = c;
        }
        if (!moved) break;
    }

    std::vector<int> order(k);
    for (int j = 0; j < k; ++j) order[j] = j;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return centers[a] < centers[b]; });
    std::vector<int> rank(k);
    for (int j = 0; j < k; ++j) rank[order[j]] = j;

    Kmeans1d result;
    result.centers.resize(k);
    for (int j = 0; j < k; ++j) result.centers[rank[j]] = centers[j];
    result.labels.reserve(values.size());
    for (double v : values) result.labels.push_back(rank[nearest(v)]);
    return result;
}

FrequencyModel fit_lookup(const Grid& frame, int radius) {
    if (radius < 1) throw std::invalid_argument("lookup radius must be at least 1");
    FrequencyModel model;
    model.spec = frame.spec;
    model.radius = radius;
    auto offs = neighborhood_offsets(frame.spec, radius);
    for (int r = 0; r < frame.spec.rows; ++r) {
        for (int c = 0; c < frame.spec.cols; ++c) {
            uint64_t code = neighborhood_code(frame, r, c, offs);
            auto& counts = model.table[code];
            if (counts.empty()) counts.assign(frame.spec.num_states, 0);
            ++counts[frame.at(r, c)];
        }
    }
    return model;
}

double lookup_loss(const FrequencyModel& model, const Grid& frame) {
    if (!model.spec.same_signature(frame.spec))
        throw std::invalid_argument("frame signature differs from the fitted one");
    auto offs = neighborhood_offsets(frame.spec, model.radius);
    double uniform = 1.0 / frame.spec.num_states;
    double loss = 0.0;
    for (int r = 0; r < frame.spec.rows; ++r) {
        for (int c = 0; c < frame.spec.cols; ++c) {
            uint64_t code = neighborhood_code(frame, r, c, offs);
            double p = uniform;
            auto it = model.table.find(code);
            if (it != model.table.end()) {
                uint32_t total = 0;
                for (uint32_t n : it->second) total += n;
                uint32_t hits = it->second[frame.at(r, c)];
                if (hits > 0) p = static_cast<double>(hits) / total;
            }
            loss -= std::log(p);
        }
    }
    return loss / static_cast<double>(frame.spec.cell_count());
}

MuTauResult nn_mu_tau(const SpaceTime& st, int T, int tau, int radius, const MuTauConfig& cfg) {
    if (T < 0 || tau < 1 || static_cast<size_t>(T + tau) >= st.frames.size())
        throw std::invalid_argument("frames T and T + tau must both exist");
    const Grid& train_frame = st.frames[T];
    const Grid& eval_frame = st.frames[T + tau];

    auto offs = neighborhood_offsets(st.spec, radius);
    int k = st.spec.num_states;
    int input_dim = static_cast<int>(offs.size()) * k;

    auto encode = [&](const Grid& g, Dataset& data) {
        data.input_dim = input_dim;
        data.inputs.assign(g.spec.cell_count() * input_dim, 0.0);
        data.targets.resize(g.spec.cell_count());
        size_t row = 0;
        for (int r = 0; r < g.spec.rows; ++r) {
            for (int c = 0; c < g.spec.cols; ++c, ++row) {
                double* x = data.inputs.data() + row * input_dim;
                for (size_t j = 0; j < offs.size(); ++j) {
                    int rr = (r + offs[j].first + g.spec.rows) % g.spec.rows;
                    int cc = (c + offs[j].second + g.spec.cols) % g.spec.cols;
                    x[j * k + g.at(rr, cc)] = 1.0;
                }
                data.targets[row] = g.at(r, c);
            }
        }
    };

    Dataset train, eval;
    encode(train_frame, train);
    encode(eval_frame, eval);

    DenseNet net = make_net(input_dim,
                            {LayerSpec{cfg.hidden, Activation::rectifier},
                             LayerSpec{k, Activation::softmax}},
                            Rng::mix(cfg.seed ^ 0x6d7574617521ULL));
    TrainConfig tc;
    tc.lr = cfg.lr;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.seed = Rng::mix(cfg.seed + 1);
    train_sgd(net, train, tc);

    MuTauResult out;
    out.loss_t = mean_loss(net, train);
    out.loss_tau = mean_loss(net, eval);
    if (out.loss_tau <= 0.0 && out.loss_t > MuTauResult::loss_floor) {
        out.degenerate = true;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    double lt = std::max(out.loss_t, MuTauResult::loss_floor);
    double ltau = std::max(out.loss_tau, MuTauResult::loss_floor);
    out.value = lt / ltau;
    return out;
}

double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("scores and labels must have equal length");
    size_t positives = 0;
    for (int l : labels) positives += (l != 0);
    if (positives == 0) throw std::invalid_argument("ranking needs at least one positive label");

    std::vector<size_t> order(scores.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    size_t hits = 0;
    for (size_t rank = 0; rank < order.size(); ++rank) {
        if (labels[order[rank]] != 0) {
            ++hits;
            ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    return ap / static_cast<double>(positives);
}

}  // namespace emca
