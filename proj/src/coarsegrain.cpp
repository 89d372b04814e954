#include "emca/coarsegrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "emca/rng.hpp"
#include "emca/tinynet.hpp"

namespace emca {
namespace {

struct BlockLayout {
    int out_rows = 1;
    int out_cols = 0;
    int cells = 0;  // cells per block
};

BlockLayout check_block(const Grid& g, int b) {
    if (b < 1) throw std::invalid_argument("block edge must be positive");
    BlockLayout lay;
    if (g.spec.dims == 1) {
        if (b > g.spec.cols) throw std::invalid_argument("block larger than grid");
        lay.out_cols = g.spec.cols / b;
        lay.cells = b;
    } else {
        if (b > g.spec.rows || b > g.spec.cols)
            throw std::invalid_argument("block larger than grid");
        lay.out_rows = g.spec.rows / b;
        lay.out_cols = g.spec.cols / b;
        lay.cells = b * b;
    }
    double bits = lay.cells * std::log2(static_cast<double>(g.spec.num_states));
    if (bits > 64.0) throw std::invalid_argument("block too large to code in 64 bits");
    return lay;
}

uint64_t code_at(const Grid& g, int r0, int c0, int b) {
    uint64_t code = 0;
    if (g.spec.dims == 1) {
        for (int c = 0; c < b; ++c) code = code * g.spec.num_states + g.at(0, c0 + c);
    } else {
        for (int r = 0; r < b; ++r)
            for (int c = 0; c < b; ++c)
                code = code * g.spec.num_states + g.at(r0 + r, c0 + c);
    }
    return code;
}

// blocks ordered by descending count, ties by ascending code
std::vector<std::pair<uint64_t, uint64_t>> sorted_blocks(const BlockHistogram& h) {
    std::vector<std::pair<uint64_t, uint64_t>> blocks(h.counts.begin(), h.counts.end());
    std::sort(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return blocks;
}

int round_state(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace

BlockHistogram block_histogram(const Grid& g, int b) {
    BlockLayout lay = check_block(g, b);
    BlockHistogram h;
    h.block = b;
    h.dims = g.spec.dims;
    h.num_states = g.spec.num_states;
    for (int r = 0; r < lay.out_rows; ++r)
        for (int c = 0; c < lay.out_cols; ++c) ++h.counts[code_at(g, r * b, c * b, b)];
    h.total = static_cast<uint64_t>(lay.out_rows) * lay.out_cols;
    return h;
}

double block_rarity(const BlockHistogram& h, uint64_t code) {
    double max_mass = 0.0;
    for (const auto& [c, n] : h.counts) {
        double m = -std::log(static_cast<double>(n) / h.total);
        if (m > max_mass) max_mass = m;
    }
    if (max_mass <= 0.0) return 0.0;
    auto it = h.counts.find(code);
    if (it == h.counts.end()) return 1.0;
    return -std::log(static_cast<double>(it->second) / h.total) / max_mass;
}

SupercellMap partition_histogram(const BlockHistogram& h, int k_out) {
    if (k_out < 2) throw std::invalid_argument("need at least two output states");
    if (h.total == 0) throw std::invalid_argument("empty histogram");
    auto blocks = sorted_blocks(h);

    std::vector<double> masses(blocks.size());
    double total_mass = 0.0;
    for (size_t i = 0; i < blocks.size(); ++i) {
        masses[i] = -std::log(static_cast<double>(blocks[i].second) / h.total);
        total_mass += masses[i];
    }

    std::vector<double> shares(k_out);
    if (h.dims == 1) {
        std::fill(shares.begin(), shares.end(), 1.0 / k_out);
    } else {
        double norm = 0.0;
        for (int j = 0; j < k_out; ++j) norm += 1.0 / ((j + 1.0) * (j + 1.0));
        for (int j = 0; j < k_out; ++j) shares[j] = 1.0 / ((j + 1.0) * (j + 1.0)) / norm;
    }

    SupercellMap map;
    map.k_out = k_out;
    double acc = 0.0;
    for (int j = 0; j < k_out; ++j) {
        acc += shares[j] * total_mass;
        map.thresholds.push_back(acc);
    }

    const double eps = 1e-9 * (total_mass + 1.0);
    double cum = 0.0;
    for (size_t i = 0; i < blocks.size(); ++i) {
        cum += masses[i];
        int j = 0;
        while (j + 1 < k_out && cum > map.thresholds[j] + eps) ++j;
        if (i == 0) j = 0;
        map.f[blocks[i].first] = j;
    }
    return map;
}

Grid coarse_grain_histogram(const Grid& g, int b, int k_out, bool dither) {
    BlockLayout lay = check_block(g, b);
    BlockHistogram h = block_histogram(g, b);

    Grid out;
    out.spec = CaSpec{g.spec.dims, k_out, 1, lay.out_rows, lay.out_cols};
    out.cells.assign(out.spec.cell_count(), 0);

    if (!dither) {
        SupercellMap map = partition_histogram(h, k_out);
        for (int r = 0; r < lay.out_rows; ++r)
            for (int c = 0; c < lay.out_cols; ++c)
                out.at(r, c) = static_cast<uint8_t>(map.f.at(code_at(g, r * b, c * b, b)));
        return out;
    }

    std::vector<double> err(out.spec.cell_count(), 0.0);
    auto err_at = [&](int r, int c) -> double& {
        return err[static_cast<size_t>(r) * lay.out_cols + c];
    };
    for (int r = 0; r < lay.out_rows; ++r) {
        for (int c = 0; c < lay.out_cols; ++c) {
            double target = block_rarity(h, code_at(g, r * b, c * b, b)) * (k_out - 1);
            double v = target + err_at(r, c);
            int q = std::clamp(round_state(v), 0, k_out - 1);
            out.at(r, c) = static_cast<uint8_t>(q);
            double e = v - q;
            if (c + 1 < lay.out_cols) err_at(r, c + 1) += e * 7.0 / 16.0;
            if (r + 1 < lay.out_rows) {
                if (c - 1 >= 0) err_at(r + 1, c - 1) += e * 3.0 / 16.0;
                err_at(r + 1, c) += e * 5.0 / 16.0;
                if (c + 1 < lay.out_cols) err_at(r + 1, c + 1) += e * 1.0 / 16.0;
            }
        }
    }
    return out;
}

Grid coarse_grain_kmeans(const Grid& g, int b, int k_out, uint64_t seed) {
    if (k_out < 1) throw std::invalid_argument("need at least one cluster");
    BlockLayout lay = check_block(g, b);

    size_t n = static_cast<size_t>(lay.out_rows) * lay.out_cols;
    std::vector<std::vector<uint8_t>> obs(n);
    {
        size_t i = 0;
        for (int r = 0; r < lay.out_rows; ++r)
            for (int c = 0; c < lay.out_cols; ++c, ++i) {
                obs[i].resize(lay.cells);
                int p = 0;
                if (g.spec.dims == 1) {
                    for (int cc = 0; cc < b; ++cc) obs[i][p++] = g.at(0, c * b + cc);
                } else {
                    for (int rr = 0; rr < b; ++rr)
                        for (int cc = 0; cc < b; ++cc)
                            obs[i][p++] = g.at(r * b + rr, c * b + cc);
                }
            }
    }

    std::vector<std::vector<uint8_t>> distinct(obs.begin(), obs.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    int k = std::min<int>(k_out, static_cast<int>(distinct.size()));

    Rng rng(seed);
    std::vector<std::vector<uint8_t>> centers;
    for (size_t idx : rng.sample_distinct(distinct.size(), static_cast<size_t>(k)))
        centers.push_back(distinct[idx]);

    auto hamming = [](const std::vector<uint8_t>& a, const std::vector<uint8_t>& b2) {
        int d = 0;
        for (size_t i = 0; i < a.size(); ++i) d += a[i] != b2[i];
        return d;
    };

    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (size_t i = 0; i < n; ++i) {
            int best = 0, best_d = std::numeric_limits<int>::max();
            for (int j = 0; j < k; ++j) {
                int d = hamming(obs[i], centers[j]);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed) break;
        for (int j = 0; j < k; ++j) {
            std::vector<double> mean(lay.cells, 0.0);
            size_t count = 0;
            for (size_t i = 0; i < n; ++i) {
                if (assign[i] != j) continue;
                ++count;
                for (int p = 0; p < lay.cells; ++p) mean[p] += obs[i][p];
            }
            if (count == 0) continue;  // keep the previous center
            for (int p = 0; p < lay.cells; ++p)
                centers[j][p] = static_cast<uint8_t>(
                    std::clamp(round_state(mean[p] / count), 0, g.spec.num_states - 1));
        }
    }

    // relabel so that cluster 0 is the most populous
    std::vector<size_t> sizes(k, 0);
    for (size_t i = 0; i < n; ++i) ++sizes[assign[i]];
    std::vector<int> order(k);
    for (int j = 0; j < k; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b2) { return sizes[a] > sizes[b2]; });
    std::vector<int> rank(k);
    for (int j = 0; j < k; ++j) rank[order[j]] = j;

    Grid out;
    out.spec = CaSpec{g.spec.dims, k, 1, lay.out_rows, lay.out_cols};
    out.cells.resize(out.spec.cell_count());
    for (size_t i = 0; i < n; ++i) out.cells[i] = static_cast<uint8_t>(rank[assign[i]]);
    return out;
}

AutoencoderGrain coarse_grain_autoencoder(const Grid& g, int b, int latent_dim,
                                          const AutoencoderConfig& cfg) {
    if (latent_dim < 1) throw std::invalid_argument("need at least one latent component");
    BlockLayout lay = check_block(g, b);
    int k = g.spec.num_states;
    int input_dim = lay.cells * k;
    size_t n = static_cast<size_t>(lay.out_rows) * lay.out_cols;

    Dataset data;
    data.input_dim = input_dim;
    data.target_groups = lay.cells;
    data.inputs.assign(n * input_dim, 0.0);
    data.targets.reserve(n * lay.cells);
    {
        size_t i = 0;
        for (int r = 0; r < lay.out_rows; ++r)
            for (int c = 0; c < lay.out_cols; ++c, ++i) {
                int p = 0;
                auto put = [&](uint8_t s) {
                    data.inputs[i * input_dim + p * k + s] = 1.0;
                    data.targets.push_back(s);
                    ++p;
                };
                if (g.spec.dims == 1) {
                    for (int cc = 0; cc < b; ++cc) put(g.at(0, c * b + cc));
                } else {
                    for (int rr = 0; rr < b; ++rr)
                        for (int cc = 0; cc < b; ++cc) put(g.at(r * b + rr, c * b + cc));
                }
            }
    }

    DenseNet net = make_net(
        input_dim,
        {LayerSpec{latent_dim, Activation::softmax, 1},
         LayerSpec{lay.cells * k, Activation::softmax, lay.cells}},
        Rng::mix(cfg.seed ^ 0x61757465ULL));
    TrainConfig tc;
    tc.lr = cfg.lr;
    tc.epochs = cfg.max_epochs;
    tc.batch_size = cfg.batch_size;
    tc.seed = cfg.seed + 1;
    tc.min_improvement = cfg.min_improvement;
    tc.max_steps = cfg.max_steps;
    train_sgd(net, data, tc);

    DenseNet encoder;
    encoder.layers.push_back(net.layers.front());

    AutoencoderGrain result;
    result.final_loss = mean_loss(net, data);
    result.grid.spec = CaSpec{g.spec.dims, latent_dim, 1, lay.out_rows, lay.out_cols};
    result.grid.cells.resize(n);
    result.mixtures.resize(n);
    std::vector<double> x(input_dim);
    for (size_t i = 0; i < n; ++i) {
        std::copy(data.inputs.begin() + i * input_dim,
                  data.inputs.begin() + (i + 1) * input_dim, x.begin());
        result.mixtures[i] = forward(encoder, x);
        size_t arg = std::max_element(result.mixtures[i].begin(), result.mixtures[i].end()) -
                     result.mixtures[i].begin();
        result.grid.cells[i] = static_cast<uint8_t>(arg);
    }
    return result;
}

SpaceTime filter_eca(const SpaceTime& st, bool boundaries) {
    if (st.spec.dims != 1 || st.spec.num_states != 2)
        throw std::invalid_argument("filtering needs a binary 1D space-time");
    if (st.frames.empty()) throw std::invalid_argument("empty space-time");
    int w = st.spec.cols & ~1;
    if (w < 2) throw std::invalid_argument("need at least two columns");
    int w2 = w / 2;

    // 2-cell block codes per frame at both offsets; odd blocks wrap inside
    // the cropped width
    auto even_code = [&](const Grid& f, int i) { return 2 * f.at(0, 2 * i) + f.at(0, 2 * i + 1); };
    auto odd_code = [&](const Grid& f, int i) {
        return 2 * f.at(0, 2 * i + 1) + f.at(0, (2 * i + 2) % w);
    };

    BlockHistogram he, ho;
    he.block = ho.block = 2;
    he.dims = ho.dims = 1;
    he.num_states = ho.num_states = 2;
    for (const Grid& f : st.frames)
        for (int i = 0; i < w2; ++i) {
            ++he.counts[even_code(f, i)];
            ++ho.counts[odd_code(f, i)];
        }
    he.total = ho.total = static_cast<uint64_t>(st.frames.size()) * w2;

    uint8_t lut_e[4] = {0, 0, 0, 0}, lut_o[4] = {0, 0, 0, 0};
    for (const auto& [code, state] : partition_histogram(he, 2).f)
        lut_e[code] = static_cast<uint8_t>(state);
    for (const auto& [code, state] : partition_histogram(ho, 2).f)
        lut_o[code] = static_cast<uint8_t>(state);

    SpaceTime out;
    out.spec = CaSpec{1, 2, st.spec.radius, 1, w2};
    out.frames.reserve(st.frames.size());
    for (const Grid& f : st.frames) {
        Grid merged;
        merged.spec = out.spec;
        merged.cells.resize(w2);
        for (int i = 0; i < w2; ++i)
            merged.cells[i] = lut_e[even_code(f, i)] | lut_o[odd_code(f, i)];
        if (boundaries) {
            Grid edges = merged;
            for (int i = 0; i < w2; ++i)
                edges.cells[i] = merged.cells[i] ^ merged.cells[(i + 1) % w2];
            merged = edges;
        }
        out.frames.push_back(std::move(merged));
    }
    return out;
}

double prev_row_neighbor_fraction(const SpaceTime& st) {
    int w = st.spec.cols;
    size_t nonzero = 0, connected = 0;
    for (size_t t = 1; t < st.frames.size(); ++t) {
        const Grid& cur = st.frames[t];
        const Grid& prev = st.frames[t - 1];
        for (int i = 0; i < w; ++i) {
            if (cur.at(0, i) == 0) continue;
            ++nonzero;
            if (prev.at(0, (i + w - 1) % w) || prev.at(0, i) || prev.at(0, (i + 1) % w))
                ++connected;
        }
    }
    if (nonzero == 0) return 1.0;
    return static_cast<double>(connected) / nonzero;
}

}  // namespace emca
