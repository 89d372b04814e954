#include "emca/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emca {

namespace {

struct CsrView {
    const std::vector<int32_t>& row_start;
    const std::vector<int32_t>& col;
    const std::vector<double>& val;
    int n;
};

RadiusEstimate growth_radius(const CsrView& m, Rng rng) {
    const int cap = 1000, burn_in = 10, min_samples = 100;
    const double tol = 1e-6;

    std::vector<double> v(m.n), next(m.n);
    double norm = 0.0;
    for (auto& x : v) {
        x = rng.uniform(-1.0, 1.0);
        norm += x * x;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        v[0] = 1.0;
        norm = 1.0;
    }
    for (auto& x : v) x /= norm;

    RadiusEstimate out;
    double sum_log = 0.0, prev = -1.0;
    int samples = 0;
    for (int it = 1; it <= cap; ++it) {
        double growth2 = 0.0;
        for (int i = 0; i < m.n; ++i) {
            double s = 0.0;
            for (int32_t e = m.row_start[i]; e < m.row_start[i + 1]; ++e)
                s += m.val[e] * v[m.col[e]];
            next[i] = s;
            growth2 += s * s;
        }
        double g = std::sqrt(growth2);
        out.iterations = it;
        if (g == 0.0) {
            out.value = 0.0;
            return out;
        }
        for (int i = 0; i < m.n; ++i) v[i] = next[i] / g;
        if (it <= burn_in) continue;
        sum_log += std::log(g);
        ++samples;
        double est = std::exp(sum_log / samples);
        if (samples >= min_samples && prev > 0.0 && std::abs(est - prev) <= tol * est) {
            out.value = est;
            out.converged = true;
            return out;
        }
        prev = est;
    }
    out.value = std::exp(sum_log / std::max(samples, 1));
    return out;
}

double max_abs_row_sum(const CsrView& m) {
    double best = 0.0;
    for (int i = 0; i < m.n; ++i) {
        double s = 0.0;
        for (int32_t e = m.row_start[i]; e < m.row_start[i + 1]; ++e) s += std::abs(m.val[e]);
        best = std::max(best, s);
    }
    return best;
}

}  // namespace

Esn esn_init(const EsnParams& p, int input_dim) {
    if (p.size < 1) throw std::invalid_argument("reservoir size must be at least 1");
    if (!(p.spectral_radius > 0.0)) throw std::invalid_argument("spectral radius must be positive");
    if (p.leak < 0.0 || p.leak > 1.0) throw std::invalid_argument("leak must lie in [0,1]");
    if (p.nonzeros_per_row <= 0.0)
        throw std::invalid_argument("nonzeros_per_row must be positive");
    if (input_dim < 1) throw std::invalid_argument("input dimension must be at least 1");

    Esn esn;
    esn.params = p;
    esn.input_dim = input_dim;

    Rng matrix_rng = Rng::stream(p.seed, 1);
    double prob = std::min(1.0, p.nonzeros_per_row / p.size);
    esn.row_start.assign(p.size + 1, 0);
    for (int i = 0; i < p.size; ++i) {
        for (int j = 0; j < p.size; ++j) {
            if (matrix_rng.next_double() >= prob) continue;
            esn.col.push_back(j);
            esn.val.push_back(matrix_rng.uniform(-1.0, 1.0));
        }
        esn.row_start[i + 1] = static_cast<int32_t>(esn.col.size());
    }

    CsrView view{esn.row_start, esn.col, esn.val, p.size};
    RadiusEstimate est = growth_radius(view, Rng::stream(p.seed, 2));
    double radius = est.value;
    if (!est.converged || !(radius > 0.0)) {
        radius = max_abs_row_sum(view) / 1.25;
        esn.radius_fallback = true;
        if (!(radius > 0.0))
            throw std::runtime_error("recurrent matrix is zero; cannot reach the target radius");
    }
    esn.raw_radius = radius;
    double scale = p.spectral_radius / radius;
    for (auto& v : esn.val) v *= scale;

    Rng input_rng = Rng::stream(p.seed, 3);
    esn.w_in.resize(static_cast<size_t>(p.size) * input_dim);
    for (auto& v : esn.w_in) v = input_rng.uniform(-1.0, 1.0);
    return esn;
}

RadiusEstimate estimate_spectral_radius(const Esn& esn, uint64_t probe_seed) {
    CsrView view{esn.row_start, esn.col, esn.val, esn.params.size};
    return growth_radius(view, Rng::stream(probe_seed, 2));
}

namespace {

// shared update loop; input_term(i) adds W_in x to row i's preactivation
template <typename InputTerm>
std::vector<std::vector<double>> esn_drive(const Esn& esn, size_t steps,
                                           const std::vector<double>& r0, InputTerm input_term) {
    int n = esn.params.size;
    std::vector<double> r;
    if (r0.empty()) {
        r.assign(n, 0.0);
    } else {
        if (static_cast<int>(r0.size()) != n)
            throw std::invalid_argument("initial state size does not match the reservoir");
        r = r0;
    }
    double retain = esn.params.convention == LeakConvention::experiment
                        ? esn.params.leak
                        : 1.0 - esn.params.leak;
    double gain = 1.0 - retain;

    std::vector<std::vector<double>> out;
    out.reserve(steps);
    std::vector<double> z(n);
    for (size_t t = 0; t < steps; ++t) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int32_t e = esn.row_start[i]; e < esn.row_start[i + 1]; ++e)
                s += esn.val[e] * r[esn.col[e]];
            z[i] = s + input_term(t, i);
        }
        for (int i = 0; i < n; ++i) r[i] = retain * r[i] + gain * std::tanh(z[i]);
        out.push_back(r);
    }
    return out;
}

}  // namespace

std::vector<std::vector<double>> esn_run(const Esn& esn,
                                         const std::vector<std::vector<double>>& inputs,
                                         const std::vector<double>& r0) {
    for (const auto& x : inputs)
        if (static_cast<int>(x.size()) != esn.input_dim)
            throw std::invalid_argument("input dimension mismatch");
    return esn_drive(esn, inputs.size(), r0, [&](size_t t, int i) {
        const double* w = &esn.w_in[static_cast<size_t>(i) * esn.input_dim];
        double s = 0.0;
        for (int j = 0; j < esn.input_dim; ++j) s += w[j] * inputs[t][j];
        return s;
    });
}

std::vector<std::vector<double>> esn_run_tokens(const Esn& esn, const std::vector<int>& tokens,
                                                const std::vector<double>& r0) {
    for (int t : tokens)
        if (t < 0 || t >= esn.input_dim) throw std::invalid_argument("token id out of range");
    return esn_drive(esn, tokens.size(), r0, [&](size_t t, int i) {
        return esn.w_in[static_cast<size_t>(i) * esn.input_dim + tokens[t]];
    });
}

Projection build_projection(ProjectionKind kind, int k, int copies, int input_dim,
                            int copy_width, uint64_t seed) {
    if (k < 1) throw std::invalid_argument("projection k must be at least 1");
    if (kind == ProjectionKind::one_to_one && k != 1)
        throw std::invalid_argument("one-to-one projection requires k = 1");
    if (copies < 1) throw std::invalid_argument("projection needs at least one copy");
    if (input_dim < 1) throw std::invalid_argument("projection input dimension must be at least 1");
    if (copy_width < input_dim * k)
        throw std::invalid_argument("copy width cannot pack all input bits");

    Projection proj;
    proj.kind = kind;
    proj.k = k;
    proj.copies = copies;
    proj.input_dim = input_dim;
    proj.copy_width = copy_width;
    proj.targets.resize(copies);
    for (int c = 0; c < copies; ++c) {
        Rng rng = Rng::stream(seed, static_cast<uint64_t>(c) + 1);
        std::vector<int32_t>& t = proj.targets[c];
        t.reserve(static_cast<size_t>(input_dim) * k);
        int32_t base = c * copy_width;
        if (kind == ProjectionKind::one_to_pattern) {
            int slot = copy_width / input_dim;
            for (int b = 0; b < input_dim; ++b) {
                int start = b * slot + static_cast<int>(rng.next_below(slot - k + 1));
                for (int j = 0; j < k; ++j) t.push_back(base + start + j);
            }
        } else {
            auto cells = rng.sample_distinct(copy_width, static_cast<size_t>(input_dim) * k);
            for (size_t x : cells) t.push_back(base + static_cast<int32_t>(x));
        }
    }
    return proj;
}

std::vector<uint8_t> project(const Projection& proj, const std::vector<uint8_t>& bits) {
    if (static_cast<int>(bits.size()) != proj.input_dim)
        throw std::invalid_argument("input bit count does not match the projection");
    std::vector<uint8_t> out(proj.width(), 0);
    for (int b = 0; b < proj.input_dim; ++b) {
        if (!bits[b]) continue;
        for (const auto& t : proj.targets)
            for (int j = 0; j < proj.k; ++j) out[t[static_cast<size_t>(b) * proj.k + j]] = 1;
    }
    return out;
}

int reca_feature_dim(const RecaConfig& cfg) {
    return cfg.steps_per_token * cfg.projection.width();
}

std::vector<std::vector<int32_t>> reca_run(const RecaConfig& cfg, const std::vector<int>& tokens) {
    if (cfg.rule.spec.dims != 1 || cfg.rule.spec.num_states != 2)
        throw std::invalid_argument("CA reservoir requires a binary 1D rule");
    if (cfg.steps_per_token < 1) throw std::invalid_argument("steps_per_token must be at least 1");

    const Projection& proj = cfg.projection;
    int width = proj.width();
    CaSpec spec = cfg.rule.spec;
    spec.rows = 1;
    spec.cols = width;
    Grid state = make_grid(spec);

    std::vector<std::vector<int32_t>> features;
    features.reserve(tokens.size());
    for (int tok : tokens) {
        if (tok < 0 || tok >= proj.input_dim)
            throw std::invalid_argument("token id out of range for the projection");
        for (const auto& t : proj.targets)
            for (int j = 0; j < proj.k; ++j)
                state.cells[t[static_cast<size_t>(tok) * proj.k + j]] ^= 1;
        std::vector<int32_t> active;
        for (int s = 0; s < cfg.steps_per_token; ++s) {
            state = step(cfg.rule, state);
            int32_t offset = s * width;
            for (int i = 0; i < width; ++i)
                if (state.cells[i]) active.push_back(offset + i);
        }
        features.push_back(std::move(active));
    }
    return features;
}

bool ExtendedRule::ignores_input() const {
    for (int i = 0; i < 8; ++i)
        if (outputs[i] != outputs[i + 8]) return false;
    return true;
}

ExtendedRule extended_from(const RuleTable& rule) {
    if (rule.spec.dims != 1 || rule.spec.num_states != 2 || rule.spec.radius != 1)
        throw std::invalid_argument("extended rules wrap binary 1D radius-1 rules");
    ExtendedRule ext;
    for (int p = 0; p < 2; ++p)
        for (int l = 0; l < 2; ++l)
            for (int c = 0; c < 2; ++c)
                for (int r = 0; r < 2; ++r)
                    ext.outputs[p * 8 + l * 4 + c * 2 + r] = rule.outputs[l * 4 + (c ^ p) * 2 + r];
    return ext;
}

int extended_reca_feature_dim(const ExtendedRecaConfig& cfg) {
    return cfg.steps_per_token * cfg.projection.width();
}

std::vector<std::vector<int32_t>> extended_reca_run(const ExtendedRecaConfig& cfg,
                                                    const std::vector<int>& tokens) {
    if (cfg.steps_per_token < 1) throw std::invalid_argument("steps_per_token must be at least 1");
    const Projection& proj = cfg.projection;
    int width = proj.width();
    if (width < 3) throw std::invalid_argument("extended CA reservoir needs width >= 3");

    std::vector<uint8_t> state(width, 0), next(width), input(width, 0);
    std::vector<std::vector<int32_t>> features;
    features.reserve(tokens.size());
    for (int tok : tokens) {
        if (tok < 0 || tok >= proj.input_dim)
            throw std::invalid_argument("token id out of range for the projection");
        for (const auto& t : proj.targets)
            for (int j = 0; j < proj.k; ++j) input[t[static_cast<size_t>(tok) * proj.k + j]] = 1;
        std::vector<int32_t> active;
        for (int s = 0; s < cfg.steps_per_token; ++s) {
            for (int i = 0; i < width; ++i) {
                int l = state[(i + width - 1) % width];
                int c = state[i];
                int r = state[(i + 1) % width];
                int p = s == 0 ? input[i] : 0;
                next[i] = cfg.rule.outputs[p * 8 + l * 4 + c * 2 + r];
            }
            state.swap(next);
            int32_t offset = s * width;
            for (int i = 0; i < width; ++i)
                if (state[i]) active.push_back(offset + i);
        }
        features.push_back(std::move(active));
        for (const auto& t : proj.targets)
            for (int j = 0; j < proj.k; ++j) input[t[static_cast<size_t>(tok) * proj.k + j]] = 0;
    }
    return features;
}

Decoder make_decoder(int vocab, int feature_dim) {
    if (vocab < 1 || feature_dim < 1)
        throw std::invalid_argument("decoder needs positive vocab and feature sizes");
    Decoder d;
    d.vocab = vocab;
    d.feature_dim = feature_dim;
    d.w.assign(static_cast<size_t>(vocab) * feature_dim, 0.0);
    d.b.assign(vocab, 0.0);
    return d;
}

namespace {

template <typename T>
std::vector<double> dense_logits(const Decoder& d, const std::vector<T>& f) {
    if (static_cast<int>(f.size()) != d.feature_dim)
        throw std::invalid_argument("feature size does not match the decoder");
    std::vector<double> z(d.vocab);
    for (int j = 0; j < d.vocab; ++j) {
        const double* row = &d.w[static_cast<size_t>(j) * d.feature_dim];
        double s = 0.0;
        for (int i = 0; i < d.feature_dim; ++i) s += row[i] * f[i];
        z[j] = d.scale * s + d.b[j];
    }
    return z;
}

int argmax_lowest(const std::vector<double>& z) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(z.size()); ++i)
        if (z[i] > z[best]) best = i;
    return best;
}

// softmax(z) - onehot(target), in place
void softmax_grad(std::vector<double>& z, int target) {
    double top = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
        v = std::exp(v - top);
        sum += v;
    }
    for (auto& v : z) v /= sum;
    z[target] -= 1.0;
}

void check_target(const Decoder& d, int target) {
    if (target < 0 || target >= d.vocab) throw std::invalid_argument("target token out of range");
}

// weight decay shrinks `scale`; refold into w long before it can underflow
void apply_decay(Decoder& d, const DecoderConfig& cfg) {
    d.scale *= 1.0 - cfg.learn_rate * cfg.weight_decay;
    if (d.scale >= 1e-150) return;
    for (auto& v : d.w) v *= d.scale;
    d.scale = 1.0;
}

}  // namespace

std::vector<double> decoder_logits(const Decoder& d, const std::vector<double>& feature) {
    return dense_logits(d, feature);
}
std::vector<double> decoder_logits(const Decoder& d, const std::vector<float>& feature) {
    return dense_logits(d, feature);
}
std::vector<double> decoder_logits(const Decoder& d, const std::vector<int32_t>& active) {
    std::vector<double> z(d.vocab);
    for (int j = 0; j < d.vocab; ++j) {
        const double* row = &d.w[static_cast<size_t>(j) * d.feature_dim];
        double s = 0.0;
        for (int32_t i : active) {
            if (i < 0 || i >= d.feature_dim)
                throw std::invalid_argument("active index out of range");
            s += row[i];
        }
        z[j] = d.scale * s + d.b[j];
    }
    return z;
}

int decoder_predict(const Decoder& d, const std::vector<double>& feature) {
    return argmax_lowest(decoder_logits(d, feature));
}
int decoder_predict(const Decoder& d, const std::vector<float>& feature) {
    return argmax_lowest(decoder_logits(d, feature));
}
int decoder_predict(const Decoder& d, const std::vector<int32_t>& active) {
    return argmax_lowest(decoder_logits(d, active));
}

void decoder_train_step(Decoder& d, const std::vector<double>& feature, int target,
                        const DecoderConfig& cfg) {
    check_target(d, target);
    std::vector<double> g = decoder_logits(d, feature);
    softmax_grad(g, target);
    apply_decay(d, cfg);
    for (int j = 0; j < d.vocab; ++j) {
        double a = cfg.learn_rate * g[j] / d.scale;
        double* row = &d.w[static_cast<size_t>(j) * d.feature_dim];
        for (int i = 0; i < d.feature_dim; ++i) row[i] -= a * feature[i];
        d.b[j] = (1.0 - cfg.learn_rate * cfg.weight_decay) * d.b[j] - cfg.learn_rate * g[j];
    }
}

void decoder_train_step(Decoder& d, const std::vector<int32_t>& active, int target,
                        const DecoderConfig& cfg) {
    check_target(d, target);
    std::vector<double> g = decoder_logits(d, active);
    softmax_grad(g, target);
    apply_decay(d, cfg);
    for (int j = 0; j < d.vocab; ++j) {
        double a = cfg.learn_rate * g[j] / d.scale;
        double* row = &d.w[static_cast<size_t>(j) * d.feature_dim];
        for (int32_t i : active) row[i] -= a;
        d.b[j] = (1.0 - cfg.learn_rate * cfg.weight_decay) * d.b[j] - cfg.learn_rate * g[j];
    }
}

}  // namespace emca
