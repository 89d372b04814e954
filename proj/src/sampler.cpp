#include "emca/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "emca/rng.hpp"

namespace emca {

double langton_lambda(const RuleTable& rule, uint8_t quiescent) {
    if (quiescent >= rule.spec.num_states) throw std::invalid_argument("quiescent state out of range");
    size_t quiet = 0;
    for (uint8_t o : rule.outputs) quiet += (o == quiescent);
    return static_cast<double>(rule.outputs.size() - quiet) / rule.outputs.size();
}

std::vector<RuleTable> lambda_sweep(const CaSpec& spec, size_t steps, uint64_t seed) {
    const size_t table = spec.table_size();
    const int k = spec.num_states;
    const size_t max_flips = table - 1;  // keep one quiescent transition
    if (steps > max_flips) steps = max_flips;

    Rng rng(seed);
    RuleTable rule;
    rule.spec = spec;
    rule.outputs.assign(table, 0);

    std::vector<size_t> quiet(table);
    std::iota(quiet.begin(), quiet.end(), size_t{0});

    std::vector<RuleTable> out;
    out.reserve(steps + 1);
    out.push_back(rule);
    for (size_t i = 0; i < steps; ++i) {
        size_t pick = static_cast<size_t>(rng.next_below(quiet.size()));
        size_t cfg = quiet[pick];
        quiet[pick] = quiet.back();
        quiet.pop_back();
        rule.outputs[cfg] = static_cast<uint8_t>(1 + rng.next_below(k - 1));
        out.push_back(rule);
    }
    return out;
}

std::vector<RuleTable> sample_uniform(const CaSpec& spec, size_t count, uint64_t seed) {
    const size_t table = spec.table_size();
    std::vector<RuleTable> out(count);
    for (size_t i = 0; i < count; ++i) {
        Rng rng = Rng::stream(seed, i);
        out[i].spec = spec;
        out[i].outputs.resize(table);
        for (auto& o : out[i].outputs) o = static_cast<uint8_t>(rng.next_below(spec.num_states));
    }
    return out;
}

std::vector<int64_t> quantize_simplex(const std::vector<double>& q, int64_t total) {
    const size_t k = q.size();
    std::vector<int64_t> counts(k);
    std::vector<std::pair<double, size_t>> remainders(k);
    int64_t assigned = 0;
    for (size_t i = 0; i < k; ++i) {
        double target = q[i] * static_cast<double>(total);
        counts[i] = static_cast<int64_t>(std::floor(target));
        remainders[i] = {target - std::floor(target), i};
        assigned += counts[i];
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int64_t i = 0; i < total - assigned; ++i) counts[remainders[i % k].second] += 1;
    return counts;
}

std::vector<RuleTable> sample_dirichlet(const CaSpec& spec, double alpha, size_t count,
                                        uint64_t seed) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    const size_t table = spec.table_size();
    const int k = spec.num_states;

    std::vector<RuleTable> out(count);
    for (size_t i = 0; i < count; ++i) {
        Rng rng = Rng::stream(seed, i);
        std::vector<double> q(k);
        if (std::isinf(alpha)) {
            std::fill(q.begin(), q.end(), 1.0 / k);
        } else {
            double sum = 0.0;
            for (auto& v : q) {
                v = rng.gamma(alpha);
                sum += v;
            }
            if (sum <= 0.0) {  // all gammas underflowed; fall back to a corner
                q.assign(k, 0.0);
                q[rng.next_below(k)] = 1.0;
            } else {
                for (auto& v : q) v /= sum;
            }
        }

        std::vector<int64_t> counts = quantize_simplex(q, static_cast<int64_t>(table));
        std::vector<uint8_t> outputs;
        outputs.reserve(table);
        for (int state = 0; state < k; ++state)
            outputs.insert(outputs.end(), counts[state], static_cast<uint8_t>(state));
        rng.shuffle(outputs);

        out[i].spec = spec;
        out[i].outputs = std::move(outputs);
    }
    return out;
}

double multinomial_logpmf(const std::vector<int64_t>& counts, const std::vector<double>& probs) {
    if (counts.size() != probs.size()) throw std::invalid_argument("counts/probs size mismatch");
    if (counts.empty()) throw std::invalid_argument("empty multinomial");
    int64_t n = 0;
    double psum = 0.0;
    for (size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0) throw std::invalid_argument("negative count");
        if (probs[i] < 0.0) throw std::invalid_argument("negative probability");
        n += counts[i];
        psum += probs[i];
    }
    if (std::abs(psum - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");

    double logp = std::lgamma(static_cast<double>(n) + 1.0);
    for (size_t i = 0; i < counts.size(); ++i) {
        logp -= std::lgamma(static_cast<double>(counts[i]) + 1.0);
        if (counts[i] > 0) {
            if (probs[i] == 0.0) return -std::numeric_limits<double>::infinity();
            logp += counts[i] * std::log(probs[i]);
        }
    }
    return logp;
}

}  // namespace emca
