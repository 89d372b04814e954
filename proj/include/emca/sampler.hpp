#pragma once

#include <cstdint>
#include <vector>

#include "emca/ca.hpp"

namespace emca {

// Fraction of transitions that do NOT map to the quiescent state:
// lambda = (K^s - n) / K^s with n the number of quiescent transitions.
double langton_lambda(const RuleTable& rule, uint8_t quiescent = 0);

// Rule tables of increasing lambda. The walk starts from the all-quiescent
// table and each step flips one uniformly chosen still-quiescent transition
// to a uniformly chosen non-quiescent state, raising lambda by 1/K^s. The
// result holds the initial table plus one per flip. Requests beyond the
// maximum are truncated where a single quiescent transition remains
// (lambda = 1 - 1/K^s).
std::vector<RuleTable> lambda_sweep(const CaSpec& spec, size_t steps, uint64_t seed);

// iid uniform transition outputs
std::vector<RuleTable> sample_uniform(const CaSpec& spec, size_t count, uint64_t seed);

// Draws per-state proportions q ~ Dirichlet(alpha, ..., alpha), quantizes
// them to integer transition counts summing to K^s (largest-remainder), and
// assigns outputs to configurations through a uniform random permutation.
// Small alpha concentrates mass near simplex corners, i.e. extreme lambda;
// alpha = +infinity short-circuits to the exactly uniform q.
std::vector<RuleTable> sample_dirichlet(const CaSpec& spec, double alpha, size_t count,
                                        uint64_t seed);

// Largest-remainder quantization of a probability vector to integer counts
// summing to total. Ties on the fractional part go to the lower index.
std::vector<int64_t> quantize_simplex(const std::vector<double>& q, int64_t total);

// Log probability of an exact count vector under a multinomial with the given
// outcome probabilities. A zero-probability outcome with a positive count
// yields -infinity. Throws std::invalid_argument on negative counts, size
// mismatch, or probabilities that do not sum to 1 (1e-9 tolerance).
double multinomial_logpmf(const std::vector<int64_t>& counts, const std::vector<double>& probs);

}  // namespace emca
