#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace emca {

// Test accuracy sampled during training; steps counts training sequences seen
// and must be strictly increasing.
struct AccuracyCurve {
    std::vector<long> steps;
    std::vector<double> accuracy;
};

// thresholds 0.05, 0.10, ..., 1.00
std::vector<double> default_checkpoints();

// 1-based index of the first curve entry with accuracy >= alpha.
// nullopt means the curve never gets there.
std::optional<size_t> time_to_threshold(const std::vector<double>& curve, double alpha);

// Weighted average of inverse times-to-threshold,
//   wade = sum(alpha / T(alpha)) / sum(alpha)
// with 1/T = 0 for thresholds that are never reached. T counts curve entries
// (evaluation checkpoints), so the value lies in [0, 1] and equals 1 exactly
// when the very first measurement clears every threshold. Throws
// std::invalid_argument on an empty curve, accuracies outside [0, 1], an
// empty checkpoint set, or thresholds outside (0, 1].
double wade(const std::vector<double>& curve, const std::vector<double>& checkpoints);
double wade(const std::vector<double>& curve);

// Fraction of matching entries; inputs carry one entry per masked position.
// Throws std::invalid_argument when empty or mismatched in length.
double masked_accuracy(const std::vector<int>& predictions, const std::vector<int>& targets);

}  // namespace emca
