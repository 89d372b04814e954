#include "emca/evaluation.hpp"

#include <stdexcept>

namespace emca {

std::vector<double> default_checkpoints() {
    std::vector<double> a;
    a.reserve(20);
    for (int i = 1; i <= 20; ++i) a.push_back(i * 0.05);
    return a;
}

std::optional<size_t> time_to_threshold(const std::vector<double>& curve, double alpha) {
    for (size_t i = 0; i < curve.size(); ++i)
        if (curve[i] >= alpha) return i + 1;
    return std::nullopt;
}

double wade(const std::vector<double>& curve, const std::vector<double>& checkpoints) {
    if (curve.empty()) throw std::invalid_argument("empty accuracy curve");
    if (checkpoints.empty()) throw std::invalid_argument("empty checkpoint set");
    for (double a : curve)
        if (a < 0.0 || a > 1.0) throw std::invalid_argument("accuracy outside [0,1]");

    double total = 0.0, weight = 0.0;
    for (double alpha : checkpoints) {
        if (alpha <= 0.0 || alpha > 1.0) throw std::invalid_argument("threshold outside (0,1]");
        weight += alpha;
        if (auto t = time_to_threshold(curve, alpha)) total += alpha / static_cast<double>(*t);
    }
    return total / weight;
}

double wade(const std::vector<double>& curve) { return wade(curve, default_checkpoints()); }

double masked_accuracy(const std::vector<int>& predictions, const std::vector<int>& targets) {
    if (predictions.size() != targets.size())
        throw std::invalid_argument("predictions and targets differ in length");
    if (predictions.empty()) throw std::invalid_argument("no masked positions to score");
    size_t correct = 0;
    for (size_t i = 0; i < predictions.size(); ++i) correct += predictions[i] == targets[i];
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

}  // namespace emca
