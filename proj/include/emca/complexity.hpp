#pragma once

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "emca/ca.hpp"

namespace emca {

// Length in bytes of the raw DEFLATE stream (level 9, no container) of the
// cells serialized one byte per cell in row-major order.
size_t compressed_length(const Grid& g);
size_t compressed_length(const std::vector<uint8_t>& bytes);

// Structure-overlap score (C(s1) + C(s2)) / C(s1 || s2) where || is byte
// concatenation of the serializations. Shared structure between the two
// states pushes the score above 1.
double joint_score(const Grid& s1, const Grid& s2);

struct Kmeans1d {
    std::vector<int> labels;      // per input value; cluster 0 has the lowest center
    std::vector<double> centers;  // ascending
};

// Lloyd's algorithm with k-means++ seeding, iterated to a fixed point.
// Requires k <= number of distinct values (std::invalid_argument otherwise).
Kmeans1d kmeans_1d(const std::vector<double>& values, int k, uint64_t seed);

// Frequency table over neighborhoods with the center cell excluded: a window
// of 2*radius cells in 1D, (2*radius+1)^2 - 1 in 2D, read row-major with the
// first cell most significant. Each entry counts observed center states.
struct FrequencyModel {
    CaSpec spec;
    int radius = 1;
    std::unordered_map<uint64_t, std::vector<uint32_t>> table;
};

// Accumulates counts over every cell of the frame (toroidal neighborhoods).
FrequencyModel fit_lookup(const Grid& frame, int radius);

// Mean negative log probability of each cell's state given its neighborhood.
// Probabilities come from the stored counts; a neighborhood never seen during
// fitting -- or a state with zero stored count -- falls back to the uniform
// 1/num_states.
double lookup_loss(const FrequencyModel& model, const Grid& frame);

struct MuTauConfig {
    int hidden = 10;
    int epochs = 30;
    int batch_size = 8;
    double lr = 0.01;
    uint64_t seed = 0;
};

struct MuTauResult {
    double value = 0.0;    // loss(T) / loss(T + tau), both floored at loss_floor
    double loss_t = 0.0;   // mean cross-entropy on frame T after training
    double loss_tau = 0.0; // same frozen net evaluated on frame T + tau
    bool degenerate = false;  // loss_tau collapsed to zero; value is +infinity
    static constexpr double loss_floor = 1e-6;
};

// Trains a one-hidden-layer net (rectifier hidden, softmax out) to predict
// each cell's state at frame T from its one-hot encoded neighborhood (center
// excluded), then scores how well that snapshot model transfers to frame
// T + tau. Deterministic given cfg.seed.
MuTauResult nn_mu_tau(const SpaceTime& st, int T, int tau, int radius, const MuTauConfig& cfg);

// Per-rule score bundle produced by the search pipeline.
struct ComplexityScore {
    uint64_t rule_id = 0;
    double lambda = 0.0;
    size_t compressed_len = 0;
    double joint_mu = 0.0;
    double nn_mu = 0.0;
    int tau = 0;
    int t_frame = 0;
};

// Average precision of ranking items by descending score against binary
// labels (1 = positive). Ties broken by input order; requires at least one
// positive label (std::invalid_argument otherwise).
double average_precision(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace emca
