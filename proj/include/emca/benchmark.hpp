#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emca/ca.hpp"
#include "emca/evaluation.hpp"
#include "emca/reservoir.hpp"
#include "emca/taskgen.hpp"

namespace emca {

// One reservoir model to benchmark. For CA reservoirs the projection maps the
// task vocabulary one-hot into copies * copy_width cells and the feature is
// steps_per_token stacked states; for echo state networks the feature is the
// reservoir state itself and esn carries everything but the per-run seed.
struct ModelConfig {
    enum class Kind { reca, esn };
    Kind kind = Kind::reca;
    std::string label;

    RuleTable rule;
    int steps_per_token = 2;  // I
    int copies = 4;           // R
    int copy_width = 225;     // L_d
    ProjectionKind projection = ProjectionKind::one_to_one;
    int k = 1;

    EsnParams esn;
};

ModelConfig reca_model(uint8_t rule_number, int steps_per_token = 2, int copies = 4,
                       int copy_width = 225,
                       ProjectionKind projection = ProjectionKind::one_to_one, int k = 1);
ModelConfig esn_model(int size = 1800, double spectral_radius = 1.6, double leak = 0.0);

// Calibrated per-task CA-reservoir geometry (steps/copies/width/projection) for
// the given rule. Tasks 1, 3 and 5 carry tuned shapes; the rest use the generic
// I=2, R=4, L_d=225 layout. All shapes keep the 1800-cell feature budget.
ModelConfig tuned_reca(TaskId task, uint8_t rule_number);

struct BenchmarkConfig {
    int train_sequences = 960;
    int test_sequences = 240;
    int eval_every = 20;  // training sequences between test evaluations
    DecoderConfig decoder;
    TaskParams task_params;
    std::vector<double> checkpoints = default_checkpoints();
};

struct RunResult {
    TaskId task = TaskId::periodic;
    std::string model;
    uint64_t seed = 0;
    AccuracyCurve curve;
    double wade_score = 0.0;
    double final_accuracy = 0.0;
    double wall_seconds = 0.0;
};

// One experiment: generate train_sequences + test_sequences fresh samples,
// drive the reservoir through every sequence, train the decoder in a single
// pass over the training split (one SGD step per masked position, predicting
// each scored token from the feature one step earlier), and record test
// accuracy every eval_every sequences plus once at the end.
RunResult run_benchmark(TaskId task, const ModelConfig& model, const BenchmarkConfig& cfg,
                        uint64_t seed);

// run_benchmark fanned out over seeds; results keep the seeds' order
std::vector<RunResult> run_seeds(TaskId task, const ModelConfig& model,
                                 const BenchmarkConfig& cfg, const std::vector<uint64_t>& seeds,
                                 int max_threads = 0);

struct Aggregate {
    double mean_wade = 0.0;
    double std_wade = 0.0;
    double mean_final = 0.0;
    double std_final = 0.0;
};

// mean and sample standard deviation across runs
Aggregate aggregate(const std::vector<RunResult>& runs);

}  // namespace emca
