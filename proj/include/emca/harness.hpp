#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emca/benchmark.hpp"
#include "emca/ca.hpp"
#include "emca/complexity.hpp"
#include "emca/io.hpp"

namespace emca {

// ---- rule-space search ----

// Samples rules, simulates each from its own seeded start, scores the run,
// and ranks the results. The master seed fixes the sampled set, every
// initial grid, and every metric net, so two searches with equal
// configuration agree row for row.
struct SearchConfig {
    int dims = 1;
    int num_states = 2;
    int radius = 1;
    int width = 256;
    int height = 256;  // 2D only

    enum class Mode { uniform, dirichlet, eca } mode = Mode::dirichlet;
    double alpha = 1.0;  // Dirichlet concentration
    int count = 100;
    uint64_t seed = 1;

    int steps = 1000;
    // metric: net trained at frame T = steps - tau, scored again at the
    // final frame; compressed length taken from the final frame
    int tau = 50;
    int metric_radius = 3;
    MuTauConfig nn;       // per-rule seed is derived from the master seed
    bool with_nn = true;  // false ranks by compressed length instead
};

// Enumerates the 256 elementary rules from a single center cell, the
// classification protocol: n = 512 cells, 512 steps.
SearchConfig eca_search_config();

struct SearchHit {
    RuleTable rule;
    ComplexityScore score;
};

// Ranked descending by the ranking metric, ties toward the lower rule id.
// rule_id is the Wolfram number in ECA mode and the sample index otherwise
// (sampling can draw duplicates, so indices keep ids unique).
std::vector<SearchHit> run_search(const SearchConfig& cfg, int threads = 0);

// ---- rendering ----

struct RenderRequest {
    enum class Method { raw, hist, dither, kmeans, autoenc, filter, pyramid };
    Method method = Method::raw;
    int b = 2;      // supercell side
    int k_out = 2;  // coarse states
    int depth = 3;  // pyramid levels
    int latent = 2; // autoencoder classes
    uint64_t seed = 1;
    bool filter_boundaries = false;
    bool png = true;
    bool pgm = false;
    std::filesystem::path out_dir = ".";
    std::string stem = "grid";
};

std::string method_name(RenderRequest::Method m);
RenderRequest::Method method_from(const std::string& name);

// Writes the raw image plus the processed image(s) for the request; file
// names embed the method and its parameters. Histogram methods also write a
// JSON sidecar with the partition thresholds. Returns the written paths.
std::vector<std::filesystem::path> render_grid(const Grid& g, const RenderRequest& req);

// Domain filtering works on the diagram, not a single grid: writes the raw
// diagram and the half-width filtered diagram.
std::vector<std::filesystem::path> render_filter(const SpaceTime& st, const RenderRequest& req);

// ---- benchmark plans ----

// One model row of a plan. Without explicit geometry a CA reservoir takes
// the calibrated per-task shape; explicit fields freeze one shape for every
// task in the plan.
struct PlanModel {
    std::string kind = "reca";  // "reca" | "esn" | "external"

    int rule = 110;
    bool tuned = true;
    int steps_per_token = 2;
    int copies = 4;
    int copy_width = 225;
    std::string projection = "one_to_one";
    int k = 1;

    int esn_size = 1800;
    double esn_rho = 1.6;
    double esn_leak = 0.0;

    std::string curve_path;  // external: CSV scored without running a model
};

struct BenchmarkPlan {
    std::vector<int> tasks{1};
    int seeds = 20;
    uint64_t seed_base = 0;  // run seeds are seed_base + 1 .. seed_base + seeds
    int eval_every = 20;
    int train_sequences = 960;
    int test_sequences = 240;
    int threads = 0;
    std::string output_dir;
    std::vector<PlanModel> models;
};

// Reads the plan from a parsed manifest: scalars at the root, one [[model]]
// table per model. Unknown keys raise ParseError so typos fail loudly.
BenchmarkPlan plan_from_manifest(const Manifest& m);
BenchmarkPlan load_plan(const std::filesystem::path& path);

ModelConfig model_config(const PlanModel& pm, TaskId task);

struct AggregateRow {
    int task_id = 0;
    std::string model;
    int runs = 0;
    int failed = 0;
    Aggregate agg;
};

struct PlanOutcome {
    std::vector<ExperimentRecord> records;
    std::vector<AggregateRow> aggregates;
    bool all_ok = true;
};

// Fans (task, model, seed) jobs across a worker pool; failures become
// records with status "failed" and never abort the other jobs. Record order
// is the deterministic job order, independent of scheduling.
PlanOutcome run_plan(const BenchmarkPlan& plan);

// records.json, summary.csv, aggregates.csv under dir (created if missing)
std::vector<std::filesystem::path> write_outcome(const std::filesystem::path& dir,
                                                 const PlanOutcome& outcome);

// Equality of everything an experiment determines; wall-clock time is host
// noise and is ignored.
bool same_results(const std::vector<ExperimentRecord>& a, const std::vector<ExperimentRecord>& b);

// Scores an externally produced accuracy curve: no model, just the curve.
ExperimentRecord score_external_curve(const std::filesystem::path& csv_path,
                                      const std::vector<double>& checkpoints, int task_id = 0);

// Output directory resolution: explicit flag, else $EMCA_OUT_DIR, else ".".
std::filesystem::path resolve_out_dir(const std::string& flag_value);

}  // namespace emca
