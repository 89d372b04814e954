#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "emca/ca.hpp"
#include "emca/complexity.hpp"
#include "emca/evaluation.hpp"
#include "emca/reservoir.hpp"
#include "emca/taskgen.hpp"
#include "emca/tinynet.hpp"

namespace emca {

// Thrown by every reader in this header. For JSON inputs the message carries
// the byte offset of the defect; for line-oriented inputs (CSV, manifests,
// PGM headers) it names the line.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// ---- rule files ----
// JSON object {dims, num_states, radius, outputs} where outputs is the rule
// table as a base-k digit string, most significant digit first: the first
// character is the output of the highest-index neighborhood configuration.
// For elementary rules the string is the Wolfram number in binary, e.g. rule
// 110 -> "01101110". Digits above 9 use lowercase letters (k up to 36).
std::string rule_to_json(const RuleTable& rule);
RuleTable rule_from_json(const std::string& text);
void save_rule(const std::filesystem::path& path, const RuleTable& rule);
RuleTable load_rule(const std::filesystem::path& path);

// ---- images ----
// Binary PGM (P5), maxval = num_states - 1, one byte per cell. A 1D
// space-time diagram is stored with one row per frame.
void write_pgm(const std::filesystem::path& path, const Grid& g);
// Accepts '#' comments in the header; num_states is recovered as maxval + 1.
Grid read_pgm(const std::filesystem::path& path);

// Fixed palette: state 0 is white, the remaining k-1 states take fully
// saturated hues evenly spaced from 0 degrees in state order.
std::vector<std::array<uint8_t, 3>> state_palette(int num_states);
// 8-bit palette PNG of the grid; byte-identical across runs for equal cells.
void write_png(const std::filesystem::path& path, const Grid& g);

// Stacks the frames of a 1D space-time diagram into one grid, a row per
// frame, for rendering. Throws on 2D input.
Grid diagram_grid(const SpaceTime& st);
// The reverse view: each row becomes one frame of a 1D diagram.
SpaceTime diagram_from_grid(const Grid& g);

// ---- accuracy curves ----
// CSV "step,accuracy", one evaluation per row, steps strictly increasing.
void write_curve_csv(const std::filesystem::path& path, const AccuracyCurve& curve);
AccuracyCurve read_curve_csv(const std::filesystem::path& path);

// ---- rule-set CSV (sampler output) ----
// Columns: rule_id, lambda, then one transition count per state (how many
// neighborhood configurations map to that state). rule_id is the row index
// into the emitted rule-file set.
void write_rules_csv(const std::filesystem::path& path, const std::vector<RuleTable>& rules);

// ---- complexity score CSV ----
// Columns: rule_id, lambda, compressed_length, joint_mu, nn_mu_tau, rank.
// Rows are written in rank order (rank 1 first).
void write_scores_csv(const std::filesystem::path& path,
                      const std::vector<ComplexityScore>& ranked);
struct ScoreRow {
    uint64_t rule_id = 0;
    double lambda = 0.0;
    size_t compressed_length = 0;
    double joint_mu = 0.0;
    double nn_mu_tau = 0.0;
    int rank = 0;
};
std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path);

// Label file: CSV "rule_id,label" with label 0 or 1.
std::map<uint64_t, int> read_labels_csv(const std::filesystem::path& path);
// Average precision of a ranking CSV against labels; rows without a label are
// ignored, labelled rules missing from the ranking raise ParseError.
double ranking_average_precision(const std::vector<ScoreRow>& rows,
                                 const std::map<uint64_t, int>& labels);

// ---- task sample export ----
// JSON lines {"task_id": n, "tokens": [...], "mask": [0|1, ...]} with tokens
// as vocabulary strings; obfuscate remaps them to opaque symbols.
void write_samples_jsonl(const std::filesystem::path& path, TaskId id,
                         const std::vector<TaskSample>& samples, bool obfuscate = false);
// Plain-text dump, one sample per line; mark_masked brackets scored tokens.
void write_samples_text(const std::filesystem::path& path, TaskId id,
                        const std::vector<TaskSample>& samples, bool mark_masked = false);

// ---- experiment records ----
// One benchmark run: model descriptor, seed, accuracy curve, derived scores.
// status is "ok" or "failed"; failed runs keep their error text and an empty
// curve. task_id 0 marks externally supplied curves.
struct ExperimentRecord {
    std::string format = "emca-record-v1";
    int task_id = 0;
    std::string model;
    uint64_t seed = 0;
    int eval_every = 0;
    std::vector<double> checkpoints;
    AccuracyCurve curve;
    double wade_score = 0.0;
    double final_accuracy = 0.0;
    double wall_seconds = 0.0;
    std::string status = "ok";
    std::string error;
};

// Serialization verifies the invariant that the stored WADE and final
// accuracy match the stored curve under the stored checkpoints; both
// directions throw ParseError on an inconsistent record.
std::string record_to_json(const ExperimentRecord& rec);
ExperimentRecord record_from_json(const std::string& text);
void save_records(const std::filesystem::path& path, const std::vector<ExperimentRecord>& recs);
std::vector<ExperimentRecord> load_records(const std::filesystem::path& path);

// Per-run summary CSV: task_id, model, seed, status, wade, final_accuracy.
// Wall time is deliberately left out so reruns are byte-identical.
void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<ExperimentRecord>& recs);

// ---- network checkpoints ----
// JSON of layer shapes plus row-major weights; exact round-trip.
std::string net_to_json(const DenseNet& net);
DenseNet net_from_json(const std::string& text);
void save_net(const std::filesystem::path& path, const DenseNet& net);
DenseNet load_net(const std::filesystem::path& path);

// ---- model bundles ----
// JSON manifest next to a little-endian binary weight file ("<stem>.bin").
// The manifest holds configuration and seeds; the binary file holds named
// arrays of doubles or int32s. Loading reproduces the model exactly.
void save_esn(const std::filesystem::path& json_path, const Esn& esn);
Esn load_esn(const std::filesystem::path& json_path);
void save_decoder(const std::filesystem::path& json_path, const Decoder& dec);
Decoder load_decoder(const std::filesystem::path& json_path);

// Feature traces for offline analysis: one row per step, no header.
void write_feature_trace_csv(const std::filesystem::path& path,
                             const std::vector<std::vector<double>>& rows);
// Sparse variant: active indices expanded to a dense 0/1 row of width dim.
void write_feature_trace_csv(const std::filesystem::path& path,
                             const std::vector<std::vector<int32_t>>& active, int dim);

// ---- manifests ----
// Minimal TOML dialect: `key = value` lines, '#' comments, [table] and
// [[array-of-tables]] headers. Values are strings in double quotes,
// integers, floats, booleans, or flat [a, b, c] arrays. No dotted keys, no
// nesting, no multi-line values. Errors name the offending line.
struct ManifestValue {
    std::variant<std::string, int64_t, double, bool, std::vector<ManifestValue>> v;
    int line = 0;

    const std::string& as_string() const;
    int64_t as_int() const;
    double as_double() const;  // accepts integer values
    bool as_bool() const;
    const std::vector<ManifestValue>& as_array() const;
};

struct ManifestTable {
    std::map<std::string, ManifestValue> values;
    int line = 0;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    const ManifestValue& at(const std::string& key) const;  // ParseError when missing
    int64_t get_int(const std::string& key, int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
};

struct Manifest {
    ManifestTable root;
    std::map<std::string, ManifestTable> tables;
    std::map<std::string, std::vector<ManifestTable>> table_arrays;
};

Manifest parse_manifest(const std::string& text);
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace emca
