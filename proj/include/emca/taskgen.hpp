#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emca/rng.hpp"

namespace emca {

// The ten benchmark tasks, ordered by difficulty tier: binary pattern tasks,
// symbolic counting, then language-like question answering.
enum class TaskId {
    periodic = 1,
    inc_periodic = 2,
    symbol_count = 3,
    pattern_count = 4,
    qa = 5,
    qa_wide = 6,
    world = 7,
    world_count = 8,
    adjective_qa = 9,
    adjective_qa_count = 10,
};

constexpr int kTaskCount = 10;
TaskId task_from_index(int one_based);
std::string task_name(TaskId id);

struct Vocab {
    std::vector<std::string> tokens;
    int size() const { return static_cast<int>(tokens.size()); }
    const std::string& token(int id) const;
    int id(const std::string& tok) const;  // throws std::out_of_range on unknown tokens
};

// One generated sequence. mask marks the positions the model is scored on:
// answer tokens for the query tasks, everything after the first full period
// for the pattern tasks.
struct TaskSample {
    std::vector<int> tokens;
    std::vector<uint8_t> mask;
};

// Generation knobs; defaults are the benchmark configuration.
struct TaskParams {
    int periodic_total = 36;      // tasks 1-2: emitted length
    int max_pattern = 10;         // tasks 1-2: pattern length drawn from 1..max
    int count_max_symbols = 10;   // task 3: prompt symbols drawn from 1..max
    int pattern_budget = 45;      // task 4: prompt symbols incl. separators, 1..max
    int qa_max_names = 5;         // tasks 5-6: names mentioned, 1..max
    int world_max_statements = 5; // tasks 7-8
    int world_max_questions = 5;  // tasks 7-8
    int adj_max_statements = 6;   // tasks 9-10
    int adj_max_questions = 8;    // tasks 9-10
};

// Fixed per-task vocabulary (deterministic token order).
const Vocab& task_vocab(TaskId id);

TaskSample generate_sample(TaskId id, const TaskParams& params, Rng& rng);
std::vector<TaskSample> generate(TaskId id, const TaskParams& params, size_t count,
                                 uint64_t seed);

// one-hot encoding, one row per token
std::vector<std::vector<double>> encode(const TaskSample& sample, const Vocab& vocab);

// tokens joined by spaces; masked tokens wrapped in [brackets] when requested
std::string render_text(TaskId id, const TaskSample& sample, bool mark_masked = false);

// Remaps every token of a task's vocabulary to an opaque symbol (T0, T1, ...)
// so dumps can be read without giving away the task. Export transform only;
// generation is unaffected.
std::vector<std::string> obfuscated_tokens(const Vocab& vocab);

}  // namespace emca
