#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace emca {

// Signature of a cellular automaton together with the extents of the grid it
// runs on. 1D automata keep rows == 1 and use cols as the line length.
struct CaSpec {
    int dims = 1;
    int num_states = 2;
    int radius = 1;
    int rows = 1;
    int cols = 0;

    // cells in one neighborhood: (2r+1)^dims
    int neighborhood_size() const;
    // neighborhood configurations: k^((2r+1)^dims)
    size_t table_size() const;
    size_t cell_count() const { return static_cast<size_t>(rows) * cols; }
    bool same_signature(const CaSpec& o) const {
        return dims == o.dims && num_states == o.num_states && radius == o.radius;
    }
};

// Dense transition table. outputs[i] is the next state for the neighborhood
// whose configuration index is i. The configuration index reads the window in
// row-major order with the top-left cell most significant:
//   i = sum_j state_j * k^(s-1-j)
// which reproduces the Wolfram numbering for 1D binary radius-1 rules.
struct RuleTable {
    CaSpec spec;
    std::vector<uint8_t> outputs;
};

struct Grid {
    CaSpec spec;
    std::vector<uint8_t> cells;  // row-major

    uint8_t at(int r, int c) const { return cells[static_cast<size_t>(r) * spec.cols + c]; }
    uint8_t& at(int r, int c) { return cells[static_cast<size_t>(r) * spec.cols + c]; }
};

struct SpaceTime {
    CaSpec spec;
    std::vector<Grid> frames;
};

// Both layers of the convolutional form of a rule. Layer one holds one filter
// per neighborhood configuration; each filter is the one-hot encoding of its
// configuration, so its dot product with a one-hot encoded window counts
// matching cells (at most s). Adding bias = -(s-1) and clamping at zero turns
// that count into an exact indicator of the configuration. Layer two is a 1x1
// convolution whose weights are the rule outputs.
struct ConvNet {
    CaSpec spec;
    std::vector<uint8_t> mirrors;  // [config * s + window_pos] = expected state
    double bias = 0.0;
    std::vector<uint8_t> head;     // rule output per configuration
};

// raises std::invalid_argument on non-positive extents, k < 2, r < 1,
// dims outside {1,2}, or a table too large to allocate
void validate(const CaSpec& spec);

Grid make_grid(const CaSpec& spec, uint8_t fill = 0);
// all zeros except a single seed cell at the center
Grid center_seed_grid(const CaSpec& spec, uint8_t state = 1);
Grid random_grid(const CaSpec& spec, uint64_t seed);

// Wolfram-numbered elementary rule (1D, k=2, r=1). Extents left at zero; the
// grid passed to step() supplies them.
RuleTable eca_rule(uint8_t number);
// Conway's Game of Life as a dense 2D k=2 r=1 table.
RuleTable life_rule();
// Packs outputs back into a single integer; only valid while k^s fits 64 bits
// as a base-k number (checked, throws std::domain_error otherwise).
uint64_t rule_number(const RuleTable& rule);

// One synchronous update on the torus.
Grid step(const RuleTable& rule, const Grid& g);
// steps updates; result holds steps+1 frames including the initial one.
SpaceTime simulate(const RuleTable& rule, const Grid& init, int steps);

ConvNet rule_as_conv(const RuleTable& rule);
// Same update as step() but evaluated through the two conv layers with float
// accumulation. Agrees with step() exactly.
Grid conv_step(const ConvNet& net, const Grid& g);

}  // namespace emca
