#include "emca/ca.hpp"

#include <cmath>
#include <stdexcept>

#include "emca/rng.hpp"

namespace emca {

namespace {

constexpr size_t kMaxTableSize = size_t(1) << 28;

size_t checked_pow(size_t base, int exp) {
    size_t v = 1;
    for (int i = 0; i < exp; ++i) {
        if (v > kMaxTableSize / base) throw std::invalid_argument("rule table too large");
        v *= base;
    }
    return v;
}

}  // namespace

int CaSpec::neighborhood_size() const {
    int w = 2 * radius + 1;
    return dims == 1 ? w : w * w;
}

size_t CaSpec::table_size() const {
    return checked_pow(static_cast<size_t>(num_states), neighborhood_size());
}

void validate(const CaSpec& spec) {
    if (spec.dims != 1 && spec.dims != 2) throw std::invalid_argument("dims must be 1 or 2");
    if (spec.num_states < 2) throw std::invalid_argument("need at least 2 states");
    if (spec.radius < 1) throw std::invalid_argument("radius must be >= 1");
    if (spec.cols <= 0) throw std::invalid_argument("cols must be positive");
    if (spec.dims == 1 && spec.rows != 1) throw std::invalid_argument("1D grids have rows == 1");
    if (spec.dims == 2 && spec.rows <= 0) throw std::invalid_argument("rows must be positive");
    spec.table_size();  // throws if k^s does not fit
}

Grid make_grid(const CaSpec& spec, uint8_t fill) {
    validate(spec);
    if (fill >= spec.num_states) throw std::invalid_argument("fill state out of range");
    Grid g;
    g.spec = spec;
    g.cells.assign(spec.cell_count(), fill);
    return g;
}

Grid center_seed_grid(const CaSpec& spec, uint8_t state) {
    Grid g = make_grid(spec, 0);
    if (state >= spec.num_states) throw std::invalid_argument("seed state out of range");
    g.at(spec.rows / 2, spec.cols / 2) = state;
    return g;
}

Grid random_grid(const CaSpec& spec, uint64_t seed) {
    Grid g = make_grid(spec, 0);
    Rng rng(seed);
    for (auto& c : g.cells) c = static_cast<uint8_t>(rng.next_below(spec.num_states));
    return g;
}

RuleTable eca_rule(uint8_t number) {
    RuleTable rule;
    rule.spec = CaSpec{1, 2, 1, 1, 0};
    rule.outputs.resize(8);
    for (int i = 0; i < 8; ++i) rule.outputs[i] = (number >> i) & 1;
    return rule;
}

RuleTable life_rule() {
    RuleTable rule;
    rule.spec = CaSpec{2, 2, 1, 0, 0};
    rule.outputs.resize(512);
    for (int idx = 0; idx < 512; ++idx) {
        int center = (idx >> 4) & 1;  // window position 4 of 0..8
        int alive = 0;
        for (int j = 0; j < 9; ++j) alive += (idx >> (8 - j)) & 1;
        alive -= center;
        rule.outputs[idx] = (center == 1) ? (alive == 2 || alive == 3) : (alive == 3);
    }
    return rule;
}

uint64_t rule_number(const RuleTable& rule) {
    size_t n = rule.outputs.size();
    uint64_t k = rule.spec.num_states;
    uint64_t value = 0;
    for (size_t i = n; i-- > 0;) {
        uint64_t digit = rule.outputs[i];
        if (value > (UINT64_MAX - digit) / k) throw std::domain_error("rule number exceeds 64 bits");
        value = value * k + digit;
    }
    return value;
}

namespace {

Grid step_1d(const RuleTable& rule, const Grid& g) {
    const int n = g.spec.cols;
    const int r = g.spec.radius;
    const int k = g.spec.num_states;
    const int s = 2 * r + 1;
    const size_t ksm1 = [&] {
        size_t v = 1;
        for (int i = 0; i < s - 1; ++i) v *= k;
        return v;
    }();

    Grid out = g;
    size_t idx = 0;
    for (int j = -r; j <= r; ++j) idx = idx * k + g.cells[((j % n) + n) % n];
    for (int i = 0; i < n; ++i) {
        out.cells[i] = rule.outputs[idx];
        idx = (idx % ksm1) * k + g.cells[(i + 1 + r) % n];
    }
    return out;
}

Grid step_2d(const RuleTable& rule, const Grid& g) {
    const int rows = g.spec.rows, cols = g.spec.cols;
    const int r = g.spec.radius;
    const int k = g.spec.num_states;

    std::vector<int> wrap_r(rows + 2 * r), wrap_c(cols + 2 * r);
    for (int i = 0; i < rows + 2 * r; ++i) wrap_r[i] = ((i - r) % rows + rows) % rows;
    for (int i = 0; i < cols + 2 * r; ++i) wrap_c[i] = ((i - r) % cols + cols) % cols;

    Grid out = g;
    for (int row = 0; row < rows; ++row) {
        for (int col = 0; col < cols; ++col) {
            size_t idx = 0;
            for (int dr = 0; dr <= 2 * r; ++dr) {
                const uint8_t* line = &g.cells[static_cast<size_t>(wrap_r[row + dr]) * cols];
                for (int dc = 0; dc <= 2 * r; ++dc) idx = idx * k + line[wrap_c[col + dc]];
            }
            out.cells[static_cast<size_t>(row) * cols + col] = rule.outputs[idx];
        }
    }
    return out;
}

}  // namespace

Grid step(const RuleTable& rule, const Grid& g) {
    validate(g.spec);
    if (!rule.spec.same_signature(g.spec)) throw std::invalid_argument("rule/grid signature mismatch");
    if (rule.outputs.size() != g.spec.table_size()) throw std::invalid_argument("bad rule table size");
    return g.spec.dims == 1 ? step_1d(rule, g) : step_2d(rule, g);
}

SpaceTime simulate(const RuleTable& rule, const Grid& init, int steps) {
    if (steps < 0) throw std::invalid_argument("steps must be >= 0");
    SpaceTime st;
    st.spec = init.spec;
    st.frames.reserve(static_cast<size_t>(steps) + 1);
    st.frames.push_back(init);
    for (int t = 0; t < steps; ++t) st.frames.push_back(step(rule, st.frames.back()));
    return st;
}

ConvNet rule_as_conv(const RuleTable& rule) {
    const int k = rule.spec.num_states;
    const int s = rule.spec.neighborhood_size();
    const size_t configs = rule.spec.table_size();
    if (rule.outputs.size() != configs) throw std::invalid_argument("bad rule table size");

    ConvNet net;
    net.spec = rule.spec;
    net.bias = -(s - 1);
    net.head = rule.outputs;
    net.mirrors.resize(configs * s);
    for (size_t cfg = 0; cfg < configs; ++cfg) {
        size_t rest = cfg;
        for (int pos = s; pos-- > 0;) {
            net.mirrors[cfg * s + pos] = static_cast<uint8_t>(rest % k);
            rest /= k;
        }
    }
    return net;
}

Grid conv_step(const ConvNet& net, const Grid& g) {
    validate(g.spec);
    if (!net.spec.same_signature(g.spec)) throw std::invalid_argument("conv/grid signature mismatch");
    const int r = g.spec.radius;
    const int s = g.spec.neighborhood_size();
    const size_t configs = net.head.size();
    const int rows = g.spec.rows, cols = g.spec.cols;

    // one-hot window extraction; windows[pos] holds the state at window
    // position pos so the filter dot product reduces to equality counting
    std::vector<uint8_t> window(s);
    Grid out = g;
    for (int row = 0; row < rows; ++row) {
        for (int col = 0; col < cols; ++col) {
            int p = 0;
            if (g.spec.dims == 1) {
                for (int dc = -r; dc <= r; ++dc) window[p++] = g.cells[((col + dc) % cols + cols) % cols];
            } else {
                for (int dr = -r; dr <= r; ++dr)
                    for (int dc = -r; dc <= r; ++dc)
                        window[p++] = g.at(((row + dr) % rows + rows) % rows,
                                           ((col + dc) % cols + cols) % cols);
            }
            double acc = 0.0;
            for (size_t cfg = 0; cfg < configs; ++cfg) {
                const uint8_t* mirror = &net.mirrors[cfg * s];
                double dot = 0.0;
                for (int j = 0; j < s; ++j) dot += (mirror[j] == window[j]) ? 1.0 : 0.0;
                double act = dot + net.bias;
                if (act > 0.0) acc += net.head[cfg] * act;
            }
            out.at(row, col) = static_cast<uint8_t>(std::lround(acc));
        }
    }
    return out;
}

}  // namespace emca
