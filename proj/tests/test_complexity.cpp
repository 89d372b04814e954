#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "emca/ca.hpp"
#include "emca/complexity.hpp"
#include "emca/rng.hpp"

using namespace emca;

namespace {

CaSpec line_spec(int cols) {
    CaSpec s;
    s.dims = 1;
    s.num_states = 2;
    s.radius = 1;
    s.rows = 1;
    s.cols = cols;
    return s;
}

Grid line_grid(const std::vector<uint8_t>& cells) {
    Grid g;
    g.spec = line_spec(static_cast<int>(cells.size()));
    g.cells = cells;
    return g;
}

}  // namespace

TEST_CASE("compressed length of constant data stays tiny") {
    Grid zeros = make_grid(line_spec(1024));
    size_t len = compressed_length(zeros);
    CHECK(len > 0);
    CHECK(len < 30);
}

TEST_CASE("compressed length orders random above constant") {
    CaSpec spec = line_spec(1 << 16);
    Grid constant = make_grid(spec, 1);
    Grid random = random_grid(spec, 99);
    CHECK(compressed_length(random) > compressed_length(constant));
}

TEST_CASE("compressed length is deterministic") {
    Grid g = random_grid(line_spec(4096), 7);
    CHECK(compressed_length(g) == compressed_length(g));
}

TEST_CASE("rule 30 ends less compressible than rule 0") {
    CaSpec spec = line_spec(512);
    Grid seed = center_seed_grid(spec);
    Grid r30 = simulate(eca_rule(30), seed, 512).frames.back();
    Grid r0 = simulate(eca_rule(0), seed, 512).frames.back();
    CHECK(compressed_length(r30) > compressed_length(r0));
}

TEST_CASE("joint score rewards shared structure") {
    std::vector<uint8_t> pattern;
    for (int i = 0; i < (1 << 15); ++i)
        pattern.push_back(static_cast<uint8_t>((0x96u >> (i % 8)) & 1));
    Grid s = line_grid(pattern);
    CHECK(joint_score(s, s) > 1.0);
}

TEST_CASE("joint score of independent noise is near 1") {
    CaSpec spec = line_spec(1 << 15);
    Grid a = random_grid(spec, 1);
    Grid b = random_grid(spec, 2);
    double mu = joint_score(a, b);
    CHECK(mu == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("joint score of two blank grids stays at least 1") {
    Grid z = make_grid(line_spec(4096));
    CHECK(joint_score(z, z) >= 1.0);
}

TEST_CASE("joint score is nearly symmetric on structured grids") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        CaSpec spec = line_spec(8192);
        Grid a = make_grid(spec);
        Grid b = make_grid(spec);
        for (int i = 0; i < spec.cols; ++i) {
            a.cells[i] = (i / (1 + static_cast<int>(rng.next_below(40)))) % 2;
            b.cells[i] = (i % 16) < 8;
        }
        double ab = joint_score(a, b);
        double ba = joint_score(b, a);
        CHECK(std::abs(ab - ba) / ab < 0.05);
    }
}

TEST_CASE("kmeans splits two obvious groups") {
    Kmeans1d km = kmeans_1d({0.0, 0.0, 10.0, 10.0}, 2, 3);
    CHECK(km.centers[0] == doctest::Approx(0.0));
    CHECK(km.centers[1] == doctest::Approx(10.0));
    CHECK(km.labels == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("kmeans with one cluster returns the mean") {
    Kmeans1d km = kmeans_1d({1.0, 2.0, 6.0}, 1, 0);
    CHECK(km.centers[0] == doctest::Approx(3.0));
}

TEST_CASE("kmeans rejects more clusters than distinct values") {
    CHECK_THROWS_AS(kmeans_1d({5.0, 5.0, 5.0}, 2, 0), std::invalid_argument);
}

TEST_CASE("kmeans labels follow ascending centers") {
    std::vector<double> values{100.0, 1.0, 50.0, 2.0, 99.0, 51.0};
    Kmeans1d km = kmeans_1d(values, 3, 11);
    CHECK(km.centers[0] < km.centers[1]);
    CHECK(km.centers[1] < km.centers[2]);
    CHECK(km.labels[1] == 0);
    CHECK(km.labels[0] == 2);
}

TEST_CASE("lookup fit on a constant frame is a single sure entry") {
    Grid g = make_grid(line_spec(64), 1);
    FrequencyModel m = fit_lookup(g, 1);
    REQUIRE(m.table.size() == 1);
    const auto& counts = m.table.begin()->second;
    CHECK(counts[0] == 0);
    CHECK(counts[1] == 64);
}

TEST_CASE("lookup fit on an alternating frame gives two sure entries") {
    std::vector<uint8_t> cells(1000);
    for (size_t i = 0; i < cells.size(); ++i) cells[i] = i % 2;
    FrequencyModel m = fit_lookup(line_grid(cells), 1);
    REQUIRE(m.table.size() == 2);
    for (const auto& [code, counts] : m.table) {
        CHECK(counts[0] + counts[1] == 500);
        CHECK(counts[0] * counts[1] == 0);
    }
}

TEST_CASE("lookup counts conserve the cell count") {
    Grid g = random_grid(line_spec(4096), 21);
    FrequencyModel m = fit_lookup(g, 2);
    uint64_t total = 0;
    for (const auto& [code, counts] : m.table)
        for (uint32_t n : counts) total += n;
    CHECK(total == 4096);
}

TEST_CASE("lookup loss vanishes on a deterministic frame") {
    std::vector<uint8_t> cells(512);
    for (size_t i = 0; i < cells.size(); ++i) cells[i] = i % 2;
    Grid g = line_grid(cells);
    FrequencyModel m = fit_lookup(g, 1);
    CHECK(lookup_loss(m, g) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("lookup loss approaches the entropy limit on uniform noise") {
    Grid g = random_grid(line_spec(100000), 12345);
    FrequencyModel m = fit_lookup(g, 1);
    CHECK(lookup_loss(m, g) == doctest::Approx(std::log(2.0)).epsilon(0.015));
}

TEST_CASE("lookup loss falls back to uniform on unseen neighborhoods") {
    Grid zeros = make_grid(line_spec(256), 0);
    Grid ones = make_grid(line_spec(256), 1);
    FrequencyModel m = fit_lookup(zeros, 1);
    CHECK(lookup_loss(m, ones) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("lookup loss never goes negative") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Grid g = random_grid(line_spec(256), rng.next_u64());
        FrequencyModel m = fit_lookup(g, 1);
        CHECK(lookup_loss(m, g) >= 0.0);
        Grid other = random_grid(line_spec(256), rng.next_u64());
        CHECK(lookup_loss(m, other) >= 0.0);
    }
}

TEST_CASE("transfer score is exactly 1 when both frames match") {
    CaSpec spec = line_spec(256);
    SpaceTime st;
    st.spec = spec;
    Grid frame = random_grid(spec, 8);
    st.frames = {frame, frame, frame};
    MuTauConfig cfg;
    MuTauResult r = nn_mu_tau(st, 0, 2, 1, cfg);
    CHECK(!r.degenerate);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("transfer score stays near 1 after a rule collapses to silence") {
    CaSpec spec = line_spec(256);
    SpaceTime st = simulate(eca_rule(0), random_grid(spec, 4), 12);
    MuTauConfig cfg;
    MuTauResult r = nn_mu_tau(st, 6, 4, 1, cfg);
    CHECK(!r.degenerate);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("transfer score is reproducible for a fixed seed") {
    CaSpec spec = line_spec(200);
    SpaceTime st = simulate(eca_rule(110), center_seed_grid(spec), 150);
    MuTauConfig cfg;
    cfg.seed = 77;
    MuTauResult a = nn_mu_tau(st, 100, 50, 2, cfg);
    MuTauResult b = nn_mu_tau(st, 100, 50, 2, cfg);
    CHECK(a.value == b.value);
    CHECK(a.loss_t == b.loss_t);
    CHECK(a.loss_tau == b.loss_tau);
}

TEST_CASE("transfer score rejects out-of-range frames") {
    CaSpec spec = line_spec(64);
    SpaceTime st = simulate(eca_rule(90), center_seed_grid(spec), 10);
    MuTauConfig cfg;
    CHECK_THROWS_AS(nn_mu_tau(st, 8, 5, 1, cfg), std::invalid_argument);
}

TEST_CASE("average precision of a perfect ranking is 1") {
    CHECK(average_precision({9.0, 8.0, 7.0, 1.0}, {1, 1, 1, 0}) == doctest::Approx(1.0));
}

TEST_CASE("average precision matches a hand-computed interleaving") {
    double ap = average_precision({4.0, 3.0, 2.0, 1.0}, {1, 0, 1, 0});
    CHECK(ap == doctest::Approx((1.0 / 1.0 + 2.0 / 3.0) / 2.0));
}

TEST_CASE("average precision of an inverted ranking is the positive rate tail") {
    double ap = average_precision({1.0, 2.0}, {1, 0});
    CHECK(ap == doctest::Approx(0.5));
}

TEST_CASE("average precision needs a positive label") {
    CHECK_THROWS_AS(average_precision({1.0, 2.0}, {0, 0}), std::invalid_argument);
}
