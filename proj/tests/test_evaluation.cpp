#include <doctest.h>

#include "emca/evaluation.hpp"
#include "emca/rng.hpp"

using namespace emca;

TEST_CASE("time to threshold is the first 1-based hit") {
    std::vector<double> curve{0.2, 0.5, 0.5, 0.7};
    CHECK(time_to_threshold(curve, 0.1) == 1);
    CHECK(time_to_threshold(curve, 0.25) == 2);
    CHECK(time_to_threshold(curve, 0.5) == 2);
    CHECK(time_to_threshold(curve, 0.6) == 4);
    CHECK(!time_to_threshold(curve, 0.9).has_value());
}

TEST_CASE("wade worked example") {
    CHECK(wade({0.2, 0.5, 0.5, 0.7}, {0.25, 0.5, 0.75, 1.0}) == doctest::Approx(0.15));
}

TEST_CASE("wade extremes") {
    std::vector<double> ones(10, 1.0);
    CHECK(wade(ones) == doctest::Approx(1.0));
    std::vector<double> zeros(10, 0.0);
    CHECK(wade(zeros) == doctest::Approx(0.0));
    // immediate perfection on a single-point curve
    CHECK(wade({1.0}) == doctest::Approx(1.0));
}

TEST_CASE("default checkpoints are the twenty multiples of 0.05") {
    auto cp = default_checkpoints();
    REQUIRE(cp.size() == 20);
    CHECK(cp.front() == doctest::Approx(0.05));
    CHECK(cp.back() == doctest::Approx(1.0));
}

TEST_CASE("wade is bounded and respects pointwise dominance") {
    Rng rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        size_t n = 1 + rng.next_below(30);
        std::vector<double> a(n), b(n);
        for (size_t i = 0; i < n; ++i) {
            a[i] = rng.next_double();
            b[i] = a[i] + (1.0 - a[i]) * rng.next_double();  // b dominates a
        }
        double wa = wade(a), wb = wade(b);
        CHECK(wa >= 0.0);
        CHECK(wa <= 1.0);
        CHECK(wb >= wa);
    }
}

TEST_CASE("wade input validation") {
    CHECK_THROWS(wade({}));
    CHECK_THROWS(wade({0.5, 1.2}));
    CHECK_THROWS(wade({0.5, -0.1}));
    CHECK_THROWS(wade({0.5}, {}));
    CHECK_THROWS(wade({0.5}, {0.0, 0.5}));
    CHECK_THROWS(wade({0.5}, {0.5, 1.1}));
}
