#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

namespace emca {

// Counter-based 64-bit generator (splitmix64). Each draw hashes an
// incrementing Weyl counter, so the sequence is identical on every platform
// and independent streams can be derived cheaply from a master seed.
class Rng {
public:
    explicit Rng(uint64_t seed) : counter_(seed) {}

    static uint64_t mix(uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Stream `tag` of a master seed. Streams with different tags behave as
    // independent generators.
    static Rng stream(uint64_t master, uint64_t tag) {
        return Rng(mix(master + mix(tag)));
    }

    uint64_t next_u64() {
        counter_ += 0x9e3779b97f4a7c15ull;
        uint64_t z = counter_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n), bias-free
    uint64_t next_below(uint64_t n) {
        assert(n > 0);
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    double normal() {
        double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Marsaglia-Tsang; alpha < 1 handled with the usual boost step.
    double gamma(double alpha) {
        assert(alpha > 0.0);
        if (alpha < 1.0) {
            double u = next_double();
            while (u <= 0.0) u = next_double();
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        double d = alpha - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = next_double();
            double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            T tmp = v[i - 1];
            v[i - 1] = v[j];
            v[j] = tmp;
        }
    }

    // m distinct values from [0, n), in random order
    std::vector<size_t> sample_distinct(size_t n, size_t m) {
        assert(m <= n);
        std::vector<size_t> pool(n);
        for (size_t i = 0; i < n; ++i) pool[i] = i;
        for (size_t i = 0; i < m; ++i) {
            size_t j = i + static_cast<size_t>(next_below(n - i));
            size_t tmp = pool[i];
            pool[i] = pool[j];
            pool[j] = tmp;
        }
        pool.resize(m);
        return pool;
    }

private:
    uint64_t counter_;
};

}  // namespace emca
