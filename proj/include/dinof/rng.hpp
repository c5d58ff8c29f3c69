#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace dinof {

// Deterministic random source. Gaussian draws use Box-Muller without caching
// the spare value across calls, so the full generator state is the engine
// state alone and serializes to a plain string (checkpoint requirement).
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform on [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // One standard normal draw (consumes two uniforms, discards the pair's
    // second value).
    double normal() {
        double u1 = 1.0 - uniform();  // (0,1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    // Fills a buffer pairwise (both Box-Muller outputs used), leaving no
    // state behind.
    void fill_normal(double* out, int64_t n) {
        int64_t i = 0;
        for (; i + 1 < n; i += 2) {
            double u1 = 1.0 - uniform();
            double u2 = uniform();
            double r = std::sqrt(-2.0 * std::log(u1));
            double a = 6.283185307179586476925287 * u2;
            out[i] = r * std::cos(a);
            out[i + 1] = r * std::sin(a);
        }
        if (i < n) out[i] = normal();
    }

    uint64_t below(uint64_t n) {  // uniform integer in [0,n)
        return n ? eng_() % n : 0;
    }

    std::string state() const {
        std::ostringstream os;
        os << eng_;
        return os.str();
    }

    void set_state(const std::string& s) {
        std::istringstream is(s);
        is >> eng_;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace dinof
