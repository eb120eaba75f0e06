#pragma once
#include <cstdint>
#include <cmath>

namespace rcv {

// splitmix64: tiny, fast, and stable across platforms. We roll our own
// instead of <random> because std::uniform_real_distribution's output is
// implementation-defined and the whole toolkit promises bit-reproducible
// results for a given seed.
inline uint64_t splitmix64(uint64_t& s) {
    uint64_t z = (s += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : s_(seed) {}

    uint64_t next_u64() { return splitmix64(s_); }

    // uniform in [0,1) with 53 random bits
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller (two uniforms per pair, cached)
    double normal() {
        if (have_spare_) { have_spare_ = false; return spare_; }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double m = std::sqrt(-2.0 * std::log(u1));
        spare_ = m * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return m * std::cos(2.0 * M_PI * u2);
    }

private:
    uint64_t s_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace rcv
