#ifndef FREQCAST_RNG_HPP
#define FREQCAST_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace freqcast {

/// Seeded random source with a replayable (seed, counter) state.
///
/// All randomness in the toolkit flows through this class so that a run is
/// fully determined by its seed. The raw 64-bit stream comes from
/// std::mt19937_64, whose output sequence is pinned by the standard; the
/// uniform/normal transforms below are implemented here rather than with
/// std::*_distribution, which is allowed to differ across standard libraries.
class RngState {
public:
    explicit RngState(std::uint64_t seed) : seed_(seed), counter_(0), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64() {
        ++counter_;
        return engine_();
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller. Consumes exactly two raw draws.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    /// Integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    /// Deterministic Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Restore a state captured as (seed, counter) by replaying the stream.
    static RngState restore(std::uint64_t seed, std::uint64_t counter) {
        RngState r(seed);
        for (std::uint64_t i = 0; i < counter; ++i) r.next_u64();
        return r;
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
    std::mt19937_64 engine_;
};

} // namespace freqcast

#endif
