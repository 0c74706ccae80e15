#pragma once

#include <cstdint>
#include <cmath>
#include <limits>

namespace arlab {

/// Counter-based 64-bit stream (splitmix64). Each draw advances the counter
/// by a fixed odd constant and mixes it, so the i-th output is a pure
/// function of (seed, i). Streams for run r of a batch are derived with
/// derive(master, r) and never overlap in practice.
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1], safe as a log argument.
    double uniform01_open0() { return 1.0 - uniform01(); }

    double exponential() { return -std::log(uniform01_open0()); }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Index in [0, n) by inverse CDF over probability weights summing to ~1.
    /// Rounding leftovers fall on the last positive entry.
    template <class Vec>
    int categorical(const Vec& probs, int n) {
        double u = uniform01();
        double acc = 0.0;
        int last_pos = 0;
        for (int i = 0; i < n; ++i) {
            if (probs[i] > 0.0) last_pos = i;
            acc += probs[i];
            if (u < acc) return i;
        }
        return last_pos;
    }

    /// Stream seed for substream `index` of master seed `seed`.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
        Rng h(seed ^ (0xd1342543de82ef95ull * (index + 1)));
        return h();
    }

  private:
    std::uint64_t state_;
};

} // namespace arlab
