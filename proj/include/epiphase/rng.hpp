#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "epiphase/errors.hpp"

namespace epiphase {

// splitmix64 step; used only to spread user seeds over the full 64-bit space
// before feeding the mt19937_64 state, and to derive independent sub-streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Deterministic random source.  The engine is mt19937_64, whose output
// sequence is fixed by the standard; the derived draws (uniform doubles,
// bounded integers, normals) are implemented here rather than through
// std::uniform_*_distribution, whose algorithms are implementation-defined
// and would break byte-for-byte reproducibility across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
        engine_.seed(seq);
    }

    // Independent stream for a (seed, stream_id) pair.  Replicate k of a
    // bootstrap uses stream(seed, k), so draws do not depend on how many
    // replicates ran before or whether earlier ones were discarded.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t s = seed;
        std::uint64_t base = splitmix64(s);
        return Rng(base ^ (0xD1B54A32D192ED03ull * (stream_id + 1)));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1), 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).  Multiply-shift reduction; the bias for the
    // n used here (segment lengths, series sizes) is far below 2^-50.
    std::size_t bounded(std::size_t n) {
        if (n == 0) raise(Errc::invalid_argument, "bounded draw from empty range");
        using u128 = unsigned __int128;
        return static_cast<std::size_t>(
            (static_cast<u128>(next_u64()) * static_cast<u128>(n)) >> 64);
    }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform01();  // (0, 1], keeps log() finite
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace epiphase
