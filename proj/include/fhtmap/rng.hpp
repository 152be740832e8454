#pragma once

#include <cstdint>

namespace fhtmap {

/// Deterministic splitmix64 stream; identical output on every platform,
/// unlike the std:: distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

    /// Derive an independent child stream.
    Rng fork(std::uint64_t tag) {
        Rng mixer(state_ ^ (0xd1342543de82ef95ull * (tag + 1)));
        return Rng(mixer.next_u64());
    }

private:
    std::uint64_t state_;
};

}  // namespace fhtmap
