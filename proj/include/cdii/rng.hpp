#pragma once

#include <cstdint>

namespace cdii {

/// splitmix64; used both as a generator and to derive independent
/// per-stream seeds. Output sequence is fixed by the standard constants,
/// so results are bit-identical across platforms.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53 random bits.
    double uniform01() { return (next() >> 11) * 0x1.0p-53; }

    /// Uniform in [-1, 1].
    double uniform_pm1() { return 2.0 * uniform01() - 1.0; }

  private:
    std::uint64_t state_;
};

/// Derive a child-stream seed from (seed, stream id); streams with distinct
/// ids are statistically independent.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 mix(seed ^ (0xA0761D6478BD642FULL * (stream + 1)));
    mix.next();
    return mix.next();
}

}  // namespace cdii
