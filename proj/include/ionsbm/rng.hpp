#pragma once

#include <cstdint>
#include <random>

namespace ionsbm {

// Deterministic stream of doubles derived from (seed, stream_id). Every trial of an
// ensemble owns stream_id = trial index, so results never depend on scheduling order
// and rerunning with the same seed reproduces the run byte for byte. mt19937_64 output
// is fixed by the standard; uniform53() avoids std::uniform_real_distribution, whose
// draw sequence is implementation defined.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t stream_id) {
        std::seed_seq seq{
            static_cast<std::uint32_t>(seed & 0xffffffffu),
            static_cast<std::uint32_t>(seed >> 32),
            static_cast<std::uint32_t>(stream_id & 0xffffffffu),
            static_cast<std::uint32_t>(stream_id >> 32),
        };
        engine_.seed(seq);
    }

    // Uniform on (0, 1]: 53 random bits, then shifted away from zero so log() is safe.
    double uniform53() {
        const std::uint64_t bits = engine_() >> 11;
        return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
    }

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

}  // namespace ionsbm
