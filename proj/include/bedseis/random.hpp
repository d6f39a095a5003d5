#pragma once

#include <cstdint>
#include <random>

namespace bedseis {

using Rng = std::mt19937_64;

/// Independent named streams derived from one master seed. Each consumer owns
/// its generator; nothing is shared between components.
enum class Stream : std::uint32_t {
    Bed = 1,
    Grains = 2,
    Injection = 3,
    Dynamics = 4,
    Turbulence = 5,
    Shedding = 6,
};

inline std::uint64_t derive_seed(std::uint64_t master, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(master & 0xffffffffu),
                      static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(stream)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline Rng make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32)};
    return Rng(seq);
}

}  // namespace bedseis
