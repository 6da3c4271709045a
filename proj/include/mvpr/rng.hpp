#pragma once

#include <cstdint>

#include "mvpr/geometry.hpp"

namespace mvpr {

// Portable deterministic PRNG: xoshiro256** 1.0 (Blackman & Vigna, 2018),
// state seeded with four consecutive outputs of splitmix64. A port in any
// language that implements these two public-domain algorithms reproduces the
// streams exactly:
//
//   splitmix64(x): x += 0x9E3779B97F4A7C15;
//                  z = x; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//                  z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//                  return z ^ (z >> 31)
//
//   xoshiro256** next(): result = rotl(s1 * 5, 7) * 9
//                        t = s1 << 17; s2 ^= s0; s3 ^= s1; s1 ^= s2;
//                        s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45)
//
// uniform() maps the top 53 bits to [0, 1): (next() >> 11) * 2^-53.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    double uniform();                      // [0, 1)
    double uniform(double lo, double hi);  // [lo, hi)

    // Uniform direction on the unit sphere (2 draws: z, azimuth).
    Vec3 unit_vector();

    // Uniform rotation via Shoemake's subgroup algorithm (3 draws).
    Rotation rotation();

private:
    std::uint64_t s_[4];
};

// One splitmix64 scrambling step; used to derive independent child seeds
// (e.g. per benchmark trial) from a base seed and an index.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace mvpr
