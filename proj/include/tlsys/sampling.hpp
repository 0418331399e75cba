#pragma once

// Seeded sampling. Every stream is a std::mt19937_64 and uniforms are built
// from its raw 64-bit output, so datasets are bit-identical across platforms.

#include <cstdint>
#include <random>
#include <string_view>

#include "tlsys/learning.hpp"
#include "tlsys/measures.hpp"

namespace tlsys {

using Rng = std::mt19937_64;

/// Uniform on [0, 1) with 53 random bits.
inline double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Index i with F(i-1) <= u < F(i); falls back to the last positive cell.
std::size_t inverse_cdf(const std::vector<double>& probs, double u);

/// Seed for one role of one named system under a root seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view name, std::string_view role);

/// n draws x ~ P(X), y ~ P(Y|x), one (v, w) uniform pair per example.
Dataset sample_dataset(const DeclaredMeasures& m, std::size_t n, std::uint64_t seed, Origin origin = Origin::unspecified);

/// Fresh dataset for a pack: its own sampler when set, else the declared
/// measures at the pack's sample size. Throws MissingMeasure.
Dataset draw(const SystemPack& pack, std::uint64_t seed);

}  // namespace tlsys
