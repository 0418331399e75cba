#include "tlsys/sampling.hpp"

namespace tlsys {

std::size_t inverse_cdf(const std::vector<double>& probs, double u) {
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last = i;
    acc += probs[i];
    if (u < acc) return i;
  }
  return last;
}

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view name, std::string_view role) {
  return splitmix(splitmix(root) ^ fnv1a(name) ^ splitmix(fnv1a(role)));
}

Dataset sample_dataset(const DeclaredMeasures& m, std::size_t n, std::uint64_t seed, Origin origin) {
  Rng rng(seed);
  const auto& xs = m.posterior.given();
  const auto marginal = m.marginal.aligned_to(xs);
  Dataset d;
  d.examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = unit(rng);
    const double w = unit(rng);
    const auto x = inverse_cdf(marginal.probs(), v);
    d.examples.push_back({x, inverse_cdf(m.posterior.rows()[x], w), origin, 1.0});
  }
  return d;
}

Dataset draw(const SystemPack& pack, std::uint64_t seed) {
  if (pack.sampler) return pack.sampler(seed);
  if (!pack.measures) fail(ErrorCode::MissingMeasure, "system '" + pack.name() + "' has no measures to sample from");
  return sample_dataset(*pack.measures, pack.sample_size, seed);
}

}  // namespace tlsys
