#include "tlsys/structural.hpp"

#include <algorithm>
#include <limits>

#include "tlsys/parallel.hpp"

namespace tlsys {

RoughnessReport transfer_roughness(const FiniteSystem& s_s, const FiniteSystem& s_t, const Morphism& m) {
  if (m.x_map.domain_size() != s_s.input_cardinality() || m.y_map.domain_size() != s_s.output_cardinality() ||
      m.x_map.codomain_size != s_t.input_cardinality() || m.y_map.codomain_size != s_t.output_cardinality())
    fail(ErrorCode::IncompatibleMorphism, "morphism does not run between the two systems' input and output objects");
  RoughnessReport r;
  r.morphism = m;
  r.quotient = quotient(s_s, m);
  r.properties = m.properties();
  r.relation_preserving = is_relation_preserving(s_s, s_t, m);
  r.minimal = m.x_map.invertible() && m.y_map.invertible() && is_relation_preserving(s_s, s_t, m, true);
  if (r.quotient.system_size() > 0)
    r.roughness_ratio =
        static_cast<double>(r.quotient.system_classes()) / static_cast<double>(r.quotient.system_size());
  return r;
}

FiniteSystem function_graph(const FiniteSet& xs, const FiniteSet& ys, const std::vector<std::size_t>& f) {
  if (f.size() != xs.size()) fail(ErrorCode::ArityMismatch, "function table does not cover X");
  std::set<Tuple> t;
  for (std::size_t x = 0; x < f.size(); ++x) t.insert({x, f[x]});
  return FiniteSystem({xs, ys}, std::move(t), IoPartition{{0}, {1}});
}

FiniteSystem system_relation(const SystemPack& pack) {
  const auto& xs = pack.system.x_set();
  const auto& ys = pack.system.y_set();
  if (pack.truth) return function_graph(xs, ys, *pack.truth);
  std::set<Tuple> t;
  for (const auto& e : pack.data.examples) t.insert({e.x, e.y});
  return FiniteSystem({xs, ys}, std::move(t), IoPartition{{0}, {1}});
}

namespace {

FiniteSet labels(const std::string& name, const std::string& prefix, std::size_t n) {
  std::vector<Atom> e;
  for (std::size_t i = 0; i < n; ++i) e.emplace_back(prefix + std::to_string(i));
  return FiniteSet(name, std::move(e));
}

// Non-increasing positive sequences summing to n with at most k parts.
void shapes(std::size_t n, std::size_t k, std::size_t largest, std::vector<std::size_t>& cur,
            std::vector<std::vector<std::size_t>>& out) {
  if (n == 0) {
    out.push_back(cur);
    return;
  }
  if (cur.size() == k) return;
  for (std::size_t p = std::min(n, largest); p >= 1; --p) {
    cur.push_back(p);
    shapes(n - p, k, p, cur, out);
    cur.pop_back();
  }
}

std::vector<std::size_t> total_image(const MapTable& m) {
  std::vector<std::size_t> out;
  out.reserve(m.image.size());
  for (const auto& v : m.image) out.push_back(v.value_or(0));
  return out;
}

EnumerationOptions enum_options(const StructureSearchOptions& o) {
  EnumerationOptions e;
  e.cap = o.cap;
  return e;
}

}  // namespace

StructureCandidate canonical_candidate(std::size_t ny, const std::vector<std::size_t>& shape) {
  if (shape.size() > ny) fail(ErrorCode::InvariantViolation, "more fibers than outputs");
  std::vector<std::size_t> g;
  for (std::size_t y = 0; y < shape.size(); ++y) g.insert(g.end(), shape[y], y);
  const std::size_t nx = g.size();
  auto structure = function_graph(labels("X_L", "l", nx), labels("Y_L", "k", ny), g);
  return StructureCandidate{nx, ny, std::move(g), std::move(structure), {}, {}, std::nullopt, std::nullopt};
}

std::vector<std::size_t> fiber_shape(const std::vector<std::size_t>& g, std::size_t ny) {
  std::vector<std::size_t> sizes(ny, 0);
  for (auto y : g) ++sizes.at(y);
  std::sort(sizes.rbegin(), sizes.rend());
  while (!sizes.empty() && sizes.back() == 0) sizes.pop_back();
  return sizes;
}

StructureSearchReport homomorphic_structures(const FiniteSystem& s_s, const FiniteSystem& s_t,
                                             const StructureSearchOptions& options) {
  if (options.size_bound > kMaxLatentCarrier)
    fail(ErrorCode::CapExceeded, "structure search is exhaustive only up to " + std::to_string(kMaxLatentCarrier) +
                                     " latent elements");
  std::vector<StructureCandidate> pool;
  for (std::size_t nx = 1; nx <= options.size_bound; ++nx)
    for (std::size_t ny = 1; ny <= options.size_bound; ++ny) {
      std::vector<std::vector<std::size_t>> all;
      std::vector<std::size_t> cur;
      shapes(nx, ny, nx, cur, all);
      for (const auto& sh : all) pool.push_back(canonical_candidate(ny, sh));
    }
  const auto onto = MorphismRequirement::onto();
  const auto eo = enum_options(options);
  auto found = parallel_map(pool.size(), [&](std::size_t i) -> std::optional<StructureCandidate> {
    auto c = pool[i];
    auto ms = find_morphism(s_s, c.structure, onto, eo);
    if (!ms) return std::nullopt;
    auto mt = find_morphism(s_t, c.structure, onto, eo);
    if (!mt) return std::nullopt;
    c.source_witness = std::move(*ms);
    c.target_witness = std::move(*mt);
    return c;
  });
  StructureSearchReport r;
  r.size_bound = options.size_bound;
  for (auto& c : found)
    if (c) r.candidates.push_back(std::move(*c));
  return r;
}

StructureSearchReport valid_structures(StructureSearchReport report, const FiniteSystem& s_t, const FiniteSet& y_t,
                                       const StructureSearchOptions& options) {
  if (y_t.size() != s_t.output_cardinality())
    fail(ErrorCode::IncompatibleCarriers, "Y_T does not match the target system's output object");
  const auto pairs = s_t.io_pairs();
  const auto onto = MorphismRequirement::onto();
  const auto eo = enum_options(options);
  auto checked = parallel_map(report.candidates.size(), [&](std::size_t i) -> std::optional<StructureCandidate> {
    auto c = report.candidates[i];
    bool ok = false;
    for_each_morphism(s_t, c.structure, onto, eo, [&](const Morphism& m) {
      std::vector<std::optional<std::size_t>> my(c.ny);
      for (const auto& [x, y] : pairs) {
        auto& slot = my[c.g[*m.x_map.image[x]]];
        if (slot && *slot != y) return true;
        slot = y;
      }
      std::vector<std::size_t> out(c.ny);
      for (std::size_t k = 0; k < c.ny; ++k) out[k] = my[k].value_or(0);
      c.target_witness = m;
      c.output_map = std::move(out);
      ok = true;
      return false;
    });
    if (!ok) return std::nullopt;
    return c;
  });
  report.valid.clear();
  for (auto& c : checked)
    if (c) report.valid.push_back(std::move(*c));
  return report;
}

StructureSearchReport useful_structures(StructureSearchReport report, const StructureRunner& runner, double epsilon_star) {
  auto errors = parallel_map(report.valid.size(), [&](std::size_t i) { return runner(report.valid[i]); });
  report.useful.clear();
  for (std::size_t i = 0; i < report.valid.size(); ++i) {
    report.valid[i].epsilon = errors[i];
    if (errors[i] <= epsilon_star) report.useful.push_back(report.valid[i]);
  }
  std::stable_sort(report.useful.begin(), report.useful.end(),
                   [](const auto& a, const auto& b) { return *a.epsilon < *b.epsilon; });
  return report;
}

LearningSystem latent_system(const StructureCandidate& c) {
  return LearningSystem("latent", HypothesisClass::all_functions(c.structure.component(0), c.structure.component(1), "g"));
}

FeatureRepSpec latent_spec(const StructureCandidate& c, const LearningSystem& source, const LearningSystem& target) {
  if (!c.output_map) fail(ErrorCode::InvariantViolation, "candidate has no output map; run valid_structures first");
  const auto& xl = c.structure.component(0);
  const auto& yl = c.structure.component(1);
  SetMap xt{target.x_set(), xl, total_image(c.target_witness.x_map)};
  return FeatureRepSpec{latent_system(c),
                        DataMap{xt, SetMap{target.y_set(), yl, total_image(c.target_witness.y_map)}},
                        DataMap{SetMap{source.x_set(), xl, total_image(c.source_witness.x_map)},
                                SetMap{source.y_set(), yl, total_image(c.source_witness.y_map)}},
                        xt,
                        SetMap{yl, target.y_set(), *c.output_map}};
}

StructureRunner latent_transfer_runner(const SystemPack& source, const SystemPack& target) {
  return [source, target](const StructureCandidate& c) {
    TransferRecipe recipe;
    recipe.approach = Approach::feature_representation;
    recipe.latent = latent_spec(c, source.system, target.system);
    const auto ts = make_transfer(recipe, source.system, target.system, source.data);
    const auto run = run_transfer(ts, target.data);
    return prediction_error(target.system, run.predictions, target.truth_context(), target.marginal());
  };
}

StructureSearchReport structure_search(const SystemPack& source, const SystemPack& target, double epsilon_star,
                                       const StructureSearchOptions& options) {
  return structure_search(source, target, epsilon_star, latent_transfer_runner(source, target), options);
}

StructureSearchReport structure_search(const SystemPack& source, const SystemPack& target, double epsilon_star,
                                       const StructureRunner& runner, const StructureSearchOptions& options) {
  const auto s_s = system_relation(source);
  const auto s_t = system_relation(target);
  auto r = homomorphic_structures(s_s, s_t, options);
  r = valid_structures(std::move(r), s_t, target.system.y_set(), options);
  return useful_structures(std::move(r), runner, epsilon_star);
}

Neighborhood structural_transferability(const SystemPack& system, std::span<const SystemPack> universe, Role role,
                                        const StructuralOptions& options) {
  struct Outcome {
    std::optional<NeighborhoodEntry> entry;
    std::optional<SkippedMember> skipped;
  };
  auto one = [&](std::size_t i) -> Outcome {
    const SystemPack& member = universe[i];
    const SystemPack& src = role == Role::source ? system : member;
    const SystemPack& tgt = role == Role::source ? member : system;
    try {
      auto runner = options.runner ? options.runner(src, tgt) : latent_transfer_runner(src, tgt);
      const auto r = structure_search(src, tgt, options.epsilon_star, runner, options.search);
      NeighborhoodEntry e{i, member.name(), std::numeric_limits<double>::infinity(), options.epsilon_star, false};
      if (!r.useful.empty()) {
        e.value = *r.useful.front().epsilon;
        e.member = true;
      }
      return {e, std::nullopt};
    } catch (const Error& err) {
      switch (err.code()) {
        case ErrorCode::MissingTruth:
        case ErrorCode::EmptyDataset:
        case ErrorCode::MissingSourceArtifact: return {std::nullopt, SkippedMember{i, member.name(), err.what()}};
        default: throw;
      }
    }
  };
  Neighborhood out;
  out.role = role;
  for (auto& o : parallel_map(universe.size(), one)) {
    if (o.entry) out.entries.push_back(std::move(*o.entry));
    if (o.skipped) out.skipped.push_back(std::move(*o.skipped));
  }
  return out;
}

}  // namespace tlsys
