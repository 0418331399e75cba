#include "tlsys/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tlsys/parallel.hpp"
#include "tlsys/sampling.hpp"

namespace tlsys {

std::string_view to_string(TransferabilityMode m) noexcept {
  switch (m) {
    case TransferabilityMode::empirical: return "empirical";
    case TransferabilityMode::structural: return "structural";
    case TransferabilityMode::behavioral: return "behavioral";
  }
  return "empirical";
}

TransferabilityMode parse_transferability_mode(std::string_view s) {
  for (auto m : {TransferabilityMode::empirical, TransferabilityMode::structural, TransferabilityMode::behavioral})
    if (s == to_string(m)) return m;
  fail(ErrorCode::InvalidSpec, "unknown transferability mode '" + std::string(s) + "'");
}

std::pair<Dataset, Dataset> holdout_split(const Dataset& d, std::uint64_t seed) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  // Fisher-Yates on raw draws; std::shuffle's output is library-specific.
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  Dataset train, held;
  train.tag = d.tag + ":train";
  held.tag = d.tag + ":holdout";
  const std::size_t half = d.size() / 2;
  for (std::size_t k = 0; k < order.size(); ++k) (k < half ? train : held).examples.push_back(d.examples[order[k]]);
  return {train, held};
}

std::pair<Dataset, Dataset> run_datasets(const SystemPack& source, const SystemPack& target,
                                         const NegativeTransferOptions& options, std::size_t s) {
  if (options.seeds == 0) return {source.data, target.data};
  const std::uint64_t root = options.root_seed + s;
  return {draw(source, derive_seed(root, source.name(), "source")), draw(target, derive_seed(root, target.name(), "target"))};
}

TransferOutcome detect_negative_transfer(const SystemPack& source, const SystemPack& target,
                                         const TransferRecipe& recipe, const NegativeTransferOptions& options) {
  TransferOutcome out;
  out.root_seed = options.root_seed;
  out.mode = target.truth ? EvaluationMode::truth_table : EvaluationMode::holdout;
  const std::size_t count = std::max<std::size_t>(1, options.seeds);
  out.runs = parallel_map(count, [&](std::size_t s) {
    auto [d_s, d_t] = run_datasets(source, target, options, s);
    SeedRun r;
    r.seed = options.root_seed + s;
    std::optional<EvaluationContext> ctx;
    if (target.truth) {
      ctx = target.truth_context();
    } else {
      auto [train, held] = holdout_split(d_t, derive_seed(r.seed, target.name(), "holdout"));
      d_t = std::move(train);
      ctx = EvaluationContext::holdout(std::move(held));
    }
    r.n_source = d_s.size();
    r.n_target = d_t.size();
    const auto ts = make_transfer(recipe, source.system, target.system, d_s);
    const auto run = run_transfer(ts, d_t);
    r.theta_with = run.theta;
    r.epsilon_with = prediction_error(target.system, run.predictions, *ctx, target.marginal());
    r.theta_without = run_algorithm(d_t, target.system);
    r.epsilon_without = generalization_error(target.system, r.theta_without, *ctx, target.marginal());
    r.negative = r.epsilon_without < r.epsilon_with;
    return r;
  });
  for (const auto& r : out.runs) {
    out.epsilon_with += r.epsilon_with;
    out.epsilon_without += r.epsilon_without;
  }
  out.epsilon_with /= static_cast<double>(count);
  out.epsilon_without /= static_cast<double>(count);
  out.margin = out.epsilon_with - out.epsilon_without;
  out.negative = out.epsilon_without < out.epsilon_with;
  return out;
}

std::vector<std::size_t> behavior_signatures(std::span<const SystemPack> universe, double tau) {
  std::vector<std::size_t> cls(universe.size());
  std::vector<std::size_t> reps;
  std::vector<std::optional<EmpiricalMeasure>> joints;
  for (const auto& p : universe)
    joints.push_back(p.measures ? std::optional(joint_of(p.measures->marginal, p.measures->posterior)) : std::nullopt);
  for (std::size_t i = 0; i < universe.size(); ++i) {
    std::optional<std::size_t> found;
    if (joints[i])
      for (std::size_t c = 0; c < reps.size() && !found; ++c) {
        const auto& r = joints[reps[c]];
        if (!r || !r->support().same_element_set(joints[i]->support())) continue;
        if (divergence(*joints[i], *r, DivergenceKind::tv) <= tau) found = c;
      }
    if (!found) {
      found = reps.size();
      reps.push_back(i);
    }
    cls[i] = *found;
  }
  return cls;
}

namespace {

bool homogeneous(const SystemPack& a, const SystemPack& b) {
  return a.system.x_set().same_element_set(b.system.x_set()) && a.system.y_set().same_element_set(b.system.y_set());
}

Neighborhood empirical_neighborhood(const SystemPack& system, std::span<const SystemPack> universe, Role role,
                                    const TransferabilityOptions& o) {
  struct Outcome {
    std::optional<NeighborhoodEntry> entry;
    std::optional<SkippedMember> skipped;
  };
  auto one = [&](std::size_t i) -> Outcome {
    const SystemPack& member = universe[i];
    const SystemPack& src = role == Role::source ? system : member;
    const SystemPack& tgt = role == Role::source ? member : system;
    if (!homogeneous(src, tgt) && o.recipe.approach != Approach::feature_representation)
      return {std::nullopt, SkippedMember{i, member.name(), "heterogeneous"}};
    try {
      const auto r = detect_negative_transfer(src, tgt, o.recipe, o.runs);
      NeighborhoodEntry e{i, member.name(), r.epsilon_with,
                          o.threshold == ThresholdKind::fixed ? o.epsilon_star : r.epsilon_without, false};
      e.member = e.value <= e.threshold;
      return {e, std::nullopt};
    } catch (const Error& err) {
      switch (err.code()) {
        case ErrorCode::EmptyDataset:
        case ErrorCode::MissingMeasure:
        case ErrorCode::MissingSourceArtifact:
        case ErrorCode::IncompatibleSupport:
        case ErrorCode::InvariantViolation: return {std::nullopt, SkippedMember{i, member.name(), err.what()}};
        default: throw;
      }
    }
  };
  Neighborhood out;
  out.role = role;
  for (auto& r : parallel_map(universe.size(), one)) {
    if (r.entry) out.entries.push_back(std::move(*r.entry));
    if (r.skipped) out.skipped.push_back(std::move(*r.skipped));
  }
  return out;
}

}  // namespace

NeighborhoodReport transferability(const SystemPack& system, std::span<const SystemPack> universe, Role role,
                                   const TransferabilityOptions& options) {
  NeighborhoodReport rep;
  rep.mode = options.mode;
  rep.threshold = options.threshold;
  rep.epsilon_star = options.epsilon_star;
  rep.equivalence = options.equivalence;
  rep.tau = options.tau;
  rep.universe_size = universe.size();
  switch (options.mode) {
    case TransferabilityMode::empirical: rep.neighborhood = empirical_neighborhood(system, universe, role, options); break;
    case TransferabilityMode::structural: {
      auto o = options.structural;
      o.epsilon_star = options.epsilon_star;
      rep.neighborhood = structural_transferability(system, universe, role, o);
      break;
    }
    case TransferabilityMode::behavioral: {
      auto o = options.behavioral;
      o.epsilon_star = options.epsilon_star;
      rep.neighborhood = behavioral_transferability(system, universe, role, o);
      break;
    }
  }
  if (options.equivalence == EquivalenceMode::raw) {
    rep.cardinality = rep.neighborhood.cardinality();
    return rep;
  }
  const auto cls = behavior_signatures(universe, options.tau);
  std::set<std::size_t> distinct;
  for (const auto& e : rep.neighborhood.entries) {
    rep.signature_class.push_back(cls[e.index]);
    if (e.member) distinct.insert(cls[e.index]);
  }
  rep.cardinality = distinct.size();
  return rep;
}

GeneralistReport is_generalist(const SystemPack& system, std::span<const SystemPack> universe, std::size_t n,
                               std::size_t t, const GeneralistOptions& options) {
  GeneralistReport rep;
  rep.n = n;
  rep.t = t;
  struct Outcome {
    std::optional<GeneralistEvidence> hit;
    std::optional<SkippedMember> skipped;
  };
  auto one = [&](std::size_t i) -> Outcome {
    const SystemPack& member = universe[i];
    if (!homogeneous(system, member) && options.recipe.approach != Approach::feature_representation)
      return {std::nullopt, SkippedMember{i, member.name(), "heterogeneous"}};
    if (!member.truth) return {std::nullopt, SkippedMember{i, member.name(), "no truth table"}};
    std::optional<TransferSystem> ts;
    try {
      ts = make_transfer(options.recipe, system.system, member.system, system.data);
    } catch (const Error& err) {
      return {std::nullopt, SkippedMember{i, member.name(), err.what()}};
    }
    const auto ctx = member.truth_context();
    const std::size_t top = std::min(n, member.data.size());
    for (std::size_t m = 0; m <= top; ++m) {
      try {
        const auto run = run_transfer(*ts, member.data.prefix(m));
        const double eps = prediction_error(member.system, run.predictions, ctx, member.marginal());
        if (eps < options.epsilon_star) return {GeneralistEvidence{i, member.name(), m, eps}, std::nullopt};
      } catch (const Error& err) {
        if (err.code() != ErrorCode::EmptyDataset) throw;
      }
    }
    return {};
  };
  for (auto& r : parallel_map(universe.size(), one)) {
    if (r.hit) rep.qualifying.push_back(std::move(*r.hit));
    if (r.skipped) rep.skipped.push_back(std::move(*r.skipped));
  }
  rep.generalist = rep.qualifying.size() >= t;
  return rep;
}

}  // namespace tlsys
