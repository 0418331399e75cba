#include "tlsys/behavioral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tlsys/parallel.hpp"

namespace tlsys {

std::string_view to_string(Over o) noexcept {
  switch (o) {
    case Over::x: return "X";
    case Over::y: return "Y";
    case Over::xy: return "XY";
    case Over::y_given_x: return "Y|X";
  }
  return "X";
}

Over parse_over(std::string_view s) {
  if (s == "X") return Over::x;
  if (s == "Y") return Over::y;
  if (s == "XY") return Over::xy;
  if (s == "Y|X") return Over::y_given_x;
  fail(ErrorCode::InvalidSpec, "unknown measure target '" + std::string(s) + "'");
}

std::string_view to_string(DivergenceKind k) noexcept {
  switch (k) {
    case DivergenceKind::kl: return "KL";
    case DivergenceKind::hellinger: return "Hellinger";
    case DivergenceKind::tv: return "TV";
    case DivergenceKind::w1: return "W1";
    case DivergenceKind::mmd: return "MMD";
  }
  return "TV";
}

DivergenceKind parse_divergence(std::string_view s) {
  for (auto k : {DivergenceKind::kl, DivergenceKind::hellinger, DivergenceKind::tv, DivergenceKind::w1, DivergenceKind::mmd})
    if (s == to_string(k)) return k;
  fail(ErrorCode::InvalidSpec, "unknown divergence '" + std::string(s) + "'");
}

bool is_metric(DivergenceKind k) noexcept {
  return k == DivergenceKind::hellinger || k == DivergenceKind::tv || k == DivergenceKind::w1;
}

namespace {

constexpr double kEstimateTolerance = 1e-9;

std::vector<double> normalized(const std::vector<double>& counts, double smoothing) {
  const double total =
      std::accumulate(counts.begin(), counts.end(), 0.0) + smoothing * static_cast<double>(counts.size());
  std::vector<double> p(counts.size());
  if (total <= 0.0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return p;
  }
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = (counts[i] + smoothing) / total;
  return p;
}

void require_data(const Dataset& d, double smoothing) {
  if (d.empty()) fail(ErrorCode::EmptyDataset, "cannot estimate a measure from an empty dataset");
  if (!(smoothing >= 0.0)) fail(ErrorCode::InvalidMeasure, "smoothing must be non-negative");
}

}  // namespace

EmpiricalMeasure estimate_measure(const Dataset& d, const FiniteSet& xs, const FiniteSet& ys, Over over,
                                  double smoothing) {
  require_data(d, smoothing);
  if (over == Over::y_given_x) fail(ErrorCode::InvalidSpec, "use estimate_posterior for Y|X");
  const std::size_t ny = ys.size();
  const std::size_t cells = over == Over::x ? xs.size() : over == Over::y ? ny : xs.size() * ny;
  std::vector<double> counts(cells, 0.0);
  for (const auto& e : d.examples) {
    const std::size_t i = over == Over::x ? e.x : over == Over::y ? e.y : e.x * ny + e.y;
    if (i >= cells) fail(ErrorCode::UnknownElement, "example outside the sample space");
    counts[i] += e.weight;
  }
  const FiniteSet support = over == Over::x ? xs : over == Over::y ? ys : product_support(xs, ys);
  return EmpiricalMeasure(support, normalized(counts, smoothing), kEstimateTolerance);
}

ConditionalMeasure estimate_posterior(const Dataset& d, const FiniteSet& xs, const FiniteSet& ys, double smoothing) {
  require_data(d, smoothing);
  std::vector<std::vector<double>> counts(xs.size(), std::vector<double>(ys.size(), 0.0));
  for (const auto& e : d.examples) {
    if (e.x >= xs.size() || e.y >= ys.size()) fail(ErrorCode::UnknownElement, "example outside the sample space");
    counts[e.x][e.y] += e.weight;
  }
  for (auto& row : counts) row = normalized(row, smoothing);
  return ConditionalMeasure(xs, ys, std::move(counts), kEstimateTolerance);
}

DeclaredMeasures estimate_measures(const Dataset& d, const FiniteSet& xs, const FiniteSet& ys, double smoothing) {
  return {estimate_measure(d, xs, ys, Over::x, smoothing), estimate_posterior(d, xs, ys, smoothing)};
}

// ---------------------------------------------------------------------------

std::vector<std::vector<double>> kernel_matrix(const EmpiricalMeasure& p, const KernelSpec& k) {
  const std::size_t n = p.size();
  KernelKind kind = k.kind;
  if (kind == KernelKind::automatic) kind = p.embedding() ? KernelKind::gaussian : KernelKind::exact_match;
  std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
  switch (kind) {
    case KernelKind::automatic:
    case KernelKind::exact_match:
      for (std::size_t i = 0; i < n; ++i) g[i][i] = 1.0;
      return g;
    case KernelKind::matrix:
      if (k.gram.size() != n) fail(ErrorCode::MissingKernel, "Gram matrix does not match the support");
      for (const auto& row : k.gram)
        if (row.size() != n) fail(ErrorCode::MissingKernel, "Gram matrix does not match the support");
      return k.gram;
    case KernelKind::gaussian: break;
  }
  if (!p.embedding()) fail(ErrorCode::MissingKernel, "gaussian kernel needs an embedding of '" + p.support().name() + "'");
  const auto& pts = *p.embedding();
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < pts[i].size(); ++c) s += (pts[i][c] - pts[j][c]) * (pts[i][c] - pts[j][c]);
    return std::sqrt(s);
  };
  double sigma = 0.0;
  if (k.bandwidth) {
    sigma = *k.bandwidth;
  } else {
    std::vector<double> ds;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) ds.push_back(dist(i, j));
    if (!ds.empty()) {
      std::sort(ds.begin(), ds.end());
      const std::size_t m = ds.size();
      sigma = m % 2 ? ds[m / 2] : 0.5 * (ds[m / 2 - 1] + ds[m / 2]);
    }
  }
  if (!(sigma > 0.0)) sigma = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double r = dist(i, j);
      g[i][j] = std::exp(-r * r / (2.0 * sigma * sigma));
    }
  return g;
}

namespace {

std::vector<double> coordinates_for(const EmpiricalMeasure& p, const EmpiricalMeasure& q) {
  if (p.coordinates()) return *p.coordinates();
  if (q.coordinates()) return *q.coordinates();
  std::vector<double> c;
  for (const auto& a : p.support().elements()) {
    if (!a.is_integer()) fail(ErrorCode::MissingOrder, "W1 needs coordinates on '" + p.support().name() + "'");
    c.push_back(static_cast<double>(a.as_integer()));
  }
  return c;
}

double w1(const EmpiricalMeasure& p, const EmpiricalMeasure& q) {
  const auto c = coordinates_for(p, q);
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return c[a] < c[b]; });
  double fp = 0.0, fq = 0.0, total = 0.0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    fp += p[order[k]];
    fq += q[order[k]];
    total += std::abs(fp - fq) * (c[order[k + 1]] - c[order[k]]);
  }
  return total;
}

}  // namespace

double divergence(const EmpiricalMeasure& p, const EmpiricalMeasure& q_in, DivergenceKind kind, const KernelSpec& kernel) {
  const EmpiricalMeasure q = q_in.aligned_to(p.support());
  const std::size_t n = p.size();
  switch (kind) {
    case DivergenceKind::kl: {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        s += p[i] * std::log(p[i] / q[i]);
      }
      return std::max(0.0, s);
    }
    case DivergenceKind::hellinger: {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
        s += d * d;
      }
      return std::min(1.0, std::sqrt(0.5 * s));
    }
    case DivergenceKind::tv: {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::abs(p[i] - q[i]);
      return std::min(1.0, 0.5 * s);
    }
    case DivergenceKind::w1: return w1(p, q);
    case DivergenceKind::mmd: {
      const auto& base = !p.embedding() && q.embedding() ? q : p;
      const auto g = kernel_matrix(base, kernel);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s += (p[i] - q[i]) * g[i][j] * (p[j] - q[j]);
      return std::sqrt(std::max(0.0, s));
    }
  }
  return 0.0;
}

EmpiricalMeasure pushforward(const EmpiricalMeasure& p, const SetMap& m) {
  if (!m.domain.same_element_set(p.support()))
    fail(ErrorCode::SupportMismatch, "map domain differs from the support of the measure");
  const auto q = p.aligned_to(m.domain);
  std::vector<double> out(m.codomain.size(), 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) out[m(i)] += q[i];
  return EmpiricalMeasure(m.codomain, std::move(out), kEstimateTolerance);
}

namespace {

DeclaredMeasures push_declared(const DeclaredMeasures& m, const DataMap& map) {
  const auto& xs = m.posterior.given();
  const auto& ys = m.posterior.outcomes();
  if (!map.x.domain.same_elements(xs) || !map.y.domain.same_elements(ys))
    fail(ErrorCode::SupportMismatch, "alignment maps do not start at the measure's sets");
  const auto px = m.marginal.aligned_to(xs);
  const std::size_t nxl = map.x.codomain.size(), nyl = map.y.codomain.size();
  std::vector<double> marg(nxl, 0.0);
  std::vector<std::vector<double>> joint(nxl, std::vector<double>(nyl, 0.0));
  for (std::size_t x = 0; x < xs.size(); ++x) {
    marg[map.x(x)] += px[x];
    for (std::size_t y = 0; y < ys.size(); ++y) joint[map.x(x)][map.y(y)] += px[x] * m.posterior.prob(x, y);
  }
  for (auto& row : joint) row = normalized(row, 0.0);
  return {EmpiricalMeasure(map.x.codomain, std::move(marg), kEstimateTolerance),
          ConditionalMeasure(map.x.codomain, map.y.codomain, std::move(joint), kEstimateTolerance)};
}

}  // namespace

double transfer_distance(const DeclaredMeasures& source, const DeclaredMeasures& target, Over on, DivergenceKind kind,
                         const Alignment* align, const KernelSpec& kernel) {
  if (align) return transfer_distance(push_declared(source, align->source), push_declared(target, align->target), on, kind, nullptr, kernel);
  switch (on) {
    case Over::x: return divergence(source.marginal, target.marginal, kind, kernel);
    case Over::y:
      return divergence(outcome_marginal(source.marginal, source.posterior),
                        outcome_marginal(target.marginal, target.posterior), kind, kernel);
    case Over::xy:
      return divergence(joint_of(source.marginal, source.posterior), joint_of(target.marginal, target.posterior), kind,
                        kernel);
    case Over::y_given_x: break;
  }
  const auto& xs = target.posterior.given();
  if (!xs.same_element_set(source.posterior.given()))
    fail(ErrorCode::SupportMismatch, "conditional distance needs a shared input set");
  const auto pt = target.marginal.aligned_to(xs);
  double s = 0.0;
  for (std::size_t x = 0; x < xs.size(); ++x) {
    if (pt[x] <= 0.0) continue;
    const auto rs = source.posterior.row(source.posterior.given().index_of(xs[x]));
    s += pt[x] * divergence(rs, target.posterior.row(x), kind, kernel);
  }
  return s;
}

// ---------------------------------------------------------------------------

double complexity_term(std::size_t theta_count, std::size_t n, double eta) {
  if (n == 0) return std::numeric_limits<double>::infinity();
  return std::sqrt((std::log(static_cast<double>(theta_count)) + std::log(1.0 / eta)) / (2.0 * static_cast<double>(n)));
}

namespace {

bool homogeneous(const LearningSystem& a, const LearningSystem& b) {
  return a.x_set().same_element_set(b.x_set()) && a.y_set().same_element_set(b.y_set());
}

}  // namespace

BoundReport bound_check(const TransferSystem& ts, const Dataset& d_s, const Dataset& d_t, const BoundContext& ctx,
                        const BoundOptions& options) {
  if (!homogeneous(ts.source, ts.target))
    fail(ErrorCode::HeterogeneousSetting, "the bound is stated for X_S x Y_S = X_T x Y_T");
  BoundReport r;
  r.eta = options.eta;
  r.delta_kind = options.kind;
  r.delta_source = options.delta_source;

  r.theta_s = ts.knowledge.parameter ? *ts.knowledge.parameter : run_algorithm(d_s, ts.source);
  r.epsilon_s = generalization_error(ts.source, r.theta_s, ctx.source, ctx.source_marginal);

  const auto run = run_transfer(ts, d_t);
  r.theta_tr = run.theta;
  r.epsilon_t = prediction_error(ts.target, run.predictions, ctx.target, ctx.target_marginal);

  if (options.delta_source == DeltaSource::declared) {
    if (!ctx.source_marginal || !ctx.target_marginal)
      fail(ErrorCode::MissingMeasure, "declared transfer distance needs both marginals");
    r.delta_t = divergence(*ctx.source_marginal, *ctx.target_marginal, options.kind, options.kernel);
  } else {
    const auto ps = estimate_measure(d_s, ts.source.x_set(), ts.source.y_set(), Over::x, options.smoothing);
    const auto pt = estimate_measure(d_t, ts.target.x_set(), ts.target.y_set(), Over::x, options.smoothing);
    r.delta_t = divergence(ps, pt, options.kind, options.kernel);
  }

  r.n = d_s.size() + d_t.size();
  r.theta_count = effective_hypotheses(ts).theta().size();
  r.complexity_c = complexity_term(r.theta_count, r.n, options.eta);
  r.holds = r.epsilon_t <= r.rhs();
  return r;
}

BoundReport bound_check(const TransferRecipe& recipe, const SystemPack& source, const SystemPack& target,
                        const BoundOptions& options) {
  const auto ts = make_transfer(recipe, source.system, target.system, source.data);
  BoundContext ctx{source.truth_context(), target.truth_context(), source.marginal(), target.marginal()};
  return bound_check(ts, source.data, target.data, ctx, options);
}

Neighborhood behavioral_transferability(const SystemPack& system, std::span<const SystemPack> universe, Role role,
                                        const BehavioralOptions& options) {
  struct Outcome {
    std::optional<NeighborhoodEntry> entry;
    std::optional<SkippedMember> skipped;
  };
  auto one = [&](std::size_t i) -> Outcome {
    const SystemPack& member = universe[i];
    const SystemPack& src = role == Role::source ? system : member;
    const SystemPack& tgt = role == Role::source ? member : system;
    if (!homogeneous(src.system, tgt.system)) return {std::nullopt, SkippedMember{i, member.name(), "heterogeneous"}};
    NeighborhoodEntry e{i, member.name(), 0.0, 0.0, false};
    try {
      if (options.mode == BehavioralMode::bound) {
        e.value = bound_check(options.recipe, src, tgt, options.bound).rhs();
        e.threshold = options.epsilon_star;
      } else {
        if (!src.measures || !tgt.measures) fail(ErrorCode::MissingMeasure, "no declared measures");
        e.value = transfer_distance(*src.measures, *tgt.measures, Over::x, options.bound.kind, nullptr, options.bound.kernel);
        e.threshold = options.delta_star;
      }
    } catch (const Error& err) {
      switch (err.code()) {
        case ErrorCode::MissingTruth:
        case ErrorCode::MissingMeasure:
        case ErrorCode::EmptyDataset:
        case ErrorCode::MissingSourceArtifact: return {std::nullopt, SkippedMember{i, member.name(), err.what()}};
        default: throw;
      }
    }
    e.member = e.value < e.threshold;
    return {e, std::nullopt};
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
