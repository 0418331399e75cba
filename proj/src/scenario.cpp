#include "tlsys/scenario.hpp"

#include <cmath>

#include "tlsys/sampling.hpp"

namespace tlsys {

std::string_view to_string(TruthFamily f) noexcept { return f == TruthFamily::random ? "random" : "modular"; }

std::string_view to_string(ScenarioEdit e) noexcept {
  switch (e) {
    case ScenarioEdit::none: return "none";
    case ScenarioEdit::drop_input: return "drop_input";
    case ScenarioEdit::truncate_output: return "truncate_output";
  }
  return "none";
}

std::string_view to_string(HypothesisFamily h) noexcept {
  return h == HypothesisFamily::all_functions ? "all_functions" : "random_subset";
}

TruthFamily parse_truth_family(std::string_view s) {
  if (s == "random") return TruthFamily::random;
  if (s == "modular") return TruthFamily::modular;
  fail(ErrorCode::InvalidSpec, "unknown truth family '" + std::string(s) + "'");
}

ScenarioEdit parse_edit(std::string_view s) {
  for (auto e : {ScenarioEdit::none, ScenarioEdit::drop_input, ScenarioEdit::truncate_output})
    if (s == to_string(e)) return e;
  fail(ErrorCode::InvalidSpec, "unknown structural edit '" + std::string(s) + "'");
}

HypothesisFamily parse_hypothesis_family(std::string_view s) {
  if (s == "all_functions") return HypothesisFamily::all_functions;
  if (s == "random_subset") return HypothesisFamily::random_subset;
  fail(ErrorCode::InvalidSpec, "unknown hypothesis family '" + std::string(s) + "'");
}

namespace {

bool unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

std::size_t grid_size(std::size_t a, std::size_t k) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < k; ++i) {
    n *= a;
    if (n > 4096) fail(ErrorCode::InvalidSpec, "grid larger than 4096 inputs");
  }
  return n;
}

std::vector<std::size_t> digits(std::size_t x, std::size_t a, std::size_t k) {
  std::vector<std::size_t> d(k);
  for (std::size_t i = k; i-- > 0;) {
    d[i] = x % a;
    x /= a;
  }
  return d;
}

std::vector<double> base_marginal(std::size_t n, double leak) {
  std::vector<double> p(n);
  if (n == 1) return {1.0};
  const std::size_t head = (n + 1) / 2, tail = n - head;
  for (std::size_t i = 0; i < n; ++i)
    p[i] = i < head ? (1.0 - leak) / static_cast<double>(head) : leak / static_cast<double>(tail);
  return p;
}

std::vector<std::vector<double>> noisy_posterior(const std::vector<std::size_t>& f, std::size_t labels, double noise) {
  std::vector<std::vector<double>> rows(f.size(), std::vector<double>(labels, noise / static_cast<double>(labels)));
  for (std::size_t x = 0; x < f.size(); ++x) rows[x][f[x]] += 1.0 - noise;
  return rows;
}

std::vector<std::vector<double>> flipped(const std::vector<std::vector<double>>& rows, double beta) {
  auto out = rows;
  for (std::size_t x = 0; x < rows.size(); ++x) {
    const std::size_t L = rows[x].size();
    for (std::size_t y = 0; y < L; ++y) out[x][y] = (1.0 - beta) * rows[x][y] + beta * rows[x][(y + L - 1) % L];
  }
  return out;
}

HypothesisClass hypotheses_for(const ScenarioSpec& spec, const FiniteSet& xs, const FiniteSet& ys, const std::string& who) {
  if (spec.hypotheses == HypothesisFamily::all_functions) return HypothesisClass::all_functions(xs, ys);
  Rng rng(derive_seed(spec.seed, who, "hypotheses"));
  std::vector<Atom> names;
  std::vector<std::size_t> table;
  for (std::size_t t = 0; t < spec.hypothesis_count; ++t) {
    names.emplace_back("h" + std::to_string(t));
    for (std::size_t x = 0; x < xs.size(); ++x) table.push_back(rng() % ys.size());
  }
  return HypothesisClass(FiniteSet("Theta", names), xs, ys, std::move(table));
}

double tv(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

SystemPack make_pack(const ScenarioSpec& spec, const std::string& name, const FiniteSet& xs, const FiniteSet& ys,
                     std::vector<double> px, std::vector<std::vector<double>> rows, std::vector<std::size_t> truth,
                     std::size_t n, std::string_view role) {
  DeclaredMeasures m{EmpiricalMeasure(xs, std::move(px), 1e-9), ConditionalMeasure(xs, ys, std::move(rows), 1e-9)};
  SystemPack p{LearningSystem(name, hypotheses_for(spec, xs, ys, name)), m, std::move(truth), {}, n, {}};
  p.data = sample_dataset(m, n, derive_seed(spec.seed, name, role));
  p.data.tag = name;
  return p;
}

}  // namespace

void validate(const ScenarioSpec& s) {
  if (s.alphabet < 1 || s.arity < 1) fail(ErrorCode::InvalidSpec, "grid needs at least one symbol and one component");
  if (s.labels < 1) fail(ErrorCode::InvalidSpec, "at least one label");
  if (!unit_interval(s.alpha) || !unit_interval(s.beta)) fail(ErrorCode::InvalidSpec, "alpha and beta must lie in [0,1]");
  if (!unit_interval(s.leak) || !unit_interval(s.label_noise))
    fail(ErrorCode::InvalidSpec, "leak and label_noise must lie in [0,1]");
  (void)grid_size(s.alphabet, s.arity);
  if (s.edit == ScenarioEdit::drop_input && (s.arity < 2 || s.edit_arg >= s.arity))
    fail(ErrorCode::InvalidSpec, "drop_input needs a component index below the arity and arity >= 2");
  if (s.edit == ScenarioEdit::truncate_output && (s.edit_arg < 1 || s.edit_arg >= s.labels))
    fail(ErrorCode::InvalidSpec, "truncate_output keeps between 1 and labels-1 labels");
  if (s.hypotheses == HypothesisFamily::random_subset && s.hypothesis_count < 1)
    fail(ErrorCode::InvalidSpec, "random_subset needs at least one hypothesis");
  if (s.source_name == s.target_name) fail(ErrorCode::InvalidSpec, "source and target need distinct names");
}

FiniteSet grid_inputs(std::size_t alphabet, std::size_t arity, const std::string& name) {
  const std::size_t n = grid_size(alphabet, arity);
  const std::size_t width = alphabet > 10 ? 2 : 1;
  std::vector<Atom> e;
  for (std::size_t x = 0; x < n; ++x) {
    std::string s = "x";
    for (auto d : digits(x, alphabet, arity)) {
      auto t = std::to_string(d);
      s += std::string(width - t.size(), '0') + t;
    }
    e.emplace_back(std::move(s));
  }
  return FiniteSet(name, std::move(e));
}

ScenarioPair generate_pair(const ScenarioSpec& spec) {
  validate(spec);
  const std::size_t a = spec.alphabet, k = spec.arity, L = spec.labels;
  const auto xs = grid_inputs(a, k);
  const auto ys = integer_range("Y", L);
  const std::size_t n = xs.size();

  // Truth over the components the target keeps.
  const bool drop = spec.edit == ScenarioEdit::drop_input;
  auto kept = [&](std::size_t x) {
    auto d = digits(x, a, k);
    if (drop) d.erase(d.begin() + static_cast<std::ptrdiff_t>(spec.edit_arg));
    return d;
  };
  const std::size_t nt = drop ? n / a : n;
  std::vector<std::size_t> f_t(nt);
  Rng rng(derive_seed(spec.seed, "truth", "truth"));
  for (std::size_t x = 0; x < nt; ++x) {
    if (spec.truth == TruthFamily::random) {
      f_t[x] = rng() % L;
    } else {
      std::size_t s = 0;
      for (auto d : digits(x, a, drop ? k - 1 : k)) s += d;
      f_t[x] = s % L;
    }
  }
  auto project = [&](std::size_t x) {
    std::size_t v = 0;
    for (auto d : kept(x)) v = v * a + d;
    return v;
  };
  std::vector<std::size_t> f_s(n);
  for (std::size_t x = 0; x < n; ++x) f_s[x] = f_t[drop ? project(x) : x];

  const auto base = base_marginal(n, spec.leak);
  std::vector<double> ps(n);
  for (std::size_t i = 0; i < n; ++i) ps[i] = (1.0 - spec.alpha) * base[i] + spec.alpha * base[n - 1 - i];

  auto rows_s = flipped(noisy_posterior(f_s, L, spec.label_noise), spec.beta);
  auto truth_s = f_s;
  if (spec.beta > 0.5)
    for (auto& y : truth_s) y = (y + 1) % L;

  auto source = make_pack(spec, spec.source_name, xs, ys, ps, std::move(rows_s), std::move(truth_s), spec.n_source, "source");

  std::vector<double> pt = base;
  auto rows_t = noisy_posterior(f_t, L, spec.label_noise);
  FiniteSet xt = xs, yt = ys;
  if (drop) {
    xt = grid_inputs(a, k - 1);
    pt.assign(nt, 0.0);
    for (std::size_t x = 0; x < n; ++x) pt[project(x)] += base[x];
  }
  if (spec.edit == ScenarioEdit::truncate_output) {
    const std::size_t m = spec.edit_arg;
    yt = integer_range("Y", m);
    for (auto& row : rows_t) {
      for (std::size_t y = m; y < L; ++y) row[m - 1] += row[y];
      row.resize(m);
    }
    for (auto& y : f_t) y = std::min(y, m - 1);
  }
  auto target = make_pack(spec, spec.target_name, xt, yt, std::move(pt), std::move(rows_t), f_t, spec.n_target, "target");

  ScenarioPair out{std::move(source), std::move(target), {}, spec};
  out.facts.homogeneous = spec.edit == ScenarioEdit::none;
  out.facts.posteriors_equal = spec.beta == 0.0 && spec.edit == ScenarioEdit::none;
  if (!drop) {
    std::vector<double> mirror(base.rbegin(), base.rend());
    out.facts.tv_x = spec.alpha * tv(base, mirror);
  }
  return out;
}

std::vector<ScenarioPair> shift_ladder(const ScenarioSpec& spec, const std::vector<double>& alphas) {
  std::vector<ScenarioPair> out;
  for (double al : alphas) {
    if (!unit_interval(al)) fail(ErrorCode::InvalidSpec, "ladder alphas must lie in [0,1]");
    auto s = spec;
    s.alpha = al;
    out.push_back(generate_pair(s));
  }
  return out;
}

}  // namespace tlsys
