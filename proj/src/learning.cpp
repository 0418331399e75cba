#include "tlsys/learning.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace tlsys {

std::string_view to_string(Origin o) noexcept {
  switch (o) {
    case Origin::unspecified: return "unspecified";
    case Origin::source: return "source";
    case Origin::target: return "target";
  }
  return "unspecified";
}

std::string_view to_string(LossKind k) noexcept { return k == LossKind::zero_one ? "zero-one" : "squared"; }

std::string_view to_string(EvaluationMode m) noexcept {
  return m == EvaluationMode::truth_table ? "truth-table" : "holdout";
}

Dataset Dataset::prefix(std::size_t n) const {
  Dataset out;
  out.tag = tag;
  out.examples.assign(examples.begin(), examples.begin() + static_cast<std::ptrdiff_t>(std::min(n, examples.size())));
  return out;
}

Dataset make_dataset(const FiniteSet& xs, const FiniteSet& ys, const std::vector<std::pair<Atom, Atom>>& pairs,
                     std::string tag, Origin origin) {
  Dataset d;
  d.tag = std::move(tag);
  d.examples.reserve(pairs.size());
  for (const auto& [x, y] : pairs) d.examples.push_back({xs.index_of(x), ys.index_of(y), origin, 1.0});
  return d;
}

HypothesisClass::HypothesisClass(FiniteSet theta, FiniteSet inputs, FiniteSet outputs, std::vector<std::size_t> table)
    : theta_(std::move(theta)), inputs_(std::move(inputs)), outputs_(std::move(outputs)), table_(std::move(table)) {
  if (table_.size() != theta_.size() * inputs_.size())
    fail(ErrorCode::ArityMismatch, "hypothesis table has " + std::to_string(table_.size()) + " entries, expected " +
                                       std::to_string(theta_.size() * inputs_.size()));
  for (auto y : table_)
    if (y >= outputs_.size()) fail(ErrorCode::UnknownElement, "hypothesis output index out of range");
}

HypothesisClass HypothesisClass::all_functions(FiniteSet inputs, FiniteSet outputs, const std::string& prefix) {
  const std::size_t nx = inputs.size(), ny = outputs.size();
  std::size_t count = 1;
  for (std::size_t i = 0; i < nx; ++i) {
    if (count > 65536 / ny) fail(ErrorCode::CapExceeded, "more than 65536 functions " + inputs.name() + " -> " + outputs.name());
    count *= ny;
  }
  std::vector<Atom> names;
  names.reserve(count);
  std::vector<std::size_t> table(count * nx);
  for (std::size_t t = 0; t < count; ++t) {
    names.emplace_back(prefix + std::to_string(t));
    std::size_t v = t;
    for (std::size_t x = nx; x-- > 0;) {
      table[t * nx + x] = v % ny;
      v /= ny;
    }
  }
  return HypothesisClass(FiniteSet("Theta", std::move(names)), std::move(inputs), std::move(outputs), std::move(table));
}

void HypothesisClass::set_prediction(std::size_t theta, std::size_t x, std::size_t y) {
  if (theta >= theta_.size() || x >= inputs_.size() || y >= outputs_.size())
    fail(ErrorCode::UnknownElement, "hypothesis entry out of range");
  table_[theta * inputs_.size() + x] = y;
}

LearningSystem::LearningSystem(std::string name, HypothesisClass hypotheses, LossKind loss, Algorithm algorithm)
    : name_(std::move(name)), hypotheses_(std::move(hypotheses)), loss_(loss), algorithm_(algorithm) {
  const auto& ys = hypotheses_.outputs();
  const std::size_t n = ys.size();
  loss_table_.assign(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (loss_ == LossKind::zero_one) {
        loss_table_[a * n + b] = a == b ? 0.0 : 1.0;
      } else {
        const double diff = static_cast<double>(ys[a].as_integer()) - static_cast<double>(ys[b].as_integer());
        loss_table_[a * n + b] = diff * diff;
      }
    }
  }
  if (const auto* p = std::get_if<PenalizedErm>(&algorithm_)) {
    if (p->anchor >= theta_set().size()) fail(ErrorCode::UnknownElement, "penalized ERM anchor outside Theta");
    if (!(p->lambda >= 0.0)) fail(ErrorCode::InvalidSpec, "penalty weight must be non-negative");
  }
}

LearningSystem LearningSystem::with_algorithm(Algorithm a) const {
  return LearningSystem(name_, hypotheses_, loss_, a);
}

LearningSystem LearningSystem::renamed(std::string name) const {
  LearningSystem out = *this;
  out.name_ = std::move(name);
  return out;
}

double empirical_risk(const Dataset& d, std::size_t theta, const LearningSystem& sys) {
  if (d.empty()) fail(ErrorCode::EmptyDataset, "empirical risk of an empty dataset");
  const auto& h = sys.hypotheses();
  double num = 0.0, den = 0.0;
  for (const auto& e : d.examples) {
    num += e.weight * sys.loss(e.y, h.predict(theta, e.x));
    den += e.weight;
  }
  if (!(den > 0.0)) fail(ErrorCode::EmptyDataset, "dataset has zero total weight");
  return num / den;
}

double hypothesis_distance(const LearningSystem& sys, std::size_t theta, std::size_t other) {
  const auto a = sys.hypotheses().row(theta);
  const auto b = sys.hypotheses().row(other);
  std::size_t diff = 0;
  for (std::size_t x = 0; x < a.size(); ++x) diff += a[x] != b[x];
  return static_cast<double>(diff) / static_cast<double>(a.size());
}

double goal_value(const Dataset& d, std::size_t theta, const LearningSystem& sys) {
  if (const auto* p = std::get_if<PenalizedErm>(&sys.algorithm())) {
    const double penalty = p->lambda * hypothesis_distance(sys, theta, p->anchor);
    return d.empty() ? penalty : empirical_risk(d, theta, sys) + penalty;
  }
  return empirical_risk(d, theta, sys);
}

std::size_t run_algorithm(const Dataset& d, const LearningSystem& sys) {
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < sys.theta_set().size(); ++t) {
    const double v = goal_value(d, t, sys);
    if (v < best_value) {
      best_value = v;
      best = t;
    }
  }
  return best;
}

std::size_t evaluate(const LearningSystem& sys, std::size_t theta, std::size_t x) {
  if (theta >= sys.theta_set().size()) fail(ErrorCode::UnknownElement, "parameter index out of range");
  if (x >= sys.x_set().size()) fail(ErrorCode::UnknownElement, "input index out of range");
  return sys.hypotheses().predict(theta, x);
}

Atom evaluate(const LearningSystem& sys, const Atom& theta, const Atom& x) {
  return sys.y_set()[sys.hypotheses().predict(sys.theta_set().index_of(theta), sys.x_set().index_of(x))];
}

double prediction_error(const LearningSystem& sys, std::span<const std::size_t> predictions,
                        const EvaluationContext& ctx, const EmpiricalMeasure* weight) {
  const std::size_t nx = sys.x_set().size();
  if (predictions.size() != nx) fail(ErrorCode::ArityMismatch, "prediction table does not cover X");
  if (const auto* f = std::get_if<std::vector<std::size_t>>(&ctx.reference)) {
    if (f->size() != nx) fail(ErrorCode::MissingTruth, "truth table is not total on X");
    std::vector<double> w(nx, 1.0 / static_cast<double>(nx));
    if (weight) w = weight->aligned_to(sys.x_set()).probs();
    double err = 0.0;
    for (std::size_t x = 0; x < nx; ++x) err += w[x] * sys.loss((*f)[x], predictions[x]);
    return err;
  }
  const auto& holdout = std::get<Dataset>(ctx.reference);
  if (holdout.empty()) fail(ErrorCode::EmptyDataset, "held-out dataset is empty");
  double num = 0.0, den = 0.0;
  for (const auto& e : holdout.examples) {
    num += e.weight * sys.loss(e.y, predictions[e.x]);
    den += e.weight;
  }
  return num / den;
}

double generalization_error(const LearningSystem& sys, std::size_t theta, const EvaluationContext& ctx,
                            const EmpiricalMeasure* weight) {
  return prediction_error(sys, sys.hypotheses().row(theta), ctx, weight);
}

// ---------------------------------------------------------------------------

LearningView make_view(const LearningSystem& sys, std::span<const Dataset> datasets) {
  LearningView v{sys.theta_set(), sys.x_set(), sys.y_set(), datasets.size(), {}, {}, {}, {}};
  v.predict = [&sys](std::size_t t, std::size_t x) { return sys.hypotheses().predict(t, x); };
  v.goal = [&sys, datasets](std::size_t d, std::size_t t) { return goal_value(datasets[d], t, sys); };
  v.algorithm = [&sys, datasets](std::size_t d) { return run_algorithm(datasets[d], sys); };
  v.respond = [&sys, datasets](std::size_t d, std::size_t x) {
    return sys.hypotheses().predict(run_algorithm(datasets[d], sys), x);
  };
  return v;
}

Atom value_atom(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return Atom(std::string(buf));
}

double value_of(const Atom& a) {
  if (a.is_integer()) return static_cast<double>(a.as_integer());
  return std::strtod(a.as_symbol().c_str(), nullptr);
}

LearningMaterialization materialize(const LearningView& view, SeekRule seek) {
  const std::size_t nd = view.dataset_count, nt = view.theta.size(), nx = view.inputs.size();
  if (nd == 0) fail(ErrorCode::EmptyDataset, "no datasets to materialize");
  std::vector<Atom> labels;
  for (std::size_t d = 0; d < nd; ++d) labels.emplace_back("d" + std::to_string(d));
  FiniteSet ds("D", labels);

  std::vector<double> g(nd * nt);
  std::map<double, std::size_t> distinct;
  for (std::size_t d = 0; d < nd; ++d)
    for (std::size_t t = 0; t < nt; ++t) distinct.emplace(g[d * nt + t] = view.goal(d, t), 0);
  std::vector<Atom> v_atoms;
  for (auto& [value, idx] : distinct) {
    idx = v_atoms.size();
    v_atoms.push_back(value_atom(value));
  }
  FiniteSet vs("V", v_atoms);

  std::set<Tuple> a_tuples, h_tuples, io_tuples, goal_tuples, seek_tuples;
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t x = 0; x < nx; ++x) h_tuples.insert({t, x, view.predict(t, x)});
  for (std::size_t d = 0; d < nd; ++d) {
    a_tuples.insert({d, view.algorithm(d)});
    for (std::size_t x = 0; x < nx; ++x) io_tuples.insert({d, x, view.respond(d, x)});
    std::size_t chosen = 0;
    for (std::size_t t = 0; t < nt; ++t) {
      const double v = g[d * nt + t];
      goal_tuples.insert({d, t, distinct.at(v)});
      const double best = g[d * nt + chosen];
      if (seek == SeekRule::argmin ? v < best : v > best) chosen = t;
    }
    seek_tuples.insert({distinct.at(g[d * nt + chosen]), d, chosen});
  }

  return LearningMaterialization{
      ds,
      FiniteSystem({ds, view.theta}, std::move(a_tuples), IoPartition{{0}, {1}}),
      FiniteSystem({view.theta, view.inputs, view.outputs}, std::move(h_tuples), IoPartition{{0, 1}, {2}}),
      FiniteSystem({ds, view.inputs, view.outputs}, std::move(io_tuples), IoPartition{{0, 1}, {2}}),
      GoalSeekingSpec{GoalSeekingForm::learning,
                      FiniteSystem({ds, view.theta, vs}, std::move(goal_tuples)),
                      FiniteSystem({vs, ds, view.theta}, std::move(seek_tuples)), vs}};
}

LearningMaterialization materialize(const LearningSystem& sys, std::span<const Dataset> datasets, SeekRule seek) {
  return materialize(make_view(sys, datasets), seek);
}

AxiomReport check_axioms(const LearningView& view, const LearningMaterialization& ref) {
  AxiomReport report;
  const std::size_t nd = ref.data_labels.size(), nt = view.theta.size(), nx = view.inputs.size();
  if (nd != view.dataset_count) fail(ErrorCode::IncompatibleCarriers, "reference covers a different dataset family");

  std::set<Tuple> h_live;
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t x = 0; x < nx; ++x) h_live.insert({t, x, view.predict(t, x)});
  const FiniteSystem h({view.theta, view.inputs, view.outputs}, std::move(h_live), IoPartition{{0, 1}, {2}});

  // (a) S = A ∘ H coupling on Θ; the cascade's components come out as [D, X, Y].
  const auto composed = cascade(ref.algorithm, h, Coupling{{1}, {0}});
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < view.outputs.size(); ++y) {
        const Tuple t{d, x, y};
        const bool lhs = composed.contains(t), rhs = ref.io.contains(t);
        if (lhs != rhs)
          report.cascade.push_back({"cascade", {ref.data_labels[d], view.inputs[x], view.outputs[y]},
                                    lhs ? "A∘H produces a triple missing from the system"
                                        : "system triple not produced by A∘H"});
      }
    }
  }

  // (b) goal-seeking consistency against the functional system.
  report.goal_seeking = check_goal_seeking(h, ref.algorithm, ref.goal_seeking, &ref.io).violations;

  // (c) G is the objective and A its tie-broken argmin.
  std::vector<std::vector<std::size_t>> values(nd * nt);
  for (const auto& g : ref.goal_seeking.goal.tuples()) values[g[0] * nt + g[1]].push_back(g[2]);
  for (std::size_t d = 0; d < nd; ++d) {
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < nt; ++t) {
      const double live = view.goal(d, t);
      if (live < best_value) {
        best_value = live;
        best = t;
      }
      const auto& vs = values[d * nt + t];
      if (vs.size() == 1 && value_of(ref.goal_seeking.value_set[vs[0]]) != live)
        report.erm.push_back({"erm-goal", {ref.data_labels[d], view.theta[t]},
                              "goal value " + ref.goal_seeking.value_set[vs[0]].to_string() + " differs from " +
                                  value_atom(live).to_string()});
    }
    if (!ref.algorithm.contains({d, best}))
      report.erm.push_back({"erm-argmin", {ref.data_labels[d], view.theta[best]},
                            "algorithm does not return the smallest minimizer"});
    for (const auto& a : ref.algorithm.tuples())
      if (a[0] == d && a[1] != best)
        report.erm.push_back({"erm-argmin", {ref.data_labels[d], view.theta[a[1]]},
                              "algorithm returns a parameter other than the smallest minimizer"});
  }
  return report;
}

AxiomReport verify_learning_axioms(const LearningSystem& sys, std::span<const Dataset> datasets) {
  const auto view = make_view(sys, datasets);
  return check_axioms(view, materialize(view));
}

AxiomReport verify_learning_axioms(const LearningSystem& sys, std::span<const Dataset> datasets,
                                   const LearningMaterialization& reference) {
  return check_axioms(make_view(sys, datasets), reference);
}

EvaluationContext SystemPack::truth_context(double epsilon_star) const {
  if (!truth) fail(ErrorCode::MissingTruth, "system '" + name() + "' has no truth table");
  return EvaluationContext::truth(*truth, epsilon_star);
}

}  // namespace tlsys
