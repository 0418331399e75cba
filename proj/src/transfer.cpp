#include "tlsys/transfer.hpp"

#include <cmath>
#include <memory>

namespace tlsys {

std::string_view to_string(Approach a) noexcept {
  switch (a) {
    case Approach::instance: return "instance";
    case Approach::parameter: return "parameter";
    case Approach::instance_parameter: return "instance&parameter";
    case Approach::feature_representation: return "feature-representation";
  }
  return "instance";
}

Approach parse_approach(std::string_view s) {
  if (s == "instance") return Approach::instance;
  if (s == "parameter") return Approach::parameter;
  if (s == "instance&parameter" || s == "both") return Approach::instance_parameter;
  if (s == "feature-representation") return Approach::feature_representation;
  fail(ErrorCode::InvalidSpec, "unknown transfer approach '" + std::string(s) + "'");
}

std::string_view to_string(SettingLabel l) noexcept {
  switch (l) {
    case SettingLabel::trivial: return "trivial";
    case SettingLabel::transductive: return "transductive";
    case SettingLabel::inductive: return "inductive";
    case SettingLabel::both: return "both";
    case SettingLabel::none: return "none";
  }
  return "none";
}

namespace {

bool uses_instances(Approach a) { return a != Approach::parameter; }
bool uses_parameter(Approach a) { return a == Approach::parameter || a == Approach::instance_parameter; }

void check_map(const SetMap& m, const FiniteSet& dom, const FiniteSet& cod, const char* what) {
  if (!m.domain.same_elements(dom) || !m.codomain.same_elements(cod))
    fail(ErrorCode::InvariantViolation, std::string(what) + " is not a map " + dom.name() + " -> " + cod.name());
  if (m.image.size() != dom.size()) fail(ErrorCode::InvariantViolation, std::string(what) + " is not total");
  for (auto v : m.image)
    if (v >= cod.size()) fail(ErrorCode::InvariantViolation, std::string(what) + " maps outside its codomain");
}

// Index translation between two orderings of the same element set.
std::vector<std::size_t> reindex(const FiniteSet& from, const FiniteSet& to) {
  std::vector<std::size_t> out(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) out[i] = to.index_of(from[i]);
  return out;
}

bool same_space(const LearningSystem& a, const LearningSystem& b) {
  return a.x_set().same_element_set(b.x_set()) && a.y_set().same_element_set(b.y_set());
}

const HypothesisClass& class_tr(const TransferSystem& ts) {
  return ts.hypotheses_tr ? *ts.hypotheses_tr : ts.target.hypotheses();
}

// θ_S re-expressed in Θ_Tr: same label, or failing that the first parameter
// with the same hypothesis over a shared sample space.
std::size_t anchor_of(const TransferSystem& ts) {
  const auto& h = class_tr(ts);
  const std::size_t ts_theta = *ts.knowledge.parameter;
  const Atom& label = ts.source.theta_set()[ts_theta];
  if (auto i = h.theta().find(label)) return *i;
  if (same_space(ts.source, ts.target)) {
    const auto xs = reindex(h.inputs(), ts.source.x_set());
    const auto ys = reindex(ts.source.y_set(), h.outputs());
    for (std::size_t t = 0; t < h.theta().size(); ++t) {
      bool equal = true;
      for (std::size_t x = 0; x < xs.size() && equal; ++x)
        equal = h.predict(t, x) == ys[ts.source.hypotheses().predict(ts_theta, xs[x])];
      if (equal) return t;
    }
  }
  fail(ErrorCode::MissingSourceArtifact, "source parameter '" + label.to_string() + "' has no counterpart in Theta_Tr");
}

}  // namespace

Knowledge select_knowledge(const LearningSystem& source, const std::optional<Dataset>& source_data,
                           std::optional<std::size_t> source_theta, Approach kind) {
  Knowledge k;
  if (uses_instances(kind)) {
    if (!source_data) fail(ErrorCode::MissingSourceArtifact, "approach needs source instances");
    k.instances = *source_data;
    for (auto& e : k.instances->examples) e.origin = Origin::source;
  }
  if (uses_parameter(kind) || (kind == Approach::feature_representation && source_theta)) {
    if (!source_theta) fail(ErrorCode::MissingSourceArtifact, "approach needs a source parameter");
    if (*source_theta >= source.theta_set().size())
      fail(ErrorCode::MissingSourceArtifact, "source parameter outside Theta_S");
    k.parameter = source_theta;
  }
  return k;
}

bool SetMap::is_identity() const {
  if (!domain.same_elements(codomain)) return false;
  for (std::size_t i = 0; i < image.size(); ++i)
    if (image[i] != i) return false;
  return true;
}

SetMap SetMap::identity(const FiniteSet& s) {
  std::vector<std::size_t> img(s.size());
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = i;
  return SetMap{s, s, std::move(img)};
}

Dataset DataMap::operator()(const Dataset& d) const {
  Dataset out;
  out.tag = d.tag;
  out.examples.reserve(d.size());
  for (const auto& e : d.examples) out.examples.push_back({x(e.x), y(e.y), e.origin, e.weight});
  return out;
}

void validate(const TransferSystem& ts) {
  const auto& k = ts.knowledge;
  if (k.empty()) fail(ErrorCode::MissingSourceArtifact, "transfer system without source knowledge");
  if (uses_instances(ts.approach) && !k.instances)
    fail(ErrorCode::MissingSourceArtifact, std::string(to_string(ts.approach)) + " transfer needs source instances");
  if (uses_parameter(ts.approach) && !k.parameter)
    fail(ErrorCode::MissingSourceArtifact, std::string(to_string(ts.approach)) + " transfer needs a source parameter");
  if (k.parameter && *k.parameter >= ts.source.theta_set().size())
    fail(ErrorCode::MissingSourceArtifact, "source parameter outside Theta_S");
  if (k.instances)
    for (const auto& e : k.instances->examples)
      if (e.x >= ts.source.x_set().size() || e.y >= ts.source.y_set().size())
        fail(ErrorCode::InvariantViolation, "source instance outside X_S x Y_S");
  if (!(ts.lambda >= 0.0) || !(ts.source_weight >= 0.0))
    fail(ErrorCode::InvariantViolation, "negative penalty or pooling weight");

  const bool feature = ts.approach == Approach::feature_representation;
  if (feature != ts.latent.has_value())
    fail(ErrorCode::InvariantViolation, feature ? "feature-representation transfer needs a latent system"
                                                : "latent maps given for a non-latent approach");
  if (feature) {
    const auto& f = *ts.latent;
    const auto& xl = f.latent.x_set();
    const auto& yl = f.latent.y_set();
    check_map(f.m_dt.x, ts.target.x_set(), xl, "m_DT on inputs");
    check_map(f.m_dt.y, ts.target.y_set(), yl, "m_DT on outputs");
    check_map(f.m_ds.x, ts.source.x_set(), xl, "m_DS on inputs");
    check_map(f.m_ds.y, ts.source.y_set(), yl, "m_DS on outputs");
    check_map(f.m_xt, ts.target.x_set(), xl, "m_XT");
    check_map(f.m_yl, yl, ts.target.y_set(), "m_YL");
    return;
  }
  const auto& h = class_tr(ts);
  if (!h.inputs().same_elements(ts.target.x_set()))
    fail(ErrorCode::InvariantViolation, "transfer system is not a learning system: H_Tr input set differs from X_T");
  if (!h.outputs().same_elements(ts.target.y_set()))
    fail(ErrorCode::InvariantViolation, "transfer system is not a learning system: H_Tr output set differs from Y_T");
  if (k.parameter && uses_parameter(ts.approach)) (void)anchor_of(ts);
}

Dataset pool_data(const Knowledge& k, const Dataset& d_t, const LearningSystem& source, const LearningSystem& target,
                  double source_weight) {
  if (!k.instances) fail(ErrorCode::MissingSourceArtifact, "pooling needs source instances");
  if (!same_space(source, target))
    fail(ErrorCode::IncompatibleSupport, "X_S x Y_S and X_T x Y_T differ and no latent alignment is given");
  const auto xs = reindex(source.x_set(), target.x_set());
  const auto ys = reindex(source.y_set(), target.y_set());
  Dataset out;
  out.tag = "pooled";
  out.examples.reserve(d_t.size() + k.instances->size());
  for (auto e : d_t.examples) {
    e.origin = Origin::target;
    out.examples.push_back(e);
  }
  for (const auto& e : k.instances->examples) out.examples.push_back({xs[e.x], ys[e.y], Origin::source, e.weight * source_weight});
  return out;
}

Dataset pool_data(const TransferSystem& ts, const Dataset& d_t) {
  if (ts.approach == Approach::feature_representation) {
    const auto& f = *ts.latent;
    Dataset out = f.m_dt(d_t);
    out.tag = "pooled-latent";
    for (auto& e : out.examples) e.origin = Origin::target;
    for (auto e : f.m_ds(*ts.knowledge.instances).examples) {
      e.origin = Origin::source;
      e.weight *= ts.source_weight;
      out.examples.push_back(e);
    }
    return out;
  }
  if (ts.approach == Approach::parameter) {
    Dataset out = d_t;
    out.tag = "target";
    for (auto& e : out.examples) e.origin = Origin::target;
    return out;
  }
  return pool_data(ts.knowledge, d_t, ts.source, ts.target, ts.source_weight);
}

HypothesisClass effective_hypotheses(const TransferSystem& ts) {
  if (ts.approach != Approach::feature_representation) return class_tr(ts);
  const auto& f = *ts.latent;
  const auto& hl = f.latent.hypotheses();
  const std::size_t nt = hl.theta().size(), nx = ts.target.x_set().size();
  std::vector<std::size_t> table(nt * nx);
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t x = 0; x < nx; ++x) table[t * nx + x] = f.m_yl(hl.predict(t, f.m_xt(x)));
  return HypothesisClass(hl.theta(), ts.target.x_set(), ts.target.y_set(), std::move(table));
}

LearningSystem effective_learner(const TransferSystem& ts) {
  if (ts.approach == Approach::feature_representation) return ts.latent->latent;
  const std::string name = ts.target.name() + ":tr";
  if (uses_parameter(ts.approach))
    return LearningSystem(name, class_tr(ts), ts.target.loss_kind(), PenalizedErm{anchor_of(ts), ts.lambda});
  return LearningSystem(name, class_tr(ts), ts.target.loss_kind(), ExactErm{});
}

namespace {

TransferRun run_with(const TransferSystem& ts, const LearningSystem& learner, const HypothesisClass& h,
                     const Dataset& d_t) {
  TransferRun run;
  run.trace.approach = ts.approach;
  run.trace.pooled = pool_data(ts, d_t);
  for (const auto& e : run.trace.pooled.examples) (e.origin == Origin::source ? run.trace.source_count : run.trace.target_count)++;
  if (const auto* p = std::get_if<PenalizedErm>(&learner.algorithm())) run.trace.anchor = p->anchor;
  run.theta = run_algorithm(run.trace.pooled, learner);
  run.theta_label = h.theta()[run.theta];
  run.trace.objective = goal_value(run.trace.pooled, run.theta, learner);
  const auto row = h.row(run.theta);
  run.predictions.assign(row.begin(), row.end());
  if (!d_t.empty()) {
    double num = 0.0, den = 0.0;
    for (const auto& e : d_t.examples) {
      num += e.weight * ts.target.loss(e.y, run.predictions[e.x]);
      den += e.weight;
    }
    run.trace.target_risk = num / den;
  }
  Dataset source_part;
  for (const auto& e : run.trace.pooled.examples)
    if (e.origin == Origin::source) source_part.examples.push_back(e);
  if (!source_part.empty() && source_part.examples.front().weight > 0.0)
    run.trace.source_risk = empirical_risk(source_part, run.theta, learner);
  return run;
}

}  // namespace

TransferRun run_transfer(const TransferSystem& ts, const Dataset& d_t) {
  validate(ts);
  return run_with(ts, effective_learner(ts), effective_hypotheses(ts), d_t);
}

ApproachRow classify_approach(const TransferSystem& ts) {
  ApproachRow row;
  row.latent_maps = ts.latent.has_value();
  row.source_data = ts.knowledge.instances.has_value() && ts.approach != Approach::parameter;
  row.source_parameters = ts.knowledge.parameter.has_value() && uses_parameter(ts.approach);
  if (row.latent_maps) {
    row.approach = Approach::feature_representation;
    row.algorithm_structure = "A_Tr: m_D(D) -> Theta_Tr";
  } else if (row.source_data && row.source_parameters) {
    row.approach = Approach::instance_parameter;
    row.algorithm_structure = "A_Tr: D_T x D_S x Theta_S -> Theta_Tr";
  } else if (row.source_parameters) {
    row.approach = Approach::parameter;
    row.algorithm_structure = "A_Tr: D_T x Theta_S -> Theta_Tr";
  } else {
    row.approach = Approach::instance;
    row.algorithm_structure = "A_Tr: D_T x D_S -> Theta_Tr";
  }
  return row;
}

SettingClassification classify_setting(const LearningSystem& source, const DeclaredMeasures* ms,
                                       const LearningSystem& target, const DeclaredMeasures* mt, double tau) {
  if (!ms || !mt) fail(ErrorCode::MissingMeasure, "setting classification needs declared measures on both systems");
  SettingClassification c;
  c.input_structural_eq = source.x_set().same_element_set(target.x_set());
  c.output_structural_eq = source.y_set().same_element_set(target.y_set());
  c.homogeneous = c.input_structural_eq && c.output_structural_eq;

  const auto close = [tau](const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a[i] - b[i]) > tau) return false;
    return true;
  };
  if (c.input_structural_eq) {
    const auto& xs = target.x_set();
    c.marginal_eq = close(ms->marginal.aligned_to(xs).probs(), mt->marginal.aligned_to(xs).probs());
    if (c.output_structural_eq) {
      const auto& ys = target.y_set();
      c.posterior_eq = true;
      for (std::size_t x = 0; x < xs.size() && c.posterior_eq; ++x) {
        const auto rs = ms->posterior.row(ms->posterior.given().index_of(xs[x])).aligned_to(ys);
        const auto rt = mt->posterior.row(mt->posterior.given().index_of(xs[x])).aligned_to(ys);
        c.posterior_eq = close(rs.probs(), rt.probs());
      }
    }
  }
  // A change of input set changes what the posterior is conditioned on, so
  // it counts on both sides.
  const bool input_diff = !c.input_structural_eq || !c.marginal_eq;
  const bool output_diff = !c.output_structural_eq || !c.posterior_eq;
  if (!input_diff && !output_diff) c.label = SettingLabel::trivial;
  else if (input_diff && !output_diff) c.label = SettingLabel::transductive;
  else if (!input_diff) c.label = SettingLabel::inductive;
  else c.label = SettingLabel::both;
  return c;
}

SettingClassification classify_setting(const SystemPack& source, const SystemPack& target, double tau) {
  return classify_setting(source.system, source.measures ? &*source.measures : nullptr, target.system,
                          target.measures ? &*target.measures : nullptr, tau);
}

ShotCount n_shot(const TransferSystem& ts, const Dataset& d_t) {
  (void)ts;
  // With no target data every built-in A_Tr is a function of K_S alone.
  return {d_t.size(), d_t.empty()};
}

std::vector<std::size_t> latent_path_predictions(const TransferSystem& ts, const Dataset& d_t) {
  if (!ts.latent) fail(ErrorCode::InvariantViolation, "no latent system");
  const auto& f = *ts.latent;
  Dataset d_l = f.m_dt(d_t);
  for (auto e : f.m_ds(*ts.knowledge.instances).examples) {
    e.weight *= ts.source_weight;
    d_l.examples.push_back(e);
  }
  const auto theta_l = run_algorithm(d_l, f.latent);
  std::vector<std::size_t> out(ts.target.x_set().size());
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = f.m_yl(f.latent.hypotheses().predict(theta_l, f.m_xt(x)));
  return out;
}

LearningView transfer_view(const TransferSystem& ts, std::span<const Dataset> target_datasets) {
  validate(ts);
  auto learner = std::make_shared<LearningSystem>(effective_learner(ts));
  auto h = std::make_shared<HypothesisClass>(effective_hypotheses(ts));
  auto runs = std::make_shared<std::vector<TransferRun>>();
  auto responses = std::make_shared<std::vector<std::vector<std::size_t>>>();
  for (const auto& d : target_datasets) {
    runs->push_back(run_with(ts, *learner, *h, d));
    responses->push_back(ts.latent ? latent_path_predictions(ts, d) : runs->back().predictions);
  }
  LearningView v{h->theta(), ts.target.x_set(), ts.target.y_set(), target_datasets.size(), {}, {}, {}, {}};
  v.predict = [h](std::size_t t, std::size_t x) { return h->predict(t, x); };
  v.goal = [learner, runs](std::size_t d, std::size_t t) { return goal_value((*runs)[d].trace.pooled, t, *learner); };
  v.algorithm = [runs](std::size_t d) { return (*runs)[d].theta; };
  v.respond = [responses](std::size_t d, std::size_t x) { return (*responses)[d][x]; };
  return v;
}

namespace {

void check_cap(const TransferSystem& ts, std::size_t datasets) {
  const double size = static_cast<double>(datasets) * static_cast<double>(ts.target.x_set().size()) *
                      static_cast<double>(ts.target.y_set().size()) *
                      static_cast<double>(effective_hypotheses(ts).theta().size());
  if (size > 1e7) fail(ErrorCode::CapExceeded, "transfer relation too large to verify exhaustively");
}

}  // namespace

AxiomReport verify_transfer_is_learning_system(const TransferSystem& ts, std::span<const Dataset> target_datasets) {
  check_cap(ts, target_datasets.size());
  const auto view = transfer_view(ts, target_datasets);
  return check_axioms(view, materialize(view));
}

AxiomReport verify_transfer_is_learning_system(const TransferSystem& ts, std::span<const Dataset> target_datasets,
                                               const LearningMaterialization& reference) {
  check_cap(ts, target_datasets.size());
  return check_axioms(transfer_view(ts, target_datasets), reference);
}

LatentCases latent_cases(const TransferSystem& ts) {
  if (!ts.latent) fail(ErrorCode::InvariantViolation, "no latent system");
  const auto& f = *ts.latent;
  LatentCases c;
  c.target_map_identity = f.m_dt.is_identity();
  c.source_map_identity = f.m_ds.is_identity();
  c.latent_equals_target =
      f.latent.x_set().same_elements(ts.target.x_set()) && f.latent.y_set().same_elements(ts.target.y_set());
  c.latent_equals_source =
      f.latent.x_set().same_elements(ts.source.x_set()) && f.latent.y_set().same_elements(ts.source.y_set());
  c.homogeneous = same_space(ts.source, ts.target);
  return c;
}

TransferSystem make_transfer(const TransferRecipe& recipe, const LearningSystem& source, const LearningSystem& target,
                             const Dataset& d_s) {
  std::optional<std::size_t> theta_s;
  if (uses_parameter(recipe.approach)) theta_s = run_algorithm(d_s, source);
  TransferSystem ts{source,          target,        select_knowledge(source, d_s, theta_s, recipe.approach),
                    recipe.approach, recipe.hypotheses_tr, recipe.latent, recipe.lambda, recipe.source_weight};
  validate(ts);
  return ts;
}

}  // namespace tlsys
