#include "tlsys/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tlsys/behavioral.hpp"
#include "tlsys/evaluation.hpp"
#include "tlsys/structural.hpp"

namespace tlsys {

using nlohmann::json;

int exit_code_for(ErrorCode code, bool during_analysis) {
  switch (code) {
    case ErrorCode::ParseError: return exit_parse;
    case ErrorCode::ResolutionError:
    case ErrorCode::UnknownElement: return exit_resolution;
    default: return during_analysis ? exit_analysis : exit_invariant;
  }
}

std::string content_digest(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out = "sha256:";
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json atom_json(const Atom& a) { return a.is_integer() ? json(a.as_integer()) : json(a.as_symbol()); }

json opt_index(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

std::string str(const json& a, const char* key, const std::string& fallback) {
  return a.contains(key) ? a[key].get<std::string>() : fallback;
}

double real(const json& a, const char* key, double fallback) { return a.contains(key) ? a[key].get<double>() : fallback; }

std::size_t count(const json& a, const char* key, std::size_t fallback) {
  return a.contains(key) ? a[key].get<std::size_t>() : fallback;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

DivergenceKind divergence_of(const std::string& s) {
  for (auto k : {DivergenceKind::kl, DivergenceKind::hellinger, DivergenceKind::tv, DivergenceKind::w1, DivergenceKind::mmd})
    if (lower(s) == lower(std::string(to_string(k)))) return k;
  fail(ErrorCode::InvalidSpec, "unknown divergence '" + s + "'");
}

struct Pair {
  const SystemPack* source;
  const SystemPack* target;
};

Pair pick_pair(const ResolvedSpec& r, const json& a) {
  if (a.contains("source") || a.contains("target")) {
    if (!a.contains("source") || !a.contains("target"))
      fail(ErrorCode::ResolutionError, "analysis: source and target must be named together");
    return {&r.system(a["source"]), &r.system(a["target"])};
  }
  if (a.contains("transfer")) {
    const auto& e = r.transfer(a["transfer"]);
    return {&r.system(e.source), &r.system(e.target)};
  }
  if (r.transfers.size() == 1) {
    const auto& e = r.transfers.begin()->second;
    return {&r.system(e.source), &r.system(e.target)};
  }
  if (r.scenario) return {&r.system(r.scenario->source_name), &r.system(r.scenario->target_name)};
  fail(ErrorCode::ResolutionError, "analysis: name a source and a target");
}

TransferRecipe recipe_of(const TransferSystem& ts) {
  return TransferRecipe{ts.approach, ts.lambda, ts.source_weight, ts.hypotheses_tr, ts.latent};
}

TransferRecipe pick_recipe(const ResolvedSpec& r, const json& a, const Pair& p) {
  if (a.contains("transfer")) return recipe_of(r.transfer(a["transfer"]).system);
  if (!a.contains("approach"))
    for (const auto& [name, e] : r.transfers)
      if (e.source == p.source->name() && e.target == p.target->name()) return recipe_of(e.system);
  TransferRecipe recipe;
  recipe.approach = parse_approach(str(a, "approach", "instance"));
  return recipe;
}

const TransferEntry& pick_transfer(const ResolvedSpec& r, const json& a) {
  if (a.contains("transfer")) return r.transfer(a["transfer"]);
  if (r.transfers.size() == 1) return r.transfers.begin()->second;
  fail(ErrorCode::ResolutionError, "analysis: name a transfer block");
}

std::vector<SystemPack> pick_universe(const ResolvedSpec& r, const json& a, const std::string& system) {
  std::vector<SystemPack> out;
  if (a.contains("universe")) {
    for (const auto& n : a["universe"]) out.push_back(r.system(n));
  } else {
    for (const auto& [n, p] : r.systems)
      if (n != system) out.push_back(p);
  }
  return out;
}

BoundOptions bound_options(const json& a) {
  BoundOptions b;
  b.eta = real(a, "eta", kDefaultEta);
  b.smoothing = real(a, "smoothing", kDefaultSmoothing);
  b.kind = divergence_of(str(a, "divergence", "TV"));
  const auto ds = str(a, "delta_source", "estimated");
  if (ds == "declared") b.delta_source = DeltaSource::declared;
  else if (ds != "estimated") fail(ErrorCode::InvalidSpec, "unknown delta_source '" + ds + "'");
  return b;
}

json map_json(const MapTable& m) {
  json out = json::array();
  for (const auto& v : m.image) out.push_back(opt_index(v));
  return out;
}

json props_json(const MapProperties& p) {
  return {{"total", p.total},         {"partial", p.partial},       {"injective", p.injective},
          {"surjective", p.surjective}, {"invertible", p.invertible}};
}

json roughness_json(const RoughnessReport& r) {
  const auto& q = r.quotient;
  return {{"x_map", map_json(r.morphism.x_map)},
          {"y_map", map_json(r.morphism.y_map)},
          {"properties", {{"x", props_json(r.properties.x)}, {"y", props_json(r.properties.y)}, {"joint", props_json(r.properties.joint)}}},
          {"relation_preserving", r.relation_preserving},
          {"minimal", r.minimal},
          {"roughness_ratio", num(r.roughness_ratio)},
          {"ratio_is_summary", r.ratio_is_summary},
          {"direction", r.direction},
          {"classes",
           {{"system", {q.system_size(), q.system_classes()}},
            {"inputs", {q.input_size(), q.input_classes()}},
            {"outputs", {q.output_size(), q.output_classes()}}}}};
}

json neighborhood_json(const Neighborhood& n) {
  json entries = json::array(), skipped = json::array();
  for (const auto& e : n.entries)
    entries.push_back({{"index", e.index}, {"name", e.name}, {"value", num(e.value)}, {"threshold", num(e.threshold)}, {"member", e.member}});
  for (const auto& s : n.skipped) skipped.push_back({{"index", s.index}, {"name", s.name}, {"reason", s.reason}});
  return {{"role", to_string(n.role)}, {"entries", entries}, {"skipped", skipped}, {"cardinality", n.cardinality()}};
}

json candidate_json(const StructureCandidate& c) {
  json out = {{"nx", c.nx}, {"ny", c.ny}, {"g", c.g}};
  out["epsilon"] = c.epsilon ? num(*c.epsilon) : json(nullptr);
  out["output_map"] = c.output_map ? json(*c.output_map) : json(nullptr);
  return out;
}

json learning_check(const TransferSystem& ts, const Dataset& d_t) {
  std::vector<Dataset> family;
  for (std::size_t n = 0; n <= d_t.size(); ++n) family.push_back(d_t.prefix(n));
  try {
    const auto rep = verify_transfer_is_learning_system(ts, family);
    return {{"checked", true},
            {"datasets", family.size()},
            {"pass", rep.pass()},
            {"violations", {{"cascade", rep.cascade.size()}, {"goal_seeking", rep.goal_seeking.size()}, {"erm", rep.erm.size()}}}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::CapExceeded) throw;
    return {{"checked", false}, {"datasets", family.size()}, {"skipped", e.message()}};
  }
}

// ---------------------------------------------------------------------------

json do_classify(const ResolvedSpec& r, const json& a, const AnalyzeFlags& f) {
  const auto p = pick_pair(r, a);
  const auto c = classify_setting(*p.source, *p.target, real(a, "tau", f.tolerance));
  return {{"source", p.source->name()},
          {"target", p.target->name()},
          {"homogeneous", c.homogeneous},
          {"input_structural_eq", c.input_structural_eq},
          {"output_structural_eq", c.output_structural_eq},
          {"marginal_eq", c.marginal_eq},
          {"posterior_eq", c.posterior_eq},
          {"label", to_string(c.label)}};
}

json do_distance(const ResolvedSpec& r, const json& a, const AnalyzeFlags&) {
  const auto p = pick_pair(r, a);
  const Over over = parse_over(str(a, "over", "X"));
  const DivergenceKind kind = divergence_of(str(a, "divergence", "TV"));
  const double smoothing = real(a, "smoothing", kDefaultSmoothing);
  const bool declared = p.source->measures && p.target->measures;
  auto measures_of = [&](const SystemPack& s) {
    return declared ? *s.measures : estimate_measures(s.data, s.system.x_set(), s.system.y_set(), smoothing);
  };
  const double value = transfer_distance(measures_of(*p.source), measures_of(*p.target), over, kind);
  json out = {{"source", p.source->name()},
              {"target", p.target->name()},
              {"over", to_string(over)},
              {"divergence", to_string(kind)},
              {"metric", is_metric(kind)},
              {"measures", declared ? "declared" : "estimated"},
              {"value", num(value)}};
  if (declared && r.scenario_facts && r.scenario_facts->tv_x && over == Over::x && kind == DivergenceKind::tv &&
      p.source->name() == r.scenario->source_name && p.target->name() == r.scenario->target_name) {
    out["analytic_tv"] = num(*r.scenario_facts->tv_x);
    out["analytic_gap"] = num(std::abs(value - *r.scenario_facts->tv_x));
  }
  return out;
}

Morphism morphism_of(const json& m, const FiniteSystem& target) {
  auto table = [](const json& v, std::size_t cod) {
    MapTable t;
    t.codomain_size = cod;
    for (const auto& e : v) t.image.push_back(e.is_null() ? std::nullopt : std::optional<std::size_t>(e.get<std::size_t>()));
    return t;
  };
  return {table(m["x"], target.input_cardinality()), table(m["y"], target.output_cardinality())};
}

json do_roughness(const ResolvedSpec& r, const json& a, const AnalyzeFlags&) {
  std::optional<FiniteSystem> s, t;
  if (a.contains("relations")) {
    if (a["relations"].size() != 2) fail(ErrorCode::InvalidSpec, "analysis.relations: name exactly two relations");
    s = r.relation(a["relations"][0]);
    t = r.relation(a["relations"][1]);
  } else {
    const auto p = pick_pair(r, a);
    s = system_relation(*p.source);
    t = system_relation(*p.target);
  }
  if (a.contains("morphism")) return {{"explicit", roughness_json(transfer_roughness(*s, *t, morphism_of(a["morphism"], *t)))}};
  auto scan = [](const FiniteSystem& from, const FiniteSystem& to, const char* direction) {
    std::size_t n = 0;
    std::optional<RoughnessReport> first;
    EnumerationOptions opt;
    for_each_morphism(from, to, MorphismRequirement::onto(), opt, [&](const Morphism& m) {
      if (!first) {
        first = transfer_roughness(from, to, m);
        first->direction = direction;
      }
      ++n;
      return true;
    });
    return json{{"onto_morphisms", n}, {"first", first ? roughness_json(*first) : json(nullptr)}};
  };
  return {{"source_to_target", scan(*s, *t, "source->target")}, {"target_to_source", scan(*t, *s, "target->source")}};
}

json do_transfer(const ResolvedSpec& r, const json& a, const AnalyzeFlags&) {
  const auto& e = pick_transfer(r, a);
  const auto& target = r.system(e.target);
  const auto run = run_transfer(e.system, target.data);
  const auto row = classify_approach(e.system);
  const auto shots = n_shot(e.system, target.data);
  json predictions = json::array();
  for (std::size_t x = 0; x < run.predictions.size(); ++x)
    predictions.push_back({atom_json(target.system.x_set()[x]), atom_json(target.system.y_set()[run.predictions[x]])});
  const auto& tr = run.trace;
  json out = {{"source", e.source},
              {"target", e.target},
              {"approach", to_string(e.system.approach)},
              {"theta", atom_json(run.theta_label)},
              {"predictions", predictions},
              {"trace",
               {{"target_count", tr.target_count},
                {"source_count", tr.source_count},
                {"anchor", opt_index(tr.anchor)},
                {"objective", num(tr.objective)},
                {"target_risk", tr.target_risk ? num(*tr.target_risk) : json(nullptr)},
                {"source_risk", tr.source_risk ? num(*tr.source_risk) : json(nullptr)}}},
              {"approach_row",
               {{"target_data", row.target_data},
                {"source_data", row.source_data},
                {"source_parameters", row.source_parameters},
                {"latent_maps", row.latent_maps},
                {"algorithm_structure", row.algorithm_structure}}},
              {"n_shot", {{"n", shots.n}, {"zero_shot", shots.zero_shot}}},
              {"learning_system", learning_check(e.system, target.data)}};
  if (target.truth)
    out["epsilon_target"] = num(prediction_error(target.system, run.predictions, target.truth_context(), target.marginal()));
  return out;
}

json do_negative(const ResolvedSpec& r, const json& a, const AnalyzeFlags& f) {
  const auto p = pick_pair(r, a);
  NegativeTransferOptions opt{count(a, "seeds", 0), f.seed};
  const auto o = detect_negative_transfer(*p.source, *p.target, pick_recipe(r, a, p), opt);
  json runs = json::array();
  for (const auto& s : o.runs)
    runs.push_back({{"seed", s.seed},
                    {"n_source", s.n_source},
                    {"n_target", s.n_target},
                    {"epsilon_with", num(s.epsilon_with)},
                    {"epsilon_without", num(s.epsilon_without)},
                    {"negative", s.negative}});
  return {{"source", p.source->name()},
          {"target", p.target->name()},
          {"epsilon_with", num(o.epsilon_with)},
          {"epsilon_without", num(o.epsilon_without)},
          {"margin", num(o.margin)},
          {"negative", o.negative},
          {"mode", to_string(o.mode)},
          {"root_seed", o.root_seed},
          {"negative_runs", o.negative_runs()},
          {"runs", runs}};
}

json do_transferability(const ResolvedSpec& r, const json& a, const AnalyzeFlags& f) {
  if (!a.contains("system")) fail(ErrorCode::ResolutionError, "analysis: name the system");
  const auto& sys = r.system(a["system"]);
  const auto universe = pick_universe(r, a, sys.name());
  TransferabilityOptions o;
  o.mode = parse_transferability_mode(str(a, "mode", "empirical"));
  o.epsilon_star = real(a, "epsilon_star", 0.1);
  const auto th = str(a, "threshold", "fixed");
  if (th == "target_alone") o.threshold = ThresholdKind::target_alone;
  else if (th != "fixed") fail(ErrorCode::InvalidSpec, "unknown threshold '" + th + "'");
  TransferRecipe recipe;
  recipe.approach = parse_approach(str(a, "approach", "instance"));
  o.recipe = recipe;
  o.runs = {count(a, "seeds", 0), f.seed};
  const auto eq = str(a, "equivalence", "raw");
  if (eq == "signature") o.equivalence = EquivalenceMode::signature;
  else if (eq != "raw") fail(ErrorCode::InvalidSpec, "unknown equivalence '" + eq + "'");
  o.tau = real(a, "tau", f.tolerance);
  o.structural.epsilon_star = o.epsilon_star;
  o.structural.search.size_bound = count(a, "size_bound", kMaxLatentCarrier);
  const auto bm = str(a, "behavioral_mode", "bound");
  if (bm == "distance_only") o.behavioral.mode = BehavioralMode::distance_only;
  else if (bm != "bound") fail(ErrorCode::InvalidSpec, "unknown behavioral_mode '" + bm + "'");
  o.behavioral.epsilon_star = o.epsilon_star;
  o.behavioral.delta_star = real(a, "delta_star", 0.1);
  o.behavioral.recipe = recipe;
  o.behavioral.bound = bound_options(a);
  const auto rep = transferability(sys, universe, parse_role(str(a, "role", "source")), o);
  json out = neighborhood_json(rep.neighborhood);
  out["system"] = sys.name();
  out["mode"] = to_string(rep.mode);
  out["threshold"] = rep.threshold == ThresholdKind::fixed ? "fixed" : "target_alone";
  out["epsilon_star"] = num(rep.epsilon_star);
  out["equivalence"] = rep.equivalence == EquivalenceMode::raw ? "raw" : "signature";
  out["tau"] = num(rep.tau);
  out["signature_class"] = rep.signature_class;
  out["universe_size"] = rep.universe_size;
  return out;
}

json do_generalist(const ResolvedSpec& r, const json& a, const AnalyzeFlags&) {
  if (!a.contains("system")) fail(ErrorCode::ResolutionError, "analysis: name the system");
  const auto& sys = r.system(a["system"]);
  const auto universe = pick_universe(r, a, sys.name());
  GeneralistOptions o;
  o.epsilon_star = real(a, "epsilon_star", 0.1);
  o.recipe.approach = parse_approach(str(a, "approach", "instance"));
  const auto rep = is_generalist(sys, universe, count(a, "n", 0), count(a, "t", 1), o);
  json q = json::array(), skipped = json::array();
  for (const auto& e : rep.qualifying) q.push_back({{"index", e.index}, {"name", e.name}, {"shots", e.shots}, {"epsilon", num(e.epsilon)}});
  for (const auto& s : rep.skipped) skipped.push_back({{"index", s.index}, {"name", s.name}, {"reason", s.reason}});
  return {{"system", sys.name()}, {"generalist", rep.generalist}, {"n", rep.n}, {"t", rep.t}, {"qualifying", q}, {"skipped", skipped}};
}

json do_bound(const ResolvedSpec& r, const json& a, const AnalyzeFlags&) {
  const auto p = pick_pair(r, a);
  const auto b = bound_check(pick_recipe(r, a, p), *p.source, *p.target, bound_options(a));
  return {{"source", p.source->name()},
          {"target", p.target->name()},
          {"epsilon_s", num(b.epsilon_s)},
          {"epsilon_t", num(b.epsilon_t)},
          {"delta_t", num(b.delta_t)},
          {"delta_kind", to_string(b.delta_kind)},
          {"delta_source", b.delta_source == DeltaSource::estimated ? "estimated" : "declared"},
          {"complexity_c", num(b.complexity_c)},
          {"c_formula", b.c_formula},
          {"eta", num(b.eta)},
          {"n", b.n},
          {"theta_count", b.theta_count},
          {"theta_s", b.theta_s},
          {"theta_tr", b.theta_tr},
          {"rhs", num(b.rhs())},
          {"holds", b.holds}};
}

json do_structures(const ResolvedSpec& r, const json& a, const AnalyzeFlags&) {
  const auto p = pick_pair(r, a);
  StructureSearchOptions o;
  o.size_bound = count(a, "size_bound", kMaxLatentCarrier);
  const double eps = real(a, "epsilon_star", 0.1);
  const auto rep = structure_search(*p.source, *p.target, eps, o);
  json valid = json::array(), useful = json::array();
  for (const auto& c : rep.valid) valid.push_back(candidate_json(c));
  for (const auto& c : rep.useful) useful.push_back(candidate_json(c));
  return {{"source", p.source->name()},
          {"target", p.target->name()},
          {"epsilon_star", num(eps)},
          {"size_bound", rep.size_bound},
          {"candidates", rep.candidates.size()},
          {"valid", valid},
          {"useful", useful}};
}

json provenance(const json& a, const AnalyzeFlags& f, bool strict) {
  return {{"seed", f.seed},
          {"tolerance", num(f.tolerance)},
          {"strict", strict},
          {"tool_version", kToolVersion},
          {"spec_version", kSpecVersion},
          {"parameters", a},
          {"formulas",
           {{"complexity", kComplexityFormula},
            {"divergence", "D(source || target), target aligned to the source support"},
            {"estimate", "(count + smoothing) / (n + k * smoothing)"},
            {"negative", "mean eps_without < mean eps_with"},
            {"run_seeds", "run s draws from root seed + s"},
            {"normalization_tolerance", "1e-12"}}}};
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
    if (!o) fail(ErrorCode::InvalidSpec, "cannot write '" + tmp.string() + "'");
    o << text;
    if (!o.flush()) fail(ErrorCode::InvalidSpec, "cannot write '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

json analyze(const ResolvedSpec& spec, const SpecDocument& doc, const std::string& kind, const AnalyzeFlags& flags) {
  json a = doc.section("analysis");
  for (const auto& [k, v] : flags.overrides.items()) a[k] = v;
  const std::string k = kind.empty() ? str(a, "kind", "") : kind;
  if (k.empty()) fail(ErrorCode::InvalidSpec, "no analysis requested");
  if (k == "classify") return do_classify(spec, a, flags);
  if (k == "distance") return do_distance(spec, a, flags);
  if (k == "roughness") return do_roughness(spec, a, flags);
  if (k == "transfer") return do_transfer(spec, a, flags);
  if (k == "negative") return do_negative(spec, a, flags);
  if (k == "transferability") return do_transferability(spec, a, flags);
  if (k == "generalist") return do_generalist(spec, a, flags);
  if (k == "bound") return do_bound(spec, a, flags);
  if (k == "structures") return do_structures(spec, a, flags);
  fail(ErrorCode::InvalidSpec, "unknown analysis '" + k + "'");
}

json validate_transfers(const ResolvedSpec& spec) {
  json out = json::object();
  for (const auto& [name, e] : spec.transfers) {
    auto check = learning_check(e.system, spec.system(e.target).data);
    if (check["checked"] && !check["pass"])
      fail(ErrorCode::InvariantViolation, "transfer." + name + ": transfer system is not a learning system");
    out[name] = check;
  }
  return out;
}

std::string render(const json& report) { return report.dump(2) + "\n"; }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite transfer-learning systems: validate specs, run analyses, generate scenarios", "tlsys"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
  bool strict = false;
  std::string out_path, file, kind, emit_dir;
  json overrides = json::object();
  app.add_option("--seed", seed, "Root seed for sampled runs")->capture_default_str();
  app.add_option("--tolerance", tolerance, "Measure comparison tolerance")->capture_default_str();
  app.add_flag("--strict", strict, "Reject unknown fields");
  app.add_option("--out", out_path, "Write the report here instead of stdout");

  auto* validate_cmd = app.add_subcommand("validate", "Parse, resolve and check a spec");
  validate_cmd->add_option("file", file, "Spec file")->required();
  auto* analyze_cmd = app.add_subcommand("analyze", "Run one analysis on a spec");
  analyze_cmd->add_option("file", file, "Spec file")->required();
  analyze_cmd->add_option("analysis", kind,
                          "classify | distance | roughness | transfer | negative | transferability | generalist | bound | structures");
  std::string o_kind, o_over, o_role, o_mode, o_system, o_source, o_target;
  std::optional<std::size_t> o_seeds;
  std::optional<double> o_eps;
  analyze_cmd->add_option("--kind", o_kind, "Divergence: KL, Hellinger, TV, W1, MMD");
  analyze_cmd->add_option("--over", o_over, "X, Y, XY or Y|X");
  analyze_cmd->add_option("--seeds", o_seeds, "Number of seeded runs");
  analyze_cmd->add_option("--epsilon-star", o_eps, "Error threshold");
  analyze_cmd->add_option("--role", o_role, "source or target");
  analyze_cmd->add_option("--mode", o_mode, "empirical, structural or behavioral");
  analyze_cmd->add_option("--system", o_system, "System under analysis");
  analyze_cmd->add_option("--source", o_source, "Source system");
  analyze_cmd->add_option("--target", o_target, "Target system");
  auto* scenario_cmd = app.add_subcommand("scenario", "Materialize generated pairs as spec files");
  scenario_cmd->add_option("file", file, "Spec file with a scenario block")->required();
  scenario_cmd->add_option("--emit", emit_dir, "Output directory")->required();
  for (auto* s : {validate_cmd, analyze_cmd, scenario_cmd}) s->fallthrough();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::Error& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return exit_ok;
    }
    err << "usage: " << e.what() << "\n";
    return exit_parse;
  }

  if (!o_kind.empty()) overrides["divergence"] = o_kind;
  if (!o_over.empty()) overrides["over"] = o_over;
  if (o_seeds) overrides["seeds"] = *o_seeds;
  if (o_eps) overrides["epsilon_star"] = *o_eps;
  if (!o_role.empty()) overrides["role"] = o_role;
  if (!o_mode.empty()) overrides["mode"] = o_mode;
  if (!o_system.empty()) overrides["system"] = o_system;
  if (!o_source.empty()) overrides["source"] = o_source;
  if (!o_target.empty()) overrides["target"] = o_target;

  const std::string verb = validate_cmd->parsed() ? "validate" : analyze_cmd->parsed() ? "analyze" : "scenario";
  bool analyzing = false;
  auto report_error = [&](const std::string& code, int exit, const std::string& message) {
    err << json{{"error", {{"code", code}, {"exit", exit}, {"message", message}}}}.dump() << "\n";
    return exit;
  };
  try {
    std::vector<std::string> warnings;
    const SpecDocument doc = parse_spec_file(file, ParseOptions{strict}, &warnings);
    const std::string digest = content_digest(emit_spec(doc));
    const ResolvedSpec spec = resolve(doc);
    json command = {{"verb", verb}, {"file", file}};
    json results;
    AnalyzeFlags flags{seed, tolerance, overrides};
    json params = doc.section("analysis");
    for (const auto& [k, v] : overrides.items()) params[k] = v;

    if (verb == "validate") {
      results = {{"valid", true},
                 {"sets", spec.sets.size()},
                 {"relations", spec.relations.size()},
                 {"measures", spec.measures.size()},
                 {"systems", spec.systems.size()},
                 {"transfers", validate_transfers(spec)}};
    } else if (verb == "analyze") {
      analyzing = true;
      const std::string k = kind.empty() ? str(params, "kind", "") : kind;
      command["analysis"] = k;
      params["kind"] = k;
      results = analyze(spec, doc, k, flags);
    } else {
      if (!spec.scenario) fail(ErrorCode::InvalidSpec, "no scenario block");
      std::vector<ScenarioPair> pairs;
      if (spec.ladder.empty()) pairs.push_back(generate_pair(*spec.scenario));
      else pairs = shift_ladder(*spec.scenario, spec.ladder);
      std::filesystem::create_directories(emit_dir);
      json files = json::array();
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "pair-%02zu.json", i);
        const auto text = emit_spec(document_for_pair(pairs[i], doc.section("analysis")));
        write_atomic(std::filesystem::path(emit_dir) / name, text);
        files.push_back({{"file", name}, {"alpha", num(pairs[i].spec.alpha)}, {"digest", content_digest(text)}});
      }
      command["emit"] = emit_dir;
      results = {{"documents", files}};
    }

    json report = {{"command", command},
                   {"inputs_digest", digest},
                   {"results", results},
                   {"provenance", provenance(params, flags, strict)},
                   {"warnings", warnings}};
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    const auto text = render(report);
    if (out_path.empty()) out << text;
    else write_atomic(out_path, text);
    return exit_ok;
  } catch (const Error& e) {
    return report_error(std::string(to_string(e.code())), exit_code_for(e.code(), analyzing), e.message());
  } catch (const std::exception& e) {
    return report_error("Internal", analyzing ? exit_analysis : exit_invariant, e.what());
  }
}

}  // namespace tlsys
