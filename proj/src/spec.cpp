#include "tlsys/spec.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace tlsys {

using nlohmann::json;

std::string decimal_string(double v) {
  if (!std::isfinite(v)) fail(ErrorCode::InvalidSpec, "non-finite value cannot be written as a decimal");
  char buf[64];
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

// ---------------------------------------------------------------------------
// Shape checking and canonicalization

class Checker {
 public:
  Checker(const ParseOptions& o, std::vector<std::string>* w) : options_(o), warnings_(w) {}

  [[noreturn]] void error(const std::string& path, const std::string& msg) const {
    fail(ErrorCode::ParseError, path + ": " + msg);
  }

  void warn(const std::string& path, const std::string& msg) const {
    if (warnings_) warnings_->push_back(path + ": " + msg);
  }

  const json& object(const json& j, const std::string& path) const {
    if (!j.is_object()) error(path, "expected an object");
    return j;
  }

  const json& array(const json& j, const std::string& path) const {
    if (!j.is_array()) error(path, "expected an array");
    return j;
  }

  void keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) const {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
      if (ok.count(k)) continue;
      if (options_.strict) error(path + "." + k, "unknown field");
      warn(path + "." + k, "unknown field ignored");
    }
  }

  void required(const json& j, const std::string& path, const char* key) const {
    if (!j.contains(key)) error(path, std::string("missing field '") + key + "'");
  }

  std::string name(const json& j, const std::string& path) const {
    if (!j.is_string() || j.get<std::string>().empty()) error(path, "expected a non-empty name");
    return j.get<std::string>();
  }

  json atom(const json& j, const std::string& path) const {
    if (j.is_string() || j.is_number_integer()) return j;
    error(path, "expected an atom (string or integer)");
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) error(path, "expected a number");
    return j.get<double>();
  }

  std::uint64_t count(const json& j, const std::string& path) const {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) error(path, "expected a non-negative integer");
    return j.get<std::uint64_t>();
  }

  std::string choice(const json& j, const std::string& path, std::initializer_list<const char*> options) const {
    if (j.is_string())
      for (const char* o : options)
        if (j.get<std::string>() == o) return o;
    std::string all;
    for (const char* o : options) all += std::string(all.empty() ? "" : ", ") + o;
    error(path, "expected one of " + all);
  }

  // Probabilities are decimal strings; numbers are tolerated outside strict mode.
  json probability(const json& j, const std::string& path) const {
    if (j.is_string()) {
      const auto s = j.get<std::string>();
      char* end = nullptr;
      std::strtod(s.c_str(), &end);
      if (s.empty() || *end != '\0') error(path, "not a decimal number: '" + s + "'");
      return j;
    }
    if (j.is_number()) {
      if (options_.strict) error(path, "probabilities must be decimal strings");
      warn(path, "numeric probability converted to a decimal string");
      return decimal_string(j.get<double>());
    }
    error(path, "expected a decimal string");
  }

 private:
  ParseOptions options_;
  std::vector<std::string>* warnings_;
};

json canonical_sets(const Checker& c, const json& j) {
  json out = json::object();
  for (const auto& [name, v] : c.object(j, "sets").items()) {
    const std::string path = "sets." + name;
    if (v.is_object()) {
      c.keys(v, path, {"range"});
      c.required(v, path, "range");
      const auto n = c.count(v["range"], path + ".range");
      json e = json::array();
      for (std::uint64_t i = 0; i < n; ++i) e.push_back(i);
      out[name] = e;
      continue;
    }
    json e = json::array();
    std::size_t i = 0;
    for (const auto& a : c.array(v, path)) e.push_back(c.atom(a, path + "[" + std::to_string(i++) + "]"));
    out[name] = e;
  }
  return out;
}

json canonical_tuples(const Checker& c, const json& j, const std::string& path, std::optional<std::size_t> width) {
  json out = json::array();
  std::size_t i = 0;
  for (const auto& t : c.array(j, path)) {
    const auto p = path + "[" + std::to_string(i++) + "]";
    json row = json::array();
    std::size_t k = 0;
    for (const auto& a : c.array(t, p)) row.push_back(c.atom(a, p + "[" + std::to_string(k++) + "]"));
    if (width && row.size() != *width) c.error(p, "expected " + std::to_string(*width) + " entries");
    out.push_back(row);
  }
  return out;
}

json index_list(const Checker& c, const json& j, const std::string& path) {
  json out = json::array();
  std::size_t i = 0;
  for (const auto& v : c.array(j, path)) out.push_back(c.count(v, path + "[" + std::to_string(i++) + "]"));
  return out;
}

json canonical_relations(const Checker& c, const json& j) {
  json out = json::object();
  for (const auto& [name, v] : c.object(j, "relations").items()) {
    const std::string path = "relations." + name;
    c.object(v, path);
    c.keys(v, path, {"components", "inputs", "outputs", "tuples"});
    c.required(v, path, "components");
    json r;
    r["components"] = json::array();
    std::size_t i = 0;
    for (const auto& s : c.array(v["components"], path + ".components"))
      r["components"].push_back(c.name(s, path + ".components[" + std::to_string(i++) + "]"));
    const std::size_t arity = r["components"].size();
    if (v.contains("inputs") || v.contains("outputs")) {
      std::set<std::size_t> all;
      for (std::size_t k = 0; k < arity; ++k) all.insert(k);
      auto complement = [&](const json& given) {
        json rest = json::array();
        for (auto k : all)
          if (std::find(given.begin(), given.end(), json(k)) == given.end()) rest.push_back(k);
        return rest;
      };
      r["inputs"] = v.contains("inputs") ? index_list(c, v["inputs"], path + ".inputs") : json::array();
      r["outputs"] = v.contains("outputs") ? index_list(c, v["outputs"], path + ".outputs") : complement(r["inputs"]);
      if (!v.contains("inputs")) r["inputs"] = complement(r["outputs"]);
    }
    r["tuples"] = v.contains("tuples") ? canonical_tuples(c, v["tuples"], path + ".tuples", arity) : json::array();
    out[name] = r;
  }
  return out;
}

json number_rows(const Checker& c, const json& j, const std::string& path) {
  json out = json::array();
  std::size_t i = 0;
  for (const auto& row : c.array(j, path)) {
    const auto p = path + "[" + std::to_string(i++) + "]";
    json r = json::array();
    std::size_t k = 0;
    for (const auto& v : c.array(row, p)) r.push_back(c.number(v, p + "[" + std::to_string(k++) + "]"));
    out.push_back(r);
  }
  return out;
}

json canonical_measures(const Checker& c, const json& j) {
  json out = json::object();
  for (const auto& [name, v] : c.object(j, "measures").items()) {
    const std::string path = "measures." + name;
    c.object(v, path);
    c.keys(v, path, {"inputs", "outputs", "marginal", "posterior", "coordinates", "embedding"});
    for (const char* k : {"inputs", "outputs", "marginal", "posterior"}) c.required(v, path, k);
    json m;
    m["inputs"] = c.name(v["inputs"], path + ".inputs");
    m["outputs"] = c.name(v["outputs"], path + ".outputs");
    m["marginal"] = json::array();
    std::size_t i = 0;
    for (const auto& p : c.array(v["marginal"], path + ".marginal"))
      m["marginal"].push_back(c.probability(p, path + ".marginal[" + std::to_string(i++) + "]"));
    m["posterior"] = json::array();
    i = 0;
    for (const auto& row : c.array(v["posterior"], path + ".posterior")) {
      const auto p = path + ".posterior[" + std::to_string(i++) + "]";
      json r = json::array();
      std::size_t k = 0;
      for (const auto& q : c.array(row, p)) r.push_back(c.probability(q, p + "[" + std::to_string(k++) + "]"));
      m["posterior"].push_back(r);
    }
    if (v.contains("coordinates")) {
      m["coordinates"] = json::array();
      i = 0;
      for (const auto& x : c.array(v["coordinates"], path + ".coordinates"))
        m["coordinates"].push_back(c.number(x, path + ".coordinates[" + std::to_string(i++) + "]"));
    }
    if (v.contains("embedding")) m["embedding"] = number_rows(c, v["embedding"], path + ".embedding");
    out[name] = m;
  }
  return out;
}

json canonical_table(const Checker& c, const json& j, const std::string& path) {
  c.object(j, path);
  c.keys(j, path, {"theta", "table", "inputs", "outputs"});
  c.required(j, path, "theta");
  c.required(j, path, "table");
  json h;
  h["theta"] = c.name(j["theta"], path + ".theta");
  for (const char* k : {"inputs", "outputs"})
    if (j.contains(k)) h[k] = c.name(j[k], path + "." + k);
  h["table"] = canonical_tuples(c, j["table"], path + ".table", std::nullopt);
  return h;
}

json canonical_learning(const Checker& c, const json& j) {
  json out = json::object();
  for (const auto& [name, v] : c.object(j, "learning").items()) {
    const std::string path = "learning." + name;
    c.object(v, path);
    c.keys(v, path, {"inputs", "outputs", "hypotheses", "loss", "algorithm", "measures", "truth", "data", "sample_size"});
    for (const char* k : {"inputs", "outputs", "hypotheses"}) c.required(v, path, k);
    json l;
    l["inputs"] = c.name(v["inputs"], path + ".inputs");
    l["outputs"] = c.name(v["outputs"], path + ".outputs");
    if (v["hypotheses"].is_string()) {
      l["hypotheses"] = c.choice(v["hypotheses"], path + ".hypotheses", {"all_functions"});
    } else {
      l["hypotheses"] = canonical_table(c, v["hypotheses"], path + ".hypotheses");
    }
    l["loss"] = v.contains("loss") ? c.choice(v["loss"], path + ".loss", {"zero_one", "squared"}) : "zero_one";
    if (v.contains("algorithm")) {
      const auto& a = c.object(v["algorithm"], path + ".algorithm");
      c.keys(a, path + ".algorithm", {"kind", "anchor", "lambda"});
      c.required(a, path + ".algorithm", "kind");
      json alg;
      alg["kind"] = c.choice(a["kind"], path + ".algorithm.kind", {"erm", "penalized"});
      if (alg["kind"] == "penalized") {
        c.required(a, path + ".algorithm", "anchor");
        alg["anchor"] = c.atom(a["anchor"], path + ".algorithm.anchor");
        alg["lambda"] = a.contains("lambda") ? c.number(a["lambda"], path + ".algorithm.lambda") : 0.1;
      }
      l["algorithm"] = alg;
    }
    if (v.contains("measures")) l["measures"] = c.name(v["measures"], path + ".measures");
    if (v.contains("truth")) {
      l["truth"] = json::array();
      std::size_t i = 0;
      for (const auto& a : c.array(v["truth"], path + ".truth"))
        l["truth"].push_back(c.atom(a, path + ".truth[" + std::to_string(i++) + "]"));
    }
    l["data"] = v.contains("data") ? canonical_tuples(c, v["data"], path + ".data", 2) : json::array();
    l["sample_size"] = v.contains("sample_size") ? json(c.count(v["sample_size"], path + ".sample_size"))
                                                  : json(l["data"].size());
    out[name] = l;
  }
  return out;
}

json canonical_map(const Checker& c, const json& j, const std::string& path) {
  return canonical_tuples(c, j, path, 2);
}

json canonical_data_map(const Checker& c, const json& j, const std::string& path) {
  c.object(j, path);
  c.keys(j, path, {"x", "y"});
  c.required(j, path, "x");
  c.required(j, path, "y");
  return json{{"x", canonical_map(c, j["x"], path + ".x")}, {"y", canonical_map(c, j["y"], path + ".y")}};
}

json canonical_transfer(const Checker& c, const json& j) {
  json out = json::object();
  for (const auto& [name, v] : c.object(j, "transfer").items()) {
    const std::string path = "transfer." + name;
    c.object(v, path);
    c.keys(v, path, {"source", "target", "approach", "lambda", "source_weight", "source_parameter", "hypotheses_tr", "latent"});
    c.required(v, path, "source");
    c.required(v, path, "target");
    json t;
    t["source"] = c.name(v["source"], path + ".source");
    t["target"] = c.name(v["target"], path + ".target");
    t["approach"] = v.contains("approach")
                        ? c.choice(v["approach"], path + ".approach",
                                   {"instance", "parameter", "instance&parameter", "feature-representation"})
                        : "instance";
    t["lambda"] = v.contains("lambda") ? c.number(v["lambda"], path + ".lambda") : 0.1;
    t["source_weight"] = v.contains("source_weight") ? c.number(v["source_weight"], path + ".source_weight") : 1.0;
    if (v.contains("source_parameter")) t["source_parameter"] = c.atom(v["source_parameter"], path + ".source_parameter");
    if (v.contains("hypotheses_tr")) t["hypotheses_tr"] = canonical_table(c, v["hypotheses_tr"], path + ".hypotheses_tr");
    if (v.contains("latent")) {
      const auto p = path + ".latent";
      const auto& l = c.object(v["latent"], p);
      c.keys(l, p, {"system", "m_dt", "m_ds", "m_xt", "m_yl"});
      for (const char* k : {"system", "m_dt", "m_ds", "m_xt", "m_yl"}) c.required(l, p, k);
      json lat;
      lat["system"] = c.name(l["system"], p + ".system");
      lat["m_dt"] = canonical_data_map(c, l["m_dt"], p + ".m_dt");
      lat["m_ds"] = canonical_data_map(c, l["m_ds"], p + ".m_ds");
      lat["m_xt"] = canonical_map(c, l["m_xt"], p + ".m_xt");
      lat["m_yl"] = canonical_map(c, l["m_yl"], p + ".m_yl");
      t["latent"] = lat;
    }
    out[name] = t;
  }
  return out;
}

json canonical_scenario(const Checker& c, const json& j) {
  c.object(j, "scenario");
  if (j.empty()) return json::object();
  c.keys(j, "scenario",
         {"alphabet", "arity", "labels", "truth", "alpha", "beta", "leak", "label_noise", "edit", "edit_arg", "n_source",
          "n_target", "seed", "hypotheses", "hypothesis_count", "source_name", "target_name", "ladder"});
  for (const char* k : {"alphabet", "arity", "labels", "edit_arg", "n_source", "n_target", "seed", "hypothesis_count"})
    if (j.contains(k)) c.count(j[k], std::string("scenario.") + k);
  for (const char* k : {"alpha", "beta", "leak", "label_noise"})
    if (j.contains(k)) c.number(j[k], std::string("scenario.") + k);
  if (j.contains("truth")) c.choice(j["truth"], "scenario.truth", {"random", "modular"});
  if (j.contains("edit")) c.choice(j["edit"], "scenario.edit", {"none", "drop_input", "truncate_output"});
  if (j.contains("hypotheses")) c.choice(j["hypotheses"], "scenario.hypotheses", {"all_functions", "random_subset"});
  for (const char* k : {"source_name", "target_name"})
    if (j.contains(k)) c.name(j[k], std::string("scenario.") + k);
  json out = scenario_to_json(scenario_from_json(j));
  if (j.contains("ladder")) {
    out["ladder"] = json::array();
    std::size_t i = 0;
    for (const auto& a : c.array(j["ladder"], "scenario.ladder"))
      out["ladder"].push_back(c.number(a, "scenario.ladder[" + std::to_string(i++) + "]"));
  }
  return out;
}

json canonical_analysis(const Checker& c, const json& j) {
  c.object(j, "analysis");
  c.keys(j, "analysis",
         {"kind", "source", "target", "transfer", "system", "universe", "role", "mode", "behavioral_mode", "threshold",
          "equivalence", "tau", "epsilon_star", "delta_star", "divergence", "over", "seeds", "n", "t", "size_bound",
          "relations", "morphism", "smoothing", "eta", "delta_source", "approach"});
  json out = j;
  const std::set<std::string> names = {"source", "target", "transfer", "system"};
  for (const auto& k : names)
    if (j.contains(k)) c.name(j[k], "analysis." + k);
  if (j.contains("kind"))
    c.choice(j["kind"], "analysis.kind",
             {"classify", "distance", "roughness", "transfer", "negative", "transferability", "generalist", "bound",
              "structures"});
  for (const char* k : {"tau", "epsilon_star", "delta_star", "smoothing", "eta"})
    if (j.contains(k)) c.number(j[k], std::string("analysis.") + k);
  for (const char* k : {"seeds", "n", "t", "size_bound"})
    if (j.contains(k)) c.count(j[k], std::string("analysis.") + k);
  for (const char* k : {"universe", "relations"})
    if (j.contains(k)) {
      std::size_t i = 0;
      for (const auto& s : c.array(j[k], std::string("analysis.") + k))
        c.name(s, std::string("analysis.") + k + "[" + std::to_string(i++) + "]");
    }
  if (j.contains("morphism")) {
    const auto& m = c.object(j["morphism"], "analysis.morphism");
    c.keys(m, "analysis.morphism", {"x", "y"});
    for (const char* k : {"x", "y"}) {
      c.required(m, "analysis.morphism", k);
      std::size_t i = 0;
      for (const auto& v : c.array(m[k], std::string("analysis.morphism.") + k))
        if (!v.is_null()) c.count(v, std::string("analysis.morphism.") + k + "[" + std::to_string(i++) + "]");
    }
  }
  return out;
}

}  // namespace

SpecDocument parse_spec(const std::string& text, const ParseOptions& options, std::vector<std::string>* warnings) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what());
  }
  Checker c(options, warnings);
  c.object(j, "document");
  c.keys(j, "document", {"version", "sets", "relations", "measures", "learning", "transfer", "scenario", "analysis"});
  c.required(j, "document", "version");
  if (!j["version"].is_number_integer() || j["version"].get<int>() != kSpecVersion)
    c.error("version", "unsupported version (expected " + std::to_string(kSpecVersion) + ")");
  auto sec = [&](const char* k) { return j.contains(k) ? j[k] : json::object(); };
  SpecDocument doc;
  try {
    doc.root["version"] = kSpecVersion;
    doc.root["sets"] = canonical_sets(c, sec("sets"));
    doc.root["relations"] = canonical_relations(c, sec("relations"));
    doc.root["measures"] = canonical_measures(c, sec("measures"));
    doc.root["learning"] = canonical_learning(c, sec("learning"));
    doc.root["transfer"] = canonical_transfer(c, sec("transfer"));
    doc.root["scenario"] = canonical_scenario(c, sec("scenario"));
    doc.root["analysis"] = canonical_analysis(c, sec("analysis"));
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed document: ") + e.what());
  }
  return doc;
}

SpecDocument parse_spec_file(const std::string& path, const ParseOptions& options, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ParseError, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str(), options, warnings);
}

std::string emit_spec(const SpecDocument& doc) { return doc.root.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Scenario blocks

ScenarioSpec scenario_from_json(const json& j) {
  ScenarioSpec s;
  try {
    s.alphabet = j.value("alphabet", s.alphabet);
    s.arity = j.value("arity", s.arity);
    s.labels = j.value("labels", s.labels);
    s.truth = parse_truth_family(j.value("truth", std::string(to_string(s.truth))));
    s.alpha = j.value("alpha", s.alpha);
    s.beta = j.value("beta", s.beta);
    s.leak = j.value("leak", s.leak);
    s.label_noise = j.value("label_noise", s.label_noise);
    s.edit = parse_edit(j.value("edit", std::string(to_string(s.edit))));
    s.edit_arg = j.value("edit_arg", s.edit_arg);
    s.n_source = j.value("n_source", s.n_source);
    s.n_target = j.value("n_target", s.n_target);
    s.seed = j.value("seed", s.seed);
    s.hypotheses = parse_hypothesis_family(j.value("hypotheses", std::string(to_string(s.hypotheses))));
    s.hypothesis_count = j.value("hypothesis_count", s.hypothesis_count);
    s.source_name = j.value("source_name", s.source_name);
    s.target_name = j.value("target_name", s.target_name);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("scenario: ") + e.what());
  }
  return s;
}

json scenario_to_json(const ScenarioSpec& s) {
  return json{{"alphabet", s.alphabet},
              {"arity", s.arity},
              {"labels", s.labels},
              {"truth", to_string(s.truth)},
              {"alpha", s.alpha},
              {"beta", s.beta},
              {"leak", s.leak},
              {"label_noise", s.label_noise},
              {"edit", to_string(s.edit)},
              {"edit_arg", s.edit_arg},
              {"n_source", s.n_source},
              {"n_target", s.n_target},
              {"seed", s.seed},
              {"hypotheses", to_string(s.hypotheses)},
              {"hypothesis_count", s.hypothesis_count},
              {"source_name", s.source_name},
              {"target_name", s.target_name}};
}

// ---------------------------------------------------------------------------
// Resolution

namespace {

Atom atom_of(const json& j) {
  if (j.is_string()) return Atom(j.get<std::string>());
  return Atom(j.get<std::int64_t>());
}

json json_of(const Atom& a) { return a.is_integer() ? json(a.as_integer()) : json(a.as_symbol()); }

std::size_t element(const FiniteSet& s, const json& j, const std::string& path) {
  const Atom a = atom_of(j);
  if (auto i = s.find(a)) return *i;
  fail(ErrorCode::UnknownElement, path + ": '" + a.to_string() + "' is not an element of " + s.name());
}

template <class M>
const typename M::mapped_type& lookup(const M& m, const std::string& name, const std::string& path, const char* what) {
  auto it = m.find(name);
  if (it == m.end()) fail(ErrorCode::ResolutionError, path + ": unknown " + what + " '" + name + "'");
  return it->second;
}

double parse_probability(const json& j) { return std::strtod(j.get<std::string>().c_str(), nullptr); }

HypothesisClass table_class(const ResolvedSpec& r, const json& h, const FiniteSet& xs, const FiniteSet& ys,
                            const std::string& path) {
  const auto& theta = lookup(r.sets, h["theta"].get<std::string>(), path + ".theta", "set");
  const auto& rows = h["table"];
  if (rows.size() != theta.size())
    fail(ErrorCode::ArityMismatch, path + ".table: one row per element of " + theta.name() + " expected");
  std::vector<std::size_t> table;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != xs.size())
      fail(ErrorCode::ArityMismatch, path + ".table[" + std::to_string(t) + "]: one entry per input expected");
    for (std::size_t x = 0; x < xs.size(); ++x)
      table.push_back(element(ys, rows[t][x], path + ".table[" + std::to_string(t) + "][" + std::to_string(x) + "]"));
  }
  return HypothesisClass(theta, xs, ys, std::move(table));
}

SetMap set_map(const json& pairs, const FiniteSet& dom, const FiniteSet& cod, const std::string& path) {
  std::vector<std::optional<std::size_t>> img(dom.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto p = path + "[" + std::to_string(i) + "]";
    const auto a = element(dom, pairs[i][0], p + "[0]");
    const auto b = element(cod, pairs[i][1], p + "[1]");
    if (img[a] && *img[a] != b) fail(ErrorCode::InvariantViolation, p + ": map assigns two images to one element");
    img[a] = b;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (!img[i]) fail(ErrorCode::InvariantViolation, path + ": map is not total on " + dom.name() + " (missing '" + dom[i].to_string() + "')");
    out.push_back(*img[i]);
  }
  return SetMap{dom, cod, std::move(out)};
}

void add_system(ResolvedSpec& r, SystemPack pack, const std::string& path) {
  const auto name = pack.name();
  if (r.systems.count(name)) fail(ErrorCode::ResolutionError, path + ": system '" + name + "' declared twice");
  r.systems.emplace(name, std::move(pack));
}

}  // namespace

const SystemPack& ResolvedSpec::system(const std::string& name) const { return lookup(systems, name, "analysis", "system"); }
const TransferEntry& ResolvedSpec::transfer(const std::string& name) const {
  return lookup(transfers, name, "analysis", "transfer");
}
const FiniteSystem& ResolvedSpec::relation(const std::string& name) const {
  return lookup(relations, name, "analysis", "relation");
}

ResolvedSpec resolve(const SpecDocument& doc) {
  ResolvedSpec r;
  for (const auto& [name, v] : doc.section("sets").items()) {
    std::vector<Atom> e;
    for (const auto& a : v) e.push_back(atom_of(a));
    if (e.empty()) fail(ErrorCode::EmptyComponent, "sets." + name + ": sets must be non-empty");
    std::set<Atom> seen(e.begin(), e.end());
    if (seen.size() != e.size()) fail(ErrorCode::DuplicateElement, "sets." + name + ": duplicate element");
    r.sets.emplace(name, FiniteSet(name, std::move(e)));
  }

  for (const auto& [name, v] : doc.section("relations").items()) {
    const std::string path = "relations." + name;
    std::vector<FiniteSet> comps;
    for (std::size_t i = 0; i < v["components"].size(); ++i)
      comps.push_back(lookup(r.sets, v["components"][i].get<std::string>(), path + ".components[" + std::to_string(i) + "]", "set"));
    std::set<Tuple> tuples;
    for (std::size_t t = 0; t < v["tuples"].size(); ++t) {
      Tuple tup;
      for (std::size_t k = 0; k < comps.size(); ++k)
        tup.push_back(element(comps[k], v["tuples"][t][k], path + ".tuples[" + std::to_string(t) + "][" + std::to_string(k) + "]"));
      tuples.insert(std::move(tup));
    }
    std::optional<IoPartition> io;
    if (v.contains("inputs"))
      io = IoPartition{v["inputs"].get<std::vector<std::size_t>>(), v["outputs"].get<std::vector<std::size_t>>()};
    r.relations.emplace(name, FiniteSystem(std::move(comps), std::move(tuples), io));
  }

  for (const auto& [name, v] : doc.section("measures").items()) {
    const std::string path = "measures." + name;
    const auto& xs = lookup(r.sets, v["inputs"].get<std::string>(), path + ".inputs", "set");
    const auto& ys = lookup(r.sets, v["outputs"].get<std::string>(), path + ".outputs", "set");
    std::vector<double> px;
    for (const auto& p : v["marginal"]) px.push_back(parse_probability(p));
    if (px.size() != xs.size()) fail(ErrorCode::ArityMismatch, path + ".marginal: one entry per input expected");
    std::vector<std::vector<double>> rows;
    for (const auto& row : v["posterior"]) {
      rows.emplace_back();
      for (const auto& p : row) rows.back().push_back(parse_probability(p));
    }
    if (rows.size() != xs.size()) fail(ErrorCode::ArityMismatch, path + ".posterior: one row per input expected");
    for (const auto& row : rows)
      if (row.size() != ys.size()) fail(ErrorCode::ArityMismatch, path + ".posterior: one entry per output expected");
    EmpiricalMeasure m(xs, std::move(px));
    if (v.contains("coordinates")) m.set_coordinates(v["coordinates"].get<std::vector<double>>());
    if (v.contains("embedding")) m.set_embedding(v["embedding"].get<std::vector<std::vector<double>>>());
    r.measures.emplace(name, DeclaredMeasures{std::move(m), ConditionalMeasure(xs, ys, std::move(rows))});
  }

  for (const auto& [name, v] : doc.section("learning").items()) {
    const std::string path = "learning." + name;
    const auto& xs = lookup(r.sets, v["inputs"].get<std::string>(), path + ".inputs", "set");
    const auto& ys = lookup(r.sets, v["outputs"].get<std::string>(), path + ".outputs", "set");
    HypothesisClass h = v["hypotheses"].is_string() ? HypothesisClass::all_functions(xs, ys)
                                                    : table_class(r, v["hypotheses"], xs, ys, path + ".hypotheses");
    Algorithm alg = ExactErm{};
    if (v.contains("algorithm") && v["algorithm"]["kind"] == "penalized")
      alg = PenalizedErm{element(h.theta(), v["algorithm"]["anchor"], path + ".algorithm.anchor"),
                         v["algorithm"]["lambda"].get<double>()};
    const LossKind loss = v["loss"] == "squared" ? LossKind::squared : LossKind::zero_one;
    SystemPack pack{LearningSystem(name, std::move(h), loss, alg), std::nullopt, std::nullopt, {}, 0, {}};
    if (v.contains("measures")) {
      const auto& m = lookup(r.measures, v["measures"].get<std::string>(), path + ".measures", "measure");
      if (!m.posterior.given().same_elements(xs) || !m.posterior.outcomes().same_elements(ys))
        fail(ErrorCode::InvariantViolation, path + ".measures: declared over other sets than the system");
      pack.measures = m;
    }
    if (v.contains("truth")) {
      if (v["truth"].size() != xs.size()) fail(ErrorCode::ArityMismatch, path + ".truth: one label per input expected");
      std::vector<std::size_t> f;
      for (std::size_t x = 0; x < xs.size(); ++x) f.push_back(element(ys, v["truth"][x], path + ".truth[" + std::to_string(x) + "]"));
      pack.truth = std::move(f);
    }
    pack.data.tag = name;
    for (std::size_t i = 0; i < v["data"].size(); ++i) {
      const auto p = path + ".data[" + std::to_string(i) + "]";
      pack.data.examples.push_back({element(xs, v["data"][i][0], p + "[0]"), element(ys, v["data"][i][1], p + "[1]")});
    }
    pack.sample_size = v["sample_size"].get<std::size_t>();
    add_system(r, std::move(pack), path);
  }

  const auto& sc = doc.section("scenario");
  if (!sc.empty()) {
    r.scenario = scenario_from_json(sc);
    auto pair = generate_pair(*r.scenario);
    r.scenario_facts = pair.facts;
    add_system(r, std::move(pair.source), "scenario");
    add_system(r, std::move(pair.target), "scenario");
    if (sc.contains("ladder")) r.ladder = sc["ladder"].get<std::vector<double>>();
  }

  for (const auto& [name, v] : doc.section("transfer").items()) {
    const std::string path = "transfer." + name;
    const auto& src = lookup(r.systems, v["source"].get<std::string>(), path + ".source", "system");
    const auto& tgt = lookup(r.systems, v["target"].get<std::string>(), path + ".target", "system");
    TransferRecipe recipe;
    recipe.approach = parse_approach(v["approach"].get<std::string>());
    recipe.lambda = v["lambda"].get<double>();
    recipe.source_weight = v["source_weight"].get<double>();
    if (v.contains("hypotheses_tr"))
    {
      const auto& h = v["hypotheses_tr"];
      const auto p = path + ".hypotheses_tr";
      const auto& xs = h.contains("inputs") ? lookup(r.sets, h["inputs"].get<std::string>(), p + ".inputs", "set") : tgt.system.x_set();
      const auto& ys = h.contains("outputs") ? lookup(r.sets, h["outputs"].get<std::string>(), p + ".outputs", "set") : tgt.system.y_set();
      recipe.hypotheses_tr = table_class(r, h, xs, ys, p);
    }
    if (v.contains("latent")) {
      const auto& l = v["latent"];
      const auto p = path + ".latent";
      const auto& lat = lookup(r.systems, l["system"].get<std::string>(), p + ".system", "system").system;
      const auto &xs = src.system.x_set(), &ys = src.system.y_set(), &xt = tgt.system.x_set(), &yt = tgt.system.y_set();
      const auto &xl = lat.x_set(), &yl = lat.y_set();
      recipe.latent = FeatureRepSpec{lat,
                                     DataMap{set_map(l["m_dt"]["x"], xt, xl, p + ".m_dt.x"), set_map(l["m_dt"]["y"], yt, yl, p + ".m_dt.y")},
                                     DataMap{set_map(l["m_ds"]["x"], xs, xl, p + ".m_ds.x"), set_map(l["m_ds"]["y"], ys, yl, p + ".m_ds.y")},
                                     set_map(l["m_xt"], xt, xl, p + ".m_xt"),
                                     set_map(l["m_yl"], yl, yt, p + ".m_yl")};
    }
    std::optional<std::size_t> theta_s;
    if (v.contains("source_parameter"))
      theta_s = element(src.system.theta_set(), v["source_parameter"], path + ".source_parameter");
    else if (recipe.approach == Approach::parameter || recipe.approach == Approach::instance_parameter)
      theta_s = run_algorithm(src.data, src.system);
    const bool instances = recipe.approach != Approach::parameter;
    TransferSystem ts{src.system,
                      tgt.system,
                      select_knowledge(src.system, instances ? std::optional(src.data) : std::nullopt, theta_s, recipe.approach),
                      recipe.approach,
                      recipe.hypotheses_tr,
                      recipe.latent,
                      recipe.lambda,
                      recipe.source_weight};
    try {
      validate(ts);
    } catch (const Error& e) {
      fail(e.code(), path + ": " + e.message());
    }
    r.transfers.emplace(name, TransferEntry{src.name(), tgt.name(), std::move(ts)});
  }
  return r;
}

// ---------------------------------------------------------------------------

SpecDocument document_for_pair(const ScenarioPair& pair, const json& analysis) {
  json root;
  root["version"] = kSpecVersion;
  root["sets"] = json::object();
  root["relations"] = json::object();
  root["measures"] = json::object();
  root["learning"] = json::object();
  root["scenario"] = json::object();
  root["analysis"] = analysis;
  for (const SystemPack* p : {&pair.source, &pair.target}) {
    const auto& n = p->name();
    const auto& sys = p->system;
    auto set_json = [](const FiniteSet& s) {
      json e = json::array();
      for (const auto& a : s.elements()) e.push_back(json_of(a));
      return e;
    };
    root["sets"][n + ".X"] = set_json(sys.x_set());
    root["sets"][n + ".Y"] = set_json(sys.y_set());
    json l;
    l["inputs"] = n + ".X";
    l["outputs"] = n + ".Y";
    l["loss"] = "zero_one";
    if (pair.spec.hypotheses == HypothesisFamily::all_functions) {
      l["hypotheses"] = "all_functions";
    } else {
      root["sets"][n + ".Theta"] = set_json(sys.theta_set());
      json table = json::array();
      for (std::size_t t = 0; t < sys.theta_set().size(); ++t) {
        json row = json::array();
        for (auto y : sys.hypotheses().row(t)) row.push_back(json_of(sys.y_set()[y]));
        table.push_back(row);
      }
      l["hypotheses"] = json{{"theta", n + ".Theta"}, {"table", table}};
    }
    if (p->measures) {
      json m;
      m["inputs"] = n + ".X";
      m["outputs"] = n + ".Y";
      m["marginal"] = json::array();
      for (double v : p->measures->marginal.probs()) m["marginal"].push_back(decimal_string(v));
      m["posterior"] = json::array();
      for (const auto& row : p->measures->posterior.rows()) {
        json r = json::array();
        for (double v : row) r.push_back(decimal_string(v));
        m["posterior"].push_back(r);
      }
      root["measures"][n + ".P"] = m;
      l["measures"] = n + ".P";
    }
    if (p->truth) {
      l["truth"] = json::array();
      for (auto y : *p->truth) l["truth"].push_back(json_of(sys.y_set()[y]));
    }
    l["data"] = json::array();
    for (const auto& e : p->data.examples) l["data"].push_back(json{json_of(sys.x_set()[e.x]), json_of(sys.y_set()[e.y])});
    l["sample_size"] = p->sample_size;
    root["learning"][n] = l;
  }
  root["transfer"] = json::object();
  if (pair.facts.homogeneous)
    root["transfer"]["transfer"] = json{{"source", pair.source.name()}, {"target", pair.target.name()}, {"approach", "instance"}};
  return parse_spec(root.dump());
}

}  // namespace tlsys
