#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "support/errors.hpp"
#include "tlsys/cli.hpp"
#include "tlsys/spec.hpp"

using namespace tlsys;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = TLSYS_FIXTURE_DIR;

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const char* name) { return (kFixtures / name).string(); }

fs::path scratch(const char* name) {
  auto p = fs::temp_directory_path() / ("tlsys-test-" + std::to_string(::getpid()) + "-" + name);
  fs::remove_all(p);
  return p;
}

const char* kMinimal = R"({"version": 1, "sets": {"X": ["a", "b"], "Y": [0, 1]},
  "measures": {"P": {"inputs": "X", "outputs": "Y", "marginal": ["0.5", "0.5"], "posterior": [["1", "0"], ["0", "1"]]}}})";

}  // namespace

TEST_SUITE("spec") {
  TEST_CASE("decimal strings round-trip") {
    CHECK(decimal_string(0.1) == "0.1");
    CHECK(decimal_string(0.25) == "0.25");
    CHECK(decimal_string(1.0) == "1");
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
      const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 9) - 4);
      CHECK(std::strtod(decimal_string(v).c_str(), nullptr) == v);
    }
    CHECK(code_of([] { decimal_string(INFINITY); }) == ErrorCode::InvalidSpec);
  }

  TEST_CASE("every fixture round-trips") {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(kFixtures)) {
      if (e.path().extension() != ".json") continue;
      CAPTURE(e.path().string());
      const auto doc = parse_spec_file(e.path().string());
      const auto text = emit_spec(doc);
      const auto again = parse_spec(text);
      CHECK(again == doc);
      CHECK(emit_spec(again) == text);
      ++n;
    }
    CHECK(n >= 6);
  }

  TEST_CASE("canonical form fills sections and defaults") {
    const auto doc = parse_spec(R"({"version": 1, "sets": {"N": {"range": 3}},
      "relations": {"R": {"components": ["N", "N"], "outputs": [1], "tuples": [[0, 1]]}}})");
    for (const char* s : {"sets", "relations", "measures", "learning", "transfer", "scenario", "analysis"})
      CHECK(doc.root.contains(s));
    CHECK(doc.section("sets")["N"] == json::array({0, 1, 2}));
    CHECK(doc.section("relations")["R"]["inputs"] == json::array({0}));
    const auto r = resolve(doc);
    CHECK(r.relation("R").has_io());
    CHECK(r.relation("R").size() == 1);
  }

  TEST_CASE("parse errors") {
    CHECK(code_of([] { parse_spec("{not json"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_spec(R"({"version": 2})"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_spec(R"({"sets": {}})"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_spec(R"({"version": 1, "sets": {"X": [0.5]}})"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_spec(R"({"version": 1, "learning": {"s": {"inputs": "X"}}})"); }) == ErrorCode::ParseError);
  }

  TEST_CASE("strict and lenient modes") {
    const std::string extra = R"({"version": 1, "colour": "blue"})";
    std::vector<std::string> warnings;
    CHECK_NOTHROW(parse_spec(extra, {}, &warnings));
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("colour") != std::string::npos);
    CHECK(code_of([&] { parse_spec(extra, ParseOptions{true}); }) == ErrorCode::ParseError);

    const std::string numeric = R"({"version": 1, "sets": {"X": ["a"], "Y": [0]},
      "measures": {"P": {"inputs": "X", "outputs": "Y", "marginal": [1], "posterior": [[1.0]]}}})";
    warnings.clear();
    const auto doc = parse_spec(numeric, {}, &warnings);
    CHECK(warnings.size() == 2);
    CHECK(doc.section("measures")["P"]["marginal"][0] == "1");
    CHECK(code_of([&] { parse_spec(numeric, ParseOptions{true}); }) == ErrorCode::ParseError);
  }

  TEST_CASE("resolution errors carry a location") {
    try {
      resolve(parse_spec_file(fixture("bad_reference.json")));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnknownElement);
      CHECK(e.message().find("relations.R.tuples[1][0]") != std::string::npos);
    }
    const auto dangling = parse_spec(R"({"version": 1, "sets": {"X": ["a"]},
      "learning": {"s": {"inputs": "X", "outputs": "Z", "hypotheses": "all_functions"}}})");
    CHECK(code_of([&] { resolve(dangling); }) == ErrorCode::ResolutionError);
  }

  TEST_CASE("construction invariants") {
    auto doc = parse_spec(kMinimal);
    CHECK_NOTHROW(resolve(doc));
    doc.root["measures"]["P"]["marginal"] = json::array({"0.5", "0.6"});
    CHECK(code_of([&] { resolve(doc); }) == ErrorCode::InvalidMeasure);

    auto relabel = parse_spec_file(fixture("relabel.json"));
    relabel.root["transfer"]["relabel"]["latent"]["m_xt"].erase(0);
    CHECK(code_of([&] { resolve(relabel); }) == ErrorCode::InvariantViolation);

    CHECK(code_of([] { resolve(parse_spec_file(fixture("bad_htr.json"))); }) == ErrorCode::InvariantViolation);
  }

  TEST_CASE("scenario json round-trip") {
    ScenarioSpec s;
    s.alpha = 0.3;
    s.beta = 0.7;
    s.edit = ScenarioEdit::truncate_output;
    s.labels = 3;
    s.edit_arg = 2;
    s.seed = 99;
    s.source_name = "left";
    const auto j = scenario_to_json(s);
    CHECK(scenario_to_json(scenario_from_json(j)) == j);
    const auto doc = parse_spec(json{{"version", 1}, {"scenario", j}}.dump());
    const auto r = resolve(doc);
    REQUIRE(r.scenario);
    CHECK(r.systems.count("left") == 1);
    CHECK(r.systems.count("target") == 1);
  }

  TEST_CASE("generated pair documents reproduce the pair") {
    ScenarioSpec s;
    s.alpha = 0.2;
    s.beta = 0.3;
    s.n_source = 12;
    s.n_target = 5;
    s.seed = 4;
    const auto pair = generate_pair(s);
    const auto r = resolve(document_for_pair(pair));
    for (const SystemPack* p : {&pair.source, &pair.target}) {
      const auto& q = r.system(p->name());
      CHECK(q.system.x_set().same_elements(p->system.x_set()));
      CHECK(q.truth == p->truth);
      CHECK(q.data.examples == p->data.examples);
      REQUIRE(q.measures);
      CHECK(q.measures->marginal.probs() == p->measures->marginal.probs());
      CHECK(q.measures->posterior.rows() == p->measures->posterior.rows());
    }
    CHECK(r.transfers.size() == 1);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("digest") {
    CHECK(content_digest("abc") == "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("exit codes") {
    CHECK(cli({"validate", fixture("trivial.json")}).code == exit_ok);
    CHECK(cli({"validate", fixture("relabel.json")}).code == exit_ok);
    const auto bad_ref = cli({"validate", fixture("bad_reference.json")});
    CHECK(bad_ref.code == exit_resolution);
    CHECK(bad_ref.err.find("relations.R.tuples[1][0]") != std::string::npos);
    const auto bad_htr = cli({"validate", fixture("bad_htr.json")});
    CHECK(bad_htr.code == exit_invariant);
    CHECK(bad_htr.err.find("not a learning system") != std::string::npos);
    CHECK(cli({"validate", fixture("missing.json")}).code == exit_parse);
    CHECK(cli({"frobnicate"}).code == exit_parse);
    CHECK(cli({"analyze", fixture("bad_reference.json"), "classify"}).code == exit_resolution);
    // No measures on either system.
    auto dir = scratch("nomeasure");
    fs::create_directories(dir);
    auto doc = parse_spec_file(fixture("bad_htr.json"));
    doc.root["transfer"] = json::object();
    std::ofstream(dir / "spec.json") << emit_spec(doc);
    const auto r = cli({"analyze", (dir / "spec.json").string(), "classify", "--source", "source", "--target", "target"});
    CHECK(r.code == exit_analysis);
    CHECK(json::parse(r.err)["error"]["code"] == "MissingMeasure");
    fs::remove_all(dir);
  }

  TEST_CASE("classify the trivial pair") {
    const auto r = cli({"analyze", fixture("trivial.json"), "classify"});
    REQUIRE(r.code == exit_ok);
    const auto rep = json::parse(r.out);
    CHECK(rep["results"]["label"] == "trivial");
    CHECK(rep["inputs_digest"].get<std::string>().rfind("sha256:", 0) == 0);
    CHECK(rep["provenance"]["seed"] == 0);
  }

  TEST_CASE("distance on the ladder matches the analytic value") {
    const auto rep = json::parse(cli({"analyze", fixture("ladder.json"), "distance", "--kind", "tv"}).out);
    CHECK(std::abs(rep["results"]["value"].get<double>() - 0.4) < 1e-9);
    CHECK(rep["results"]["analytic_gap"].get<double>() < 1e-9);
  }

  TEST_CASE("flipped source is negative") {
    const auto rep = json::parse(cli({"analyze", fixture("flipped.json"), "negative", "--seed", "1"}).out);
    CHECK(rep["results"]["negative"] == true);
    CHECK(rep["results"]["runs"].size() == 100);
  }

  TEST_CASE("reports are deterministic") {
    for (const char* kind : {"negative", "bound", "transferability"}) {
      CAPTURE(kind);
      const char* file = std::string(kind) == "transferability" ? "universe.json" : "flipped.json";
      const auto a = cli({"analyze", fixture(file), kind, "--seed", "17", "--seeds", "8"});
      const auto b = cli({"analyze", fixture(file), kind, "--seed", "17", "--seeds", "8"});
      REQUIRE(a.code == exit_ok);
      CHECK(a.out == b.out);
      const auto c = cli({"analyze", fixture(file), kind, "--seed", "18", "--seeds", "8"});
      CHECK(json::parse(c.out)["provenance"]["seed"] == 18);
    }
  }

  TEST_CASE("atomic --out") {
    auto dir = scratch("out");
    fs::create_directories(dir);
    const auto path = (dir / "report.json").string();
    REQUIRE(cli({"--out", path, "analyze", fixture("trivial.json"), "classify"}).code == exit_ok);
    CHECK(read(path) == cli({"analyze", fixture("trivial.json"), "classify"}).out);
    CHECK(!fs::exists(path + ".tmp"));
    fs::remove_all(dir);
  }

  TEST_CASE("scenario emission") {
    auto dir = scratch("emit");
    const auto r = cli({"scenario", fixture("ladder.json"), "--emit", dir.string()});
    REQUIRE(r.code == exit_ok);
    std::vector<std::string> first;
    for (int i = 0; i < 6; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "pair-%02d.json", i);
      REQUIRE(fs::exists(dir / name));
      first.push_back(read(dir / name));
      CHECK(cli({"validate", (dir / name).string()}).code == exit_ok);
    }
    CHECK(!fs::exists(dir / "pair-06.json"));
    REQUIRE(cli({"scenario", fixture("ladder.json"), "--emit", dir.string()}).code == exit_ok);
    for (int i = 0; i < 6; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "pair-%02d.json", i);
      CHECK(read(dir / name) == first[i]);
    }
    // α = 0: the two blocks agree on everything except names and drawn data.
    const auto doc = parse_spec(first[0]);
    const auto& m = doc.section("measures");
    CHECK(m["source.P"]["marginal"] == m["target.P"]["marginal"]);
    CHECK(m["source.P"]["posterior"] == m["target.P"]["posterior"]);
    const auto& l = doc.section("learning");
    CHECK(l["source"]["truth"] == l["target"]["truth"]);
    CHECK(doc.section("sets")["source.X"] == doc.section("sets")["target.X"]);
    CHECK(cli({"scenario", fixture("trivial.json"), "--emit", dir.string()}).code == exit_invariant);
    fs::remove_all(dir);
  }

  TEST_CASE("roughness on the drop-input scenario") {
    const auto rep = json::parse(cli({"analyze", fixture("drop_input.json"), "roughness"}).out);
    CHECK(rep["results"]["source_to_target"]["onto_morphisms"].get<int>() >= 1);
    CHECK(rep["results"]["target_to_source"]["onto_morphisms"] == 0);
  }
}
