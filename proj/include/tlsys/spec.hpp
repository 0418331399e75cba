#pragma once

// On-disk specification documents (JSON, versioned) and their resolution
// into library objects.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tlsys/learning.hpp"
#include "tlsys/scenario.hpp"
#include "tlsys/transfer.hpp"

namespace tlsys {

inline constexpr int kSpecVersion = 1;

/// A parsed document in canonical form: every section is present (possibly
/// empty), set shorthands are expanded and numbers have their JSON types.
/// Emitting and re-parsing yields an equal document.
struct SpecDocument {
  nlohmann::json root;

  const nlohmann::json& section(const char* name) const { return root.at(name); }
  bool operator==(const SpecDocument& o) const { return root == o.root; }
};

struct ParseOptions {
  /// Unknown fields are errors instead of warnings.
  bool strict = false;
};

/// Throws ParseError (malformed JSON, wrong types, unknown fields in strict
/// mode, unsupported version). Warnings collect what lenient mode tolerated.
SpecDocument parse_spec(const std::string& text, const ParseOptions& options = {},
                        std::vector<std::string>* warnings = nullptr);
SpecDocument parse_spec_file(const std::string& path, const ParseOptions& options = {},
                             std::vector<std::string>* warnings = nullptr);
/// Canonical text: sorted keys, two-space indent, trailing newline.
std::string emit_spec(const SpecDocument& doc);

/// Shortest decimal string that parses back to the same double.
std::string decimal_string(double v);

struct TransferEntry {
  std::string source;
  std::string target;
  TransferSystem system;
};

/// Everything a document declares, built and checked.
struct ResolvedSpec {
  std::map<std::string, FiniteSet> sets;
  std::map<std::string, FiniteSystem> relations;
  std::map<std::string, DeclaredMeasures> measures;
  /// Learning blocks and the packs of a scenario block, by system name.
  std::map<std::string, SystemPack> systems;
  std::map<std::string, TransferEntry> transfers;
  std::optional<ScenarioSpec> scenario;
  std::optional<ScenarioFacts> scenario_facts;
  /// Ladder alphas of the scenario block, when given.
  std::vector<double> ladder;

  /// Throws ResolutionError.
  const SystemPack& system(const std::string& name) const;
  const TransferEntry& transfer(const std::string& name) const;
  const FiniteSystem& relation(const std::string& name) const;
};

/// Throws ResolutionError / UnknownElement for dangling references and the
/// construction errors of the library (InvalidMeasure, ArityMismatch,
/// InvariantViolation, MissingSourceArtifact, ...) for ill-formed blocks.
ResolvedSpec resolve(const SpecDocument& doc);

ScenarioSpec scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioSpec& s);

/// Self-contained document for a generated pair: sets, measures, learning
/// blocks with data and truth, and an instance-transfer block.
SpecDocument document_for_pair(const ScenarioPair& pair, const nlohmann::json& analysis = nlohmann::json::object());

}  // namespace tlsys
