#pragma once

// The tlsys command line: validate, analyze and scenario verbs, their
// reports and the exit-code contract.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tlsys/error.hpp"
#include "tlsys/spec.hpp"

namespace tlsys {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { exit_ok = 0, exit_failed = 1, exit_parse = 2, exit_resolution = 3, exit_invariant = 4, exit_analysis = 5 };

/// Exit code for a library error raised while loading (parse/resolve) or
/// while analyzing.
int exit_code_for(ErrorCode code, bool during_analysis);

struct AnalyzeFlags {
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
  /// Overrides of analysis-block fields given on the command line.
  nlohmann::json overrides = nlohmann::json::object();
};

/// "sha256:<hex>" of the bytes.
std::string content_digest(const std::string& bytes);

/// Results section of an analysis; `kind` falls back to analysis.kind.
nlohmann::json analyze(const ResolvedSpec& spec, const SpecDocument& doc, const std::string& kind,
                       const AnalyzeFlags& flags);

/// Construction checks of every transfer block, including the learning
/// system check over prefixes of the target data.
nlohmann::json validate_transfers(const ResolvedSpec& spec);

/// Report text (canonical JSON, trailing newline).
std::string render(const nlohmann::json& report);

/// Runs the tool on argv[1..]. Reports go to `out` (or --out), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tlsys
