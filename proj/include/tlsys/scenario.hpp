#pragma once

// Synthetic source/target pairs over a grid of symbolic inputs with
// controlled marginal shift, posterior flip and structural edits.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tlsys/learning.hpp"

namespace tlsys {

enum class TruthFamily { random, modular };
enum class ScenarioEdit { none, drop_input, truncate_output };
enum class HypothesisFamily { all_functions, random_subset };

std::string_view to_string(TruthFamily f) noexcept;
std::string_view to_string(ScenarioEdit e) noexcept;
std::string_view to_string(HypothesisFamily h) noexcept;
TruthFamily parse_truth_family(std::string_view s);
ScenarioEdit parse_edit(std::string_view s);
HypothesisFamily parse_hypothesis_family(std::string_view s);

struct ScenarioSpec {
  /// Inputs are words of length `arity` over `alphabet` symbols.
  std::size_t alphabet = 2;
  std::size_t arity = 3;
  std::size_t labels = 2;
  TruthFamily truth = TruthFamily::random;
  /// Source marginal (1-α)·base + α·mirror(base).
  double alpha = 0.0;
  /// Source posterior (1-β)·P_T + β·(P_T shifted by one label, cyclically).
  double beta = 0.0;
  /// Mass the base marginal puts on the second half of the inputs.
  double leak = 0.1;
  /// Target posterior (1-ν)·δ_f(x) + ν·uniform.
  double label_noise = 0.0;
  ScenarioEdit edit = ScenarioEdit::none;
  /// Dropped component for drop_input; kept label count for truncate_output.
  std::size_t edit_arg = 0;
  std::size_t n_source = 0;
  std::size_t n_target = 0;
  std::uint64_t seed = 0;
  HypothesisFamily hypotheses = HypothesisFamily::all_functions;
  /// Size of a random_subset class.
  std::size_t hypothesis_count = 16;
  std::string source_name = "source";
  std::string target_name = "target";
};

/// Throws InvalidSpec.
void validate(const ScenarioSpec& spec);

struct ScenarioFacts {
  /// α·TV(base, mirror); absent when the input sets differ.
  std::optional<double> tv_x;
  bool posteriors_equal = false;
  bool homogeneous = false;
};

struct ScenarioPair {
  SystemPack source;
  SystemPack target;
  ScenarioFacts facts;
  ScenarioSpec spec;
};

/// Input set of a grid: "x" followed by one digit per component, first
/// component most significant. Alphabets above 10 use two digits per component.
FiniteSet grid_inputs(std::size_t alphabet, std::size_t arity, const std::string& name = "X");

/// Declared systems plus datasets drawn with derive_seed(seed, name, role),
/// role "source" or "target", matching run 0 of a negative-transfer scan
/// rooted at spec.seed.
ScenarioPair generate_pair(const ScenarioSpec& spec);

/// Pairs that differ only in α; truth, seeds and hence the sampling
/// uniforms are shared, so the datasets are coupled across the ladder.
std::vector<ScenarioPair> shift_ladder(const ScenarioSpec& spec, const std::vector<double>& alphas);

}  // namespace tlsys
