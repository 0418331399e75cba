#pragma once

// Whether transfer helps: negative transfer, transferability neighborhoods
// over a finite universe, and the generalist predicate.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tlsys/behavioral.hpp"
#include "tlsys/neighborhood.hpp"
#include "tlsys/structural.hpp"
#include "tlsys/transfer.hpp"

namespace tlsys {

struct SeedRun {
  /// Root the datasets of this run were derived from.
  std::uint64_t seed = 0;
  std::size_t n_source = 0;
  std::size_t n_target = 0;
  double epsilon_with = 0.0;
  double epsilon_without = 0.0;
  std::size_t theta_with = 0;
  std::size_t theta_without = 0;
  bool negative = false;
};

struct TransferOutcome {
  /// Means over runs.
  double epsilon_with = 0.0;
  double epsilon_without = 0.0;
  double margin = 0.0;
  bool negative = false;
  EvaluationMode mode = EvaluationMode::truth_table;
  std::uint64_t root_seed = 0;
  std::vector<SeedRun> runs;

  std::size_t negative_runs() const noexcept {
    std::size_t n = 0;
    for (const auto& r : runs) n += r.negative;
    return n;
  }
};

struct NegativeTransferOptions {
  /// 0: one run on the packs' own data. Otherwise run s draws fresh data
  /// from root_seed + s.
  std::size_t seeds = 0;
  std::uint64_t root_seed = 0;
};

/// First half for training, second for evaluation, after a seeded shuffle.
std::pair<Dataset, Dataset> holdout_split(const Dataset& d, std::uint64_t seed);

/// Datasets of run `s`: the packs' data for seeds = 0, else fresh draws.
std::pair<Dataset, Dataset> run_datasets(const SystemPack& source, const SystemPack& target,
                                         const NegativeTransferOptions& options, std::size_t s);

/// ε(H_Tr(A_Tr(d))) against ε(H_T(A_T(d_T))), both against the target
/// truth weighted by its P(X), or against a held-out half of d_T when the
/// target has no truth. Negative iff the mean without is strictly smaller.
TransferOutcome detect_negative_transfer(const SystemPack& source, const SystemPack& target,
                                         const TransferRecipe& recipe, const NegativeTransferOptions& options = {});

enum class TransferabilityMode { empirical, structural, behavioral };
enum class ThresholdKind { fixed, target_alone };
enum class EquivalenceMode { raw, signature };

std::string_view to_string(TransferabilityMode m) noexcept;
TransferabilityMode parse_transferability_mode(std::string_view s);

struct TransferabilityOptions {
  TransferabilityMode mode = TransferabilityMode::empirical;
  double epsilon_star = 0.1;
  /// target_alone compares each pair against its own target-alone error.
  ThresholdKind threshold = ThresholdKind::fixed;
  TransferRecipe recipe;
  NegativeTransferOptions runs;
  EquivalenceMode equivalence = EquivalenceMode::raw;
  /// TV radius on P(X,Y) for signature equivalence.
  double tau = 1e-9;
  StructuralOptions structural;
  BehavioralOptions behavioral;
};

struct NeighborhoodReport {
  Neighborhood neighborhood;
  TransferabilityMode mode = TransferabilityMode::empirical;
  ThresholdKind threshold = ThresholdKind::fixed;
  double epsilon_star = 0.0;
  EquivalenceMode equivalence = EquivalenceMode::raw;
  double tau = 0.0;
  /// Signature class of each entry, in entry order (signature mode only).
  std::vector<std::size_t> signature_class;
  std::size_t universe_size = 0;
  std::size_t cardinality = 0;
};

/// Greedy classes in universe order: a member joins the first class whose
/// representative's P(X,Y) lies within τ in TV. Members without measures,
/// or over other supports, stand alone.
std::vector<std::size_t> behavior_signatures(std::span<const SystemPack> universe, double tau);

/// Neighborhood of the system in the given role. Empirical mode counts
/// members with mean ε_T ≤ threshold; structural and behavioral modes
/// delegate (their thresholds come from epsilon_star).
NeighborhoodReport transferability(const SystemPack& system, std::span<const SystemPack> universe, Role role,
                                   const TransferabilityOptions& options = {});

struct GeneralistOptions {
  double epsilon_star = 0.1;
  TransferRecipe recipe;
};

struct GeneralistEvidence {
  std::size_t index = 0;
  std::string name;
  /// Smallest prefix length that qualified and its error.
  std::size_t shots = 0;
  double epsilon = 0.0;
};

struct GeneralistReport {
  bool generalist = false;
  std::size_t n = 0;
  std::size_t t = 0;
  std::vector<GeneralistEvidence> qualifying;
  std::vector<SkippedMember> skipped;
};

/// Transfers from the system to each member using prefixes of the member's
/// data of length 0..n; a member qualifies once some prefix reaches ε_T < ε*.
GeneralistReport is_generalist(const SystemPack& system, std::span<const SystemPack> universe, std::size_t n,
                               std::size_t t, const GeneralistOptions& options = {});

}  // namespace tlsys
