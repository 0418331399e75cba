#pragma once

// Structural similarity: roughness of a source-to-target homomorphism and
// the search for common homomorphic images (candidates, valid, useful).

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tlsys/learning.hpp"
#include "tlsys/neighborhood.hpp"
#include "tlsys/relations.hpp"
#include "tlsys/transfer.hpp"

namespace tlsys {

struct RoughnessReport {
  Morphism morphism;
  QuotientReport quotient;
  MorphismProperties properties;
  bool relation_preserving = false;
  /// Both maps invertible and membership reflected: an isomorphism.
  bool minimal = false;
  /// |S/m| / |S|; 1 for an empty relation. A summary of our own, not a
  /// quantity with a prescribed definition.
  double roughness_ratio = 1.0;
  bool ratio_is_summary = true;
  std::string direction = "source->target";
};

/// Throws IncompatibleMorphism when the maps do not run between the
/// flattened input and output objects of the two systems.
RoughnessReport transfer_roughness(const FiniteSystem& s_s, const FiniteSystem& s_t, const Morphism& m);

/// Relation [X, Y] of a pack: the graph of its truth, else the support of its data.
FiniteSystem system_relation(const SystemPack& pack);
FiniteSystem function_graph(const FiniteSet& xs, const FiniteSet& ys, const std::vector<std::size_t>& f);

inline constexpr std::size_t kMaxLatentCarrier = 4;

/// A structure X × Y carrying the graph of g, in canonical labels: g sends
/// consecutive blocks of X to y0, y1, ... with non-increasing block sizes.
struct StructureCandidate {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<std::size_t> g;
  FiniteSystem structure;
  Morphism source_witness;
  Morphism target_witness;
  /// m_y: Y → Y_T, set once the candidate is known valid.
  std::optional<std::vector<std::size_t>> output_map;
  /// Measured target error, set by useful_structures.
  std::optional<double> epsilon;
};

struct StructureSearchReport {
  std::vector<StructureCandidate> candidates;
  std::vector<StructureCandidate> valid;
  std::vector<StructureCandidate> useful;
  std::size_t size_bound = 0;
};

/// Canonical structure whose non-empty fibers have sizes `shape` (non-increasing, at most ny of them).
StructureCandidate canonical_candidate(std::size_t ny, const std::vector<std::size_t>& shape);
/// Non-empty fiber sizes of g: [nx] → [ny] in non-increasing order; invariant under renaming.
std::vector<std::size_t> fiber_shape(const std::vector<std::size_t>& g, std::size_t ny);

struct StructureSearchOptions {
  std::size_t size_bound = kMaxLatentCarrier;
  /// Carrier cap handed to morphism enumeration.
  std::size_t cap = 16;
};

/// Every canonical structure with |X|, |Y| ≤ bound that both systems map
/// onto, with the first onto witness from each. Throws CapExceeded for
/// bounds above kMaxLatentCarrier.
StructureSearchReport homomorphic_structures(const FiniteSystem& s_s, const FiniteSystem& s_t,
                                             const StructureSearchOptions& options = {});

/// Keeps candidates for which some onto witness (ϱ_T, ϑ_T) from s_t admits
/// m_y: Y → Y_T with m_y(g(ϱ_T(x))) = y on every (x, y) of s_t; that
/// witness and m_y are recorded.
StructureSearchReport valid_structures(StructureSearchReport report, const FiniteSystem& s_t, const FiniteSet& y_t,
                                       const StructureSearchOptions& options = {});

/// Target error of a transfer through one candidate.
using StructureRunner = std::function<double(const StructureCandidate&)>;

/// Valid candidates with runner(c) ≤ ε*, ordered by error ascending.
StructureSearchReport useful_structures(StructureSearchReport report, const StructureRunner& runner, double epsilon_star);

/// Latent system of a candidate: every function X_L → Y_L under exact ERM.
LearningSystem latent_system(const StructureCandidate& c);
/// Feature-representation spec routing both systems through a valid candidate.
FeatureRepSpec latent_spec(const StructureCandidate& c, const LearningSystem& source, const LearningSystem& target);

/// Default runner: feature-representation transfer from source.data through
/// the candidate, learning on target.data, error against the target truth
/// weighted by its P(X).
StructureRunner latent_transfer_runner(const SystemPack& source, const SystemPack& target);

/// Full pipeline for one pair.
StructureSearchReport structure_search(const SystemPack& source, const SystemPack& target, double epsilon_star,
                                       const StructureSearchOptions& options = {});
StructureSearchReport structure_search(const SystemPack& source, const SystemPack& target, double epsilon_star,
                                       const StructureRunner& runner, const StructureSearchOptions& options = {});

using RunnerFactory = std::function<StructureRunner(const SystemPack& source, const SystemPack& target)>;

struct StructuralOptions {
  double epsilon_star = 0.1;
  StructureSearchOptions search;
  /// latent_transfer_runner when empty.
  RunnerFactory runner;
};

/// Members sharing a useful homomorphic structure with the system in the
/// given role; entry value is the best measured error (+inf when none).
Neighborhood structural_transferability(const SystemPack& system, std::span<const SystemPack> universe, Role role,
                                        const StructuralOptions& options = {});

}  // namespace tlsys
