#pragma once

// Behavioral similarity: estimated measures, divergences between them, the
// transfer distance δ_T and the ε_T ≤ ε_S + δ_T + C decomposition.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tlsys/measures.hpp"
#include "tlsys/neighborhood.hpp"
#include "tlsys/transfer.hpp"

namespace tlsys {

enum class Over { x, y, xy, y_given_x };

std::string_view to_string(Over o) noexcept;
/// "X", "Y", "XY", "Y|X".
Over parse_over(std::string_view s);

/// Relative frequencies (cᵢ + ε)/(n + kε) over X, Y or X×Y (product_support
/// order). Example weights count as multiplicities. Throws EmptyDataset, and
/// InvalidSpec for Over::y_given_x.
EmpiricalMeasure estimate_measure(const Dataset& d, const FiniteSet& xs, const FiniteSet& ys, Over over,
                                  double smoothing = 0.0);
/// Row-wise estimate of P(Y|X); rows without data or smoothing are uniform.
ConditionalMeasure estimate_posterior(const Dataset& d, const FiniteSet& xs, const FiniteSet& ys,
                                      double smoothing = 0.0);
DeclaredMeasures estimate_measures(const Dataset& d, const FiniteSet& xs, const FiniteSet& ys, double smoothing = 0.0);

enum class DivergenceKind { kl, hellinger, tv, w1, mmd };

std::string_view to_string(DivergenceKind k) noexcept;
DivergenceKind parse_divergence(std::string_view s);
/// KL and MMD are not metrics on measures in general.
bool is_metric(DivergenceKind k) noexcept;

enum class KernelKind { automatic, exact_match, gaussian, matrix };

struct KernelSpec {
  KernelKind kind = KernelKind::automatic;
  /// Gaussian bandwidth; median pairwise distance of the embedding when absent.
  std::optional<double> bandwidth;
  /// Gram matrix over the support in support order, for KernelKind::matrix.
  std::vector<std::vector<double>> gram;
};

/// Gram matrix the MMD of measures over `p`'s support uses. Automatic picks
/// gaussian when `p` carries an embedding and exact match otherwise.
std::vector<std::vector<double>> kernel_matrix(const EmpiricalMeasure& p, const KernelSpec& k);

/// Divergence D(p ‖ q). q is aligned to p's support first (SupportMismatch).
/// KL is +inf when q misses mass of p. W1 uses p's coordinates, or integer
/// atoms in their natural order (MissingOrder otherwise). MMD needs an
/// embedding for the gaussian kernel (MissingKernel).
double divergence(const EmpiricalMeasure& p, const EmpiricalMeasure& q, DivergenceKind kind, const KernelSpec& kernel = {});

/// Pushforward of a measure through a total map between finite sets.
EmpiricalMeasure pushforward(const EmpiricalMeasure& p, const SetMap& m);

/// Maps that carry both systems' measures into a common space before comparing.
struct Alignment {
  DataMap source;
  DataMap target;
};

/// δ_T between declared behaviors. For Y|X the row divergences are averaged
/// under the target P(X). Without an alignment the relevant supports must
/// hold the same elements (SupportMismatch otherwise).
double transfer_distance(const DeclaredMeasures& source, const DeclaredMeasures& target, Over on, DivergenceKind kind,
                         const Alignment* align = nullptr, const KernelSpec& kernel = {});

inline constexpr double kDefaultEta = 0.05;
inline constexpr double kDefaultSmoothing = 1e-9;
inline constexpr const char* kComplexityFormula = "sqrt((ln|Theta| + ln(1/eta)) / (2n)), n = |d_T| + |d_S|";

/// √((ln|Θ| + ln(1/η)) / (2n)); +inf for n = 0.
double complexity_term(std::size_t theta_count, std::size_t n, double eta = kDefaultEta);

enum class DeltaSource { estimated, declared };

struct BoundOptions {
  double eta = kDefaultEta;
  double smoothing = kDefaultSmoothing;
  DivergenceKind kind = DivergenceKind::tv;
  DeltaSource delta_source = DeltaSource::estimated;
  KernelSpec kernel;
};

/// Ground truth and behavior the bound is evaluated against.
struct BoundContext {
  EvaluationContext source;
  EvaluationContext target;
  /// Weights of X for ε_S / ε_T and, with DeltaSource::declared, the δ_T inputs.
  const EmpiricalMeasure* source_marginal = nullptr;
  const EmpiricalMeasure* target_marginal = nullptr;
};

struct BoundReport {
  double epsilon_s = 0.0;
  double epsilon_t = 0.0;
  double delta_t = 0.0;
  DivergenceKind delta_kind = DivergenceKind::tv;
  DeltaSource delta_source = DeltaSource::estimated;
  double complexity_c = 0.0;
  std::string c_formula = kComplexityFormula;
  double eta = kDefaultEta;
  std::size_t n = 0;
  std::size_t theta_count = 0;
  std::size_t theta_s = 0;
  std::size_t theta_tr = 0;
  bool holds = false;

  double rhs() const noexcept { return epsilon_s + delta_t + complexity_c; }
};

/// ε_S: error of A_S(d_S) against the source reference; ε_T: error of the
/// transferred hypothesis run_transfer(ts, d_T) against the target
/// reference; δ_T on P(X); C over |Θ_Tr|. Throws HeterogeneousSetting.
BoundReport bound_check(const TransferSystem& ts, const Dataset& d_s, const Dataset& d_t, const BoundContext& ctx,
                        const BoundOptions& options = {});
/// Same, for two packs: the pack data and truths, with the recipe building ts.
BoundReport bound_check(const TransferRecipe& recipe, const SystemPack& source, const SystemPack& target,
                        const BoundOptions& options = {});

enum class BehavioralMode { bound, distance_only };

struct BehavioralOptions {
  BehavioralMode mode = BehavioralMode::bound;
  /// Threshold on ε_S + δ_T + C in bound mode.
  double epsilon_star = 0.1;
  /// Threshold on δ_T in distance-only mode.
  double delta_star = 0.1;
  TransferRecipe recipe;
  BoundOptions bound;
};

/// Members whose behavioral score is strictly below the threshold.
/// Heterogeneous pairs are skipped and reported; so are members lacking what
/// the mode needs (truth or measures).
Neighborhood behavioral_transferability(const SystemPack& system, std::span<const SystemPack> universe, Role role,
                                        const BehavioralOptions& options = {});

}  // namespace tlsys
