#pragma once

// Transfer learning systems: source knowledge, pooled data, the four
// algorithm structures (instance, parameter, both, feature-representation),
// n-shot accounting and setting classification.

#include <optional>
#include <string>
#include <vector>

#include "tlsys/learning.hpp"

namespace tlsys {

enum class Approach { instance, parameter, instance_parameter, feature_representation };

std::string_view to_string(Approach a) noexcept;
/// Accepts "instance", "parameter", "instance&parameter" / "both", "feature-representation".
Approach parse_approach(std::string_view s);

/// K_S: source instances and/or a source parameter.
struct Knowledge {
  std::optional<Dataset> instances;
  std::optional<std::size_t> parameter;

  bool empty() const noexcept { return !instances && !parameter; }
};

/// Throws MissingSourceArtifact when the requested pieces are absent.
Knowledge select_knowledge(const LearningSystem& source, const std::optional<Dataset>& source_data,
                           std::optional<std::size_t> source_theta, Approach kind);

/// Total map between two finite sets given by element indices.
struct SetMap {
  FiniteSet domain;
  FiniteSet codomain;
  std::vector<std::size_t> image;

  std::size_t operator()(std::size_t i) const { return image[i]; }
  /// Same set on both sides and the identity table.
  bool is_identity() const;
  static SetMap identity(const FiniteSet& s);
};

/// Pointwise data map D_i -> D_L given by maps on inputs and outputs.
struct DataMap {
  SetMap x;
  SetMap y;

  bool is_identity() const { return x.is_identity() && y.is_identity(); }
  Dataset operator()(const Dataset& d) const;
};

/// Latent learning system S_L and the maps m_DT, m_DS, m_XT, m_YL.
struct FeatureRepSpec {
  LearningSystem latent;
  DataMap m_dt;
  DataMap m_ds;
  SetMap m_xt;
  SetMap m_yl;
};

struct TransferSystem {
  LearningSystem source;
  LearningSystem target;
  Knowledge knowledge;
  Approach approach = Approach::instance;
  /// H_Tr for the non-latent approaches; the target's class when absent.
  std::optional<HypothesisClass> hypotheses_tr;
  std::optional<FeatureRepSpec> latent;
  /// Penalty weight of the parameter anchor.
  double lambda = 0.1;
  /// Weight of each pooled source instance relative to a target one.
  double source_weight = 1.0;
};

/// Construction invariants: approach-specific knowledge present, maps total
/// and well-typed, H_Tr a class over X_T × Y_T. Throws MissingSourceArtifact,
/// IncompatibleSupport or InvariantViolation.
void validate(const TransferSystem& ts);

/// Multiset union of d_T and the source instances, tagged by origin. Source
/// indices are re-expressed over the target sets, so X_S×Y_S and X_T×Y_T
/// must hold the same elements (IncompatibleSupport otherwise).
Dataset pool_data(const Knowledge& k, const Dataset& d_t, const LearningSystem& source, const LearningSystem& target,
                  double source_weight = 1.0);
/// Pooled data in the space where the transfer system learns; for the
/// feature-representation approach that is m_D(d) in the latent space.
Dataset pool_data(const TransferSystem& ts, const Dataset& d_t);

/// The class the transfer algorithm searches: H_Tr, or for the latent
/// approach the composite θ, x ↦ m_YL(H_L(θ, m_XT(x))) over Θ_L × X_T.
HypothesisClass effective_hypotheses(const TransferSystem& ts);

/// The learning system A_Tr effectively runs on the pooled data.
LearningSystem effective_learner(const TransferSystem& ts);

struct TransferTrace {
  Approach approach;
  /// Data handed to the inner algorithm (latent coordinates for the latent approach).
  Dataset pooled;
  std::size_t target_count = 0;
  std::size_t source_count = 0;
  std::optional<std::size_t> anchor;
  double objective = 0.0;
  std::optional<double> target_risk;
  std::optional<double> source_risk;
};

struct TransferRun {
  std::size_t theta = 0;
  Atom theta_label{0};
  /// S_Tr(d, x) for every x in X_T.
  std::vector<std::size_t> predictions;
  TransferTrace trace;
};

TransferRun run_transfer(const TransferSystem& ts, const Dataset& d_t);

/// Which pieces A_Tr consumes; one row per algorithm structure.
struct ApproachRow {
  Approach approach;
  bool target_data = true;
  bool source_data = false;
  bool source_parameters = false;
  bool latent_maps = false;
  std::string algorithm_structure;
};

ApproachRow classify_approach(const TransferSystem& ts);

enum class SettingLabel { trivial, transductive, inductive, both, none };

std::string_view to_string(SettingLabel l) noexcept;

struct SettingClassification {
  bool homogeneous = false;
  bool input_structural_eq = false;
  bool output_structural_eq = false;
  bool marginal_eq = false;
  bool posterior_eq = false;
  SettingLabel label = SettingLabel::none;
};

inline constexpr double kMeasureTolerance = 1e-9;

/// P(X) and P(Y|X) compared cell-wise within tau after aligning supports;
/// measures over different sets are unequal. Throws MissingMeasure.
SettingClassification classify_setting(const LearningSystem& source, const DeclaredMeasures* source_measures,
                                       const LearningSystem& target, const DeclaredMeasures* target_measures,
                                       double tau = kMeasureTolerance);
SettingClassification classify_setting(const SystemPack& source, const SystemPack& target, double tau = kMeasureTolerance);

struct ShotCount {
  std::size_t n = 0;
  bool zero_shot = false;
};

ShotCount n_shot(const TransferSystem& ts, const Dataset& d_t);

/// Learning view of S_Tr over a family of target datasets: D indexes d_T
/// with K_S fixed, A_Tr is run_transfer, H_Tr the effective class and the
/// input-output representation is evaluated through the transfer path.
LearningView transfer_view(const TransferSystem& ts, std::span<const Dataset> target_datasets);

/// Exhaustive check that S_Tr is a learning system. Throws CapExceeded when
/// |D|·|X_T|·|Y_T|·|Θ_Tr| exceeds 10^7.
AxiomReport verify_transfer_is_learning_system(const TransferSystem& ts, std::span<const Dataset> target_datasets);
AxiomReport verify_transfer_is_learning_system(const TransferSystem& ts, std::span<const Dataset> target_datasets,
                                               const LearningMaterialization& reference);

/// Prediction of the latent route m_YL(S_L(m_D(d), m_XT(x))) computed from
/// S_L alone, for comparison with S_Tr(d, x).
std::vector<std::size_t> latent_path_predictions(const TransferSystem& ts, const Dataset& d_t);

struct LatentCases {
  bool target_map_identity = false;
  bool source_map_identity = false;
  bool latent_equals_target = false;
  bool latent_equals_source = false;
  bool homogeneous = false;
};

LatentCases latent_cases(const TransferSystem& ts);

/// How to assemble a transfer system once source data is known.
struct TransferRecipe {
  Approach approach = Approach::instance;
  double lambda = 0.1;
  double source_weight = 1.0;
  std::optional<HypothesisClass> hypotheses_tr;
  std::optional<FeatureRepSpec> latent;
};

/// K_S from d_S and, when the approach needs it, θ_S = A_S(d_S).
TransferSystem make_transfer(const TransferRecipe& recipe, const LearningSystem& source, const LearningSystem& target,
                             const Dataset& d_s);

}  // namespace tlsys
