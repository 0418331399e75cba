#pragma once

// Learning systems over finite carriers: datasets, finite hypothesis classes,
// empirical risk minimization as a goal-seeking pair, and exhaustive checks
// that a system really is the cascade A∘H with consistent goal and seeking.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tlsys/measures.hpp"
#include "tlsys/relations.hpp"

namespace tlsys {

enum class Origin : std::uint8_t { unspecified, source, target };

std::string_view to_string(Origin o) noexcept;

struct Example {
  std::size_t x = 0;
  std::size_t y = 0;
  Origin origin = Origin::unspecified;
  double weight = 1.0;

  bool operator==(const Example&) const = default;
};

/// Multiset of (x, y) index pairs.
struct Dataset {
  std::vector<Example> examples;
  std::string tag;

  std::size_t size() const noexcept { return examples.size(); }
  bool empty() const noexcept { return examples.empty(); }
  /// First n examples.
  Dataset prefix(std::size_t n) const;
};

Dataset make_dataset(const FiniteSet& xs, const FiniteSet& ys, const std::vector<std::pair<Atom, Atom>>& pairs,
                     std::string tag = {}, Origin origin = Origin::unspecified);

/// Total table H: Θ × X → Y.
class HypothesisClass {
 public:
  /// table[θ·|X| + x] is the output index. Throws ArityMismatch / UnknownElement.
  HypothesisClass(FiniteSet theta, FiniteSet inputs, FiniteSet outputs, std::vector<std::size_t> table);

  /// Every function X → Y, ordered lexicographically with x = 0 most
  /// significant, so the smallest index consistent with a partial
  /// assignment puts the first output on every free point.
  /// Throws CapExceeded above 65536 functions.
  static HypothesisClass all_functions(FiniteSet inputs, FiniteSet outputs, const std::string& prefix = "h");

  const FiniteSet& theta() const noexcept { return theta_; }
  const FiniteSet& inputs() const noexcept { return inputs_; }
  const FiniteSet& outputs() const noexcept { return outputs_; }
  const std::vector<std::size_t>& table() const noexcept { return table_; }

  std::size_t predict(std::size_t theta, std::size_t x) const { return table_[theta * inputs_.size() + x]; }
  std::span<const std::size_t> row(std::size_t theta) const {
    return std::span<const std::size_t>(table_).subspan(theta * inputs_.size(), inputs_.size());
  }
  void set_prediction(std::size_t theta, std::size_t x, std::size_t y);

 private:
  FiniteSet theta_;
  FiniteSet inputs_;
  FiniteSet outputs_;
  std::vector<std::size_t> table_;
};

enum class LossKind { zero_one, squared };

std::string_view to_string(LossKind k) noexcept;

struct ExactErm {};

/// Risk plus λ times the normalized Hamming distance between the output
/// vectors of θ and the anchor θ₀. With no data only the penalty remains.
struct PenalizedErm {
  std::size_t anchor = 0;
  double lambda = 0.1;
};

using Algorithm = std::variant<ExactErm, PenalizedErm>;

class LearningSystem {
 public:
  /// Squared loss needs integer output atoms (NonNumericLabel otherwise).
  LearningSystem(std::string name, HypothesisClass hypotheses, LossKind loss = LossKind::zero_one,
                 Algorithm algorithm = ExactErm{});

  const std::string& name() const noexcept { return name_; }
  const HypothesisClass& hypotheses() const noexcept { return hypotheses_; }
  HypothesisClass& hypotheses() noexcept { return hypotheses_; }
  const FiniteSet& x_set() const noexcept { return hypotheses_.inputs(); }
  const FiniteSet& y_set() const noexcept { return hypotheses_.outputs(); }
  const FiniteSet& theta_set() const noexcept { return hypotheses_.theta(); }
  LossKind loss_kind() const noexcept { return loss_; }
  const Algorithm& algorithm() const noexcept { return algorithm_; }

  double loss(std::size_t y, std::size_t y_hat) const { return loss_table_[y * y_set().size() + y_hat]; }

  LearningSystem with_algorithm(Algorithm a) const;
  LearningSystem renamed(std::string name) const;

 private:
  std::string name_;
  HypothesisClass hypotheses_;
  LossKind loss_;
  Algorithm algorithm_;
  std::vector<double> loss_table_;
};

/// (Σ wᵢ L(yᵢ, h(xᵢ,θ))) / Σ wᵢ; with unit weights this is the usual
/// (1/l) Σ L. Throws EmptyDataset.
double empirical_risk(const Dataset& d, std::size_t theta, const LearningSystem& sys);

/// Fraction of X on which θ and θ' predict differently.
double hypothesis_distance(const LearningSystem& sys, std::size_t theta, std::size_t other);

/// The goal value G(d, θ) the system's algorithm minimizes.
double goal_value(const Dataset& d, std::size_t theta, const LearningSystem& sys);

/// Exhaustive argmin of the goal over Θ; ties go to the smallest index.
/// Throws EmptyDataset for exact ERM on empty data.
std::size_t run_algorithm(const Dataset& d, const LearningSystem& sys);

std::size_t evaluate(const LearningSystem& sys, std::size_t theta, std::size_t x);
/// Throws UnknownElement.
Atom evaluate(const LearningSystem& sys, const Atom& theta, const Atom& x);

enum class EvaluationMode { truth_table, holdout };

std::string_view to_string(EvaluationMode m) noexcept;

/// Either a declared truth f: X → Y (as output indices) or a held-out dataset.
struct EvaluationContext {
  std::variant<std::vector<std::size_t>, Dataset> reference;
  double epsilon_star = 0.0;

  EvaluationMode mode() const noexcept {
    return std::holds_alternative<Dataset>(reference) ? EvaluationMode::holdout : EvaluationMode::truth_table;
  }
  static EvaluationContext truth(std::vector<std::size_t> f, double epsilon_star = 0.0) { return {std::move(f), epsilon_star}; }
  static EvaluationContext holdout(Dataset d, double epsilon_star = 0.0) { return {std::move(d), epsilon_star}; }
};

/// Expected loss of h(θ) against the reference. Truth mode weighs X by
/// `weight` (uniform if absent); holdout mode averages over the held-out set.
double generalization_error(const LearningSystem& sys, std::size_t theta, const EvaluationContext& ctx,
                            const EmpiricalMeasure* weight = nullptr);
/// Same, for an explicit prediction table over X.
double prediction_error(const LearningSystem& sys, std::span<const std::size_t> predictions,
                        const EvaluationContext& ctx, const EmpiricalMeasure* weight = nullptr);

// ---------------------------------------------------------------------------
// Axiom verification

/// Everything needed to materialize and check a learning relation over a
/// finite family of datasets. Learning systems and transfer systems both
/// reduce to this.
struct LearningView {
  FiniteSet theta;
  FiniteSet inputs;
  FiniteSet outputs;
  std::size_t dataset_count = 0;
  /// H(θ, x)
  std::function<std::size_t(std::size_t, std::size_t)> predict;
  /// G(d, θ)
  std::function<double(std::size_t, std::size_t)> goal;
  /// A(d)
  std::function<std::size_t(std::size_t)> algorithm;
  /// Input-output representation evaluated directly, S(d, x).
  std::function<std::size_t(std::size_t, std::size_t)> respond;
};

LearningView make_view(const LearningSystem& sys, std::span<const Dataset> datasets);

enum class SeekRule { argmin, argmax };

/// The learning relation written out as finite relations: A over [D,Θ],
/// H over [Θ,X,Y], S over [D,X,Y] and (G, E) in learning form.
struct LearningMaterialization {
  FiniteSet data_labels;
  FiniteSystem algorithm;
  FiniteSystem hypotheses;
  FiniteSystem io;
  GoalSeekingSpec goal_seeking;
};

LearningMaterialization materialize(const LearningView& view, SeekRule seek = SeekRule::argmin);
LearningMaterialization materialize(const LearningSystem& sys, std::span<const Dataset> datasets,
                                    SeekRule seek = SeekRule::argmin);

/// Atom encoding of a goal value; exact round trip through value_of.
Atom value_atom(double v);
double value_of(const Atom& a);

struct AxiomReport {
  /// A∘H reproduces the input-output representation.
  std::vector<Violation> cascade;
  /// (G, E) consistent with A and the functional system.
  std::vector<Violation> goal_seeking;
  /// G is the (penalized) empirical risk and A its tie-broken minimizer.
  std::vector<Violation> erm;

  bool pass() const noexcept { return cascade.empty() && goal_seeking.empty() && erm.empty(); }
};

/// Checks a materialization against the live view: the cascade uses the
/// view's H, everything else comes from the reference.
AxiomReport check_axioms(const LearningView& view, const LearningMaterialization& reference);

AxiomReport verify_learning_axioms(const LearningSystem& sys, std::span<const Dataset> datasets);
AxiomReport verify_learning_axioms(const LearningSystem& sys, std::span<const Dataset> datasets,
                                   const LearningMaterialization& reference);

// ---------------------------------------------------------------------------

/// A learning system together with what the analyses need about it: declared
/// behavior, a truth table, a dataset and its nominal sample size.
struct SystemPack {
  LearningSystem system;
  std::optional<DeclaredMeasures> measures;
  std::optional<std::vector<std::size_t>> truth;
  Dataset data;
  std::size_t sample_size = 0;
  /// Draws a fresh dataset from a seed; declared measures are used when empty.
  std::function<Dataset(std::uint64_t)> sampler;

  const std::string& name() const noexcept { return system.name(); }
  /// Truth-mode context; throws MissingTruth.
  EvaluationContext truth_context(double epsilon_star = 0.0) const;
  /// P(X) when declared, else nullptr.
  const EmpiricalMeasure* marginal() const noexcept { return measures ? &measures->marginal : nullptr; }
};

}  // namespace tlsys
