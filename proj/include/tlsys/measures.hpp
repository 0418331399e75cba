#pragma once

#include <optional>
#include <vector>

#include "tlsys/relations.hpp"

namespace tlsys {

inline constexpr double kNormalizationTolerance = 1e-12;

/// Probability table over a finite support.
class EmpiricalMeasure {
 public:
  /// Throws InvalidMeasure unless probs are non-negative, aligned to the
  /// support and sum to 1 within `tolerance`.
  EmpiricalMeasure(FiniteSet support, std::vector<double> probs, double tolerance = kNormalizationTolerance);

  static EmpiricalMeasure uniform(FiniteSet support);
  static EmpiricalMeasure point_mass(FiniteSet support, std::size_t at);

  const FiniteSet& support() const noexcept { return support_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const { return probs_.at(i); }
  std::size_t size() const noexcept { return probs_.size(); }

  /// Real coordinates of the support points; they induce the total order W1 uses.
  const std::optional<std::vector<double>>& coordinates() const noexcept { return coordinates_; }
  EmpiricalMeasure& set_coordinates(std::vector<double> coords);

  /// Feature vectors of the support points, for kernels.
  const std::optional<std::vector<std::vector<double>>>& embedding() const noexcept { return embedding_; }
  EmpiricalMeasure& set_embedding(std::vector<std::vector<double>> points);

  /// Same measure listed in `order`'s element order. Throws SupportMismatch.
  EmpiricalMeasure aligned_to(const FiniteSet& order) const;

 private:
  FiniteSet support_;
  std::vector<double> probs_;
  std::optional<std::vector<double>> coordinates_;
  std::optional<std::vector<std::vector<double>>> embedding_;
};

/// P(Y | X) as one normalized row per element of X.
class ConditionalMeasure {
 public:
  ConditionalMeasure(FiniteSet given, FiniteSet outcomes, std::vector<std::vector<double>> rows,
                     double tolerance = kNormalizationTolerance);

  const FiniteSet& given() const noexcept { return given_; }
  const FiniteSet& outcomes() const noexcept { return outcomes_; }
  const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }
  double prob(std::size_t x, std::size_t y) const { return rows_.at(x).at(y); }
  EmpiricalMeasure row(std::size_t x) const;

  /// Deterministic posterior putting all mass on f(x).
  static ConditionalMeasure from_function(FiniteSet given, FiniteSet outcomes, const std::vector<std::size_t>& f);

 private:
  FiniteSet given_;
  FiniteSet outcomes_;
  std::vector<std::vector<double>> rows_;
};

/// Product support X×Y with atoms "(x,y)"; x-major order.
FiniteSet product_support(const FiniteSet& xs, const FiniteSet& ys);

/// P(X,Y) = P(X) P(Y|X) over product_support.
EmpiricalMeasure joint_of(const EmpiricalMeasure& marginal, const ConditionalMeasure& posterior);

/// P(Y) = Σ_x P(x) P(Y|x).
EmpiricalMeasure outcome_marginal(const EmpiricalMeasure& marginal, const ConditionalMeasure& posterior);

/// Declared behavior of a learning system: P(X) and P(Y|X).
struct DeclaredMeasures {
  EmpiricalMeasure marginal;
  ConditionalMeasure posterior;
};

}  // namespace tlsys
