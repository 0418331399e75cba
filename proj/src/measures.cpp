#include "tlsys/measures.hpp"

#include <cmath>
#include <numeric>

namespace tlsys {

namespace {

void validate_probs(const FiniteSet& support, const std::vector<double>& probs, double tolerance) {
  if (probs.size() != support.size())
    fail(ErrorCode::InvalidMeasure, "measure over '" + support.name() + "' has " + std::to_string(probs.size()) +
                                        " probabilities for " + std::to_string(support.size()) + " points");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) fail(ErrorCode::InvalidMeasure, "negative or non-finite probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tolerance)
    fail(ErrorCode::InvalidMeasure, "probabilities over '" + support.name() + "' sum to " + std::to_string(sum));
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(FiniteSet support, std::vector<double> probs, double tolerance)
    : support_(std::move(support)), probs_(std::move(probs)) {
  validate_probs(support_, probs_, tolerance);
}

EmpiricalMeasure EmpiricalMeasure::uniform(FiniteSet support) {
  const auto n = support.size();
  return EmpiricalMeasure(std::move(support), std::vector<double>(n, 1.0 / static_cast<double>(n)), 1e-9);
}

EmpiricalMeasure EmpiricalMeasure::point_mass(FiniteSet support, std::size_t at) {
  std::vector<double> p(support.size(), 0.0);
  p.at(at) = 1.0;
  return EmpiricalMeasure(std::move(support), std::move(p));
}

EmpiricalMeasure& EmpiricalMeasure::set_coordinates(std::vector<double> coords) {
  if (coords.size() != size()) fail(ErrorCode::InvalidMeasure, "coordinate count does not match support");
  coordinates_ = std::move(coords);
  return *this;
}

EmpiricalMeasure& EmpiricalMeasure::set_embedding(std::vector<std::vector<double>> points) {
  if (points.size() != size()) fail(ErrorCode::InvalidMeasure, "embedding count does not match support");
  for (const auto& p : points)
    if (p.size() != points.front().size()) fail(ErrorCode::InvalidMeasure, "embedding dimensions differ");
  embedding_ = std::move(points);
  return *this;
}

EmpiricalMeasure EmpiricalMeasure::aligned_to(const FiniteSet& order) const {
  if (!support_.same_element_set(order))
    fail(ErrorCode::SupportMismatch, "supports '" + support_.name() + "' and '" + order.name() + "' differ");
  if (support_.same_elements(order)) return *this;
  std::vector<double> p(order.size());
  std::vector<std::size_t> from(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    from[i] = support_.index_of(order[i]);
    p[i] = probs_[from[i]];
  }
  EmpiricalMeasure out(order, std::move(p), 1e-9);
  if (coordinates_) {
    std::vector<double> c(order.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (*coordinates_)[from[i]];
    out.coordinates_ = std::move(c);
  }
  if (embedding_) {
    std::vector<std::vector<double>> e(order.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = (*embedding_)[from[i]];
    out.embedding_ = std::move(e);
  }
  return out;
}

ConditionalMeasure::ConditionalMeasure(FiniteSet given, FiniteSet outcomes, std::vector<std::vector<double>> rows,
                                       double tolerance)
    : given_(std::move(given)), outcomes_(std::move(outcomes)), rows_(std::move(rows)) {
  if (rows_.size() != given_.size())
    fail(ErrorCode::InvalidMeasure, "conditional measure needs one row per element of '" + given_.name() + "'");
  for (const auto& r : rows_) validate_probs(outcomes_, r, tolerance);
}

EmpiricalMeasure ConditionalMeasure::row(std::size_t x) const { return EmpiricalMeasure(outcomes_, rows_.at(x), 1e-9); }

ConditionalMeasure ConditionalMeasure::from_function(FiniteSet given, FiniteSet outcomes, const std::vector<std::size_t>& f) {
  if (f.size() != given.size()) fail(ErrorCode::InvalidMeasure, "function table does not cover the conditioning set");
  std::vector<std::vector<double>> rows(given.size(), std::vector<double>(outcomes.size(), 0.0));
  for (std::size_t x = 0; x < f.size(); ++x) rows[x].at(f[x]) = 1.0;
  return ConditionalMeasure(std::move(given), std::move(outcomes), std::move(rows));
}

FiniteSet product_support(const FiniteSet& xs, const FiniteSet& ys) {
  std::vector<Atom> elems;
  elems.reserve(xs.size() * ys.size());
  for (const auto& x : xs.elements())
    for (const auto& y : ys.elements()) elems.emplace_back("(" + x.to_string() + "," + y.to_string() + ")");
  return FiniteSet(xs.name() + "x" + ys.name(), std::move(elems));
}

EmpiricalMeasure joint_of(const EmpiricalMeasure& marginal, const ConditionalMeasure& posterior) {
  const auto m = marginal.aligned_to(posterior.given());
  std::vector<double> p;
  p.reserve(m.size() * posterior.outcomes().size());
  for (std::size_t x = 0; x < m.size(); ++x)
    for (std::size_t y = 0; y < posterior.outcomes().size(); ++y) p.push_back(m[x] * posterior.prob(x, y));
  return EmpiricalMeasure(product_support(posterior.given(), posterior.outcomes()), std::move(p), 1e-9);
}

EmpiricalMeasure outcome_marginal(const EmpiricalMeasure& marginal, const ConditionalMeasure& posterior) {
  const auto m = marginal.aligned_to(posterior.given());
  std::vector<double> p(posterior.outcomes().size(), 0.0);
  for (std::size_t x = 0; x < m.size(); ++x)
    for (std::size_t y = 0; y < p.size(); ++y) p[y] += m[x] * posterior.prob(x, y);
  return EmpiricalMeasure(posterior.outcomes(), std::move(p), 1e-9);
}

}  // namespace tlsys
