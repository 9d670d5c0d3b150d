#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rgerm/error.hpp"
#include "rgerm/multi_index.hpp"
#include "rgerm/scalar.hpp"
#include "rgerm/series.hpp"

namespace rgerm {

/// An n-tuple of truncated series fixing the origin, with diagonal
/// invertible linear part: component j starts with lambda_j z_j.
template <Scalar S>
class GermMap {
 public:
  explicit GermMap(std::vector<TruncatedSeries<S>> components) : components_(std::move(components)) {
    detail::require(!components_.empty(), ErrorCode::kInvalidArgument, "germ needs at least one component");
    dim_ = components_.front().dim();
    detail::require(components_.size() == dim_, ErrorCode::kDimensionMismatch,
                    "germ must have as many components as variables");
    order_ = components_.front().order();
    for (const auto& c : components_) {
      detail::require(c.dim() == dim_, ErrorCode::kDimensionMismatch, "component dimension mismatch");
      order_ = std::min(order_, c.order());
    }
    detail::require(order_ >= 1, ErrorCode::kInvalidArgument, "germ order must be at least 1");
    for (auto& c : components_) c = c.with_order(order_);
    validate();
  }

  static GermMap identity(std::size_t dim, unsigned order) {
    return linear(std::vector<S>(dim, scalar_from_int<S>(1)), order);
  }

  static GermMap linear(const std::vector<S>& lambda, unsigned order) {
    std::vector<TruncatedSeries<S>> comps;
    for (std::size_t j = 0; j < lambda.size(); ++j)
      comps.push_back(TruncatedSeries<S>::monomial(lambda.size(), order, MultiIndex::unit(lambda.size(), j), lambda[j]));
    return GermMap(std::move(comps));
  }

  /// Linear part diag(lambda) plus the given nonlinear terms.
  static GermMap from_terms(const std::vector<S>& lambda, unsigned order,
                            const std::vector<std::vector<std::pair<MultiIndex, S>>>& terms) {
    detail::require(terms.size() == lambda.size(), ErrorCode::kDimensionMismatch, "term table size mismatch");
    GermMap g = linear(lambda, order);
    for (std::size_t j = 0; j < terms.size(); ++j)
      for (const auto& [idx, c] : terms[j]) {
        detail::require(idx.degree() >= 2, ErrorCode::kInvalidArgument, "nonlinear terms need degree >= 2");
        g.components_[j].add(idx, c);
      }
    return g;
  }

  std::size_t dim() const { return dim_; }
  unsigned order() const { return order_; }
  const TruncatedSeries<S>& component(std::size_t j) const { return components_.at(j); }
  const std::vector<TruncatedSeries<S>>& components() const { return components_; }

  S lambda(std::size_t j) const { return components_.at(j).coefficient(MultiIndex::unit(dim_, j)); }

  std::vector<S> lambdas() const {
    std::vector<S> out;
    for (std::size_t j = 0; j < dim_; ++j) out.push_back(lambda(j));
    return out;
  }

  GermMap truncated(unsigned t) const {
    std::vector<TruncatedSeries<S>> comps;
    for (const auto& c : components_) comps.push_back(c.truncated(t));
    return GermMap(std::move(comps));
  }

  GermMap with_order(unsigned t) const {
    std::vector<TruncatedSeries<S>> comps;
    for (const auto& c : components_) comps.push_back(c.with_order(t));
    return GermMap(std::move(comps));
  }

  /// Overwrites one nonlinear coefficient (|idx| >= 2).
  void set_coefficient(std::size_t j, const MultiIndex& idx, S c) {
    detail::require(idx.degree() >= 2, ErrorCode::kInvalidArgument, "only nonlinear coefficients may be edited");
    components_.at(j).set(idx, std::move(c));
  }

  /// Components minus their linear parts.
  std::vector<TruncatedSeries<S>> nonlinear_part() const {
    std::vector<TruncatedSeries<S>> out;
    for (std::size_t j = 0; j < dim_; ++j) {
      TruncatedSeries<S> c = components_[j];
      c.erase(MultiIndex::unit(dim_, j));
      out.push_back(std::move(c));
    }
    return out;
  }

  friend bool operator==(const GermMap& a, const GermMap& b) { return a.components_ == b.components_; }

  friend double max_coefficient_distance(const GermMap& a, const GermMap& b) {
    detail::require(a.dim_ == b.dim_, ErrorCode::kDimensionMismatch, "germ dimensions differ");
    double worst = 0.0;
    for (std::size_t j = 0; j < a.dim_; ++j)
      worst = std::max(worst, max_coefficient_distance(a.components_[j], b.components_[j]));
    return worst;
  }

 private:
  void validate() const {
    for (std::size_t j = 0; j < dim_; ++j) {
      const auto& c = components_[j];
      detail::require(is_zero(c.coefficient(MultiIndex(dim_))), ErrorCode::kConstantTerm,
                      "component " + std::to_string(j) + " has a constant term");
      for (std::size_t i = 0; i < dim_; ++i) {
        const S coeff = c.coefficient(MultiIndex::unit(dim_, i));
        if (i == j) {
          detail::require(!is_zero(coeff), ErrorCode::kSingularLinearPart,
                          "eigenvalue " + std::to_string(j) + " is zero");
        } else {
          detail::require(is_zero(coeff), ErrorCode::kNonDiagonalLinearPart,
                          "linear part is not diagonal in component " + std::to_string(j));
        }
      }
    }
  }

  std::vector<TruncatedSeries<S>> components_;
  std::size_t dim_ = 0;
  unsigned order_ = 0;
};

namespace detail {

/// Memoised products g^l = g_1^{l_1} ... g_n^{l_n}, truncated at `order`.
template <Scalar S>
class PowerCache {
 public:
  PowerCache(const std::vector<TruncatedSeries<S>>& g, unsigned order) : order_(order) {
    for (const auto& c : g) g_.push_back(c.truncated(order));
  }

  const TruncatedSeries<S>& power(const MultiIndex& l) {
    if (auto it = cache_.find(l); it != cache_.end()) return it->second;
    const std::size_t dim = l.size();
    if (l.is_zero()) {
      return cache_.emplace(l, TruncatedSeries<S>::constant(dim, order_, scalar_from_int<S>(1))).first->second;
    }
    std::size_t j = dim;
    while (l[j - 1] == 0) --j;
    --j;
    MultiIndex prev = l;
    prev.set(j, l[j] - 1);
    TruncatedSeries<S> r = power(prev) * g_[j];
    return cache_.emplace(l, std::move(r)).first->second;
  }

 private:
  unsigned order_;
  std::vector<TruncatedSeries<S>> g_;
  std::map<MultiIndex, TruncatedSeries<S>> cache_;
};

template <Scalar S>
void check_fixes_origin(const std::vector<TruncatedSeries<S>>& g) {
  for (const auto& c : g)
    require(is_zero(c.coefficient(MultiIndex(c.dim()))), ErrorCode::kConstantTerm,
            "inner map must fix the origin");
}

}  // namespace detail

/// f(g(z)) for a scalar series f in dim(g) variables, truncated at t.
template <Scalar S>
TruncatedSeries<S> substitute(const TruncatedSeries<S>& f, const std::vector<TruncatedSeries<S>>& g, unsigned t) {
  detail::require(f.dim() == g.size(), ErrorCode::kDimensionMismatch, "substitution arity mismatch");
  detail::check_fixes_origin(g);
  const std::size_t out_dim = g.front().dim();
  detail::PowerCache<S> cache(g, t);
  TruncatedSeries<S> r(out_dim, t);
  for (const auto& [idx, c] : f.terms()) {
    // g has no constant term, so z^l contributes only at degree >= |l|.
    if (idx.degree() > t) break;
    for (const auto& [pi, pc] : cache.power(idx).terms()) r.add(pi, c * pc);
  }
  return r;
}

/// Coefficients of f o g up to degree t.
template <Scalar S>
GermMap<S> compose(const GermMap<S>& f, const GermMap<S>& g, unsigned t) {
  detail::require(f.dim() == g.dim(), ErrorCode::kDimensionMismatch, "compose: dimensions differ");
  detail::PowerCache<S> cache(g.components(), t);
  std::vector<TruncatedSeries<S>> out;
  for (const auto& fc : f.components()) {
    TruncatedSeries<S> r(f.dim(), t);
    for (const auto& [idx, c] : fc.terms()) {
      if (idx.degree() > t) break;
      for (const auto& [pi, pc] : cache.power(idx).terms()) r.add(pi, c * pc);
    }
    out.push_back(std::move(r));
  }
  return GermMap<S>(std::move(out));
}

/// Compositional inverse up to degree t, built by the fixed-point iteration
/// g <- L^{-1}(z - N(g)), which gains (dmin - 1) correct degrees per pass.
template <Scalar S>
GermMap<S> invert(const GermMap<S>& f, unsigned t) {
  const std::size_t n = f.dim();
  std::vector<S> inv_lambda;
  for (const S& l : f.lambdas()) inv_lambda.push_back(inverse(l));
  auto nonlinear = f.nonlinear_part();
  unsigned dmin = t + 1;
  for (const auto& c : nonlinear)
    if (auto d = c.min_degree()) dmin = std::min(dmin, *d);

  GermMap<S> g = GermMap<S>::linear(inv_lambda, t);
  if (dmin > t) return g;
  const unsigned passes = (t - 1 + (dmin - 2)) / (dmin - 1);
  for (unsigned pass = 0; pass < passes; ++pass) {
    std::vector<TruncatedSeries<S>> next;
    for (std::size_t j = 0; j < n; ++j) {
      TruncatedSeries<S> c = substitute(nonlinear[j], g.components(), t);
      c *= -inv_lambda[j];
      c.add(MultiIndex::unit(n, j), inv_lambda[j]);
      next.push_back(std::move(c));
    }
    g = GermMap<S>(std::move(next));
  }
  return g;
}

/// theta o g o theta^{-1} up to degree t.
template <Scalar S>
GermMap<S> conjugate(const GermMap<S>& theta, const GermMap<S>& g, unsigned t) {
  return compose(theta, compose(g, invert(theta, t), t), t);
}

/// z^alpha as a series, or (g_1)^{alpha_1} ... (g_n)^{alpha_n} when a map is given.
template <Scalar S>
TruncatedSeries<S> monomial_power(const std::vector<TruncatedSeries<S>>& g, const MultiIndex& alpha, unsigned t) {
  detail::require(!alpha.is_zero(), ErrorCode::kZeroMultiIndex, "monomial power needs alpha != 0");
  detail::require(alpha.size() == g.size(), ErrorCode::kDimensionMismatch, "alpha length differs from map arity");
  detail::PowerCache<S> cache(g, t);
  return cache.power(alpha);
}

template <Scalar S>
TruncatedSeries<S> monomial_power(const GermMap<S>& g, const MultiIndex& alpha, unsigned t) {
  return monomial_power(g.components(), alpha, t);
}

template <Scalar S>
TruncatedSeries<S> monomial_power(std::size_t dim, const MultiIndex& alpha, unsigned t) {
  return monomial_power(GermMap<S>::identity(dim, t), alpha, t);
}

/// Diagonal dilation z -> diag(b) z.
template <Scalar S>
GermMap<S> dilation(const std::vector<S>& b, unsigned order) {
  return GermMap<S>::linear(b, order);
}

}  // namespace rgerm
