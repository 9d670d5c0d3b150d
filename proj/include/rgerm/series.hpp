#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "rgerm/error.hpp"
#include "rgerm/multi_index.hpp"
#include "rgerm/scalar.hpp"

namespace rgerm {

/// Sparse multivariate power series truncated at total degree `order`.
///
/// Terms are kept in graded-lex order with no stored zeros; any index whose
/// degree exceeds the order is dropped on insertion.
template <Scalar S>
class TruncatedSeries {
 public:
  using Terms = std::map<MultiIndex, S>;

  TruncatedSeries(std::size_t dim, unsigned order) : dim_(dim), order_(order) {
    detail::require(dim >= 1 && dim <= MultiIndex::kMaxDim, ErrorCode::kInvalidArgument, "bad series dimension");
  }

  static TruncatedSeries constant(std::size_t dim, unsigned order, S c) {
    TruncatedSeries s(dim, order);
    s.set(MultiIndex(dim), std::move(c));
    return s;
  }

  static TruncatedSeries variable(std::size_t dim, unsigned order, std::size_t j) {
    return monomial(dim, order, MultiIndex::unit(dim, j), scalar_from_int<S>(1));
  }

  static TruncatedSeries monomial(std::size_t dim, unsigned order, const MultiIndex& idx, S c) {
    TruncatedSeries s(dim, order);
    s.set(idx, std::move(c));
    return s;
  }

  std::size_t dim() const { return dim_; }
  unsigned order() const { return order_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  S coefficient(const MultiIndex& idx) const {
    auto it = terms_.find(idx);
    return it == terms_.end() ? S{} : it->second;
  }

  void set(const MultiIndex& idx, S c) {
    check_index(idx);
    if (idx.degree() > order_) return;
    if (rgerm::is_zero(c)) {
      terms_.erase(idx);
    } else {
      terms_[idx] = std::move(c);
    }
  }

  void add(const MultiIndex& idx, const S& c) {
    check_index(idx);
    if (idx.degree() > order_ || rgerm::is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(idx, c);
    if (!inserted) {
      it->second += c;
      if (rgerm::is_zero(it->second)) terms_.erase(it);
    }
  }

  void erase(const MultiIndex& idx) { terms_.erase(idx); }

  TruncatedSeries truncated(unsigned t) const {
    TruncatedSeries r(dim_, std::min(t, order_));
    for (const auto& [idx, c] : terms_) {
      if (idx.degree() > r.order_) break;
      r.terms_.emplace_hint(r.terms_.end(), idx, c);
    }
    return r;
  }

  /// Same terms, relabelled with a larger or smaller truncation order.
  TruncatedSeries with_order(unsigned t) const {
    TruncatedSeries r = truncated(t);
    r.order_ = t;
    return r;
  }

  TruncatedSeries homogeneous_part(unsigned d) const {
    TruncatedSeries r(dim_, order_);
    for (const auto& [idx, c] : terms_)
      if (idx.degree() == d) r.terms_.emplace_hint(r.terms_.end(), idx, c);
    return r;
  }

  std::optional<unsigned> min_degree() const {
    if (terms_.empty()) return std::nullopt;
    return terms_.begin()->first.degree();
  }

  TruncatedSeries& operator+=(const TruncatedSeries& o) {
    check_same_dim(o);
    order_ = std::min(order_, o.order_);
    drop_above_order();
    for (const auto& [idx, c] : o.terms_) add(idx, c);
    return *this;
  }

  TruncatedSeries& operator-=(const TruncatedSeries& o) {
    check_same_dim(o);
    order_ = std::min(order_, o.order_);
    drop_above_order();
    for (const auto& [idx, c] : o.terms_) add(idx, -c);
    return *this;
  }

  TruncatedSeries& operator*=(const S& c) {
    if (rgerm::is_zero(c)) {
      terms_.clear();
      return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
      it->second *= c;
      it = rgerm::is_zero(it->second) ? terms_.erase(it) : std::next(it);
    }
    return *this;
  }

  friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) { return a += b; }
  friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) { return a -= b; }
  friend TruncatedSeries operator-(TruncatedSeries a) { return a *= scalar_from_int<S>(-1); }
  friend TruncatedSeries operator*(TruncatedSeries a, const S& c) { return a *= c; }
  friend TruncatedSeries operator*(const S& c, TruncatedSeries a) { return a *= c; }

  /// Truncated Cauchy product; result order is the smaller input order.
  friend TruncatedSeries operator*(const TruncatedSeries& f, const TruncatedSeries& g) {
    f.check_same_dim(g);
    TruncatedSeries r(f.dim_, std::min(f.order_, g.order_));
    for (const auto& [fi, fc] : f.terms_) {
      if (fi.degree() > r.order_) break;
      const unsigned room = r.order_ - fi.degree();
      for (const auto& [gi, gc] : g.terms_) {
        if (gi.degree() > room) break;
        auto [it, inserted] = r.terms_.try_emplace(fi + gi, fc);
        if (inserted) {
          it->second *= gc;
        } else {
          it->second += fc * gc;
        }
      }
    }
    for (auto it = r.terms_.begin(); it != r.terms_.end();)
      it = rgerm::is_zero(it->second) ? r.terms_.erase(it) : std::next(it);
    return r;
  }

  /// Exact equality of dimension, order and terms.
  friend bool operator==(const TruncatedSeries& a, const TruncatedSeries& b) {
    return a.dim_ == b.dim_ && a.order_ == b.order_ && a.terms_ == b.terms_;
  }

  /// Largest coefficient-wise |a - b| over the union of supports, compared at
  /// the smaller order.
  friend double max_coefficient_distance(const TruncatedSeries& a, const TruncatedSeries& b) {
    TruncatedSeries d = a - b;
    double worst = 0.0;
    for (const auto& [idx, c] : d.terms_) worst = std::max(worst, std::abs(to_complex(c)));
    return worst;
  }

 private:
  void check_index(const MultiIndex& idx) const {
    detail::require(idx.size() == dim_, ErrorCode::kDimensionMismatch,
                    "index " + idx.to_string() + " does not match series dimension " + std::to_string(dim_));
  }
  void check_same_dim(const TruncatedSeries& o) const {
    detail::require(dim_ == o.dim_, ErrorCode::kDimensionMismatch, "series dimensions differ");
  }
  void drop_above_order() {
    for (auto it = terms_.begin(); it != terms_.end();)
      it = it->first.degree() > order_ ? terms_.erase(it) : std::next(it);
  }

  std::size_t dim_;
  unsigned order_;
  Terms terms_;
};

}  // namespace rgerm
