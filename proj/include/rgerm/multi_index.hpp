#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "rgerm/error.hpp"

namespace rgerm {

/// Exponent vector l = (l_1, ..., l_n) of a monomial z^l.
///
/// Ordering is graded-lexicographic: lower total degree first; within one
/// degree, a larger exponent on an earlier variable sorts first, so
/// z1^2 < z1 z2 < z2^2.
class MultiIndex {
 public:
  static constexpr std::size_t kMaxDim = 8;

  MultiIndex() = default;

  explicit MultiIndex(std::size_t dim) : dim_(static_cast<std::uint8_t>(check_dim(dim))) {}

  MultiIndex(std::initializer_list<unsigned> entries) : MultiIndex(std::vector<unsigned>(entries)) {}

  explicit MultiIndex(const std::vector<unsigned>& entries)
      : dim_(static_cast<std::uint8_t>(check_dim(entries.size()))) {
    for (std::size_t i = 0; i < entries.size(); ++i) set(i, entries[i]);
  }

  static MultiIndex unit(std::size_t dim, std::size_t j) {
    MultiIndex m(dim);
    m.set(j, 1);
    return m;
  }

  std::size_t size() const { return dim_; }
  unsigned degree() const { return degree_; }
  bool is_zero() const { return degree_ == 0; }

  unsigned operator[](std::size_t i) const { return e_[i]; }

  void set(std::size_t i, unsigned v) {
    detail::require(i < dim_, ErrorCode::kDimensionMismatch, "multi-index slot out of range");
    detail::require(v <= 0xFFFFu, ErrorCode::kInvalidArgument, "exponent too large");
    degree_ = static_cast<std::uint16_t>(degree_ - e_[i] + v);
    e_[i] = static_cast<std::uint16_t>(v);
  }

  std::vector<unsigned> entries() const { return {e_.begin(), e_.begin() + dim_}; }

  /// True when every entry of *this is <= the matching entry of other.
  bool divides(const MultiIndex& other) const {
    for (std::size_t i = 0; i < dim_; ++i)
      if (e_[i] > other.e_[i]) return false;
    return true;
  }

  MultiIndex scaled(unsigned k) const {
    MultiIndex r(dim_);
    for (std::size_t i = 0; i < dim_; ++i) r.set(i, e_[i] * k);
    return r;
  }

  friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
    detail::require(a.dim_ == b.dim_, ErrorCode::kDimensionMismatch, "multi-index dimensions differ");
    MultiIndex r(a.dim_);
    for (std::size_t i = 0; i < a.dim_; ++i) r.set(i, a.e_[i] + b.e_[i]);
    return r;
  }

  /// a - b; requires b.divides(a).
  friend MultiIndex operator-(const MultiIndex& a, const MultiIndex& b) {
    detail::require(a.dim_ == b.dim_, ErrorCode::kDimensionMismatch, "multi-index dimensions differ");
    detail::require(b.divides(a), ErrorCode::kInvalidArgument, "multi-index difference would be negative");
    MultiIndex r(a.dim_);
    for (std::size_t i = 0; i < a.dim_; ++i) r.set(i, a.e_[i] - b.e_[i]);
    return r;
  }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.dim_ == b.dim_ && a.e_ == b.e_;
  }
  friend bool operator!=(const MultiIndex& a, const MultiIndex& b) { return !(a == b); }

  friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
    if (a.dim_ != b.dim_) return a.dim_ < b.dim_;
    if (a.degree_ != b.degree_) return a.degree_ < b.degree_;
    for (std::size_t i = 0; i < a.dim_; ++i)
      if (a.e_[i] != b.e_[i]) return a.e_[i] > b.e_[i];
    return false;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < dim_; ++i) {
      if (i) s += ",";
      s += std::to_string(e_[i]);
    }
    return s + ")";
  }

 private:
  static std::size_t check_dim(std::size_t dim) {
    detail::require(dim >= 1 && dim <= kMaxDim, ErrorCode::kInvalidArgument,
                    "dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    return dim;
  }

  std::array<std::uint16_t, kMaxDim> e_{};
  std::uint8_t dim_ = 0;
  std::uint16_t degree_ = 0;
};

/// Calls fn for every multi-index of the given total degree, in graded-lex order.
inline void for_each_of_degree(std::size_t dim, unsigned degree,
                               const std::function<void(const MultiIndex&)>& fn) {
  MultiIndex m(dim);
  std::function<void(std::size_t, unsigned)> rec = [&](std::size_t slot, unsigned remaining) {
    if (slot + 1 == dim) {
      m.set(slot, remaining);
      fn(m);
      m.set(slot, 0);
      return;
    }
    for (unsigned v = remaining + 1; v-- > 0;) {
      m.set(slot, v);
      rec(slot + 1, remaining - v);
    }
    m.set(slot, 0);
  };
  rec(0, degree);
}

/// All multi-indices with lo <= |l| <= hi in graded-lex order.
inline std::vector<MultiIndex> multi_indices(std::size_t dim, unsigned lo, unsigned hi) {
  std::vector<MultiIndex> out;
  for (unsigned d = lo; d <= hi; ++d) for_each_of_degree(dim, d, [&](const MultiIndex& m) { out.push_back(m); });
  return out;
}

}  // namespace rgerm
