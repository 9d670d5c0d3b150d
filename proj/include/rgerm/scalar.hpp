#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>
#include <string_view>
#include <type_traits>

#include "rgerm/error.hpp"

namespace rgerm {

/// Parses an exact rational from "p/q", an integer, or a decimal such as
/// "-1.25e-3". Decimal strings are read exactly (0.1 is 1/10).
inline mpq_class parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (s.empty()) throw Error(ErrorCode::kParse, "empty rational literal");

  if (auto slash = s.find('/'); slash != std::string::npos) {
    mpq_class q;
    if (q.set_str(s, 10) != 0 || q.get_den() == 0) {
      throw Error(ErrorCode::kParse, "bad rational literal '" + s + "'");
    }
    q.canonicalize();
    return q;
  }

  std::size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
  std::string digits;
  long scale = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) --scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw Error(ErrorCode::kParse, "bad numeric literal '" + s + "'");
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') throw Error(ErrorCode::kParse, "bad numeric literal '" + s + "'");
    ++pos;
    char* end = nullptr;
    std::string exp_part = s.substr(pos);
    long e = std::strtol(exp_part.c_str(), &end, 10);
    if (exp_part.empty() || *end != '\0') throw Error(ErrorCode::kParse, "bad exponent in '" + s + "'");
    scale += e;
  }
  mpz_class num(digits, 10);
  mpz_class den = 1;
  if (scale >= 0) {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(scale));
    num *= p;
  } else {
    mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(-scale));
  }
  mpq_class q(num, den);
  q.canonicalize();
  if (negative) q = -q;
  return q;
}

inline std::string rational_string(const mpq_class& q) { return q.get_str(10); }

/// Exact complex number with rational real and imaginary parts.
class GaussianRational {
 public:
  GaussianRational() = default;
  GaussianRational(long re) : re_(re) {}  // NOLINT(google-explicit-constructor)
  GaussianRational(mpq_class re, mpq_class im = 0) : re_(std::move(re)), im_(std::move(im)) {
    re_.canonicalize();
    im_.canonicalize();
  }

  static GaussianRational parse(std::string_view re, std::string_view im = "0") {
    return {parse_rational(re), parse_rational(im)};
  }

  /// Exact binary value of a double pair.
  static GaussianRational from_doubles(double re, double im) {
    if (!std::isfinite(re) || !std::isfinite(im)) throw Error(ErrorCode::kParse, "non-finite coefficient");
    return {mpq_class(re), mpq_class(im)};
  }

  const mpq_class& real() const { return re_; }
  const mpq_class& imag() const { return im_; }

  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
  GaussianRational conj() const { return {re_, -im_}; }
  mpq_class norm() const { return re_ * re_ + im_ * im_; }

  GaussianRational inverse() const {
    if (is_zero()) throw Error(ErrorCode::kDivisionByZero, "inverse of zero Gaussian rational");
    mpq_class n = norm();
    return {re_ / n, -im_ / n};
  }

  std::complex<double> to_complex() const { return {re_.get_d(), im_.get_d()}; }

  std::string to_string() const {
    if (sgn(im_) == 0) return rational_string(re_);
    if (sgn(re_) == 0) return rational_string(im_) + "i";
    std::string im = rational_string(im_);
    return rational_string(re_) + (sgn(im_) > 0 ? "+" : "") + im + "i";
  }

  GaussianRational& operator+=(const GaussianRational& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  GaussianRational& operator-=(const GaussianRational& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  GaussianRational& operator*=(const GaussianRational& o) {
    mpq_class r = re_ * o.re_ - im_ * o.im_;
    mpq_class i = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(r);
    im_ = std::move(i);
    return *this;
  }
  GaussianRational& operator/=(const GaussianRational& o) { return *this *= o.inverse(); }

  friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
  friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
  friend GaussianRational operator*(GaussianRational a, const GaussianRational& b) { return a *= b; }
  friend GaussianRational operator/(GaussianRational a, const GaussianRational& b) { return a /= b; }
  friend GaussianRational operator-(const GaussianRational& a) { return {-a.re_, -a.im_}; }
  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }
  friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }

 private:
  mpq_class re_{0};
  mpq_class im_{0};
};

using Complex = std::complex<double>;

template <class S>
inline constexpr bool is_exact_v = std::is_same_v<S, GaussianRational>;

template <class S>
concept Scalar = std::is_same_v<S, GaussianRational> || std::is_same_v<S, Complex>;

// Uniform helpers over the two scalar modes. Exact zero tests only; tolerance
// comparisons live at the call sites that need them.

inline bool is_zero(const GaussianRational& x) { return x.is_zero(); }
inline bool is_zero(const Complex& x) { return x == Complex{}; }

inline GaussianRational conj(const GaussianRational& x) { return x.conj(); }
inline Complex conj(const Complex& x) { return std::conj(x); }

inline Complex to_complex(const GaussianRational& x) { return x.to_complex(); }
inline Complex to_complex(const Complex& x) { return x; }

inline GaussianRational real_part(const GaussianRational& x) { return {x.real(), 0}; }
inline Complex real_part(const Complex& x) { return {x.real(), 0.0}; }

template <Scalar S>
S scalar_from_int(long v) {
  if constexpr (is_exact_v<S>) {
    return GaussianRational(v);
  } else {
    return Complex(static_cast<double>(v), 0.0);
  }
}

template <Scalar S>
S scalar_from_rational(const mpq_class& q) {
  if constexpr (is_exact_v<S>) {
    return GaussianRational(q);
  } else {
    return Complex(q.get_d(), 0.0);
  }
}

template <Scalar S>
S scalar_cast(const GaussianRational& x) {
  if constexpr (is_exact_v<S>) {
    return x;
  } else {
    return x.to_complex();
  }
}

/// Sign of the real part: exact for Gaussian rationals, strict against `tol`
/// for complex doubles (values within tol of zero report 0).
inline int real_sign(const GaussianRational& x, double /*tol*/ = 0.0) { return sgn(x.real()); }
inline int real_sign(const Complex& x, double tol = 0.0) {
  if (x.real() > tol) return 1;
  if (x.real() < -tol) return -1;
  return 0;
}

inline GaussianRational inverse(const GaussianRational& x) { return x.inverse(); }
inline Complex inverse(const Complex& x) {
  if (x == Complex{}) throw Error(ErrorCode::kDivisionByZero, "inverse of zero");
  return 1.0 / x;
}

template <Scalar S>
S int_power(const S& base, long e) {
  S result = scalar_from_int<S>(1);
  S b = e < 0 ? inverse(base) : base;
  unsigned long n = static_cast<unsigned long>(e < 0 ? -e : e);
  while (n > 0) {
    if (n & 1UL) result *= b;
    b *= b;
    n >>= 1;
  }
  return result;
}

inline std::string exact_string(const GaussianRational& x) { return x.to_string(); }

}  // namespace rgerm
