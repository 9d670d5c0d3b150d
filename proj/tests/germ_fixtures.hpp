#pragma once

// The worked germs, built directly in code (the CLI reads the same germs from
// fixtures/*.json).

#include <vector>

#include "rgerm/germ.hpp"
#include "rgerm/spectrum.hpp"

namespace rgerm::fixtures {

using Q = GaussianRational;
using Terms = std::vector<std::vector<std::pair<MultiIndex, Q>>>;

struct ExactGerm {
  EigenvalueSystem sys;
  GermMap<Q> germ;
};

inline Q rat(long p, long q = 1) { return Q(mpq_class(p, q)); }

/// The exact stand-in for e^{2 pi i theta}, theta irrational: (3 + 4i) / 5.
inline Q rotation() { return EigenvalueSystem::exact({Generator::irrational_angle("theta")}, {{1}}).exact_value(0); }

inline EigenvalueSystem quasi_parabolic_spectrum() {
  return EigenvalueSystem::exact({Generator::irrational_angle("theta")}, {{0}, {1}});
}
inline EigenvalueSystem elliptic_spectrum() {
  return EigenvalueSystem::exact({Generator::irrational_angle("theta")}, {{1}, {-1}});
}
/// (q-th root of unity, rho, ...) with the remaining moduli rho_j < 1 independent.
inline EigenvalueSystem semi_attractive_spectrum(unsigned q) {
  return EigenvalueSystem::exact({Generator::root_of_unity(q), Generator::modulus_value(mpq_class(1, 2))},
                                 {{1, 0}, {0, 1}});
}

inline ExactGerm make(EigenvalueSystem sys, unsigned t, const Terms& terms) {
  auto lambda = sys.values<Q>();
  return {std::move(sys), GermMap<Q>::from_terms(lambda, t, terms)};
}

/// (z + z^3, e^{2 pi i theta} w + z w)
inline ExactGerm one_qp(unsigned t = 6) {
  return make(quasi_parabolic_spectrum(), t, {{{MultiIndex{3, 0}, rat(1)}}, {{MultiIndex{1, 1}, rat(1)}}});
}

/// (lambda z (1 - zw/lambda)^{-1}, (w/lambda)(1 - zw/lambda)) truncated at t.
inline ExactGerm conserved_leaf(unsigned t = 7) {
  const Q lambda = rotation();
  const Q inv = lambda.inverse();
  Terms terms(2);
  Q coeff = Q(1);  // lambda^{1-i} for i = 1
  for (unsigned i = 1; 2 * i + 1 <= t; ++i) {
    terms[0].push_back({MultiIndex{i + 1, i}, coeff});
    coeff *= inv;
  }
  terms[1].push_back({MultiIndex{1, 2}, -(inv * inv)});
  return make(elliptic_spectrum(), t, terms);
}

/// (lambda z + z^2 w, w/lambda - z w^2 / lambda^2)
inline ExactGerm cubic_leaf(unsigned t = 7) {
  const Q inv = rotation().inverse();
  return make(elliptic_spectrum(), t, {{{MultiIndex{2, 1}, rat(1)}}, {{MultiIndex{1, 2}, -(inv * inv)}}});
}

/// (z - z^2, lambda w + lambda z w)
inline ExactGerm non_attracting(unsigned t = 6) {
  return make(quasi_parabolic_spectrum(), t, {{{MultiIndex{2, 0}, rat(-1)}}, {{MultiIndex{1, 1}, rotation()}}});
}

/// (lambda z + a z^2 w, w/lambda + b z w^2)
inline ExactGerm elliptic_mixed(const Q& a, const Q& b, unsigned t = 7) {
  return make(elliptic_spectrum(), t, {{{MultiIndex{2, 1}, a}}, {{MultiIndex{1, 2}, b}}});
}

/// (z + z^2 + c z^3 + d z^4, w/2)
inline ExactGerm parabolic_attracting(const Q& c = rat(1), const Q& d = rat(0), unsigned t = 4) {
  auto sys = EigenvalueSystem::exact({Generator::modulus_value(mpq_class(1, 2))}, {{0}, {1}});
  return make(std::move(sys), t,
              {{{MultiIndex{2, 0}, rat(1)}, {MultiIndex{3, 0}, c}, {MultiIndex{4, 0}, d}}, {}});
}

/// (omega z + z^{q+1}, w/2) with omega a primitive q-th root of unity, q | 4.
inline ExactGerm semi_attractive(unsigned q, unsigned t = 6) {
  return make(semi_attractive_spectrum(q), t, {{{MultiIndex{q + 1, 0}, rat(1)}}, {}});
}

}  // namespace rgerm::fixtures
