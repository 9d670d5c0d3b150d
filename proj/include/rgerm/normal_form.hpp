#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rgerm/error.hpp"
#include "rgerm/germ.hpp"
#include "rgerm/multi_index.hpp"
#include "rgerm/scalar.hpp"
#include "rgerm/spectrum.hpp"

namespace rgerm {

/// Float-mode thresholds. Exact mode ignores all of them.
struct NormalFormOptions {
  double small_divisor = 1e-8;          // |lambda_j - lambda^l| below this is refused
  double residual_tolerance = 1e-9;     // leftover coefficient accepted as cancelled
  double lambda_tolerance = 1e-12;      // germ eigenvalues vs declared spectrum
  double degeneracy_tolerance = 1e-12;  // |Lambda| at or below this counts as zero
  double identity_tolerance = 1e-9;     // conjugation identity, per coefficient
};

template <Scalar S>
struct PoincareDulacResult {
  GermMap<S> normal;      // G = Theta o F o Theta^{-1}, resonant monomials only
  GermMap<S> conjugacy;   // Theta, tangent to the identity
};

namespace detail {

template <Scalar S>
bool negligible(const S& x, double tol) {
  if constexpr (is_exact_v<S>) {
    return x.is_zero();
  } else {
    return std::abs(x) <= tol;
  }
}

/// Decides resonance of (j, l) and supplies lambda^l in the scalar mode.
template <Scalar S>
class ResonanceOracle {
 public:
  ResonanceOracle(const EigenvalueSystem& sys, std::vector<S> lambda, const NormalFormOptions& opts)
      : sys_(sys), lambda_(std::move(lambda)), opts_(opts) {}

  bool resonant(std::size_t j, const MultiIndex& l) const {
    if (sys_.is_exact()) return sys_.equals_eigenvalue(l, j);
    const double gap = std::abs(sys_.numeric_power(l) - sys_.numeric_value(j));
    require(gap >= sys_.tolerance(), ErrorCode::kSmallDivisor,
            "uncertified near-resonance at (" + std::to_string(j) + ", " + l.to_string() + ")");
    return false;
  }

  S power(const MultiIndex& l) const {
    S p = scalar_from_int<S>(1);
    for (std::size_t i = 0; i < l.size(); ++i)
      for (unsigned e = 0; e < l[i]; ++e) p *= lambda_[i];
    return p;
  }

  /// lambda_j - lambda^l for a nonresonant pair, guarded in float mode.
  S divisor(std::size_t j, const MultiIndex& l) const {
    S d = lambda_[j] - power(l);
    if constexpr (!is_exact_v<S>) {
      require(std::abs(d) >= opts_.small_divisor, ErrorCode::kSmallDivisor,
              "|lambda_j - lambda^l| below guard at (" + std::to_string(j) + ", " + l.to_string() + ")");
    } else {
      require(!d.is_zero(), ErrorCode::kVerificationFailed,
              "generator model says nonresonant but values coincide at " + l.to_string());
    }
    return d;
  }

  const std::vector<S>& lambda() const { return lambda_; }

 private:
  const EigenvalueSystem& sys_;
  std::vector<S> lambda_;
  const NormalFormOptions& opts_;
};

template <Scalar S>
void check_spectrum(const GermMap<S>& f, const EigenvalueSystem& sys, const NormalFormOptions& opts) {
  require(f.dim() == sys.dim(), ErrorCode::kDimensionMismatch, "germ and spectrum dimensions differ");
  const auto declared = sys.values<S>();
  for (std::size_t j = 0; j < f.dim(); ++j) {
    bool ok;
    if constexpr (is_exact_v<S>) {
      ok = f.lambda(j) == declared[j];
    } else {
      ok = std::abs(f.lambda(j) - declared[j]) <= opts.lambda_tolerance;
    }
    require(ok, ErrorCode::kSpectrumMismatch, "germ eigenvalue " + std::to_string(j) + " differs from the spectrum");
  }
}

// Degree-by-degree elimination of nonresonant terms on degrees [from, to].
template <Scalar S>
void pd_sweep(GermMap<S>& g, GermMap<S>& theta, const ResonanceOracle<S>& oracle, unsigned from, unsigned to,
              unsigned t, const NormalFormOptions& opts) {
  const std::size_t n = g.dim();
  for (unsigned d = std::max(from, 2u); d <= to; ++d) {
    std::vector<TruncatedSeries<S>> step;
    bool any = false;
    std::vector<std::pair<std::size_t, MultiIndex>> killed;
    for (std::size_t j = 0; j < n; ++j) {
      TruncatedSeries<S> c = TruncatedSeries<S>::variable(n, t, j);
      for (const auto& [idx, coeff] : g.component(j).terms()) {
        if (idx.degree() < d) continue;
        if (idx.degree() > d) break;
        if (oracle.resonant(j, idx)) continue;
        c.set(idx, coeff / oracle.divisor(j, idx));
        killed.emplace_back(j, idx);
        any = true;
      }
      step.push_back(std::move(c));
    }
    if (!any) continue;
    GermMap<S> step_map(std::move(step));
    g = conjugate(step_map, g, t);
    theta = compose(step_map, theta, t);
    for (const auto& [j, idx] : killed) {
      const S left = g.component(j).coefficient(idx);
      require(negligible(left, opts.residual_tolerance), ErrorCode::kVerificationFailed,
              "homological step left a nonresonant coefficient at " + idx.to_string());
      if constexpr (!is_exact_v<S>) g.set_coefficient(j, idx, S{});
    }
  }
}

}  // namespace detail

/// Conjugates f to a germ containing only resonant monomials up to degree t.
template <Scalar S>
PoincareDulacResult<S> poincare_dulac(const GermMap<S>& f, const EigenvalueSystem& sys, unsigned t,
                                      const NormalFormOptions& opts = {}) {
  detail::require(t >= 1 && t <= f.order(), ErrorCode::kTruncationTooSmall,
                  "requested degree exceeds the germ's truncation order");
  detail::check_spectrum(f, sys, opts);
  detail::ResonanceOracle<S> oracle(sys, f.lambdas(), opts);
  GermMap<S> g = f.truncated(t);
  GermMap<S> theta = GermMap<S>::identity(f.dim(), t);
  detail::pd_sweep(g, theta, oracle, 2, t, t, opts);
  return {std::move(g), std::move(theta)};
}

/// True when every monomial of g up to its order is resonant.
template <Scalar S>
bool is_resonant_only(const GermMap<S>& g, const EigenvalueSystem& sys) {
  for (std::size_t j = 0; j < g.dim(); ++j)
    for (const auto& [idx, c] : g.component(j).terms()) {
      if (idx.degree() < 2) continue;
      if (sys.is_exact()) {
        if (!sys.equals_eigenvalue(idx, j)) return false;
      } else if (std::abs(sys.numeric_power(idx) - sys.numeric_value(j)) >= sys.tolerance()) {
        return false;
      }
    }
  return true;
}

/// Order k, coefficient vector a, and Lambda = sum a_j alpha_j / lambda_j.
template <Scalar S>
struct OneResonantInvariants {
  MultiIndex alpha;
  std::vector<std::size_t> scope;
  std::optional<unsigned> k;  // empty: no resonant level seen up to k_bound
  unsigned k_bound = 0;
  std::vector<S> a;           // aligned with scope
  S Lambda{};
  std::optional<S> normalization_scale;

  bool linearizable() const { return !k.has_value(); }
};

template <Scalar S>
OneResonantInvariants<S> extract_invariants(const GermMap<S>& g, const ResonanceCertificate& cert) {
  detail::require(cert.one_resonant(), ErrorCode::kNotOneResonant, "certificate is not ONE_RESONANT");
  const MultiIndex& alpha = cert.alpha;
  const unsigned t = g.order();
  detail::require(t >= alpha.degree() + 1, ErrorCode::kTruncationTooSmall,
                  "truncation " + std::to_string(t) + " cannot see the first resonant level (needs " +
                      std::to_string(alpha.degree() + 1) + ")");
  OneResonantInvariants<S> inv;
  inv.alpha = alpha;
  inv.scope = cert.scope;
  inv.k_bound = (t - 1) / alpha.degree();
  inv.a.assign(cert.scope.size(), S{});
  const std::size_t n = g.dim();
  for (unsigned s = 1; s <= inv.k_bound; ++s) {
    bool nonzero = false;
    std::vector<S> level;
    for (std::size_t j : cert.scope) {
      level.push_back(g.component(j).coefficient(alpha.scaled(s) + MultiIndex::unit(n, j)));
      nonzero = nonzero || !is_zero(level.back());
    }
    if (nonzero) {
      inv.k = s;
      inv.a = std::move(level);
      break;
    }
  }
  for (std::size_t i = 0; i < cert.scope.size(); ++i) {
    const std::size_t j = cert.scope[i];
    if (alpha[j] == 0) continue;
    inv.Lambda += inv.a[i] * scalar_from_int<S>(alpha[j]) / g.lambda(j);
  }
  return inv;
}

/// Matrices of the level-l homological step restricted to the scope:
/// A = l (a L^{-1} alpha^t) L - k alpha^t a and C = A L^{-1}. Row index is the
/// b component, column index the residual component, so the level residual
/// changes by b A.
template <Scalar S>
struct LevelMatrices {
  std::vector<std::vector<S>> A;
  std::vector<std::vector<S>> C;
};

template <Scalar S>
LevelMatrices<S> level_matrices(const std::vector<S>& a, const std::vector<S>& lambda, const std::vector<unsigned>& alpha,
                                unsigned k, unsigned l) {
  const std::size_t m = a.size();
  detail::require(lambda.size() == m && alpha.size() == m, ErrorCode::kDimensionMismatch, "level data sizes differ");
  S Lambda{};
  for (std::size_t j = 0; j < m; ++j) Lambda += a[j] * scalar_from_int<S>(alpha[j]) / lambda[j];
  LevelMatrices<S> out;
  out.A.assign(m, std::vector<S>(m, S{}));
  out.C.assign(m, std::vector<S>(m, S{}));
  const S ks = scalar_from_int<S>(k);
  const S ls = scalar_from_int<S>(l);
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t j = 0; j < m; ++j) {
      S rank_one = ks * scalar_from_int<S>(alpha[s]) * a[j];
      out.A[s][j] = (s == j ? ls * Lambda * lambda[j] : S{}) - rank_one;
      out.C[s][j] = (s == j ? ls * Lambda : S{}) - rank_one / lambda[j];
    }
  return out;
}

namespace detail {

// Solves b A = rhs in closed form. With beta = b . alpha and
// T = sum alpha_s rhs_s / lambda_s: for l != k, beta = T / ((l - k) Lambda);
// for l == k the system is solvable iff T = 0 and we take beta = 0.
template <Scalar S>
std::vector<S> solve_level(const std::vector<S>& a, const std::vector<S>& lambda, const std::vector<unsigned>& alpha,
                           const S& Lambda, unsigned k, unsigned l, const std::vector<S>& rhs, double tol) {
  const std::size_t m = a.size();
  S T{};
  for (std::size_t s = 0; s < m; ++s) T += scalar_from_int<S>(alpha[s]) * rhs[s] / lambda[s];
  S beta{};
  if (l == k) {
    require(negligible(T, tol), ErrorCode::kVerificationFailed, "level k target is not orthogonal to alpha L^-1");
  } else {
    beta = T / (scalar_from_int<S>(static_cast<long>(l) - static_cast<long>(k)) * Lambda);
  }
  std::vector<S> b(m);
  for (std::size_t s = 0; s < m; ++s)
    b[s] = (rhs[s] + scalar_from_int<S>(k) * beta * a[s]) / (scalar_from_int<S>(l) * Lambda * lambda[s]);
  return b;
}

template <Scalar S>
bool is_degenerate(const S& Lambda, const NormalFormOptions& opts) {
  return negligible(Lambda, opts.degeneracy_tolerance);
}

}  // namespace detail

template <Scalar S>
struct NormalFormResult {
  GermMap<S> normal;
  GermMap<S> conjugacy;
  OneResonantInvariants<S> invariants;
  std::optional<S> mu;  // empty when the 2k level lies above the truncation
  unsigned residual_order = 0;
};

/// Checks Theta o F == Fhat o Theta up to degree t. Returns the largest
/// coefficient discrepancy (0 in exact mode when it holds).
template <Scalar S>
double conjugation_defect(const GermMap<S>& theta, const GermMap<S>& f, const GermMap<S>& fhat, unsigned t) {
  const GermMap<S> lhs = compose(theta, f, t);
  const GermMap<S> rhs = compose(fhat, theta, t);
  if constexpr (is_exact_v<S>) {
    return lhs == rhs ? 0.0 : std::max(max_coefficient_distance(lhs, rhs), 1e-300);
  } else {
    return max_coefficient_distance(lhs, rhs);
  }
}

/// One-resonant normal form: first-scope components reduced to
/// lambda_j z_j + a_j z^{k alpha} z_j + mu alpha_j conj(lambda_j)^{-1} z^{2k alpha} z_j,
/// the rest resonant-only, all up to degree t.
template <Scalar S>
NormalFormResult<S> one_resonant_normalize(const GermMap<S>& f, const EigenvalueSystem& sys,
                                           const ResonanceCertificate& cert, unsigned t,
                                           const NormalFormOptions& opts = {}) {
  detail::require(cert.one_resonant(), ErrorCode::kNotOneResonant, "certificate is not ONE_RESONANT");
  detail::require(cert.degree_bound >= t, ErrorCode::kInvalidArgument,
                  "certificate degree bound is below the truncation order");
  auto pd = poincare_dulac(f, sys, t, opts);
  auto inv = extract_invariants(pd.normal, cert);
  detail::require(!inv.linearizable(), ErrorCode::kLinearizable,
                  "no resonant level up to " + std::to_string(inv.k_bound) + ": formally linearizable in the scope");
  detail::require(!detail::is_degenerate(inv.Lambda, opts), ErrorCode::kDegenerate, "Lambda = 0");

  const std::size_t n = f.dim();
  const unsigned k = *inv.k;
  const unsigned A = cert.alpha.degree();
  detail::ResonanceOracle<S> oracle(sys, f.lambdas(), opts);
  std::vector<S> lam;
  std::vector<unsigned> alpha;
  for (std::size_t j : cert.scope) {
    lam.push_back(f.lambda(j));
    alpha.push_back(cert.alpha[j]);
  }
  const std::size_t m = cert.scope.size();

  GermMap<S> g = std::move(pd.normal);
  GermMap<S> theta = std::move(pd.conjugacy);
  std::optional<S> mu;

  for (unsigned l = 1; (k + l) * A + 1 <= t; ++l) {
    const MultiIndex level = cert.alpha.scaled(k + l);
    std::vector<S> residual(m), target(m, S{});
    for (std::size_t i = 0; i < m; ++i)
      residual[i] = g.component(cert.scope[i]).coefficient(level + MultiIndex::unit(n, cert.scope[i]));
    if (l == k) {
      // Keep the component along alpha conj(L)^{-1}; kill its hermitian complement.
      std::vector<S> v(m);
      S rv{}, vv{};
      for (std::size_t i = 0; i < m; ++i) {
        v[i] = scalar_from_int<S>(alpha[i]) / conj(lam[i]);
        rv += residual[i] * conj(v[i]);
        vv += v[i] * conj(v[i]);
      }
      mu = rv / vv;
      for (std::size_t i = 0; i < m; ++i) target[i] = *mu * v[i];
    }
    std::vector<S> rhs(m);
    bool trivial = true;
    for (std::size_t i = 0; i < m; ++i) {
      rhs[i] = target[i] - residual[i];
      trivial = trivial && is_zero(rhs[i]);
    }
    if (trivial) continue;

    const auto b = detail::solve_level(inv.a, lam, alpha, inv.Lambda, k, l, rhs, opts.residual_tolerance);
    std::vector<TruncatedSeries<S>> step;
    for (std::size_t j = 0; j < n; ++j) step.push_back(TruncatedSeries<S>::variable(n, t, j));
    const MultiIndex shift = cert.alpha.scaled(l);
    for (std::size_t i = 0; i < m; ++i)
      step[cert.scope[i]].add(shift + MultiIndex::unit(n, cert.scope[i]), b[i]);
    GermMap<S> step_map(std::move(step));
    g = conjugate(step_map, g, t);
    theta = compose(step_map, theta, t);

    for (std::size_t i = 0; i < m; ++i) {
      const MultiIndex idx = level + MultiIndex::unit(n, cert.scope[i]);
      detail::require(detail::negligible(g.component(cert.scope[i]).coefficient(idx) - target[i],
                                         opts.residual_tolerance),
                      ErrorCode::kVerificationFailed, "level " + std::to_string(k + l) + " did not reach its target");
      if constexpr (!is_exact_v<S>) g.set_coefficient(cert.scope[i], idx, target[i]);
    }
    // The step is resonant at its own degree; it may create nonresonant terms above it.
    detail::pd_sweep(g, theta, oracle, l * A + 2, t, t, opts);
  }

  // Shape check of the first-scope components.
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = cert.scope[i];
    for (const auto& [idx, c] : g.component(j).terms()) {
      if (idx.degree() < 2) continue;
      const bool allowed = idx == cert.alpha.scaled(k) + MultiIndex::unit(n, j) ||
                           idx == cert.alpha.scaled(2 * k) + MultiIndex::unit(n, j);
      detail::require(allowed || detail::negligible(c, opts.residual_tolerance), ErrorCode::kVerificationFailed,
                      "normal form has a stray term " + idx.to_string() + " in component " + std::to_string(j));
      if constexpr (!is_exact_v<S>) {
        if (!allowed) g.set_coefficient(j, idx, S{});
      }
    }
  }
  const double defect = conjugation_defect(theta, f.truncated(t), g, t);
  if constexpr (is_exact_v<S>) {
    detail::require(defect == 0.0, ErrorCode::kVerificationFailed, "conjugation identity fails");
  } else {
    detail::require(defect <= opts.identity_tolerance, ErrorCode::kVerificationFailed,
                    "conjugation identity defect " + std::to_string(defect));
  }
  return {std::move(g), std::move(theta), std::move(inv), std::move(mu), t};
}

/// Non-degeneracy and the parabolic-attraction test Re(a_j lambda_j^{-1} Lambda^{-1}) > 0.
template <Scalar S>
struct Classification {
  bool non_degenerate = false;
  bool parabolically_attracting = false;
  bool attraction_tested = false;
  std::vector<S> witnesses;  // real-valued, aligned with scope; empty when degenerate
  std::vector<ModulusClass> moduli;
};

template <Scalar S>
Classification<S> classify(const OneResonantInvariants<S>& inv, const std::vector<S>& lambda,
                           const EigenvalueSystem& sys, const NormalFormOptions& opts = {}) {
  detail::require(!inv.linearizable(), ErrorCode::kLinearizable, "classification needs a finite order k");
  Classification<S> c;
  for (std::size_t j : inv.scope) c.moduli.push_back(sys.modulus_class(j));
  c.non_degenerate = !detail::is_degenerate(inv.Lambda, opts);
  if (!c.non_degenerate) return c;
  c.attraction_tested = true;
  const S inv_lambda = inverse(inv.Lambda);
  bool attracting = true;
  for (std::size_t i = 0; i < inv.scope.size(); ++i) {
    S w = real_part(inv.a[i] / lambda[inv.scope[i]] * inv_lambda);
    attracting = attracting && real_sign(w) > 0 && c.moduli[i] == ModulusClass::kUnit;
    c.witnesses.push_back(std::move(w));
  }
  c.parabolically_attracting = attracting;
  return c;
}

/// Invariants of a quasi-parabolic germ (1 + ..., e^{2 pi i theta} w + ...) read
/// off its Poincare-Dulac form (z + sum a_j z^j, e^{2 pi i theta} w + sum b_j z^j w).
template <Scalar S>
struct QuasiParabolicReport {
  std::optional<unsigned> nu;        // least j >= 2 with a_j != 0
  std::optional<unsigned> mu_index;  // least j >= 1 with b_j != 0
  unsigned bound = 0;                // truncation the indices were read at
  std::optional<long> theta_f;       // nu - mu - 1 when both are finite
  bool dynamically_separating = false;
  bool non_degenerate_both = false;
  std::optional<S> cond1_witness;    // Re(b_{nu-1} / (e^{2 pi i theta} a_nu)) when separating
  bool cond1 = false;
};

template <Scalar S>
QuasiParabolicReport<S> quasi_parabolic_analyze(const GermMap<S>& f, const EigenvalueSystem& sys, unsigned t,
                                                const NormalFormOptions& opts = {}) {
  detail::require(f.dim() == 2 && sys.dim() == 2, ErrorCode::kSpectrumMismatch, "quasi-parabolic germs live in C^2");
  detail::require(sys.is_exact(), ErrorCode::kNumericCertification, "quasi-parabolic analysis needs exact eigenvalues");
  detail::require(sys.root_of_unity_order(0) == std::optional<unsigned>(1), ErrorCode::kSpectrumMismatch,
                  "first eigenvalue must be 1");
  detail::require(sys.modulus_class(1) == ModulusClass::kUnit && !sys.root_of_unity_order(1).has_value(),
                  ErrorCode::kSpectrumMismatch, "second eigenvalue must be an irrational rotation");
  detail::require(t >= 2, ErrorCode::kTruncationTooSmall, "nu needs truncation >= 2");

  const auto pd = poincare_dulac(f, sys, t, opts);
  QuasiParabolicReport<S> rep;
  rep.bound = t;
  for (unsigned j = 2; j <= t && !rep.nu; ++j)
    if (!is_zero(pd.normal.component(0).coefficient(MultiIndex{j, 0}))) rep.nu = j;
  for (unsigned j = 1; j + 1 <= t && !rep.mu_index; ++j)
    if (!is_zero(pd.normal.component(1).coefficient(MultiIndex{j, 1}))) rep.mu_index = j;
  if (rep.nu && rep.mu_index) rep.theta_f = static_cast<long>(*rep.nu) - static_cast<long>(*rep.mu_index) - 1;
  rep.dynamically_separating = rep.nu && (!rep.mu_index || *rep.theta_f <= 0);

  const auto cert = certify_one_resonance(sys, std::vector<std::size_t>{0, 1}, t);
  const auto inv = extract_invariants(pd.normal, cert);
  rep.non_degenerate_both = !inv.linearizable() && !detail::is_degenerate(inv.Lambda, opts);
  detail::require(rep.non_degenerate_both == rep.dynamically_separating, ErrorCode::kVerificationFailed,
                  "dynamical separation disagrees with non-degeneracy");

  if (rep.dynamically_separating) {
    const unsigned nu = *rep.nu;
    const S a_nu = pd.normal.component(0).coefficient(MultiIndex{nu, 0});
    const S b = pd.normal.component(1).coefficient(MultiIndex{nu - 1, 1});
    rep.cond1_witness = real_part(b / (f.lambda(1) * a_nu));
    rep.cond1 = real_sign(*rep.cond1_witness) > 0;
  }
  return rep;
}

template <Scalar S>
struct SemiAttractiveReport {
  unsigned q = 1;
  std::optional<unsigned> k;
  unsigned k_bound = 0;
  unsigned predicted_basins = 0;
  unsigned predicted_components_per_basin = 0;
  S Lambda{};
  bool formally_linearizable = false;
};

/// lambda_1 a primitive q-th root of unity, |lambda_j| < 1 otherwise.
template <Scalar S>
SemiAttractiveReport<S> semi_attractive_analyze(const GermMap<S>& f, const EigenvalueSystem& sys, unsigned t,
                                                const NormalFormOptions& opts = {}) {
  detail::require(sys.is_exact(), ErrorCode::kNumericCertification, "semi-attractive analysis needs exact eigenvalues");
  const auto q = sys.root_of_unity_order(0);
  detail::require(q.has_value(), ErrorCode::kSpectrumMismatch, "first eigenvalue is not a root of unity");
  for (std::size_t j = 1; j < sys.dim(); ++j)
    detail::require(sys.modulus_class(j) == ModulusClass::kInside, ErrorCode::kSpectrumMismatch,
                    "eigenvalue " + std::to_string(j) + " does not have modulus < 1");
  const auto cert = certify_one_resonance(sys, 1, t);
  detail::require(cert.one_resonant() && cert.alpha[0] == *q, ErrorCode::kVerificationFailed,
                  "semi-attractive spectrum did not certify with alpha = (q, 0, ...)");
  const auto pd = poincare_dulac(f, sys, t, opts);
  const auto inv = extract_invariants(pd.normal, cert);
  SemiAttractiveReport<S> rep;
  rep.q = *q;
  rep.k = inv.k;
  rep.k_bound = inv.k_bound;
  rep.Lambda = inv.Lambda;
  rep.formally_linearizable = inv.linearizable();
  if (inv.k) {
    rep.predicted_basins = *inv.k;
    rep.predicted_components_per_basin = *q;
  }
  return rep;
}

namespace detail {

inline bool exact_root(const GaussianRational& c, unsigned n, GaussianRational& out) {
  // c = P / Q with Q a positive integer; an exact n-th root r makes (rQ)^n = P Q^{n-1}
  // a Gaussian integer, hence rQ itself a Gaussian integer.
  mpz_class Q;
  mpz_lcm(Q.get_mpz_t(), c.real().get_den_mpz_t(), c.imag().get_den_mpz_t());
  GaussianRational target = c * int_power(GaussianRational(mpq_class(Q)), static_cast<long>(n));
  const Complex guess = std::pow(target.to_complex(), 1.0 / static_cast<double>(n));
  for (int dr = -1; dr <= 1; ++dr)
    for (int di = -1; di <= 1; ++di) {
      GaussianRational s(mpq_class(static_cast<long>(std::llround(guess.real())) + dr), mpq_class(static_cast<long>(std::llround(guess.imag())) + di));
      if (int_power(s, static_cast<long>(n)) == target) {
        const Complex cand = s.to_complex();
        // principal branch: argument of the root in (-pi/n, pi/n]
        const double arg = std::arg(cand);
        const double lim = M_PI / static_cast<double>(n);
        if (arg > -lim + 1e-12 && arg <= lim + 1e-12) {
          out = s / GaussianRational(mpq_class(Q));
          return true;
        }
      }
    }
  return false;
}

}  // namespace detail

/// Principal n-th root (argument in (-pi/n, pi/n]). Exact mode throws
/// INEXACT_VALUE when the root is not a Gaussian rational.
inline GaussianRational principal_root(const GaussianRational& c, unsigned n) {
  detail::require(n >= 1, ErrorCode::kInvalidArgument, "root order must be >= 1");
  if (n == 1) return c;
  GaussianRational r;
  detail::require(!c.is_zero() && detail::exact_root(c, n, r), ErrorCode::kInexactValue,
                  "principal root of " + c.to_string() + " is not a Gaussian rational; use float mode");
  return r;
}

inline Complex principal_root(const Complex& c, unsigned n) {
  detail::require(n >= 1, ErrorCode::kInvalidArgument, "root order must be >= 1");
  if (n == 1) return c;
  return std::pow(c, 1.0 / static_cast<double>(n));
}

template <Scalar S>
struct RescaleResult {
  GermMap<S> germ;        // F' = psi^{-1} o F o psi
  std::vector<S> dilation;  // psi(z) = diag(b) z
};

/// Dilation b (identity except at the first j0 with alpha_{j0} > 0, where
/// b_{j0} is the principal (k alpha_{j0})-th root of target/Lambda) and the
/// germ written in the coordinates z = psi(z'), so that a_j -> a_j b^{k alpha}
/// and Lambda -> target.
template <Scalar S>
RescaleResult<S> rescale_lambda(const GermMap<S>& f, const OneResonantInvariants<S>& inv, const S& target) {
  detail::require(!is_zero(inv.Lambda), ErrorCode::kDegenerate, "cannot rescale Lambda = 0");
  detail::require(!inv.linearizable(), ErrorCode::kLinearizable, "rescaling needs a finite order k");
  detail::require(!is_zero(target), ErrorCode::kInvalidArgument, "target Lambda must be nonzero");
  const std::size_t n = f.dim();
  std::size_t j0 = 0;
  while (inv.alpha[j0] == 0) ++j0;
  std::vector<S> b(n, scalar_from_int<S>(1));
  b[j0] = principal_root(target / inv.Lambda, *inv.k * inv.alpha[j0]);
  std::vector<TruncatedSeries<S>> comps;
  for (std::size_t j = 0; j < n; ++j) {
    TruncatedSeries<S> c(n, f.order());
    const S inv_bj = inverse(b[j]);
    for (const auto& [idx, coeff] : f.component(j).terms()) {
      S factor = inv_bj;
      for (std::size_t i = 0; i < n; ++i)
        for (unsigned e = 0; e < idx[i]; ++e) factor *= b[i];
      c.set(idx, coeff * factor);
    }
    comps.push_back(std::move(c));
  }
  return {GermMap<S>(std::move(comps)), std::move(b)};
}

}  // namespace rgerm
