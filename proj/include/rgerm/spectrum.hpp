#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rgerm/error.hpp"
#include "rgerm/multi_index.hpp"
#include "rgerm/scalar.hpp"

namespace rgerm {

enum class GeneratorKind { kRootOfUnity, kIrrationalAngle, kModulus };

/// One multiplicative generator of the eigenvalue group.
///
/// Root of unity: e^{2 pi i / order}. Irrational angle: a formal
/// e^{2 pi i theta} with theta irrational; distinct angles are rationally
/// independent. Modulus: a positive rational rho != 1.
struct Generator {
  GeneratorKind kind = GeneratorKind::kRootOfUnity;
  unsigned order = 1;
  std::string name;
  mpq_class modulus = 1;

  static Generator root_of_unity(unsigned q) { return {GeneratorKind::kRootOfUnity, q, "", 1}; }
  static Generator irrational_angle(std::string name) {
    return {GeneratorKind::kIrrationalAngle, 0, std::move(name), 1};
  }
  static Generator modulus_value(mpq_class rho) { return {GeneratorKind::kModulus, 0, "", std::move(rho)}; }
};

enum class ModulusClass { kInside, kUnit, kOutside };

inline std::string_view to_string(ModulusClass c) {
  switch (c) {
    case ModulusClass::kInside: return "lt1";
    case ModulusClass::kUnit: return "unit";
    case ModulusClass::kOutside: return "gt1";
  }
  return "?";
}

namespace detail {

// Primes p = 1 mod 4 split as p = (a+bi)(a-bi). The unit (a+bi)/(a-bi) is not a
// root of unity, and units built from distinct primes are multiplicatively
// independent, so they stand in exactly for independent irrational rotations.
inline constexpr std::pair<long, long> kGaussianPrimes[] = {
    {2, 1}, {3, 2}, {4, 1}, {5, 2}, {6, 1}, {5, 4}, {7, 2}, {6, 5}, {8, 3}, {8, 5}, {9, 4}, {10, 1},
};

inline GaussianRational pythagorean_unit(std::size_t s) {
  require(s < std::size(kGaussianPrimes), ErrorCode::kInvalidArgument, "too many irrational angle generators");
  auto [a, b] = kGaussianPrimes[s];
  GaussianRational num{mpq_class(a), mpq_class(b)};
  return num / num.conj();
}

inline std::vector<std::pair<mpz_class, long>> factor(mpz_class n) {
  std::vector<std::pair<mpz_class, long>> out;
  for (mpz_class p = 2; p * p <= n; ++p) {
    require(p < 10000000, ErrorCode::kInvalidArgument, "modulus too large to factor");
    long e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e) out.emplace_back(p, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

// Rank of a rational matrix by Gaussian elimination.
inline std::size_t rational_rank(std::vector<std::vector<mpq_class>> m) {
  std::size_t rank = 0;
  const std::size_t cols = m.empty() ? 0 : m.front().size();
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < m.size() && sgn(m[pivot][c]) == 0) ++pivot;
    if (pivot == m.size()) continue;
    std::swap(m[pivot], m[rank]);
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == rank || sgn(m[r][c]) == 0) continue;
      mpq_class f = m[r][c] / m[rank][c];
      for (std::size_t k = c; k < cols; ++k) m[r][k] -= f * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

inline long floor_mod(long a, long q) {
  long r = a % q;
  return r < 0 ? r + q : r;
}

}  // namespace detail

/// Spectrum lambda_1..lambda_n of dF_0, either structured (exact) or numeric.
///
/// In exact mode each eigenvalue is a product of declared generators raised to
/// integer exponents, and lambda^l = lambda_j is decided on exponent vectors.
class EigenvalueSystem {
 public:
  static EigenvalueSystem exact(std::vector<Generator> generators, std::vector<std::vector<long>> exponents) {
    EigenvalueSystem sys;
    sys.exact_ = true;
    sys.generators_ = std::move(generators);
    sys.exponents_ = std::move(exponents);
    sys.validate_exact();
    return sys;
  }

  static EigenvalueSystem numeric(std::vector<Complex> values, double tolerance) {
    detail::require(!values.empty() && values.size() <= MultiIndex::kMaxDim, ErrorCode::kInvalidArgument,
                    "bad spectrum size");
    detail::require(tolerance > 0.0, ErrorCode::kInvalidArgument, "numeric tolerance must be positive");
    for (const auto& v : values)
      detail::require(std::abs(v) > 0.0, ErrorCode::kSingularLinearPart, "zero eigenvalue");
    EigenvalueSystem sys;
    sys.exact_ = false;
    sys.values_ = std::move(values);
    sys.tolerance_ = tolerance;
    return sys;
  }

  bool is_exact() const { return exact_; }
  std::size_t dim() const { return exact_ ? exponents_.size() : values_.size(); }
  const std::vector<Generator>& generators() const { return generators_; }
  const std::vector<long>& exponents(std::size_t j) const { return exponents_.at(j); }
  double tolerance() const { return tolerance_; }

  /// Canonical exponent vector of lambda^l (roots of unity reduced mod order).
  std::vector<long> element(const MultiIndex& l) const {
    require_exact("element");
    std::vector<long> e(generators_.size(), 0);
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t g = 0; g < generators_.size(); ++g) e[g] += static_cast<long>(l[i]) * exponents_[i][g];
    return canonical(std::move(e));
  }

  std::vector<long> eigen_element(std::size_t j) const { return canonical(exponents_.at(j)); }

  /// lambda^l == lambda_j, decided structurally. Exact mode only.
  bool equals_eigenvalue(const MultiIndex& l, std::size_t j) const { return element(l) == eigen_element(j); }

  /// lambda^beta == 1, decided structurally. Exact mode only.
  bool is_relation(const MultiIndex& beta) const {
    auto e = element(beta);
    return std::all_of(e.begin(), e.end(), [](long v) { return v == 0; });
  }

  Complex numeric_value(std::size_t j) const {
    if (!exact_) return values_.at(j);
    Complex v{1.0, 0.0};
    for (std::size_t g = 0; g < generators_.size(); ++g) {
      const long e = exponents_.at(j)[g];
      if (e == 0) continue;
      v *= std::pow(generator_numeric(g), static_cast<double>(e));
    }
    return v;
  }

  Complex numeric_power(const MultiIndex& l) const {
    Complex v{1.0, 0.0};
    for (std::size_t i = 0; i < dim(); ++i)
      for (unsigned p = 0; p < l[i]; ++p) v *= numeric_value(i);
    return v;
  }

  /// True when every eigenvalue has an exact Gaussian-rational value.
  bool representable_exactly() const {
    if (!exact_) return false;
    for (std::size_t g = 0; g < generators_.size(); ++g)
      if (generators_[g].kind == GeneratorKind::kRootOfUnity && 4 % generators_[g].order != 0) {
        for (const auto& e : exponents_)
          if (detail::floor_mod(e[g], generators_[g].order) != 0) return false;
      }
    return true;
  }

  GaussianRational exact_value(std::size_t j) const {
    require_exact("exact_value");
    GaussianRational v(1);
    for (std::size_t g = 0; g < generators_.size(); ++g) {
      long e = exponents_.at(j)[g];
      const Generator& gen = generators_[g];
      if (gen.kind == GeneratorKind::kRootOfUnity) {
        e = detail::floor_mod(e, gen.order);
        if (e == 0) continue;
        detail::require(4 % gen.order == 0, ErrorCode::kInexactValue,
                        "root of unity of order " + std::to_string(gen.order) +
                            " has no Gaussian-rational value; use float mode");
      }
      if (e != 0) v *= int_power(generator_exact(g), e);
    }
    return v;
  }

  template <Scalar S>
  std::vector<S> values() const {
    std::vector<S> out;
    for (std::size_t j = 0; j < dim(); ++j) {
      if constexpr (is_exact_v<S>) {
        out.push_back(exact_value(j));
      } else {
        out.push_back(numeric_value(j));
      }
    }
    return out;
  }

  ModulusClass modulus_class(std::size_t j) const {
    if (!exact_) {
      const double r = std::abs(values_.at(j));
      if (std::abs(r - 1.0) <= tolerance_) return ModulusClass::kUnit;
      return r < 1.0 ? ModulusClass::kInside : ModulusClass::kOutside;
    }
    mpq_class mod = 1;
    for (std::size_t g = 0; g < generators_.size(); ++g) {
      if (generators_[g].kind != GeneratorKind::kModulus) continue;
      long e = exponents_.at(j)[g];
      mpq_class base = e < 0 ? mpq_class(1 / generators_[g].modulus) : generators_[g].modulus;
      for (long p = 0; p < std::labs(e); ++p) mod *= base;
    }
    if (mod == 1) return ModulusClass::kUnit;
    return mod < 1 ? ModulusClass::kInside : ModulusClass::kOutside;
  }

  /// Order q of lambda_j when it is a root of unity (exact mode).
  std::optional<unsigned> root_of_unity_order(std::size_t j) const {
    require_exact("root_of_unity_order");
    unsigned q = 1;
    for (std::size_t g = 0; g < generators_.size(); ++g) {
      long e = exponents_.at(j)[g];
      const Generator& gen = generators_[g];
      if (gen.kind == GeneratorKind::kRootOfUnity) {
        e = detail::floor_mod(e, gen.order);
        const unsigned ord = gen.order / std::gcd(static_cast<unsigned>(e), gen.order);
        q = std::lcm(q, ord);
      } else if (e != 0) {
        return std::nullopt;
      }
    }
    return q;
  }

 private:
  void require_exact(const char* what) const {
    detail::require(exact_, ErrorCode::kNumericCertification,
                    std::string(what) + " needs an exact (generator) eigenvalue system");
  }

  std::vector<long> canonical(std::vector<long> e) const {
    for (std::size_t g = 0; g < generators_.size(); ++g)
      if (generators_[g].kind == GeneratorKind::kRootOfUnity)
        e[g] = detail::floor_mod(e[g], static_cast<long>(generators_[g].order));
    return e;
  }

  std::size_t irrational_slot(std::size_t g) const {
    std::size_t s = 0;
    for (std::size_t i = 0; i < g; ++i)
      if (generators_[i].kind == GeneratorKind::kIrrationalAngle) ++s;
    return s;
  }

  GaussianRational generator_exact(std::size_t g) const {
    const Generator& gen = generators_[g];
    switch (gen.kind) {
      case GeneratorKind::kRootOfUnity:
        switch (gen.order) {
          case 1: return GaussianRational(1);
          case 2: return GaussianRational(-1);
          default: return GaussianRational(0, 1);
        }
      case GeneratorKind::kIrrationalAngle: return detail::pythagorean_unit(irrational_slot(g));
      case GeneratorKind::kModulus: return GaussianRational(gen.modulus);
    }
    return GaussianRational(1);
  }

  Complex generator_numeric(std::size_t g) const {
    const Generator& gen = generators_[g];
    switch (gen.kind) {
      case GeneratorKind::kRootOfUnity: return std::polar(1.0, 2.0 * M_PI / static_cast<double>(gen.order));
      case GeneratorKind::kIrrationalAngle: return detail::pythagorean_unit(irrational_slot(g)).to_complex();
      case GeneratorKind::kModulus: return {gen.modulus.get_d(), 0.0};
    }
    return {1.0, 0.0};
  }

  void validate_exact() {
    detail::require(!exponents_.empty() && exponents_.size() <= MultiIndex::kMaxDim, ErrorCode::kInvalidArgument,
                    "bad spectrum size");
    for (const auto& e : exponents_)
      detail::require(e.size() == generators_.size(), ErrorCode::kDimensionMismatch,
                      "exponent vector length differs from generator count");
    std::set<std::string> names;
    std::vector<std::vector<std::pair<mpz_class, long>>> moduli;
    for (auto& gen : generators_) {
      switch (gen.kind) {
        case GeneratorKind::kRootOfUnity:
          detail::require(gen.order >= 1, ErrorCode::kInvalidArgument, "root of unity order must be >= 1");
          break;
        case GeneratorKind::kIrrationalAngle:
          detail::require(names.insert(gen.name).second, ErrorCode::kInvalidArgument,
                          "duplicate irrational angle '" + gen.name + "'");
          break;
        case GeneratorKind::kModulus: {
          gen.modulus.canonicalize();
          detail::require(sgn(gen.modulus) > 0 && gen.modulus != 1, ErrorCode::kInvalidArgument,
                          "modulus generator must be positive and != 1");
          auto f = detail::factor(gen.modulus.get_num());
          for (auto [p, e] : detail::factor(gen.modulus.get_den())) f.emplace_back(p, -e);
          moduli.push_back(std::move(f));
          break;
        }
      }
    }
    // Declared moduli must be multiplicatively independent for the structural
    // equality test to agree with the actual values.
    if (moduli.size() > 1) {
      std::vector<mpz_class> primes;
      for (const auto& f : moduli)
        for (const auto& [p, e] : f)
          if (std::find(primes.begin(), primes.end(), p) == primes.end()) primes.push_back(p);
      std::vector<std::vector<mpq_class>> m(moduli.size(), std::vector<mpq_class>(primes.size(), 0));
      for (std::size_t r = 0; r < moduli.size(); ++r)
        for (const auto& [p, e] : moduli[r])
          m[r][std::find(primes.begin(), primes.end(), p) - primes.begin()] += e;
      detail::require(detail::rational_rank(m) == moduli.size(), ErrorCode::kInvalidArgument,
                      "modulus generators are multiplicatively dependent");
    }
  }

  bool exact_ = true;
  std::vector<Generator> generators_;
  std::vector<std::vector<long>> exponents_;
  std::vector<Complex> values_;
  double tolerance_ = 0.0;
};

/// A pair (j, l), |l| >= 2, with lambda_j = lambda^l. Indices are 0-based.
struct Resonance {
  std::size_t j = 0;
  MultiIndex l;
  bool certified = true;

  friend bool operator==(const Resonance& a, const Resonance& b) { return a.j == b.j && a.l == b.l; }
};

/// Sort key (|l|, graded-lex l, j).
inline bool resonance_less(const Resonance& a, const Resonance& b) {
  if (a.l != b.l) return a.l < b.l;
  return a.j < b.j;
}

/// All resonances with 2 <= |l| <= D. Numeric systems return approximate
/// (|lambda^l - lambda_j| < tol) pairs tagged uncertified.
inline std::vector<Resonance> enumerate_resonances(const EigenvalueSystem& sys, unsigned max_degree) {
  detail::require(max_degree >= 2, ErrorCode::kInvalidArgument, "degree bound must be >= 2");
  std::vector<Resonance> out;
  const std::size_t n = sys.dim();
  std::vector<std::vector<long>> eig;
  if (sys.is_exact())
    for (std::size_t j = 0; j < n; ++j) eig.push_back(sys.eigen_element(j));
  for (unsigned d = 2; d <= max_degree; ++d) {
    for_each_of_degree(n, d, [&](const MultiIndex& l) {
      if (sys.is_exact()) {
        auto e = sys.element(l);
        for (std::size_t j = 0; j < n; ++j)
          if (e == eig[j]) out.push_back({j, l, true});
      } else {
        const Complex p = sys.numeric_power(l);
        for (std::size_t j = 0; j < n; ++j)
          if (std::abs(p - sys.numeric_value(j)) < sys.tolerance()) out.push_back({j, l, false});
      }
    });
  }
  return out;
}

enum class CertificateStatus { kOneResonant, kNotOneResonant, kLinearScopeOnly };

inline std::string_view to_string(CertificateStatus s) {
  switch (s) {
    case CertificateStatus::kOneResonant: return "ONE_RESONANT";
    case CertificateStatus::kNotOneResonant: return "NOT_ONE_RESONANT";
    case CertificateStatus::kLinearScopeOnly: return "LINEAR_SCOPE_ONLY";
  }
  return "?";
}

/// Verified resonance structure for a scope of eigenvalues, valid up to the
/// recorded degree bound.
struct ResonanceCertificate {
  std::vector<std::size_t> scope;  // sorted, 0-based
  MultiIndex alpha;                // zero unless ONE_RESONANT
  unsigned degree_bound = 0;
  std::vector<Resonance> verified;  // every resonance (j in scope, |l| <= D)
  CertificateStatus status = CertificateStatus::kLinearScopeOnly;
  std::optional<Resonance> witness;

  bool in_scope(std::size_t j) const { return std::binary_search(scope.begin(), scope.end(), j); }
  bool one_resonant() const { return status == CertificateStatus::kOneResonant; }
};

/// Certifies one-resonance with respect to an arbitrary index set.
inline ResonanceCertificate certify_one_resonance(const EigenvalueSystem& sys, std::vector<std::size_t> scope,
                                                  unsigned max_degree) {
  detail::require(sys.is_exact(), ErrorCode::kNumericCertification,
                  "numeric eigenvalues cannot certify one-resonance");
  std::sort(scope.begin(), scope.end());
  scope.erase(std::unique(scope.begin(), scope.end()), scope.end());
  detail::require(!scope.empty() && scope.back() < sys.dim(), ErrorCode::kInvalidArgument, "bad scope");

  ResonanceCertificate cert;
  cert.scope = scope;
  cert.degree_bound = max_degree;
  cert.alpha = MultiIndex(sys.dim());
  for (const auto& r : enumerate_resonances(sys, max_degree))
    if (cert.in_scope(r.j)) cert.verified.push_back(r);

  if (cert.verified.empty()) {
    cert.status = CertificateStatus::kLinearScopeOnly;
    return cert;
  }

  auto fail = [&](const Resonance& r) {
    cert.status = CertificateStatus::kNotOneResonant;
    cert.witness = r;
    cert.alpha = MultiIndex(sys.dim());
    return cert;
  };

  std::optional<MultiIndex> alpha;
  for (const auto& r : cert.verified) {
    if (r.l[r.j] == 0) return fail(r);
    MultiIndex v = r.l - MultiIndex::unit(sys.dim(), r.j);
    for (std::size_t i = 0; i < sys.dim(); ++i)
      if (v[i] != 0 && !cert.in_scope(i)) return fail(r);
    if (!alpha) {
      alpha = v;  // smallest |l| comes first, so this is the k = 1 instance
      continue;
    }
    if (v.degree() % alpha->degree() != 0 || v != alpha->scaled(v.degree() / alpha->degree())) return fail(r);
  }
  // Every (j, k alpha + e_j) within the bound must itself be listed.
  for (std::size_t j : cert.scope)
    for (unsigned k = 1; k * alpha->degree() + 1 <= max_degree; ++k) {
      Resonance expect{j, alpha->scaled(k) + MultiIndex::unit(sys.dim(), j), true};
      detail::require(std::find(cert.verified.begin(), cert.verified.end(), expect) != cert.verified.end(),
                      ErrorCode::kVerificationFailed, "resonance family incomplete");
    }
  detail::require(sys.is_relation(*alpha), ErrorCode::kVerificationFailed, "lambda^alpha != 1");
  cert.alpha = *alpha;
  cert.status = CertificateStatus::kOneResonant;
  return cert;
}

/// Scope given as the first m eigenvalues.
inline ResonanceCertificate certify_one_resonance(const EigenvalueSystem& sys, std::size_t m, unsigned max_degree) {
  detail::require(m >= 1 && m <= sys.dim(), ErrorCode::kInvalidArgument, "scope size must be in [1, n]");
  std::vector<std::size_t> scope(m);
  std::iota(scope.begin(), scope.end(), std::size_t{0});
  return certify_one_resonance(sys, std::move(scope), max_degree);
}

struct ExtremalSets {
  std::vector<std::size_t> minimal;
  std::vector<std::size_t> maximal;
  ResonanceCertificate minimal_certificate;
  ResonanceCertificate maximal_certificate;
};

/// Minimal set {j : alpha_j != 0} and maximal set {j : every resonance
/// (j, l), |l| <= D, has l = k alpha + e_j}, each with its certificate.
inline ExtremalSets one_resonant_extremal_sets(const EigenvalueSystem& sys, unsigned max_degree) {
  detail::require(sys.is_exact(), ErrorCode::kNumericCertification, "extremal sets need exact eigenvalues");
  detail::require(max_degree >= 2, ErrorCode::kInvalidArgument, "degree bound must be >= 2");
  const std::size_t n = sys.dim();
  std::vector<MultiIndex> relations;
  for (unsigned d = 1; d + 1 <= max_degree; ++d)
    for_each_of_degree(n, d, [&](const MultiIndex& b) {
      if (sys.is_relation(b)) relations.push_back(b);
    });
  detail::require(!relations.empty(), ErrorCode::kNoOneResonantScope,
                  "no multiplicative relation lambda^beta = 1 up to the degree bound");
  const MultiIndex alpha = relations.front();
  for (const auto& b : relations)
    detail::require(b.degree() % alpha.degree() == 0 && b == alpha.scaled(b.degree() / alpha.degree()),
                    ErrorCode::kNoOneResonantScope,
                    "relations " + alpha.to_string() + " and " + b.to_string() + " are independent");

  const auto all = enumerate_resonances(sys, max_degree);
  ExtremalSets out;
  for (std::size_t j = 0; j < n; ++j) {
    if (alpha[j] != 0) out.minimal.push_back(j);
    bool good = true;
    for (const auto& r : all) {
      if (r.j != j) continue;
      if (r.l[j] == 0) {
        good = false;
        break;
      }
      MultiIndex v = r.l - MultiIndex::unit(n, j);
      if (v.degree() % alpha.degree() != 0 || v != alpha.scaled(v.degree() / alpha.degree())) {
        good = false;
        break;
      }
    }
    if (good) out.maximal.push_back(j);
  }
  detail::require(std::includes(out.maximal.begin(), out.maximal.end(), out.minimal.begin(), out.minimal.end()),
                  ErrorCode::kNoOneResonantScope, "support of alpha is not one-resonant");
  out.minimal_certificate = certify_one_resonance(sys, out.minimal, max_degree);
  out.maximal_certificate = certify_one_resonance(sys, out.maximal, max_degree);
  return out;
}

}  // namespace rgerm
