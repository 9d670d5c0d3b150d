#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rgerm/dynamics.hpp"
#include "rgerm/normal_form.hpp"
#include "rgerm/spectrum.hpp"

namespace rgerm {

/// Everything a basin run needs: the map to iterate (rescaled so Lambda = -1/k),
/// the certified scope and whether the hypotheses of the basin theorem hold.
struct BasinSetup {
  explicit BasinSetup(PolyMapNumeric m) : map(std::move(m)) {}

  PolyMapNumeric map;
  std::vector<std::size_t> scope;
  MultiIndex alpha;
  unsigned k = 1;
  Complex Lambda;                  // before rescaling
  std::vector<Complex> a;          // before rescaling, aligned with scope
  std::vector<double> witnesses;   // Re(a_j / (lambda_j Lambda)), empty when degenerate
  std::vector<Complex> dilation;   // empty when no rescaling happened
  std::vector<Complex> directions; // in the rescaled coordinates
  bool non_degenerate = false;
  bool parabolically_attracting = false;
  bool off_scope_attracting = false;
  bool hypotheses_hold() const { return non_degenerate && parabolically_attracting && off_scope_attracting; }
};

/// Default scope: every eigenvalue of modulus >= 1 plus the support of alpha,
/// so that |lambda_j| < 1 holds off the scope.
inline std::vector<std::size_t> default_basin_scope(const EigenvalueSystem& sys, unsigned t) {
  std::vector<std::size_t> scope;
  std::vector<std::size_t> minimal;
  try {
    minimal = one_resonant_extremal_sets(sys, t).minimal;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoOneResonantScope) throw;
  }
  for (std::size_t j = 0; j < sys.dim(); ++j)
    if (sys.modulus_class(j) != ModulusClass::kInside ||
        std::find(minimal.begin(), minimal.end(), j) != minimal.end())
      scope.push_back(j);
  detail::require(!scope.empty(), ErrorCode::kNoOneResonantScope, "every eigenvalue is attracting");
  return scope;
}

template <Scalar S>
BasinSetup prepare_basin(const GermMap<S>& f, const EigenvalueSystem& sys, unsigned t,
                         std::optional<std::vector<std::size_t>> scope = std::nullopt,
                         const NormalFormOptions& opts = {}) {
  detail::require(sys.is_exact(), ErrorCode::kNumericCertification, "basin runs need a certified spectrum");
  t = std::min(t, f.order());
  const auto chosen = scope ? *scope : default_basin_scope(sys, t);
  const auto cert = certify_one_resonance(sys, chosen, t);
  detail::require(cert.one_resonant(), ErrorCode::kNotOneResonant,
                  "scope is " + std::string(to_string(cert.status)));
  const auto pd = poincare_dulac(f, sys, t, opts);
  const auto inv = extract_invariants(pd.normal, cert);
  detail::require(!inv.linearizable(), ErrorCode::kLinearizable,
                  "no resonant level up to k_bound = " + std::to_string(inv.k_bound));
  const auto cls = classify(inv, pd.normal.lambdas(), sys, opts);

  const GermMap<Complex> ff = to_float(f);
  OneResonantInvariants<Complex> finv;
  finv.alpha = inv.alpha;
  finv.scope = inv.scope;
  finv.k = inv.k;
  finv.k_bound = inv.k_bound;
  for (const auto& x : inv.a) finv.a.push_back(to_complex(x));
  finv.Lambda = to_complex(inv.Lambda);

  BasinSetup s(PolyMapNumeric{ff});
  s.scope = cert.scope;
  s.alpha = inv.alpha;
  s.k = *inv.k;
  s.Lambda = finv.Lambda;
  s.a = finv.a;
  s.non_degenerate = cls.non_degenerate;
  s.parabolically_attracting = cls.parabolically_attracting;
  for (const auto& w : cls.witnesses) s.witnesses.push_back(to_complex(w).real());
  s.off_scope_attracting = true;
  for (std::size_t j = 0; j < sys.dim(); ++j)
    if (!cert.in_scope(j)) s.off_scope_attracting = s.off_scope_attracting && sys.modulus_class(j) == ModulusClass::kInside;
  if (cls.non_degenerate) {
    const Complex target = -1.0 / static_cast<double>(s.k);
    auto r = rescale_lambda(ff, finv, target);
    s.map = PolyMapNumeric(r.germ);
    s.dilation = r.dilation;
    s.directions = attracting_directions(target, s.k);
  }
  return s;
}

}  // namespace rgerm
