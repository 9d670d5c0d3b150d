#pragma once

#include <cstdio>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rgerm/basin.hpp"
#include "rgerm/dynamics.hpp"
#include "rgerm/io.hpp"
#include "rgerm/normal_form.hpp"
#include "rgerm/spectrum.hpp"

namespace rgerm {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitNotOneResonant = 2,
  kExitParse = 3,
  kExitRefused = 4,
  kExitGeometry = 5,
};

inline int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::kParse: return kExitParse;
    case ErrorCode::kNotOneResonant: return kExitNotOneResonant;
    case ErrorCode::kDegenerate:
    case ErrorCode::kLinearizable: return kExitRefused;
    case ErrorCode::kGeometrySearchFailed: return kExitGeometry;
    default: return kExitFailure;
  }
}

struct CommandResult {
  int exit_code = kExitOk;
  json report;
  std::string csv;  // simulate only
};

inline json report_header(const std::string& command, const std::vector<std::string>& argv) {
  return {{"tool", "resonant_germs"}, {"version", kVersion}, {"command", command}, {"invocation", argv}};
}

inline json error_json(const Error& e) {
  std::string msg = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
  return {{"code", std::string(to_string(e.code()))}, {"message", msg}};
}

namespace pipeline {

inline std::vector<std::size_t> first_m(std::size_t m, std::size_t n) {
  detail::require(m >= 1 && m <= n, ErrorCode::kInvalidArgument, "scope m must be in [1, " + std::to_string(n) + "]");
  std::vector<std::size_t> s(m);
  std::iota(s.begin(), s.end(), std::size_t{0});
  return s;
}

inline json certificate_json(const ResonanceCertificate& c) {
  json j = {{"status", std::string(to_string(c.status))},
            {"scope", c.scope},
            {"degreeBound", c.degree_bound},
            {"verifiedResonances", c.verified.size()}};
  if (c.one_resonant()) j["alpha"] = io::index_json(c.alpha);
  if (c.witness) j["witness"] = {{"j", c.witness->j}, {"l", io::index_json(c.witness->l)}};
  return j;
}

template <Scalar S>
json invariants_json(const OneResonantInvariants<S>& inv) {
  json j;
  j["alpha"] = io::index_json(inv.alpha);
  j["scope"] = inv.scope;
  j["kBound"] = inv.k_bound;
  if (inv.k) {
    j["k"] = *inv.k;
    json a = json::array();
    for (const auto& x : inv.a) a.push_back(io::value_json(x));
    j["a"] = a;
    j["Lambda"] = io::value_json(inv.Lambda);
    j["minimumNormalFormOrder"] = 2 * *inv.k * inv.alpha.degree() + 1;
  } else {
    j["k"] = nullptr;
    j["kStatus"] = "INFINITE_UP_TO";
  }
  return j;
}

template <Scalar S>
json classification_json(const Classification<S>& c) {
  json w = json::array();
  for (const auto& x : c.witnesses) w.push_back(io::value_json(x));
  json m = json::array();
  for (auto mc : c.moduli) m.push_back(std::string(to_string(mc)));
  return {{"nonDegenerate", c.non_degenerate},
          {"parabolicallyAttracting", c.parabolically_attracting},
          {"attractionTested", c.attraction_tested},
          {"witnesses", w},
          {"moduli", m}};
}

/// Scope for analysis: CLI m, then the document's m, then the maximal set.
inline std::vector<std::size_t> analysis_scope(const io::GermDocument& doc, std::optional<unsigned> m, unsigned D,
                                               json& notes) {
  const std::size_t n = doc.dim();
  if (m) return first_m(*m, n);
  if (doc.scope) return first_m(*doc.scope, n);
  try {
    const auto ex = one_resonant_extremal_sets(doc.spectrum, D);
    notes["extremalSets"] = {{"minimal", ex.minimal}, {"maximal", ex.maximal}};
    return ex.maximal;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoOneResonantScope) throw;
    notes["extremalSets"] = error_json(e);
    return first_m(n, n);
  }
}

template <Scalar S>
void analyze_germ(const GermMap<S>& f, const io::GermDocument& doc, const ResonanceCertificate& cert, unsigned t,
                  const NormalFormOptions& opts, json& rep) {
  const auto pd = poincare_dulac(f, doc.spectrum, t, opts);
  rep["poincareDulac"] = io::germ_json(pd.normal, &doc.spectrum);
  const auto inv = extract_invariants(pd.normal, cert);
  rep["invariants"] = invariants_json(inv);
  if (inv.linearizable()) {
    rep["classification"] = {{"linearizable", true}};
    return;
  }
  rep["classification"] = classification_json(classify(inv, pd.normal.lambdas(), doc.spectrum, opts));
  if (*inv.k * 2 * inv.alpha.degree() + 1 > t)
    rep["notes"].push_back("truncation " + std::to_string(t) + " is below the normal-form order " +
                           std::to_string(2 * *inv.k * inv.alpha.degree() + 1));

  // Special families, reported when the spectrum has their shape.
  try {
    const auto qp = quasi_parabolic_analyze(f, doc.spectrum, t, opts);
    json q;
    q["nu"] = qp.nu ? json(*qp.nu) : json(nullptr);
    q["mu"] = qp.mu_index ? json(*qp.mu_index) : json(nullptr);
    q["thetaF"] = qp.theta_f ? json(*qp.theta_f) : json(nullptr);
    q["dynamicallySeparating"] = qp.dynamically_separating;
    q["nonDegenerateInBothVariables"] = qp.non_degenerate_both;
    if (qp.cond1_witness) q["cond1Witness"] = io::value_json(*qp.cond1_witness);
    q["cond1"] = qp.cond1;
    rep["quasiParabolic"] = q;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSpectrumMismatch && e.code() != ErrorCode::kNumericCertification)
      rep["quasiParabolic"] = error_json(e);
  }
  try {
    const auto sa = semi_attractive_analyze(f, doc.spectrum, t, opts);
    rep["semiAttractive"] = {{"q", sa.q},
                             {"k", sa.k ? json(*sa.k) : json(nullptr)},
                             {"predictedBasins", sa.predicted_basins},
                             {"componentsPerBasin", sa.predicted_components_per_basin},
                             {"Lambda", io::value_json(sa.Lambda)}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSpectrumMismatch && e.code() != ErrorCode::kNumericCertification)
      rep["semiAttractive"] = error_json(e);
  }
}

}  // namespace pipeline

struct AnalyzeArgs {
  std::optional<unsigned> scope;
  std::optional<unsigned> degree;
  std::optional<unsigned> order;
  NormalFormOptions options;
};

inline CommandResult cmd_analyze(const io::GermDocument& doc, const AnalyzeArgs& args,
                                 const std::vector<std::string>& argv = {}) {
  CommandResult out;
  out.report = report_header("analyze", argv);
  json& rep = out.report;
  rep["notes"] = json::array();
  rep["mode"] = io::mode_name(doc.exact);
  rep["tolerances"] = doc.exact ? json{{"comparison", "exact"}}
                                : json{{"smallDivisor", args.options.small_divisor},
                                       {"residual", args.options.residual_tolerance},
                                       {"degeneracy", args.options.degeneracy_tolerance}};
  try {
    const unsigned t = std::min(args.order.value_or(doc.order()), doc.order());
    const unsigned D = args.degree.value_or(std::max(t, 2u));
    rep["order"] = t;
    rep["degree"] = D;
    const auto scope = pipeline::analysis_scope(doc, args.scope, D, rep);
    const auto cert = certify_one_resonance(doc.spectrum, scope, D);
    rep["certificate"] = pipeline::certificate_json(cert);
    if (cert.status == CertificateStatus::kNotOneResonant) {
      out.exit_code = kExitNotOneResonant;
      return out;
    }
    if (cert.status == CertificateStatus::kLinearScopeOnly) {
      rep["notes"].push_back("no resonance in the scope up to the degree bound");
      return out;
    }
    if (doc.exact)
      pipeline::analyze_germ(*doc.exact_germ, doc, cert, t, args.options, rep);
    else
      pipeline::analyze_germ(doc.float_germ, doc, cert, t, args.options, rep);
  } catch (const Error& e) {
    rep["error"] = error_json(e);
    out.exit_code = exit_code_for(e.code());
  }
  return out;
}

struct NormalizeArgs {
  std::optional<unsigned> scope;
  std::optional<unsigned> order;
  NormalFormOptions options;
};

namespace pipeline {

template <Scalar S>
void normalize_germ(const GermMap<S>& f, const io::GermDocument& doc, const ResonanceCertificate& cert, unsigned t,
                    const NormalFormOptions& opts, json& rep) {
  const auto r = one_resonant_normalize(f, doc.spectrum, cert, t, opts);
  // one_resonant_normalize has already refused on failure; recompute for the record
  const double defect = conjugation_defect(r.conjugacy, f.truncated(t), r.normal, t);
  rep["invariants"] = invariants_json(r.invariants);
  rep["mu"] = r.mu ? io::value_json(*r.mu) : json(nullptr);
  rep["normalForm"] = io::germ_json(r.normal, &doc.spectrum);
  rep["conjugacy"] = io::germ_json(r.conjugacy, nullptr);
  rep["verification"] = {{"identity", "Theta o F = Fhat o Theta up to order t"},
                         {"order", t},
                         {"defect", defect},
                         {"tolerance", is_exact_v<S> ? 0.0 : opts.identity_tolerance},
                         {"passed", true}};
}

}  // namespace pipeline

inline CommandResult cmd_normalize(const io::GermDocument& doc, const NormalizeArgs& args,
                                   const std::vector<std::string>& argv = {}) {
  CommandResult out;
  out.report = report_header("normalize", argv);
  json& rep = out.report;
  rep["mode"] = io::mode_name(doc.exact);
  try {
    const unsigned t = std::min(args.order.value_or(doc.order()), doc.order());
    rep["order"] = t;
    json notes;
    const auto scope = pipeline::analysis_scope(doc, args.scope, std::max(t, 2u), notes);
    const auto cert = certify_one_resonance(doc.spectrum, scope, std::max(t, 2u));
    rep["certificate"] = pipeline::certificate_json(cert);
    detail::require(cert.one_resonant(), ErrorCode::kNotOneResonant,
                    "scope is " + std::string(to_string(cert.status)));
    if (doc.exact)
      pipeline::normalize_germ(*doc.exact_germ, doc, cert, t, args.options, rep);
    else
      pipeline::normalize_germ(doc.float_germ, doc, cert, t, args.options, rep);
  } catch (const Error& e) {
    rep["error"] = error_json(e);
    if (e.code() == ErrorCode::kDegenerate || e.code() == ErrorCode::kLinearizable) rep["refused"] = true;
    out.exit_code = exit_code_for(e.code());
  }
  return out;
}

/// "re,im;re,im;..." (an imaginary part may be omitted).
inline Point parse_point(const std::string& text, std::size_t dim) {
  Point z;
  std::stringstream ss(text);
  std::string coord;
  while (std::getline(ss, coord, ';')) {
    const auto comma = coord.find(',');
    bool ignore = true;
    try {
      const double re = io::detail::rational_value(json(coord.substr(0, comma)), ignore).get_d();
      const double im =
          comma == std::string::npos ? 0.0 : io::detail::rational_value(json(coord.substr(comma + 1)), ignore).get_d();
      z.emplace_back(re, im);
    } catch (const Error&) {
      throw Error(ErrorCode::kInvalidArgument, "bad start point coordinate '" + coord + "'");
    }
  }
  detail::require(z.size() == dim, ErrorCode::kInvalidArgument,
                  "start point has " + std::to_string(z.size()) + " coordinates, germ has " + std::to_string(dim));
  return z;
}

struct SimulateArgs {
  std::string z0;
  std::size_t steps = 1000;
  std::optional<std::vector<unsigned>> alpha;
  std::optional<unsigned> scope;
  IterateOptions iterate;
};

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline CommandResult cmd_simulate(const io::GermDocument& doc, const SimulateArgs& args,
                                  const std::vector<std::string>& argv = {}) {
  CommandResult out;
  out.report = report_header("simulate", argv);
  json& rep = out.report;
  try {
    const std::size_t n = doc.dim();
    const Point z0 = parse_point(args.z0, n);
    MultiIndex alpha(n);
    unsigned k = 1;
    std::optional<Complex> Lambda;
    if (args.alpha) {
      alpha = MultiIndex(*args.alpha);
      detail::require(alpha.size() == n && !alpha.is_zero(), ErrorCode::kInvalidArgument, "bad --alpha");
      rep["alphaSource"] = "flag";
    } else {
      // certified alpha when the spectrum allows it, otherwise the first coordinate
      try {
        const unsigned t = doc.order();
        json notes;
        const auto scope = pipeline::analysis_scope(doc, args.scope, std::max(t, 2u), notes);
        const auto cert = certify_one_resonance(doc.spectrum, scope, std::max(t, 2u));
        detail::require(cert.one_resonant(), ErrorCode::kNotOneResonant, "no certified alpha");
        alpha = cert.alpha;
        const auto inv = extract_invariants(poincare_dulac(doc.float_germ, doc.spectrum, t).normal, cert);
        if (inv.k) {
          k = *inv.k;
          Lambda = inv.Lambda;
        }
        rep["alphaSource"] = "certificate";
      } catch (const Error& e) {
        alpha = MultiIndex::unit(n, 0);
        rep["alphaSource"] = "fallback";
        rep["alphaFallbackReason"] = error_json(e);
      }
    }
    rep["alpha"] = io::index_json(alpha);
    rep["k"] = k;
    const PolyMapNumeric F(doc.float_germ);
    const auto orbit = iterate(F, z0, args.steps, alpha, k, args.iterate);
    rep["status"] = std::string(to_string(orbit.status));
    rep["steps"] = orbit.steps();
    if (orbit.escape_step) rep["escapeStep"] = *orbit.escape_step;
    rep["finalNorm"] = norm2(orbit.points.back());
    rep["parameters"] = {{"escapeRadius", args.iterate.escape_radius},
                         {"convergenceTolerance", args.iterate.convergence_tolerance}};
    double drift = 0.0;
    for (std::size_t m = 0; m + 1 < orbit.u.size(); ++m)
      if (std::abs(orbit.u[m]) > 0) drift = std::max(drift, std::abs(orbit.u[m + 1] - orbit.u[m]) / std::abs(orbit.u[m]));
    rep["maxRelativeLeafStep"] = drift;
    if (orbit.points.size() >= 101) {
      const auto [lo, hi] = tail_range(orbit.points.size());
      double rmin = INFINITY, rmax = 0.0;
      for (std::size_t m = lo; m < hi; ++m) {
        rmin = std::min(rmin, orbit.rate(m));
        rmax = std::max(rmax, orbit.rate(m));
      }
      rep["tailRateBand"] = {rmin, rmax};
      if (Lambda && std::abs(*Lambda) > 0 && orbit.status != OrbitStatus::kEscaped) {
        const auto d = verify_leau_fatou(orbit, k, *Lambda);
        rep["leauFatou"] = {{"normalizedRateBand", {d.normalized_rate_band->first, d.normalized_rate_band->second}},
                            {"directionError", d.direction_error}};
      }
    }
    std::ostringstream csv;
    csv << "step";
    for (std::size_t j = 0; j < n; ++j) csv << ",re_z" << j << ",im_z" << j;
    csv << ",abs_u,arg_u,rate\n";
    for (std::size_t m = 0; m < orbit.points.size(); ++m) {
      csv << m;
      for (const auto& c : orbit.points[m]) csv << ',' << format_double(c.real()) << ',' << format_double(c.imag());
      csv << ',' << format_double(std::abs(orbit.u[m])) << ',' << format_double(principal_arg(orbit.u[m])) << ','
          << format_double(orbit.rate(m)) << '\n';
    }
    out.csv = csv.str();
  } catch (const Error& e) {
    rep["error"] = error_json(e);
    out.exit_code = exit_code_for(e.code());
  }
  return out;
}

struct BasinArgs {
  std::optional<std::size_t> branch;
  std::optional<unsigned> scope;
  std::optional<double> R, beta, eps;
  double falsification_R = 8.0;
  BasinOptions options;
};

inline CommandResult cmd_basin(const io::GermDocument& doc, const BasinArgs& args,
                               const std::vector<std::string>& argv = {}) {
  CommandResult out;
  out.report = report_header("basin", argv);
  json& rep = out.report;
  try {
    std::optional<std::vector<std::size_t>> scope;
    if (args.scope) scope = pipeline::first_m(*args.scope, doc.dim());
    else if (doc.scope) scope = pipeline::first_m(*doc.scope, doc.dim());
    const BasinSetup s = doc.exact ? prepare_basin(*doc.exact_germ, doc.spectrum, doc.order(), scope)
                                   : prepare_basin(doc.float_germ, doc.spectrum, doc.order(), scope);
    const bool theorem = s.hypotheses_hold();
    rep["mode"] = theorem ? "theorem" : "falsification";
    rep["scope"] = s.scope;
    rep["alpha"] = io::index_json(s.alpha);
    rep["k"] = s.k;
    rep["predictedBasins"] = theorem ? json(s.k) : json(0);
    rep["Lambda"] = {s.Lambda.real(), s.Lambda.imag()};
    rep["hypotheses"] = {{"nonDegenerate", s.non_degenerate},
                         {"parabolicallyAttracting", s.parabolically_attracting},
                         {"offScopeAttracting", s.off_scope_attracting},
                         {"witnesses", s.witnesses}};
    json dil = json::array();
    for (const auto& b : s.dilation) dil.push_back({b.real(), b.imag()});
    rep["dilation"] = dil;
    rep["coordinates"] = s.dilation.empty() ? "input" : "input germ conjugated by the dilation (Lambda = -1/k)";

    BasinOptions opts = args.options;
    opts.only_branch = args.branch;
    std::size_t j0 = 0;
    while (s.alpha[j0] == 0) ++j0;
    if (j0 == 0 && s.alpha.degree() == s.alpha[0] && s.alpha[0] >= 2) {
      opts.semi_attractive_q = s.alpha[0];
      rep["componentsPerBasin"] = s.alpha[0];
    }
    BasinGeometry geom = BasinGeometry::with_defaults(s.alpha, s.k, s.scope, 1.0);
    if (args.beta) geom.beta = *args.beta;
    if (args.eps) geom.eps = *args.eps;
    std::vector<std::pair<double, std::size_t>> trail;
    if (args.R) {
      geom.R = *args.R;
    } else if (theorem) {
      try {
        geom = search_geometry(s.map, geom, opts, trail);
      } catch (const Error& e) {
        json t = json::array();
        for (auto [R, v] : trail) t.push_back({{"R", R}, {"pilotViolations", v}});
        rep["searchTrail"] = t;
        throw;
      }
    } else {
      geom.R = args.falsification_R;
    }
    json t = json::array();
    for (auto [R, v] : trail) t.push_back({{"R", R}, {"pilotViolations", v}});
    rep["searchTrail"] = t;
    rep["parameters"] = {{"beta", geom.beta},
                         {"eps", geom.eps},
                         {"R", geom.R},
                         {"samplesPerBranch", opts.samples_per_branch},
                         {"steps", opts.steps},
                         {"seed", opts.seed},
                         {"exitTolerance", opts.exit_tolerance},
                         {"escapeRadius", opts.escape_radius},
                         {"directionTolerance", opts.direction_tolerance}};
    auto br = basin_experiment(s.map, geom, opts, s.directions);
    // the pilot is a sample too; if the full run still leaves B, keep doubling
    for (int extra = 0; theorem && !args.R && br.invariance_violations > 0 && extra < 4; ++extra) {
      rep["searchTrail"].push_back({{"R", geom.R}, {"fullRunViolations", br.invariance_violations}});
      geom.R *= 2.0;
      br = basin_experiment(s.map, geom, opts, s.directions);
    }
    rep["parameters"]["R"] = geom.R;
    rep["sampleCount"] = br.sample_count;
    rep["convergedCount"] = br.converged_count;
    rep["convergenceFraction"] = br.convergence_fraction();
    rep["invarianceViolations"] = br.invariance_violations;
    rep["disjointnessViolations"] = br.disjointness_violations;
    json per = json::array();
    for (const auto& b : br.branches)
      per.push_back({{"branch", b.branch},
                     {"samples", b.samples},
                     {"converged", b.converged},
                     {"escaped", b.escaped},
                     {"convergenceFraction", b.convergence_fraction()},
                     {"invarianceViolations", b.invariance_violations},
                     {"directionMismatches", b.direction_mismatches},
                     {"maxDirectionError", b.max_direction_error}});
    rep["perBranch"] = per;
    json viol = json::array();
    for (std::size_t i = 0; i < br.violating_samples.size() && i < 100; ++i) viol.push_back(br.violating_samples[i]);
    rep["violatingSamples"] = viol;
    if (br.component_permutation) {
      rep["componentPermutation"] = *br.component_permutation;
      rep["componentCycle"] = br.component_cycle;
      rep["componentSamples"] = br.component_samples;
    }
  } catch (const Error& e) {
    rep["error"] = error_json(e);
    out.exit_code = exit_code_for(e.code());
  }
  return out;
}

}  // namespace rgerm
