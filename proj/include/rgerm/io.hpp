#pragma once

// JSON germ documents:
//   { "dim": n, "order": t,
//     "eigenvalues": { "generators": [...], "exponents": [[...], ...] }   (or { "numeric": [[re,im],...] }),
//     "lambda": [[re,im], ...],
//     "terms": { "0": [ { "index": [l1..ln], "re": "p/q", "im": "p/q" }, ... ], ... },
//     "scope": m }
// Component keys are 0-based. Coefficients written as strings are exact
// rationals; plain JSON floats switch the document to float mode.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rgerm/error.hpp"
#include "rgerm/germ.hpp"
#include "rgerm/scalar.hpp"
#include "rgerm/spectrum.hpp"

namespace rgerm {

using json = nlohmann::json;

namespace io {

inline std::string mode_name(bool exact) { return exact ? "exact" : "float"; }

/// Exact strings for Gaussian rationals, numbers for doubles.
inline json scalar_json(const GaussianRational& x) {
  return {{"re", rational_string(x.real())}, {"im", rational_string(x.imag())}};
}
inline json scalar_json(const Complex& x) { return {{"re", x.real()}, {"im", x.imag()}}; }

/// Exact value plus its double rendering (reports only).
template <Scalar S>
json value_json(const S& x) {
  json j = scalar_json(x);
  if constexpr (is_exact_v<S>) {
    j["text"] = x.to_string();
    const Complex c = x.to_complex();
    j["float"] = {c.real(), c.imag()};
  }
  return j;
}

inline json index_json(const MultiIndex& l) {
  json a = json::array();
  for (std::size_t i = 0; i < l.size(); ++i) a.push_back(l[i]);
  return a;
}

inline json generator_json(const Generator& g) {
  switch (g.kind) {
    case GeneratorKind::kRootOfUnity: return {{"kind", "rootOfUnity"}, {"order", g.order}};
    case GeneratorKind::kIrrationalAngle: return {{"kind", "irrationalAngle"}, {"name", g.name}};
    case GeneratorKind::kModulus: return {{"kind", "modulus"}, {"value", rational_string(g.modulus)}};
  }
  return {};
}

inline json spectrum_json(const EigenvalueSystem& sys) {
  if (!sys.is_exact()) {
    json vals = json::array();
    for (std::size_t j = 0; j < sys.dim(); ++j) {
      const Complex v = sys.numeric_value(j);
      vals.push_back({v.real(), v.imag()});
    }
    return {{"numeric", vals}, {"tolerance", sys.tolerance()}};
  }
  json gens = json::array();
  for (const auto& g : sys.generators()) gens.push_back(generator_json(g));
  json exps = json::array();
  for (std::size_t j = 0; j < sys.dim(); ++j) exps.push_back(sys.exponents(j));
  return {{"generators", gens}, {"exponents", exps}};
}

template <Scalar S>
json germ_json(const GermMap<S>& g, const EigenvalueSystem* sys = nullptr) {
  json doc;
  doc["dim"] = g.dim();
  doc["order"] = g.order();
  doc["mode"] = mode_name(is_exact_v<S>);
  if (sys) doc["eigenvalues"] = spectrum_json(*sys);
  json lambda = json::array();
  for (const auto& l : g.lambdas()) {
    const json s = scalar_json(l);
    lambda.push_back({s["re"], s["im"]});
  }
  doc["lambda"] = lambda;
  json terms = json::object();
  for (std::size_t j = 0; j < g.dim(); ++j) {
    json list = json::array();
    for (const auto& [idx, c] : g.component(j).terms()) {
      if (idx.degree() < 2) continue;
      json t = scalar_json(c);
      t["index"] = index_json(idx);
      list.push_back(t);
    }
    terms[std::to_string(j)] = list;
  }
  doc["terms"] = terms;
  return doc;
}

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& what) { throw Error(ErrorCode::kParse, what); }

inline const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) parse_fail(std::string("missing field '") + key + "'");
  return obj.at(key);
}

inline unsigned uint_field(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_number_integer() || v.get<long long>() < 0) parse_fail(std::string("'") + key + "' must be a non-negative integer");
  return v.get<unsigned>();
}

/// A number or numeric string; `exact` is cleared when a JSON float is met.
inline mpq_class rational_value(const json& v, bool& exact) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return mpq_class(v.get<long>());
  if (v.is_number_float()) {
    exact = false;
    const double d = v.get<double>();
    if (!std::isfinite(d)) parse_fail("non-finite number");
    return mpq_class(d);
  }
  parse_fail("expected a number or a numeric string, got " + v.dump());
}

inline Generator parse_generator(const json& g) {
  const std::string kind = field(g, "kind").get<std::string>();
  if (kind == "rootOfUnity") {
    const unsigned q = uint_field(g, "order");
    if (q < 1) parse_fail("root of unity order must be >= 1");
    return Generator::root_of_unity(q);
  }
  if (kind == "irrationalAngle") {
    std::string name = g.contains("name") ? g.at("name").get<std::string>() : "theta";
    return Generator::irrational_angle(std::move(name));
  }
  if (kind == "modulus") {
    bool ignore = true;
    return Generator::modulus_value(rational_value(field(g, "value"), ignore));
  }
  parse_fail("unknown generator kind '" + kind + "'");
}

}  // namespace detail

inline EigenvalueSystem parse_spectrum(const json& spec) {
  if (spec.contains("numeric")) {
    std::vector<Complex> vals;
    for (const auto& p : spec.at("numeric")) {
      if (!p.is_array() || p.size() != 2) detail::parse_fail("numeric eigenvalues are [re, im] pairs");
      bool ignore = true;
      vals.emplace_back(detail::rational_value(p[0], ignore).get_d(), detail::rational_value(p[1], ignore).get_d());
    }
    const double tol = spec.contains("tolerance") ? spec.at("tolerance").get<double>() : 1e-12;
    return EigenvalueSystem::numeric(std::move(vals), tol);
  }
  std::vector<Generator> gens;
  for (const auto& g : detail::field(spec, "generators")) gens.push_back(detail::parse_generator(g));
  std::vector<std::vector<long>> exps;
  for (const auto& row : detail::field(spec, "exponents")) {
    if (!row.is_array() || row.size() != gens.size())
      detail::parse_fail("each exponent vector needs one entry per generator");
    exps.push_back(row.get<std::vector<long>>());
  }
  return EigenvalueSystem::exact(std::move(gens), std::move(exps));
}

/// A parsed germ document: exact germ when possible, always a float rendering.
struct GermDocument {
  EigenvalueSystem spectrum = EigenvalueSystem::numeric({Complex(1.0)}, 1e-12);
  bool exact = true;
  std::optional<GermMap<GaussianRational>> exact_germ;
  GermMap<Complex> float_germ = GermMap<Complex>::identity(1, 1);
  std::optional<unsigned> scope;
  json source;

  std::size_t dim() const { return float_germ.dim(); }
  unsigned order() const { return float_germ.order(); }
};

inline GermDocument parse_germ_document(const json& doc) {
  try {
    GermDocument out;
    out.source = doc;
    const std::size_t n = detail::uint_field(doc, "dim");
    const unsigned t = detail::uint_field(doc, "order");
    if (n < 1 || n > MultiIndex::kMaxDim) detail::parse_fail("dim out of range");
    if (t < 1) detail::parse_fail("order must be >= 1");

    bool exact = !(doc.contains("mode") && doc.at("mode") == "float");
    std::optional<std::vector<GaussianRational>> given_lambda;
    if (doc.contains("lambda")) {
      std::vector<GaussianRational> ls;
      for (const auto& p : doc.at("lambda")) {
        if (!p.is_array() || p.size() != 2) detail::parse_fail("lambda entries are [re, im] pairs");
        ls.emplace_back(detail::rational_value(p[0], exact), detail::rational_value(p[1], exact));
      }
      if (ls.size() != n) detail::parse_fail("lambda has " + std::to_string(ls.size()) + " entries, dim is " + std::to_string(n));
      given_lambda = std::move(ls);
    }
    if (doc.contains("eigenvalues")) {
      out.spectrum = parse_spectrum(doc.at("eigenvalues"));
    } else if (given_lambda) {
      std::vector<Complex> vals;
      for (const auto& l : *given_lambda) vals.push_back(l.to_complex());
      out.spectrum = EigenvalueSystem::numeric(std::move(vals), 1e-12);
    } else {
      detail::parse_fail("document needs 'eigenvalues' or 'lambda'");
    }
    if (out.spectrum.dim() != n) detail::parse_fail("spectrum dimension differs from dim");
    // a bare exact lambda list (no generators) keeps the coefficients exact
    const bool lambda_only = given_lambda && !doc.contains("eigenvalues");
    exact = exact && (lambda_only || (out.spectrum.is_exact() && out.spectrum.representable_exactly()));

    std::vector<GaussianRational> lambda;
    if (out.spectrum.is_exact() && out.spectrum.representable_exactly()) {
      lambda = out.spectrum.values<GaussianRational>();
    } else if (lambda_only) {
      lambda = *given_lambda;
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        const Complex v = out.spectrum.numeric_value(j);
        lambda.push_back(GaussianRational::from_doubles(v.real(), v.imag()));
      }
    }
    if (given_lambda)
      for (std::size_t j = 0; j < n; ++j) {
        const bool match = exact ? (*given_lambda)[j] == lambda[j]
                                 : std::abs((*given_lambda)[j].to_complex() - lambda[j].to_complex()) <= 1e-12;
        ::rgerm::detail::require(match, ErrorCode::kSpectrumMismatch,
                                 "lambda[" + std::to_string(j) + "] disagrees with the eigenvalue spec");
      }

    std::vector<std::vector<std::pair<MultiIndex, GaussianRational>>> terms(n);
    if (doc.contains("terms")) {
      const json& tj = doc.at("terms");
      if (!tj.is_object()) detail::parse_fail("'terms' must be an object keyed by component");
      for (const auto& [key, list] : tj.items()) {
        std::size_t j = 0;
        try {
          std::size_t used = 0;
          j = std::stoul(key, &used);
          if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::logic_error&) {
          detail::parse_fail("component key '" + key + "' is not an index");
        }
        if (j >= n) detail::parse_fail("component key " + key + " out of range");
        for (const auto& term : list) {
          const auto idx_vec = detail::field(term, "index").get<std::vector<unsigned>>();
          if (idx_vec.size() != n) detail::parse_fail("index length differs from dim");
          const MultiIndex idx(idx_vec);
          if (idx.degree() < 2) detail::parse_fail("terms must have degree >= 2; the linear part comes from lambda");
          if (idx.degree() > t) continue;
          const mpq_class re = detail::rational_value(detail::field(term, "re"), exact);
          const mpq_class im = term.contains("im") ? detail::rational_value(term.at("im"), exact) : mpq_class(0);
          terms[j].push_back({idx, GaussianRational(re, im)});
        }
      }
    }
    if (doc.contains("scope")) out.scope = detail::uint_field(doc, "scope");

    out.exact = exact;
    const auto eg = GermMap<GaussianRational>::from_terms(lambda, t, terms);
    std::vector<TruncatedSeries<Complex>> comps;
    for (const auto& c : eg.components()) {
      TruncatedSeries<Complex> fc(n, t);
      for (const auto& [idx, v] : c.terms()) fc.set(idx, v.to_complex());
      comps.push_back(std::move(fc));
    }
    out.float_germ = GermMap<Complex>(std::move(comps));
    if (exact) out.exact_germ = eg;
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParse, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
}

inline GermDocument load_germ_document(const std::string& path) { return parse_germ_document(read_json_file(path)); }

}  // namespace io
}  // namespace rgerm
