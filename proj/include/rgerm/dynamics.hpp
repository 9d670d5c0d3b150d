#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "rgerm/error.hpp"
#include "rgerm/germ.hpp"
#include "rgerm/multi_index.hpp"
#include "rgerm/scalar.hpp"
#include "rgerm/series.hpp"

namespace rgerm {

using Point = std::vector<Complex>;

inline double norm2(const Point& z) {
  double s = 0.0;
  for (const auto& c : z) s += std::norm(c);
  return std::sqrt(s);
}

/// z^alpha evaluated in double precision.
inline Complex leaf_value(const Point& z, const MultiIndex& alpha) {
  Complex u{1.0, 0.0};
  for (std::size_t i = 0; i < z.size(); ++i)
    for (unsigned e = 0; e < alpha[i]; ++e) u *= z[i];
  return u;
}

/// Principal argument in (-pi, pi].
inline double principal_arg(Complex z) {
  double a = std::arg(z);
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

template <Scalar S>
GermMap<Complex> to_float(const GermMap<S>& f) {
  if constexpr (is_exact_v<S>) {
    std::vector<TruncatedSeries<Complex>> comps;
    for (const auto& c : f.components()) {
      TruncatedSeries<Complex> fc(c.dim(), c.order());
      for (const auto& [idx, v] : c.terms()) fc.set(idx, to_complex(v));
      comps.push_back(std::move(fc));
    }
    return GermMap<Complex>(std::move(comps));
  } else {
    return f;
  }
}

/// Polynomial map with complex-double coefficients, evaluated term by term.
class PolyMapNumeric {
 public:
  static constexpr unsigned kMaxPower = 64;

  template <Scalar S>
  explicit PolyMapNumeric(const GermMap<S>& f) : dim_(f.dim()) {
    detail::require(f.order() < kMaxPower, ErrorCode::kInvalidArgument, "order too large for numeric evaluation");
    max_pow_.assign(dim_, 0);
    for (const auto& c : f.components()) {
      std::vector<Term> terms;
      for (const auto& [idx, v] : c.terms()) {
        Term t;
        t.coeff = to_complex(v);
        for (std::size_t i = 0; i < dim_; ++i) {
          t.e[i] = static_cast<std::uint8_t>(idx[i]);
          max_pow_[i] = std::max<unsigned>(max_pow_[i], idx[i]);
        }
        terms.push_back(t);
      }
      comps_.push_back(std::move(terms));
    }
  }

  std::size_t dim() const { return dim_; }

  void apply(const Complex* z, Complex* out) const {
    std::array<std::array<Complex, kMaxPower>, MultiIndex::kMaxDim> pw;
    for (std::size_t i = 0; i < dim_; ++i) {
      pw[i][0] = 1.0;
      for (unsigned e = 1; e <= max_pow_[i]; ++e) pw[i][e] = pw[i][e - 1] * z[i];
    }
    for (std::size_t j = 0; j < dim_; ++j) {
      Complex acc{0.0, 0.0};
      for (const auto& t : comps_[j]) {
        Complex m = t.coeff;
        for (std::size_t i = 0; i < dim_; ++i)
          if (t.e[i]) m *= pw[i][t.e[i]];
        acc += m;
      }
      out[j] = acc;
    }
  }

  Point operator()(const Point& z) const {
    detail::require(z.size() == dim_, ErrorCode::kDimensionMismatch, "point dimension differs from map");
    Point out(dim_);
    apply(z.data(), out.data());
    return out;
  }

 private:
  struct Term {
    std::array<std::uint8_t, MultiIndex::kMaxDim> e{};
    Complex coeff;
  };
  std::size_t dim_;
  std::vector<std::vector<Term>> comps_;
  std::vector<unsigned> max_pow_;
};

enum class OrbitStatus { kEscaped, kConverged, kUndecided };

inline std::string_view to_string(OrbitStatus s) {
  switch (s) {
    case OrbitStatus::kEscaped: return "ESCAPED";
    case OrbitStatus::kConverged: return "CONVERGED";
    case OrbitStatus::kUndecided: return "UNDECIDED";
  }
  return "?";
}

struct IterateOptions {
  double escape_radius = 1e6;
  double convergence_tolerance = 1e-9;
};

/// Orbit z^(0..N) with leaf values u_m = (z^(m))^alpha recomputed from the points.
struct OrbitRecord {
  std::vector<Point> points;
  MultiIndex alpha;
  unsigned k = 1;
  std::vector<Complex> u;
  OrbitStatus status = OrbitStatus::kUndecided;
  std::optional<std::size_t> escape_step;

  std::size_t steps() const { return points.empty() ? 0 : points.size() - 1; }
  /// m |u_m|^k
  double rate(std::size_t m) const { return static_cast<double>(m) * std::pow(std::abs(u[m]), k); }
  Complex direction(std::size_t m) const { return u[m] / std::abs(u[m]); }
  double modulus(std::size_t m, std::size_t j) const { return std::abs(points[m][j]); }
};

inline OrbitRecord iterate(const PolyMapNumeric& f, const Point& z0, std::size_t steps, const MultiIndex& alpha,
                           unsigned k = 1, const IterateOptions& opts = {}) {
  detail::require(steps >= 1, ErrorCode::kInvalidArgument, "need at least one step");
  detail::require(z0.size() == f.dim() && alpha.size() == f.dim(), ErrorCode::kDimensionMismatch,
                  "start point or alpha does not match the map dimension");
  for (const auto& c : z0)
    detail::require(std::isfinite(c.real()) && std::isfinite(c.imag()), ErrorCode::kInvalidArgument,
                    "start point is not finite");
  OrbitRecord rec;
  rec.alpha = alpha;
  rec.k = k;
  rec.points.reserve(steps + 1);
  rec.points.push_back(z0);
  for (std::size_t m = 1; m <= steps; ++m) {
    Point next = f(rec.points.back());
    const double r = norm2(next);
    if (!std::isfinite(r) || r > opts.escape_radius) {
      rec.status = OrbitStatus::kEscaped;
      rec.escape_step = m;
      break;
    }
    rec.points.push_back(std::move(next));
  }
  for (const auto& p : rec.points) rec.u.push_back(leaf_value(p, alpha));
  if (rec.status != OrbitStatus::kEscaped && norm2(rec.points.back()) < opts.convergence_tolerance)
    rec.status = OrbitStatus::kConverged;
  return rec;
}

/// Index range of the tail: the last 10% of the orbit, at least 100 points.
inline std::pair<std::size_t, std::size_t> tail_range(std::size_t points) {
  detail::require(points >= 101, ErrorCode::kOrbitTooShort, "orbit tail needs at least 100 points");
  const std::size_t len = std::max<std::size_t>(100, points / 10);
  return {points - len, points};
}

/// Phi(u) = prod_j G_j^{alpha_j} as a series in u, of order floor(t / |alpha|).
template <Scalar S>
TruncatedSeries<S> induced_map(const GermMap<S>& g, const MultiIndex& alpha) {
  const unsigned t = g.order();
  const TruncatedSeries<S> p = monomial_power(g, alpha, t);
  const unsigned A = alpha.degree();
  TruncatedSeries<S> phi(1, t / A);
  for (const auto& [idx, c] : p.terms()) {
    const unsigned s = idx.degree() / A;
    detail::require(idx.degree() % A == 0 && idx == alpha.scaled(s), ErrorCode::kNotAFunctionOfU,
                    "monomial " + idx.to_string() + " of the leaf product is not a power of z^alpha");
    phi.set(MultiIndex{s}, c);
  }
  return phi;
}

/// The k solutions of v^k = -|Lambda| / Lambda, sorted by principal argument.
inline std::vector<Complex> attracting_directions(Complex Lambda, unsigned k) {
  detail::require(std::abs(Lambda) > 0.0, ErrorCode::kDegenerate, "attracting directions need Lambda != 0");
  detail::require(k >= 1, ErrorCode::kInvalidArgument, "k must be >= 1");
  const double base = M_PI - principal_arg(Lambda);
  std::vector<Complex> out;
  for (unsigned j = 0; j < k; ++j) out.push_back(std::polar(1.0, wrap_angle((base + 2.0 * M_PI * j) / k)));
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) { return principal_arg(a) < principal_arg(b); });
  return out;
}

/// Petal {u : |A u^k + delta| < delta}; its k components surround the attracting directions.
struct PetalSpec {
  Complex A;
  unsigned k = 1;
  double delta = 0.25;
  std::vector<Complex> directions;

  PetalSpec(Complex a, unsigned order, double d) : A(a), k(order), delta(d), directions(attracting_directions(a, order)) {}

  bool contains(Complex u) const { return std::abs(A * std::pow(u, static_cast<double>(k)) + delta) < delta; }

  /// Index of the petal component containing u (the nearest attracting direction).
  std::optional<std::size_t> component(Complex u) const {
    if (!contains(u)) return std::nullopt;
    std::size_t best = 0;
    for (std::size_t i = 1; i < directions.size(); ++i)
      if (std::abs(u / std::abs(u) - directions[i]) < std::abs(u / std::abs(u) - directions[best])) best = i;
    return best;
  }
};

struct LeauFatouDiagnostics {
  bool escaped = false;
  std::optional<std::pair<double, double>> rate_band;             // m |u_m|^k over the tail
  std::optional<std::pair<double, double>> normalized_rate_band;  // times k |Lambda|, tends to 1
  double direction_error = 0.0;                                    // at the last point
  double max_tail_direction_error = 0.0;
  std::size_t direction_index = 0;
};

inline LeauFatouDiagnostics verify_leau_fatou(const OrbitRecord& orbit, unsigned k, Complex Lambda) {
  LeauFatouDiagnostics d;
  if (orbit.status == OrbitStatus::kEscaped) {
    d.escaped = true;
    return d;
  }
  const auto [lo, hi] = tail_range(orbit.points.size());
  const auto dirs = attracting_directions(Lambda, k);
  double rmin = INFINITY, rmax = 0.0;
  for (std::size_t m = lo; m < hi; ++m) {
    const double r = static_cast<double>(m) * std::pow(std::abs(orbit.u[m]), k);
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  d.rate_band = {rmin, rmax};
  const double scale = k * std::abs(Lambda);
  d.normalized_rate_band = {rmin * scale, rmax * scale};
  auto nearest = [&](Complex dir, std::size_t& idx) {
    double best = INFINITY;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      const double e = std::abs(dir - dirs[i]);
      if (e < best) {
        best = e;
        idx = i;
      }
    }
    return best;
  };
  std::size_t idx = 0;
  d.direction_error = nearest(orbit.direction(hi - 1), idx);
  d.direction_index = idx;
  for (std::size_t m = lo; m < hi; ++m) {
    std::size_t ignore = 0;
    d.max_tail_direction_error = std::max(d.max_tail_direction_error, nearest(orbit.direction(m), ignore));
  }
  return d;
}

struct FatouProbe {
  double drift = 0.0;  // max |U_{m+1} - U_m - 1| over the tail
  bool translation_like = false;
  double threshold = 0.5;
};

/// U = -1 / (k Lambda u^k) (u^{-k} when Lambda = 0) along the tail; the sector is
/// the open cone of half-width pi/k around `direction`.
inline FatouProbe fatou_coordinate_probe(const std::vector<Complex>& u, unsigned k, Complex Lambda, Complex direction,
                                         double threshold = 0.5) {
  const auto [lo, hi] = tail_range(u.size());
  FatouProbe p;
  p.threshold = threshold;
  const Complex scale = std::abs(Lambda) > 0.0 ? -1.0 / (static_cast<double>(k) * Lambda) : Complex(1.0, 0.0);
  const double half_width = M_PI / k;
  std::optional<Complex> prev;
  for (std::size_t m = lo; m < hi; ++m) {
    detail::require(std::abs(u[m]) > 0.0, ErrorCode::kBranchCut, "leaf value hit 0");
    detail::require(std::abs(principal_arg(u[m] / direction)) < half_width, ErrorCode::kBranchCut,
                    "orbit left the sector at step " + std::to_string(m));
    const Complex U = scale * std::pow(u[m], -static_cast<double>(k));
    if (prev) p.drift = std::max(p.drift, std::abs(U - *prev - 1.0));
    prev = U;
  }
  p.translation_like = p.drift < threshold;
  return p;
}

enum class LimitVerdict { kZero, kInfinity, kUndecided };

inline std::string_view to_string(LimitVerdict v) {
  switch (v) {
    case LimitVerdict::kZero: return "ZERO";
    case LimitVerdict::kInfinity: return "INFINITY";
    case LimitVerdict::kUndecided: return "UNDECIDED";
  }
  return "?";
}

struct CoordinateLimitReport {
  unsigned case_number = 0;
  LimitVerdict expected = LimitVerdict::kUndecided;
  LimitVerdict verdict = LimitVerdict::kUndecided;
  double final_ratio = 0.0;   // |z_j^(N)| / |z_j^(0)|
  double tail_slope = 0.0;    // d log|z_j| / d log m over the tail
  std::size_t steps = 0;
  bool agrees() const { return verdict == expected; }
};

/// Case 1: |lambda_j| < 1; 2: |lambda_j| > 1; 3: |lambda_j| = 1 and witness > 0;
/// 4: |lambda_j| = 1 and witness < 0. Cases 1 and 3 predict 0, cases 2 and 4 predict infinity.
inline unsigned coordinate_case(Complex lambda_j, double witness, double tol = 1e-12) {
  const double r = std::abs(lambda_j);
  if (r < 1.0 - tol) return 1;
  if (r > 1.0 + tol) return 2;
  return witness > 0.0 ? 3 : 4;
}

/// Iterates the normal-form map from z0 (whose leaf value must lie in the petal
/// {|Lambda u^k + delta| < delta}) and decides the limit of |z_j|.
inline CoordinateLimitReport verify_coordinate_limits(const PolyMapNumeric& f, const Point& z0, std::size_t j,
                                                      unsigned case_number, const MultiIndex& alpha, unsigned k,
                                                      Complex Lambda, std::size_t steps, double delta = 0.25,
                                                      const IterateOptions& opts = {}) {
  detail::require(case_number >= 1 && case_number <= 4, ErrorCode::kInvalidArgument, "case must be 1..4");
  detail::require(j < f.dim(), ErrorCode::kInvalidArgument, "coordinate out of range");
  detail::require(std::abs(z0[j]) > 0.0, ErrorCode::kInvalidArgument, "coordinate must start nonzero");
  const PetalSpec petal(Lambda, k, delta);
  detail::require(petal.contains(leaf_value(z0, alpha)), ErrorCode::kOutsidePetal, "start point is outside the petal");
  CoordinateLimitReport rep;
  rep.case_number = case_number;
  rep.expected = (case_number == 1 || case_number == 3) ? LimitVerdict::kZero : LimitVerdict::kInfinity;
  IterateOptions it = opts;
  it.convergence_tolerance = 0.0;
  const auto orbit = iterate(f, z0, steps, alpha, k, it);
  rep.steps = orbit.steps();
  const double start = std::abs(z0[j]);
  const double last = std::abs(orbit.points.back()[j]);
  rep.final_ratio = last / start;
  bool hit_zero = false;
  for (const auto& p : orbit.points) hit_zero = hit_zero || std::abs(p[j]) < 1e-12;
  if (orbit.status == OrbitStatus::kEscaped || rep.final_ratio >= 10.0) {
    rep.verdict = LimitVerdict::kInfinity;
    return rep;
  }
  if (hit_zero) {
    rep.verdict = LimitVerdict::kZero;
    return rep;
  }
  if (orbit.points.size() >= 101) {
    const auto [lo, hi] = tail_range(orbit.points.size());
    const double m0 = std::max<double>(1.0, static_cast<double>(lo)), m1 = static_cast<double>(hi - 1);
    rep.tail_slope = (std::log(std::abs(orbit.points[hi - 1][j])) - std::log(std::abs(orbit.points[lo][j]))) /
                     (std::log(m1) - std::log(m0));
  }
  if (rep.tail_slope < 0.0 && rep.final_ratio < 0.5) rep.verdict = LimitVerdict::kZero;
  return rep;
}

// ---------------------------------------------------------------------------
// Basin geometry and sampling

/// Sets B_j = { |z_j| < |u|^beta (j in scope), |z_rest| < |u|^beta, u = z^alpha in S^j_R(eps) }
/// with S^j_R(eps) = { |u^k - 1/(2R)| < 1/(2R), |Arg u - 2 pi j / k| < eps } (j 0-based).
struct BasinGeometry {
  MultiIndex alpha;
  unsigned k = 1;
  std::vector<std::size_t> scope;
  double beta = 0.4;
  double R = 1.0;
  double eps = M_PI / 8.0;

  static BasinGeometry with_defaults(MultiIndex alpha, unsigned k, std::vector<std::size_t> scope, double R = 1.0) {
    BasinGeometry g;
    g.beta = std::min(0.4, 0.9 / alpha.degree());
    g.eps = M_PI / (8.0 * k);
    g.alpha = std::move(alpha);
    g.k = k;
    g.scope = std::move(scope);
    g.R = R;
    return g;
  }

  void validate() const {
    detail::require(beta > 0.0 && beta * alpha.degree() < 1.0, ErrorCode::kInvalidArgument, "need 0 < beta |alpha| < 1");
    detail::require(R > 0.0 && eps > 0.0 && k >= 1, ErrorCode::kInvalidArgument, "need R > 0, eps > 0, k >= 1");
  }

  double center(std::size_t branch) const { return 2.0 * M_PI * static_cast<double>(branch) / k; }

  bool in_scope(std::size_t j) const { return std::find(scope.begin(), scope.end(), j) != scope.end(); }

  /// Branch whose set B_j contains z, if any.
  std::optional<std::size_t> branch_of(const Point& z) const {
    const Complex u = leaf_value(z, alpha);
    const double au = std::abs(u);
    if (!(au > 0.0)) return std::nullopt;
    const double half = 1.0 / (2.0 * R);
    if (!(std::abs(std::pow(u, static_cast<double>(k)) - half) < half)) return std::nullopt;
    const double bound = std::pow(au, beta);
    double rest = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (in_scope(j)) {
        if (!(std::abs(z[j]) < bound)) return std::nullopt;
      } else {
        rest += std::norm(z[j]);
      }
    }
    if (!(std::sqrt(rest) < bound)) return std::nullopt;
    const double arg = principal_arg(u);
    for (std::size_t b = 0; b < k; ++b)
      if (std::abs(wrap_angle(arg - center(b))) < eps) return b;
    return std::nullopt;
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t branch, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ branch) ^ index);
}

inline unsigned thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RESONANT_GERMS_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs fn(i) for i in [0, count) over a fixed pool; results are written by index.
template <class Fn>
void parallel_for(std::size_t count, Fn fn) {
  const unsigned threads = std::min<std::size_t>(thread_count(), std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += threads) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Draws a point of B_branch: Arg u uniform in the sector, |u|^k log-uniform
/// between max(1e-3 rho_max, floor_rho) and rho_max = cos(k phi) / R, coordinates
/// on supp(alpha) with |z_j| = |u|^{gamma_j} (sum alpha_j gamma_j = 1, gamma_j > beta),
/// the other coordinates uniform in their admissible disks/ball.
inline std::optional<Point> sample_in_branch(const BasinGeometry& g, std::size_t dim, std::size_t branch,
                                             std::mt19937_64& rng, double floor_rho) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const unsigned k = g.k;
  const double offset = (2.0 * unit(rng) - 1.0) * g.eps;
  const double phi = g.center(branch) + offset;
  const double rho_hi = std::cos(k * offset) / g.R;
  if (!(rho_hi > 0.0)) return std::nullopt;
  const double rho_lo = std::min(rho_hi, std::max(rho_hi * 1e-3, floor_rho));
  const double rho = std::exp(std::log(rho_lo) + unit(rng) * (std::log(rho_hi) - std::log(rho_lo)));
  const double au = std::pow(rho, 1.0 / k);
  if (!(au > 0.0 && au < 1.0)) return std::nullopt;
  const double bound = std::pow(au, g.beta);

  Point z(dim, Complex{});
  std::vector<std::size_t> support;
  for (std::size_t j = 0; j < dim; ++j)
    if (g.alpha[j] > 0) support.push_back(j);
  const double A = g.alpha.degree();
  std::vector<double> w(dim, 0.0);
  double wsum = 0.0;
  for (std::size_t j : support) {
    w[j] = 0.1 + unit(rng);
    wsum += g.alpha[j] * w[j];
  }
  double arg_acc = 0.0;
  for (std::size_t idx = 0; idx < support.size(); ++idx) {
    const std::size_t j = support[idx];
    const double gamma = g.beta + (1.0 - g.beta * A) * w[j] / wsum;
    double theta;
    if (idx + 1 < support.size()) {
      theta = 2.0 * M_PI * unit(rng);
      arg_acc += g.alpha[j] * theta;
    } else {
      const unsigned turn = static_cast<unsigned>(unit(rng) * g.alpha[j]);
      theta = (phi - arg_acc + 2.0 * M_PI * turn) / g.alpha[j];
    }
    z[j] = std::polar(std::pow(au, gamma), theta);
  }
  std::vector<std::size_t> rest;
  for (std::size_t j = 0; j < dim; ++j) {
    if (g.alpha[j] > 0) continue;
    if (g.in_scope(j)) {
      z[j] = std::polar(bound * std::sqrt(unit(rng)), 2.0 * M_PI * unit(rng));
    } else {
      rest.push_back(j);
    }
  }
  if (!rest.empty()) {
    std::normal_distribution<double> gauss;
    double s = 0.0;
    std::vector<Complex> v;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      v.emplace_back(gauss(rng), gauss(rng));
      s += std::norm(v.back());
    }
    const double radius = bound * std::pow(unit(rng), 1.0 / (2.0 * rest.size()));
    for (std::size_t i = 0; i < rest.size(); ++i) z[rest[i]] = v[i] * (radius / std::sqrt(s));
  }
  if (g.branch_of(z) != std::optional<std::size_t>(branch)) return std::nullopt;
  return z;
}

struct BasinOptions {
  std::size_t samples_per_branch = 1000;
  std::size_t steps = 20000;
  std::uint64_t seed = 1;
  double escape_radius = 1e6;
  double exit_tolerance = 0.05;
  double direction_tolerance = 0.05;
  std::optional<std::size_t> only_branch;
  std::optional<unsigned> semi_attractive_q;  // track components of alpha = (q, 0, ...)
  bool check_directions = true;
  std::size_t max_rejections = 100;  // per sample, before giving up on the geometry
};

struct SampleOutcome {
  std::size_t branch = 0;
  std::size_t index = 0;
  bool valid = false;
  bool converged = false;
  bool escaped = false;
  bool invariance_violation = false;
  bool direction_ok = true;
  double direction_error = 0.0;
  double final_norm = 0.0;
  int component = -1;       // semi-attractive component before the step
  int next_component = -1;  // and after it
  Point z0;
};

struct BranchStats {
  std::size_t branch = 0;
  std::size_t samples = 0;
  std::size_t converged = 0;
  std::size_t escaped = 0;
  std::size_t invariance_violations = 0;
  std::size_t direction_mismatches = 0;
  double max_direction_error = 0.0;
  double convergence_fraction() const { return samples ? static_cast<double>(converged) / samples : 0.0; }
};

struct BasinReport {
  BasinGeometry geometry;
  BasinOptions options;
  std::size_t sample_count = 0;
  std::size_t converged_count = 0;
  std::size_t invariance_violations = 0;
  std::size_t disjointness_violations = 0;
  std::vector<BranchStats> branches;
  std::vector<std::size_t> violating_samples;  // branch * samples_per_branch + index
  std::optional<std::vector<int>> component_permutation;
  bool component_cycle = false;
  std::size_t component_samples = 0;
  std::vector<std::pair<double, std::size_t>> search_trail;  // (R, pilot violations)

  double convergence_fraction() const {
    return sample_count ? static_cast<double>(converged_count) / sample_count : 0.0;
  }
};

namespace detail {

inline int semi_component(const Point& z, unsigned q) {
  const double phi = std::arg(z[0]);
  const double argu = principal_arg(std::pow(z[0], static_cast<double>(q)));
  long p = std::lround((q * phi - argu) / (2.0 * M_PI));
  p %= static_cast<long>(q);
  if (p < 0) p += q;
  return static_cast<int>(p);
}

inline SampleOutcome run_sample(const PolyMapNumeric& f, const BasinGeometry& g, const BasinOptions& opts,
                                std::size_t branch, std::size_t index, const std::vector<Complex>& directions) {
  SampleOutcome out;
  out.branch = branch;
  out.index = index;
  std::mt19937_64 rng(sample_seed(opts.seed, branch, index));
  const double floor_rho = 10.0 / static_cast<double>(std::max<std::size_t>(opts.steps, 1));
  std::optional<Point> z;
  for (std::size_t attempt = 0; attempt < opts.max_rejections && !z; ++attempt)
    z = sample_in_branch(g, f.dim(), branch, rng, floor_rho);
  if (!z) return out;
  out.valid = true;
  out.z0 = *z;
  const std::size_t n = f.dim();
  Point cur = *z, next(n);
  f.apply(cur.data(), next.data());
  out.invariance_violation = g.branch_of(next) != std::optional<std::size_t>(branch);
  if (opts.semi_attractive_q) {
    out.component = semi_component(cur, *opts.semi_attractive_q);
    out.next_component = semi_component(next, *opts.semi_attractive_q);
  }
  const double u0 = std::abs(leaf_value(cur, g.alpha));
  const std::size_t tail_len = std::max<std::size_t>(2, opts.steps / 10);
  const std::size_t tail_start = opts.steps - std::min(opts.steps, tail_len);
  const std::size_t tail_mid = tail_start + (opts.steps - tail_start) / 2;
  double first_half = 0.0, second_half = 0.0;
  for (std::size_t m = 1; m <= opts.steps; ++m) {
    f.apply(cur.data(), next.data());
    std::swap(cur, next);
    const double r = norm2(cur);
    if (!std::isfinite(r) || r > opts.escape_radius) {
      out.escaped = true;
      break;
    }
    if (m >= tail_start) {
      double& slot = m < tail_mid ? first_half : second_half;
      slot = std::max(slot, r);
    }
  }
  if (out.escaped) return out;
  out.final_norm = norm2(cur);
  const Complex uN = leaf_value(cur, g.alpha);
  const bool monotone = second_half <= first_half;
  out.converged = out.final_norm < opts.exit_tolerance && monotone && std::abs(uN) < u0;
  if (out.converged && opts.check_directions && !directions.empty() && std::abs(uN) > 0.0) {
    double best = INFINITY;
    for (const auto& v : directions) best = std::min(best, std::abs(uN / std::abs(uN) - v));
    out.direction_error = best;
    out.direction_ok = best < opts.direction_tolerance;
  }
  return out;
}

}  // namespace detail

/// Samples each branch set B_j, checks one-step invariance, iterates every
/// sample and aggregates per-branch statistics. `directions` are the attracting
/// directions in the geometry's coordinates (empty to skip the direction check).
inline BasinReport basin_experiment(const PolyMapNumeric& f, const BasinGeometry& g, const BasinOptions& opts,
                                    const std::vector<Complex>& directions = {}) {
  g.validate();
  detail::require(opts.steps >= 10, ErrorCode::kInvalidArgument, "basin runs need at least 10 steps");
  std::vector<std::size_t> branches;
  if (opts.only_branch) {
    detail::require(*opts.only_branch < g.k, ErrorCode::kInvalidArgument, "branch out of range");
    branches.push_back(*opts.only_branch);
  } else {
    for (std::size_t b = 0; b < g.k; ++b) branches.push_back(b);
  }
  const std::size_t S = opts.samples_per_branch;
  std::vector<SampleOutcome> outcomes(branches.size() * S);
  detail::parallel_for(outcomes.size(), [&](std::size_t i) {
    outcomes[i] = detail::run_sample(f, g, opts, branches[i / S], i % S, directions);
  });

  BasinReport rep;
  rep.geometry = g;
  rep.options = opts;
  std::map<int, std::set<int>> perm;
  for (std::size_t bi = 0; bi < branches.size(); ++bi) {
    BranchStats st;
    st.branch = branches[bi];
    for (std::size_t s = 0; s < S; ++s) {
      const auto& o = outcomes[bi * S + s];
      if (!o.valid) continue;
      ++st.samples;
      st.converged += o.converged;
      st.escaped += o.escaped;
      if (o.invariance_violation) {
        ++st.invariance_violations;
        rep.violating_samples.push_back(bi * S + s);
      }
      if (o.converged && !o.direction_ok) ++st.direction_mismatches;
      st.max_direction_error = std::max(st.max_direction_error, o.direction_error);
      // a sample may belong to exactly one branch set
      std::size_t owners = 0;
      for (std::size_t b = 0; b < g.k; ++b) {
        if (g.branch_of(o.z0) == std::optional<std::size_t>(b)) ++owners;
      }
      if (owners != 1) ++rep.disjointness_violations;
      if (opts.semi_attractive_q) {
        perm[o.component].insert(o.next_component);
        ++rep.component_samples;
      }
    }
    rep.sample_count += st.samples;
    rep.converged_count += st.converged;
    rep.invariance_violations += st.invariance_violations;
    rep.branches.push_back(st);
  }
  detail::require(rep.sample_count > 0, ErrorCode::kEmptySample, "geometry admits no representable sample points");
  if (opts.semi_attractive_q) {
    const unsigned q = *opts.semi_attractive_q;
    std::vector<int> sigma(q, -1);
    bool function = true;
    for (const auto& [from, tos] : perm) {
      if (from < 0 || tos.size() != 1) {
        function = false;
        continue;
      }
      sigma[from] = *tos.begin();
    }
    rep.component_permutation = sigma;
    // a single q-cycle: following sigma from 0 visits every component once
    bool cycle = function && std::none_of(sigma.begin(), sigma.end(), [](int v) { return v < 0; });
    if (cycle) {
      std::vector<bool> seen(q, false);
      int c = 0;
      for (unsigned i = 0; i < q; ++i) {
        if (seen[c]) {
          cycle = false;
          break;
        }
        seen[c] = true;
        c = sigma[c];
      }
      cycle = cycle && c == 0;
    }
    rep.component_cycle = cycle;
  }
  return rep;
}

/// Doubles R from r_start until a pilot sample shows no one-step invariance
/// violation; throws GEOMETRY_SEARCH_FAILED after max_doublings.
inline BasinGeometry search_geometry(const PolyMapNumeric& f, BasinGeometry g, const BasinOptions& opts,
                                     std::vector<std::pair<double, std::size_t>>& trail, std::size_t pilot = 2000,
                                     unsigned max_doublings = 20) {
  BasinOptions p = opts;
  p.samples_per_branch = pilot;
  p.steps = 10;
  p.check_directions = false;
  p.semi_attractive_q.reset();
  for (unsigned i = 0; i <= max_doublings; ++i) {
    g.validate();
    std::size_t violations = 0;
    for (std::size_t b = 0; b < g.k; ++b) {
      if (opts.only_branch && *opts.only_branch != b) continue;
      for (std::size_t s = 0; s < pilot; ++s) {
        std::mt19937_64 rng(detail::sample_seed(opts.seed ^ 0x5EEDULL, b, s));
        std::optional<Point> z;
        for (std::size_t attempt = 0; attempt < opts.max_rejections && !z; ++attempt)
          z = sample_in_branch(g, f.dim(), b, rng, 10.0 / static_cast<double>(opts.steps));
        if (!z) {
          ++violations;
          continue;
        }
        if (g.branch_of(f(*z)) != std::optional<std::size_t>(b)) ++violations;
      }
    }
    trail.emplace_back(g.R, violations);
    if (violations == 0) return g;
    g.R *= 2.0;
  }
  throw Error(ErrorCode::kGeometrySearchFailed,
              "no R up to " + std::to_string(g.R / 2.0) + " gave an invariant pilot sample");
}

}  // namespace rgerm
