#include <gtest/gtest.h>

#include <random>

#include "rgerm/germ.hpp"
#include "test_helpers.hpp"

namespace rgerm {
namespace {

using testing::GermQ;
using testing::q;
using testing::SeriesQ;

SeriesQ u_series(unsigned t, std::initializer_list<long> coeffs) {
  // coefficient list starting at degree 0
  SeriesQ s(1, t);
  unsigned d = 0;
  for (long c : coeffs) s.set(MultiIndex{d++}, q(c));
  return s;
}

GermQ one_dim(unsigned t, std::initializer_list<long> coeffs) {
  return GermQ({u_series(t, coeffs)});
}

TEST(MultiIndex, GradedLexOrder) {
  MultiIndex a{2, 0}, b{1, 1}, c{0, 2}, d{3, 0}, e{1, 0};
  EXPECT_LT(e, a);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
  EXPECT_LT(c, d);
  EXPECT_EQ(b.degree(), 2u);
  std::vector<MultiIndex> seen;
  for_each_of_degree(3, 2, [&](const MultiIndex& m) { seen.push_back(m); });
  ASSERT_EQ(seen.size(), 6u);
  EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
}

TEST(Scalar, ParsesExactDecimals) {
  EXPECT_EQ(parse_rational("0.125"), mpq_class(1, 8));
  EXPECT_EQ(parse_rational("-3/6"), mpq_class(-1, 2));
  EXPECT_EQ(parse_rational("1e-2"), mpq_class(1, 100));
  EXPECT_THROW(parse_rational("1/0"), Error);
  EXPECT_THROW(parse_rational("abc"), Error);
}

TEST(Scalar, ExactAddSubRoundTrip) {
  std::mt19937 rng(7);
  for (int i = 0; i < 100; ++i) {
    auto a = testing::random_small(rng), b = testing::random_small(rng);
    EXPECT_EQ(a + b - b, a);
    if (!b.is_zero()) EXPECT_EQ(a * b / b, a);
  }
}

TEST(Series, AddCancelsToCanonicalZero) {
  SeriesQ f(2, 3), g(2, 3);
  f.set(MultiIndex{2, 0}, q(1));
  g.set(MultiIndex{2, 0}, q(-1));
  EXPECT_TRUE((f + g).is_zero());
  EXPECT_EQ(f + SeriesQ(2, 3), f);
}

TEST(Series, AddOracle) {
  SeriesQ f(2, 3), g(2, 3);
  f.set(MultiIndex{1, 0}, q(1));
  f.set(MultiIndex{0, 2}, q(1));
  g.set(MultiIndex{0, 2}, q(1));
  SeriesQ want(2, 3);
  want.set(MultiIndex{1, 0}, q(1));
  want.set(MultiIndex{0, 2}, q(2));
  EXPECT_EQ(f + g, want);
}

TEST(Series, AddTakesSmallerOrder) {
  SeriesQ f(1, 5), g(1, 3);
  f.set(MultiIndex{4}, q(1));
  EXPECT_EQ((f + g).order(), 3u);
  EXPECT_TRUE((f + g).is_zero());
}

TEST(Series, GeometricProductTruncates) {
  const SeriesQ p = u_series(3, {1, 1, 1, 1}) * u_series(3, {1, -1});
  EXPECT_EQ(p, u_series(3, {1}));
}

TEST(Series, ProductOfVariables) {
  auto z1 = SeriesQ::variable(2, 4, 0), z2 = SeriesQ::variable(2, 4, 1);
  EXPECT_EQ(z1 * z2, SeriesQ::monomial(2, 4, MultiIndex{1, 1}, q(1)));
  EXPECT_EQ(z1 * SeriesQ::constant(2, 4, q(1)), z1);
}

TEST(Series, RingAxiomsOnRandomExactSeries) {
  std::mt19937 rng(11);
  for (int i = 0; i < 40; ++i) {
    const unsigned t = 5;
    auto f = testing::random_series(rng, 2, t, 0, 3, 4);
    auto g = testing::random_series(rng, 2, t, 0, 3, 4);
    auto h = testing::random_series(rng, 2, t, 0, 3, 4);
    EXPECT_EQ(f * g, g * f);
    EXPECT_EQ((f * g) * h, f * (g * h));
    EXPECT_EQ(f * (g + h), f * g + f * h);
    EXPECT_EQ(f + g, g + f);
  }
}

TEST(Germ, RejectsBadLinearParts) {
  SeriesQ c(2, 3);
  c.set(MultiIndex{1, 0}, q(1));
  c.set(MultiIndex{0, 1}, q(1));
  EXPECT_THROW(GermQ({c, SeriesQ::variable(2, 3, 1)}), Error);
  EXPECT_THROW(GermQ({SeriesQ(2, 3), SeriesQ::variable(2, 3, 1)}), Error);
  SeriesQ k = SeriesQ::variable(2, 3, 0);
  k.set(MultiIndex{0, 0}, q(1));
  EXPECT_THROW(GermQ({k, SeriesQ::variable(2, 3, 1)}), Error);
}

TEST(Germ, ComposeWithIdentity) {
  const GermQ h = one_dim(4, {0, 1, 1});
  EXPECT_EQ(compose(h, GermQ::identity(1, 4), 4), h);
  EXPECT_EQ(compose(GermQ::identity(1, 4), h, 4), h);
}

TEST(Germ, ComposeOracle) {
  const GermQ h = one_dim(4, {0, 1, 1});
  EXPECT_EQ(compose(h, h, 4), one_dim(4, {0, 1, 2, 2, 1}));
}

TEST(Germ, ComposeLinearMultipliesEigenvalues) {
  const auto a = GermQ::linear({q(2), q(1, 3)}, 3), b = GermQ::linear({q(5), q(-3)}, 3);
  EXPECT_EQ(compose(a, b, 3), GermQ::linear({q(10), q(-1)}, 3));
}

TEST(Germ, InvertOracle) {
  const GermQ h = one_dim(3, {0, 1, 1});
  const GermQ g = invert(h, 3);
  EXPECT_EQ(g, one_dim(3, {0, 1, -1, 2}));
  EXPECT_EQ(compose(h, g, 3), GermQ::identity(1, 3));
  EXPECT_EQ(invert(GermQ::identity(2, 5), 5), GermQ::identity(2, 5));
  EXPECT_EQ(invert(GermQ::linear({q(2), q(3)}, 4), 4), GermQ::linear({q(1, 2), q(1, 3)}, 4));
}

TEST(Germ, MonomialPowerOracle) {
  const GermQ f = GermQ::from_terms({q(1), q(1)}, 4, {{{MultiIndex{3, 0}, q(1)}}, {}});
  SeriesQ want(2, 4);
  want.set(MultiIndex{2, 0}, q(1));
  want.set(MultiIndex{4, 0}, q(2));
  EXPECT_EQ(monomial_power(f, MultiIndex{2, 0}, 4), want);
  EXPECT_EQ(monomial_power<testing::Q>(3, MultiIndex{1, 0, 0}, 4), SeriesQ::variable(3, 4, 0));
  EXPECT_THROW(monomial_power(f, MultiIndex{0, 0}, 4), Error);
}

GermQ random_germ(std::mt19937& rng, std::size_t n, unsigned t) {
  std::vector<SeriesQ> comps;
  for (std::size_t j = 0; j < n; ++j) {
    SeriesQ c = testing::random_series(rng, n, t, 2, t, 3);
    c.set(MultiIndex::unit(n, j), testing::random_small(rng, false) + q(5));
    comps.push_back(std::move(c));
  }
  return GermQ(std::move(comps));
}

TEST(Germ, ComposeIsAssociative) {
  std::mt19937 rng(3);
  for (int i = 0; i < 15; ++i) {
    const auto f = random_germ(rng, 2, 5), g = random_germ(rng, 2, 5), h = random_germ(rng, 2, 5);
    EXPECT_EQ(compose(f, compose(g, h, 5), 5), compose(compose(f, g, 5), h, 5));
  }
}

TEST(Germ, InvertRoundTripExact) {
  std::mt19937 rng(5);
  for (int i = 0; i < 15; ++i) {
    const auto f = random_germ(rng, 3, 5);
    const auto g = invert(f, 5);
    EXPECT_EQ(compose(f, g, 5), GermQ::identity(3, 5));
    EXPECT_EQ(compose(g, f, 5), GermQ::identity(3, 5));
  }
}

TEST(Germ, InvertRoundTripFloat) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    std::vector<TruncatedSeries<Complex>> comps;
    for (std::size_t j = 0; j < 2; ++j) {
      TruncatedSeries<Complex> c(2, 10);
      // unit-modulus eigenvalue and a few unit-scale terms keep the inverse unit-scale too
      c.set(MultiIndex::unit(2, j), std::polar(1.0, 3.0 * unit(rng)));
      const auto pool = multi_indices(2, 2, 10);
      for (int s = 0; s < 4; ++s) c.set(pool[rng() % pool.size()], Complex(unit(rng), unit(rng)));
      comps.push_back(std::move(c));
    }
    const GermMap<Complex> f(std::move(comps));
    const auto id = GermMap<Complex>::identity(2, 10);
    EXPECT_LE(max_coefficient_distance(compose(f, invert(f, 10), 10), id), 1e-10);
  }
}

TEST(Germ, TruncationStability) {
  std::mt19937 rng(13);
  for (int i = 0; i < 10; ++i) {
    const auto f = random_germ(rng, 2, 4), g = random_germ(rng, 2, 4);
    // same germs carried to order 7 with junk above degree 4
    auto lift = [&](const GermQ& m) {
      std::vector<SeriesQ> comps;
      for (const auto& c : m.components()) comps.push_back(c.with_order(7) + testing::random_series(rng, 2, 7, 5, 7, 3));
      return GermQ(std::move(comps));
    };
    EXPECT_EQ(compose(lift(f), lift(g), 4), compose(f, g, 4));
  }
}

}  // namespace
}  // namespace rgerm
