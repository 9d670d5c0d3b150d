#pragma once

// Independent reference implementations used to cross-check the library.

#include <cmath>
#include <complex>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "rgerm/spectrum.hpp"

namespace rgerm::oracle {

/// Brute-force resonance list: walks every exponent tuple in [0, D]^n with an
/// odometer and decides lambda^l = lambda_j from the raw exponent matrix
/// (difference divisible by the order on root-of-unity slots, zero elsewhere).
inline std::set<std::pair<std::size_t, std::vector<unsigned>>> brute_force_resonances(
    const std::vector<Generator>& gens, const std::vector<std::vector<long>>& exps, unsigned D) {
  const std::size_t n = exps.size();
  std::set<std::pair<std::size_t, std::vector<unsigned>>> out;
  std::vector<unsigned> l(n, 0);
  while (true) {
    unsigned deg = 0;
    for (unsigned v : l) deg += v;
    if (deg >= 2 && deg <= D) {
      for (std::size_t j = 0; j < n; ++j) {
        bool equal = true;
        for (std::size_t g = 0; g < gens.size() && equal; ++g) {
          long diff = -exps[j][g];
          for (std::size_t i = 0; i < n; ++i) diff += static_cast<long>(l[i]) * exps[i][g];
          if (gens[g].kind == GeneratorKind::kRootOfUnity) {
            equal = diff % static_cast<long>(gens[g].order) == 0;
          } else {
            equal = diff == 0;
          }
        }
        if (equal) out.insert({j, l});
      }
    }
    std::size_t pos = 0;
    while (pos < n && l[pos] == D) l[pos++] = 0;
    if (pos == n) break;
    ++l[pos];
  }
  return out;
}

struct RandomSystem {
  std::vector<Generator> gens;
  std::vector<std::vector<long>> exps;
};

/// Random generator model: a root of unity, one or two irrational angles, and
/// optionally an independent modulus pair, with small exponents.
inline RandomSystem random_system(std::mt19937& rng, std::size_t n) {
  RandomSystem s;
  std::uniform_int_distribution<unsigned> order(1, 6);
  std::uniform_int_distribution<int> coin(0, 1);
  s.gens.push_back(Generator::root_of_unity(order(rng)));
  s.gens.push_back(Generator::irrational_angle("theta1"));
  if (coin(rng)) s.gens.push_back(Generator::irrational_angle("theta2"));
  if (coin(rng)) s.gens.push_back(Generator::modulus_value(mpq_class(1, 2)));
  if (coin(rng)) s.gens.push_back(Generator::modulus_value(mpq_class(3)));
  std::uniform_int_distribution<long> e(-2, 2);
  std::uniform_int_distribution<int> zero(0, 2);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<long> row;
    for (std::size_t g = 0; g < s.gens.size(); ++g) row.push_back(zero(rng) == 0 ? e(rng) : 0);
    s.exps.push_back(std::move(row));
  }
  return s;
}

/// Float reference for a product of the infinite-product type prod_l |1 + c_l|.
inline double log_product(const std::vector<std::complex<double>>& factors) {
  double s = 0.0;
  for (const auto& f : factors) s += std::log(std::abs(f));
  return s;
}

}  // namespace rgerm::oracle
