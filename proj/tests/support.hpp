#pragma once

#include "kamdeg/series.hpp"

#include <random>

namespace kamdeg::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec random_vec(Rng& rng, int size, double lo, double hi) {
  Vec v(size);
  for (int i = 0; i < size; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

// Random real-valued series: each drawn term comes with its conjugate partner.
inline TFSeries random_series(Rng& rng, int n, int d, int nterms, int kmax, int wmax,
                              Caps caps, double scale = 1.0) {
  std::uniform_int_distribution<int> kd(-kmax, kmax);
  std::vector<Term> terms;
  for (int t = 0; t < nterms; ++t) {
    std::vector<int> k(n), iota(n, 0), j(2 * d, 0);
    for (int i = 0; i < n; ++i) k[i] = kd(rng);
    // Distribute a weighted degree budget over y and z exponents.
    int budget = std::uniform_int_distribution<int>(0, wmax)(rng);
    while (budget > 0) {
      const int slot = std::uniform_int_distribution<int>(0, n + 2 * d - 1)(rng);
      if (slot < n) {
        if (budget < 2) continue;
        iota[slot] += 1;
        budget -= 2;
      } else {
        j[slot - n] += 1;
        budget -= 1;
      }
      if (2 * d == 0 && budget == 1) break;
    }
    const MultiIndex idx = make_index(k, iota, j);
    Complex c(uniform(rng, -scale, scale), uniform(rng, -scale, scale));
    if (is_zero_mode(idx, n)) c = Complex(c.real(), 0.0);
    terms.push_back({idx, c});
    if (!is_zero_mode(idx, n)) terms.push_back({conjugate_index(idx, n), std::conj(c)});
  }
  return TFSeries::from_terms(n, d, caps, std::move(terms));
}

// Largest coefficient magnitude, used for coefficientwise comparisons.
inline double max_coeff(const TFSeries& f) {
  double m = 0.0;
  for (const Term& t : f.terms()) m = std::max(m, std::abs(t.c));
  return m;
}

inline double max_coeff_diff(const TFSeries& a, const TFSeries& b) { return max_coeff(a - b); }

}  // namespace kamdeg::testing
