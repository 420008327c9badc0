#pragma once

// The two worked Hamiltonians used across the tests: the quartic normal part
// with odd gradient (nonzero degree) and the cubic one with degree zero.

#include "kamdeg/normal_form.hpp"
#include "kamdeg/series.hpp"

#include <cmath>

namespace kamdeg::testing {

inline const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

inline TFSeries z_monomial(int n, int d, const std::vector<int>& j, double c) {
  return TFSeries::monomial(n, d, Caps::ample(), make_index(std::vector<int>(n, 0), std::vector<int>(n, 0), j), c);
}

// g = (u^4 + v^4) / 4 with n torus angles.
inline TFSeries quartic_g(int n) { return z_monomial(n, 1, {4, 0}, 0.25) + z_monomial(n, 1, {0, 4}, 0.25); }

// g = (u^3 + v^3) / 3.
inline TFSeries cubic_g(int n) { return z_monomial(n, 1, {3, 0}, 1.0 / 3.0) + z_monomial(n, 1, {0, 3}, 1.0 / 3.0); }

// a cos<k,x> y^iota z^j as a conjugate pair.
inline TFSeries cos_term(const std::vector<int>& k, const std::vector<int>& iota, const std::vector<int>& j,
                         double a) {
  std::vector<int> mk(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) mk[i] = -k[i];
  const int n = static_cast<int>(k.size()), d = static_cast<int>(j.size()) / 2;
  return TFSeries::from_terms(n, d, Caps::ample(),
                              {{make_index(k, iota, j), 0.5 * a}, {make_index(mk, iota, j), 0.5 * a}});
}

inline NormalForm acceptance_normal_form() {
  Vec omega(2);
  omega << 1.0, kGolden;
  NormalForm nf = make_normal_form(omega, 1, Caps::ample());
  nf.g = quartic_g(2);
  return nf;
}

// P = eps cos x1 + eps u cos x2.
inline TFSeries acceptance_perturbation(double eps) {
  return cos_term({1, 0}, {0, 0}, {0, 0}, eps) + cos_term({0, 1}, {0, 0}, {1, 0}, eps);
}

}  // namespace kamdeg::testing
