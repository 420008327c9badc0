#pragma once

#include "kamdeg/normal_form.hpp"
#include "kamdeg/series.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kamdeg {

// Degree class of an unknown block: y exponent iota and total z degree p.
struct DegreeClass {
  std::vector<int> iota;
  int z_degree = 0;

  int weighted() const;
  friend auto operator<=>(const DegreeClass&, const DegreeClass&) = default;
};

enum class DivisorKind { Scalar, Matrix };

struct SmallDivisorCert {
  std::vector<int> k;
  DegreeClass w_class;  // iota is empty for a scalar certificate
  DivisorKind kind = DivisorKind::Scalar;
  double divisor = 0.0;  // |<k,omega>| or smallest singular value of |k| A
  double bound = 0.0;    // gamma / |k|^tau
  double margin = 0.0;   // divisor - bound
};

struct CertificateSet {
  std::vector<SmallDivisorCert> certs;
  // Zero Hessian: every matrix condition equals the scalar one and is not repeated.
  bool deduplicated = false;
  double gamma = 0.0;
  double tau = 0.0;
  int k_plus = 0;
  int m = 0;

  // Certificate covering (k, z-degree p); nullptr if absent.
  const SmallDivisorCert* find(const std::vector<int>& k, int p) const;

  std::map<std::pair<std::vector<int>, int>, std::size_t> index;
};

struct NonresonanceResult {
  bool ok = true;
  CertificateSet certs;
  std::optional<SmallDivisorCert> violation;
};

struct ResonanceError : Error {
  ResonanceError(const std::string& what, SmallDivisorCert v) : Error(what), violation(std::move(v)) {}
  SmallDivisorCert violation;
};

struct SingularBlockError : Error {
  using Error::Error;
};

// All integer vectors with 0 < |k|_1 <= kmax, in lexicographic order.
std::vector<std::vector<int>> modes_in_ball(int n, int kmax);
// Exponent vectors of length len summing to total, lexicographic order.
std::vector<std::vector<int>> compositions(int len, int total);
// Classes with 2|iota| + p <= m (and p >= min_p), ascending weighted degree then lexicographic.
std::vector<DegreeClass> degree_classes(int n, int m, int min_p);

// A = i<k/|k|,omega> I + S~/|k| on the span of y^iota z^j with |j| = p.
CMat build_divisor_matrix(const std::vector<int>& k, const Vec& omega, const Mat& hess_g0,
                          const DegreeClass& cls);

// Checks every 0 < |k| <= k_plus against the scalar and the matrix conditions.
// The matrix condition compares the smallest singular value of |k| A with the bound.
NonresonanceResult check_nonresonance(const Vec& omega, const Mat& hess_g0, double gamma, double tau,
                                      int k_plus, int m);
// Throws ResonanceError carrying the first violation.
CertificateSet certify_nonresonance(const Vec& omega, const Mat& hess_g0, double gamma, double tau,
                                    int k_plus, int m);

// Part of weighted degree > m of (g_z + g_bar_z) J F_z.
TFSeries split_Q(const TFSeries& g, const TFSeries& g_bar, const TFSeries& f, int m, Caps caps);

struct HomologicalBlock {
  std::vector<int> k;
  DegreeClass w_class;
  int weighted_degree = 0;
  CMat matrix;
  CVec rhs;
  CVec solution;
  double sigma_min = 0.0;
  double condition = 0.0;
  double cert_margin = 0.0;
  double cert_bound = 0.0;
};

struct HomologicalSystem {
  std::vector<HomologicalBlock> blocks;
};

struct HomologicalSolution {
  TFSeries F;
  TFSeries Q;
  HomologicalSystem system;
};

// Solves {N,F} + R - [R] - Q = 0 for F supported on 0 < |k|, 2|iota|+|j| <= m.
// Q is the part of {N,F} above weighted degree m.
HomologicalSolution solve_homological(const NormalForm& nf, const TFSeries& R,
                                      const CertificateSet& certs, int m, Caps caps);

double residual_check(const NormalForm& nf, const TFSeries& F, const TFSeries& R, const TFSeries& Q,
                      const DomainParams& dom);

}  // namespace kamdeg
