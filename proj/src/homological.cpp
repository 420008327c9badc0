#include "kamdeg/homological.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace kamdeg {

int DegreeClass::weighted() const {
  return 2 * std::accumulate(iota.begin(), iota.end(), 0) + z_degree;
}

const SmallDivisorCert* CertificateSet::find(const std::vector<int>& k, int p) const {
  const int key_p = (deduplicated || p == 0) ? 0 : p;
  auto it = index.find({k, key_p});
  if (it == index.end()) return nullptr;
  return &certs[it->second];
}

namespace {

void modes_rec(int n, int i, int remaining, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (i == n) {
    if (std::any_of(cur.begin(), cur.end(), [](int v) { return v != 0; })) out.push_back(cur);
    return;
  }
  for (int v = -remaining; v <= remaining; ++v) {
    cur[i] = v;
    modes_rec(n, i + 1, remaining - std::abs(v), cur, out);
  }
  cur[i] = 0;
}

void comp_rec(int len, int i, int remaining, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (i == len - 1) {
    cur[i] = remaining;
    out.push_back(cur);
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    cur[i] = v;
    comp_rec(len, i + 1, remaining - v, cur, out);
  }
}

int l1(const std::vector<int>& k) {
  int s = 0;
  for (int v : k) s += std::abs(v);
  return s;
}

double dot(const std::vector<int>& k, const Vec& omega) {
  double s = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) s += k[i] * omega[static_cast<int>(i)];
  return s;
}

double smallest_singular_value(const CMat& a) {
  Eigen::JacobiSVD<CMat> svd(a);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

// Quadratic part of g from its Hessian: (1/2) z^T H z.
TFSeries quadratic_from_hessian(int n, int d, const Mat& h) {
  std::vector<Term> terms;
  for (int a = 0; a < 2 * d; ++a)
    for (int b = a; b < 2 * d; ++b) {
      const double c = a == b ? 0.5 * h(a, a) : 0.5 * (h(a, b) + h(b, a));
      if (c == 0.0) continue;
      MultiIndex idx;
      idx.v[2 * n + a] += 1;
      idx.v[2 * n + b] += 1;
      terms.push_back({idx, Complex(c, 0.0)});
    }
  return TFSeries::from_terms(n, d, Caps::ample(), std::move(terms));
}

MultiIndex class_monomial(int n, int d, const std::vector<int>& k, const std::vector<int>& iota,
                          const std::vector<int>& j) {
  MultiIndex idx;
  for (int i = 0; i < n; ++i) {
    idx.v[i] = static_cast<std::int16_t>(k.empty() ? 0 : k[i]);
    idx.v[n + i] = static_cast<std::int16_t>(iota[i]);
  }
  for (int a = 0; a < 2 * d; ++a) idx.v[2 * n + a] = static_cast<std::int16_t>(j[a]);
  return idx;
}

MultiIndex strip_mode(const MultiIndex& idx, int n) {
  MultiIndex out = idx;
  for (int i = 0; i < n; ++i) out.v[i] = 0;
  return out;
}

std::vector<int> mode_of(const MultiIndex& idx, int n) {
  std::vector<int> k(n);
  for (int i = 0; i < n; ++i) k[i] = idx.v[i];
  return k;
}

// Exponents iota (length n) with 2|iota| <= budget, lexicographic.
std::vector<std::vector<int>> iotas_up_to(int n, int budget) {
  std::vector<std::vector<int>> out;
  for (int total = 0; 2 * total <= budget; ++total)
    for (auto& c : compositions(n, total)) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<std::vector<int>> modes_in_ball(int n, int kmax) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  modes_rec(n, 0, kmax, cur, out);
  return out;
}

std::vector<std::vector<int>> compositions(int len, int total) {
  std::vector<std::vector<int>> out;
  if (len == 0) {
    if (total == 0) out.emplace_back();
    return out;
  }
  std::vector<int> cur(len, 0);
  comp_rec(len, 0, total, cur, out);
  return out;
}

std::vector<DegreeClass> degree_classes(int n, int m, int min_p) {
  std::vector<DegreeClass> out;
  for (const auto& iota : iotas_up_to(n, m)) {
    const int wy = 2 * std::accumulate(iota.begin(), iota.end(), 0);
    for (int p = min_p; wy + p <= m; ++p) out.push_back({iota, p});
  }
  std::sort(out.begin(), out.end(), [](const DegreeClass& a, const DegreeClass& b) {
    if (a.weighted() != b.weighted()) return a.weighted() < b.weighted();
    return a < b;
  });
  return out;
}

CMat build_divisor_matrix(const std::vector<int>& k, const Vec& omega, const Mat& hess_g0,
                          const DegreeClass& cls) {
  const int n = static_cast<int>(k.size());
  if (omega.size() != n) throw DimensionError("build_divisor_matrix: omega length differs from mode length");
  const int kn = l1(k);
  if (kn == 0) throw std::invalid_argument("build_divisor_matrix: k = 0 has no divisor");
  if (hess_g0.rows() != hess_g0.cols() || hess_g0.rows() % 2 != 0) {
    throw DimensionError("build_divisor_matrix: Hessian must be square of even size");
  }
  const int d = static_cast<int>(hess_g0.rows()) / 2;
  const std::vector<int> iota = cls.iota.empty() ? std::vector<int>(n, 0) : cls.iota;
  if (static_cast<int>(iota.size()) != n) throw DimensionError("build_divisor_matrix: class iota has wrong length");

  const auto basis = compositions(2 * d, cls.z_degree);
  const int nb = static_cast<int>(basis.size());
  const Complex diag(0.0, dot(k, omega) / kn);
  CMat a = CMat::Identity(nb, nb) * diag;
  if (cls.z_degree == 0 || d == 0) return a;

  // Column b holds the coefficients of {g2, b}; S~ is its negative.
  const TFSeries g2 = quadratic_from_hessian(n, d, hess_g0);
  std::unordered_map<MultiIndex, int, MultiIndexHash> row;
  for (int b = 0; b < nb; ++b) row[class_monomial(n, d, {}, iota, basis[b])] = b;
  for (int b = 0; b < nb; ++b) {
    const TFSeries mono =
        TFSeries::monomial(n, d, Caps::ample(), class_monomial(n, d, {}, iota, basis[b]), 1.0);
    const TFSeries image = poisson_bracket(g2, mono, Caps::ample());
    for (const Term& t : image.terms()) {
      auto it = row.find(t.idx);
      if (it == row.end()) throw std::logic_error("build_divisor_matrix: quadratic action left the class");
      a(it->second, b) -= t.c / static_cast<double>(kn);
    }
  }
  return a;
}

NonresonanceResult check_nonresonance(const Vec& omega, const Mat& hess_g0, double gamma, double tau,
                                      int k_plus, int m) {
  const int n = static_cast<int>(omega.size());
  if (gamma < 0.0) throw std::invalid_argument("check_nonresonance: gamma must be >= 0");
  if (!(tau > n - 1)) throw std::invalid_argument("check_nonresonance: tau must exceed n - 1");
  NonresonanceResult res;
  CertificateSet& cs = res.certs;
  cs.gamma = gamma;
  cs.tau = tau;
  cs.k_plus = k_plus;
  cs.m = m;
  cs.deduplicated = hess_g0.size() == 0 || hess_g0.isZero(0.0);
  const int d = static_cast<int>(hess_g0.rows()) / 2;

  auto push = [&](SmallDivisorCert c, int p) {
    cs.index[{c.k, p}] = cs.certs.size();
    cs.certs.push_back(std::move(c));
  };

  for (const auto& k : modes_in_ball(n, k_plus)) {
    const int kn = l1(k);
    const double bound = gamma / std::pow(static_cast<double>(kn), tau);
    SmallDivisorCert sc{k, {{}, 0}, DivisorKind::Scalar, std::abs(dot(k, omega)), bound, 0.0};
    sc.margin = sc.divisor - bound;
    if (!(sc.margin > 0.0)) {
      res.ok = false;
      res.violation = sc;
      return res;
    }
    push(sc, 0);
    if (cs.deduplicated || d == 0) continue;
    for (int p = 1; p <= m; ++p) {
      const DegreeClass cls{std::vector<int>(n, 0), p};
      const CMat a = build_divisor_matrix(k, omega, hess_g0, cls);
      SmallDivisorCert mc{k, cls, DivisorKind::Matrix, kn * smallest_singular_value(a), bound, 0.0};
      mc.margin = mc.divisor - bound;
      if (!(mc.margin > 0.0)) {
        res.ok = false;
        res.violation = mc;
        return res;
      }
      push(mc, p);
    }
  }
  return res;
}

CertificateSet certify_nonresonance(const Vec& omega, const Mat& hess_g0, double gamma, double tau,
                                    int k_plus, int m) {
  if (!(gamma > 0.0)) throw std::invalid_argument("certify_nonresonance: gamma must be > 0");
  NonresonanceResult res = check_nonresonance(omega, hess_g0, gamma, tau, k_plus, m);
  if (!res.ok) {
    const SmallDivisorCert& v = *res.violation;
    std::string ks;
    for (std::size_t i = 0; i < v.k.size(); ++i) ks += (i ? "," : "") + std::to_string(v.k[i]);
    throw ResonanceError("resonance at k = (" + ks + "), " +
                             (v.kind == DivisorKind::Scalar ? std::string("scalar divisor ")
                                                            : "matrix divisor (z-degree " +
                                                                  std::to_string(v.w_class.z_degree) + ") ") +
                             format_double(v.divisor) + " <= bound " + format_double(v.bound),
                         v);
  }
  return std::move(res.certs);
}

TFSeries split_Q(const TFSeries& g, const TFSeries& g_bar, const TFSeries& f, int m, Caps caps) {
  const int n = f.n(), d = f.d();
  const Caps work{caps.k_max, Caps::ample().w_max};
  const TFSeries gg = g + g_bar;
  SeriesAccumulator acc(n, d, work);
  for (int p = 0; p < d; ++p) {
    acc.add(multiply(partial_derivative(gg, Var::z(p)), partial_derivative(f, Var::z(d + p)), work));
    acc.add(multiply(partial_derivative(gg, Var::z(d + p)), partial_derivative(f, Var::z(p)), work), -1.0);
  }
  return with_caps(filter(acc.finish(), [&](const MultiIndex& idx) { return weighted_degree(idx, n, d) > m; }),
                   {caps.k_max, std::max(caps.w_max, work.w_max)});
}

HomologicalSolution solve_homological(const NormalForm& nf, const TFSeries& R, const CertificateSet& certs,
                                      int m, Caps caps) {
  const int n = nf.n(), d = nf.d();
  if (R.n() != n || R.d() != d) throw DimensionError("solve_homological: R dimensions differ from the normal form");
  const Caps ample = Caps::ample();
  const TFSeries nser = to_series(nf, ample);

  // Unknown basis (mode stripped), grouped by class in solve order.
  const auto classes = degree_classes(n, m, 0);
  std::vector<MultiIndex> basis;
  std::vector<int> class_of;
  std::vector<int> class_start;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    class_start.push_back(static_cast<int>(basis.size()));
    for (const auto& j : compositions(2 * d, classes[c].z_degree)) {
      basis.push_back(class_monomial(n, d, {}, classes[c].iota, j));
      class_of.push_back(static_cast<int>(c));
    }
  }
  class_start.push_back(static_cast<int>(basis.size()));
  const int nb = static_cast<int>(basis.size());
  std::unordered_map<MultiIndex, int, MultiIndexHash> row_of;
  for (int b = 0; b < nb; ++b) row_of[basis[b]] = b;

  // Group the nonzero modes of R.
  std::map<std::vector<int>, std::vector<Term>> by_mode;
  for (const Term& t : R.terms()) {
    if (is_zero_mode(t.idx, n)) continue;
    if (R.weighted_degree(t.idx) > m) {
      throw std::invalid_argument("solve_homological: R has a term above weighted degree m");
    }
    by_mode[mode_of(t.idx, n)].push_back(t);
  }

  HomologicalSolution out;
  std::vector<Term> f_terms;
  for (const auto& [k, rterms] : by_mode) {
    // Column b of L_k: the mode-k coefficients of {N, e^{ikx} b}.
    CMat L = CMat::Zero(nb, nb);
    for (int b = 0; b < nb; ++b) {
      MultiIndex idx = basis[b];
      for (int i = 0; i < n; ++i) idx.v[i] = static_cast<std::int16_t>(k[i]);
      const TFSeries col = poisson_bracket(nser, TFSeries::monomial(n, d, ample, idx, 1.0), ample);
      for (const Term& t : col.terms()) {
        if (weighted_degree(t.idx, n, d) > m) continue;
        const int r = row_of.at(strip_mode(t.idx, n));
        const DegreeClass& cr = classes[class_of[r]];
        const DegreeClass& cb = classes[class_of[b]];
        if (class_of[r] != class_of[b] && cr.weighted() <= cb.weighted()) {
          throw std::logic_error(
              "solve_homological: coupling from weighted degree " + std::to_string(cb.weighted()) +
              " into degree " + std::to_string(cr.weighted()) +
              " breaks block triangularity (g must have no linear part)");
        }
        L(r, b) = t.c;
      }
    }

    CVec rhs = CVec::Zero(nb);
    for (const Term& t : rterms) rhs[row_of.at(strip_mode(t.idx, n))] = -t.c;
    if (rhs.isZero(0.0)) continue;

    CVec sol = CVec::Zero(nb);
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const int a = class_start[c], sz = class_start[c + 1] - a;
      CVec r = rhs.segment(a, sz);
      if (a > 0) r -= L.block(a, 0, sz, a) * sol.head(a);
      if (r.isZero(0.0)) continue;
      const SmallDivisorCert* cert = certs.find(k, classes[c].z_degree);
      if (cert == nullptr) throw std::invalid_argument("solve_homological: no small-divisor certificate for a needed block");
      HomologicalBlock blk;
      blk.k = k;
      blk.w_class = classes[c];
      blk.weighted_degree = classes[c].weighted();
      blk.matrix = L.block(a, a, sz, sz);
      blk.rhs = r;
      Eigen::JacobiSVD<CMat> svd(blk.matrix);
      const auto& sv = svd.singularValues();
      blk.sigma_min = sv(sv.size() - 1);
      blk.condition = blk.sigma_min > 0.0 ? sv(0) / blk.sigma_min : INFINITY;
      blk.cert_margin = cert->margin;
      blk.cert_bound = cert->bound;
      if (!(blk.sigma_min > 0.0)) throw SingularBlockError("solve_homological: singular block");
      blk.solution = Eigen::PartialPivLU<CMat>(blk.matrix).solve(r);
      sol.segment(a, sz) = blk.solution;
      out.system.blocks.push_back(std::move(blk));
    }
    for (int b = 0; b < nb; ++b) {
      if (sol[b] == Complex(0.0, 0.0)) continue;
      MultiIndex idx = basis[b];
      for (int i = 0; i < n; ++i) idx.v[i] = static_cast<std::int16_t>(k[i]);
      f_terms.push_back({idx, sol[b]});
    }
  }
  out.F = enforce_reality(TFSeries::from_terms(n, d, caps, std::move(f_terms)));
  const TFSeries full = poisson_bracket(nser, out.F, {caps.k_max, ample.w_max});
  out.Q = filter(full, [&](const MultiIndex& idx) { return weighted_degree(idx, n, d) > m; });
  return out;
}

double residual_check(const NormalForm& nf, const TFSeries& F, const TFSeries& R, const TFSeries& Q,
                      const DomainParams& dom) {
  const Caps ample = Caps::ample();
  const TFSeries nser = to_series(nf, ample);
  const TFSeries res = poisson_bracket(nser, with_caps(F, ample), ample) + with_caps(R, ample) -
                       with_caps(average(R), ample) - with_caps(Q, ample);
  return majorant_norm(res, dom);
}

}  // namespace kamdeg
