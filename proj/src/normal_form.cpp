#include "kamdeg/normal_form.hpp"

#include <cmath>

namespace kamdeg {

NormalForm make_normal_form(const Vec& omega, int d, Caps caps) {
  const int n = static_cast<int>(omega.size());
  NormalForm nf;
  nf.omega = omega;
  nf.h_tilde = TFSeries(n, d, caps);
  nf.g = TFSeries(n, d, caps);
  nf.g_bar = TFSeries(n, d, caps);
  nf.zeta = Vec::Zero(2 * d);
  return nf;
}

TFSeries to_series(const NormalForm& nf, Caps caps) {
  const int n = nf.n(), d = nf.d();
  std::vector<Term> terms;
  terms.push_back({MultiIndex{}, Complex(nf.e, 0.0)});
  for (int i = 0; i < n; ++i) {
    MultiIndex idx;
    idx.v[n + i] = 1;
    terms.push_back({idx, Complex(nf.omega[i], 0.0)});
  }
  for (const TFSeries* part : {&nf.h_tilde, &nf.g, &nf.g_bar}) {
    if (part->n() != n || part->d() != d) throw DimensionError("normal form pieces disagree on dimensions");
    for (const Term& t : part->terms()) terms.push_back(t);
  }
  return TFSeries::from_terms(n, d, caps, std::move(terms));
}

std::vector<std::string> shape_violations(const NormalForm& nf, int m, double tol) {
  std::vector<std::string> out;
  const int n = nf.n(), d = nf.d();
  auto check = [&](const TFSeries& s, const char* name, auto&& ok) {
    for (const Term& t : s.terms()) {
      if (std::abs(t.c) > tol && !ok(t.idx)) {
        out.push_back(std::string(name) + ": term of weighted degree " +
                      std::to_string(s.weighted_degree(t.idx)) + " with |c| = " +
                      format_double(std::abs(t.c)) + " violates the shape");
        return;
      }
    }
  };
  check(nf.h_tilde, "h_tilde", [&](const MultiIndex& idx) {
    return is_zero_mode(idx, n) && z_degree(idx, n, d) == 0 && y_degree(idx, n) >= 2;
  });
  check(nf.g, "g", [&](const MultiIndex& idx) {
    return is_zero_mode(idx, n) && y_degree(idx, n) == 0 && z_degree(idx, n, d) >= 2;
  });
  check(nf.g_bar, "g_bar", [&](const MultiIndex& idx) {
    return is_zero_mode(idx, n) && y_degree(idx, n) >= 1 && z_degree(idx, n, d) >= 1 &&
           weighted_degree(idx, n, d) <= m;
  });
  return out;
}

TFSeries z_part_at_origin(const TFSeries& f) {
  const int n = f.n();
  return filter(f, [n](const MultiIndex& idx) { return is_zero_mode(idx, n) && y_degree(idx, n) == 0; });
}

namespace {

// Value of prod z^j with exponent slot a lowered by da and slot b lowered by db.
double reduced_monomial(const MultiIndex& idx, int base, int dims, const Vec& z, int a, int b,
                        double& factor) {
  factor = 1.0;
  double mono = 1.0;
  for (int c = 0; c < dims; ++c) {
    int e = idx.v[base + c];
    if (c == a) {
      factor *= e;
      --e;
    }
    if (c == b) {
      factor *= e;
      --e;
    }
    if (e < 0) return 0.0;
    if (e > 0) mono *= std::pow(z[c], e);
  }
  return mono;
}

}  // namespace

Vec z_gradient(const TFSeries& f, const Vec& z) {
  const int n = f.n(), d = f.d();
  if (z.size() != 2 * d) throw DimensionError("z_gradient: z must have length 2d");
  Vec grad = Vec::Zero(2 * d);
  for (const Term& t : f.terms()) {
    if (!is_zero_mode(t.idx, n) || y_degree(t.idx, n) != 0) continue;
    for (int a = 0; a < 2 * d; ++a) {
      double factor;
      const double mono = reduced_monomial(t.idx, 2 * n, 2 * d, z, a, -1, factor);
      if (factor != 0.0) grad[a] += t.c.real() * factor * mono;
    }
  }
  return grad;
}

Mat z_hessian(const TFSeries& f, const Vec& z) {
  const int n = f.n(), d = f.d();
  if (z.size() != 2 * d) throw DimensionError("z_hessian: z must have length 2d");
  Mat hess = Mat::Zero(2 * d, 2 * d);
  for (const Term& t : f.terms()) {
    if (!is_zero_mode(t.idx, n) || y_degree(t.idx, n) != 0) continue;
    for (int a = 0; a < 2 * d; ++a)
      for (int b = 0; b < 2 * d; ++b) {
        double factor;
        const double mono = reduced_monomial(t.idx, 2 * n, 2 * d, z, a, b, factor);
        if (factor != 0.0) hess(a, b) += t.c.real() * factor * mono;
      }
  }
  return hess;
}

Mat hessian_at_origin(const TFSeries& g) { return z_hessian(g, Vec::Zero(2 * g.d())); }

}  // namespace kamdeg
