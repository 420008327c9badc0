#include "kamdeg/translation.hpp"

#include "kamdeg/degree.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace kamdeg {

namespace {

struct NewtonOutcome {
  Vec delta;
  double residual = 0.0;
  int iters = 0;
  bool singular = false;
};

// Damped Newton. Without pseudo a singular Jacobian stops the iteration;
// with pseudo the least-squares step is taken instead.
NewtonOutcome damped_newton(const TFSeries& g, const TFSeries& r_avg, Vec delta, double tol, int max_iter,
                            bool pseudo) {
  NewtonOutcome out;
  Vec h = shift_map(g, r_avg, delta);
  double res = h.norm();
  for (int it = 0; it < max_iter && res > tol; ++it) {
    const Mat jac = z_hessian(g, delta) + z_hessian(r_avg, delta);
    Eigen::JacobiSVD<Mat> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    if (!(sv[sv.size() - 1] > 1e-14 * std::max(1.0, smax))) {
      if (!pseudo || smax == 0.0) {
        out.singular = true;
        break;
      }
      svd.setThreshold(1e-14);
    }
    const Vec step = -svd.solve(h);
    if (!step.allFinite()) {
      out.singular = true;
      break;
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int b = 0; b < 40; ++b, alpha *= 0.5) {
      const Vec trial = delta + alpha * step;
      const Vec ht = shift_map(g, r_avg, trial);
      if (ht.norm() < res) {
        delta = trial;
        h = ht;
        res = ht.norm();
        accepted = true;
        break;
      }
    }
    out.iters = it + 1;
    if (!accepted) break;
  }
  out.delta = delta;
  out.residual = res;
  return out;
}

bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

std::optional<int> shift_degree(const TFSeries& g, const TFSeries& r_avg, double radius) {
  const int dim = 2 * g.d();
  BoxRegion region{Vec::Zero(dim), radius, 1024};
  const VectorMap f = [&](const Vec& z) { return shift_map(g, r_avg, z); };
  try {
    return dim == 2 ? brouwer_degree_2d(f, region) : brouwer_degree_simplicial(f, region, 6);
  } catch (const BoundaryZeroError&) {
    return std::nullopt;
  }
}

}  // namespace

Vec shift_map(const TFSeries& g, const TFSeries& r_avg, const Vec& delta) {
  return z_gradient(g, delta) + z_gradient(r_avg, delta);
}

ShiftResult find_shift(const TFSeries& g, const TFSeries& r_avg, double ball_radius, const ShiftOptions& opts) {
  const int dim = 2 * g.d();
  if (r_avg.d() != g.d() || r_avg.n() != g.n()) throw DimensionError("find_shift: g and [R] dimensions differ");
  if (!(ball_radius > 0.0)) throw std::invalid_argument("find_shift: ball radius must be > 0");
  const Vec origin = Vec::Zero(dim);
  const double tol = opts.tol > 0.0 ? opts.tol : 1e-12 * std::max(1.0, z_gradient(r_avg, origin).norm());
  const double radius = opts.search_radius > 0.0 ? opts.search_radius : ball_radius;

  ShiftResult res;
  res.tol = tol;
  auto finish = [&](const NewtonOutcome& o, bool multi) {
    res.delta = o.delta;
    res.residual = o.residual;
    res.newton_iters = o.iters;
    res.multistart = multi;
    res.within_ball = o.delta.norm() <= ball_radius;
    return res;
  };

  const NewtonOutcome direct = damped_newton(g, r_avg, origin, tol, opts.max_newton, false);
  if (direct.residual <= tol) return finish(direct, false);

  // Grid over the search ball; keep the best seeds by residual.
  const int pts = std::max(2, opts.grid_points);
  std::vector<std::pair<double, Vec>> scored;
  std::vector<int> counter(dim, 0);
  while (true) {
    Vec z(dim);
    for (int a = 0; a < dim; ++a) z[a] = radius * (-1.0 + 2.0 * counter[a] / (pts - 1));
    if (z.norm() <= radius * (1.0 + 1e-12)) scored.emplace_back(shift_map(g, r_avg, z).norm(), z);
    int a = 0;
    while (a < dim && ++counter[a] == pts) counter[a++] = 0;
    if (a == dim) break;
  }
  std::sort(scored.begin(), scored.end(), [](const auto& l, const auto& r) {
    return l.first != r.first ? l.first < r.first : lex_less(l.second, r.second);
  });
  scored.resize(std::min<std::size_t>(scored.size(), std::max(1, opts.seeds)));

  std::optional<NewtonOutcome> best;
  for (const auto& seed : scored) {
    const NewtonOutcome o = damped_newton(g, r_avg, seed.second, tol, opts.max_newton, true);
    if (!best || o.residual < best->residual || (o.residual == best->residual && lex_less(o.delta, best->delta))) {
      best = o;
    }
  }
  if (best && best->residual <= tol) return finish(*best, true);

  const std::optional<int> deg = shift_degree(g, r_avg, radius);
  throw ShiftError("find_shift: no real zero of the shift equation within radius " + format_double(radius) +
                       " (best residual " + format_double(best ? best->residual : direct.residual) + ", tol " +
                       format_double(tol) + "); degree on the search ball: " +
                       (deg ? std::to_string(*deg) : std::string("undefined")),
                   deg);
}

NormalForm rebuild_normal_form(const NormalForm& nf, const TFSeries& r_avg, const Vec& delta, Caps caps) {
  const int n = nf.n(), d = nf.d();
  if (delta.size() != 2 * d) throw DimensionError("rebuild_normal_form: delta must have length 2d");
  const TFSeries shifted = shift_z(to_series(nf, caps) + r_avg, delta, caps);

  NormalForm out = make_normal_form(nf.omega, d, caps);
  out.omega = Vec::Zero(n);
  out.zeta = nf.zeta + delta;
  std::vector<Term> h_terms, g_terms, gb_terms;
  for (const Term& t : shifted.terms()) {
    if (!is_zero_mode(t.idx, n)) throw std::invalid_argument("rebuild_normal_form: [R] must be mode-free");
    const int p = y_degree(t.idx, n), q = z_degree(t.idx, n, d);
    if (p == 0 && q == 0) {
      out.e = t.c.real();
    } else if (p == 1 && q == 0) {
      for (int i = 0; i < n; ++i)
        if (t.idx.v[n + i] == 1) out.omega[i] = t.c.real();
    } else if (q == 0) {
      h_terms.push_back(t);
    } else if (p == 0) {
      g_terms.push_back(t);
    } else {
      gb_terms.push_back(t);
    }
  }
  out.h_tilde = TFSeries::from_terms(n, d, caps, h_terms);
  out.g = TFSeries::from_terms(n, d, caps, g_terms);
  out.g_bar = TFSeries::from_terms(n, d, caps, gb_terms);
  return out;
}

NormalFormDrift normal_form_drift(const NormalForm& before, const NormalForm& after, double s) {
  NormalFormDrift dr;
  dr.e = std::abs(after.e - before.e);
  dr.omega = (after.omega - before.omega).norm();
  dr.h_tilde = weighted_norm(after.h_tilde - before.h_tilde, s, 0.0);
  dr.g = weighted_norm(after.g - before.g, s, 0.0);
  dr.g_bar = weighted_norm(after.g_bar - before.g_bar, s, 0.0);
  return dr;
}

DriftReport shift_drift_bounds(const std::vector<ShiftResult>& history, const std::vector<double>& references,
                               const std::vector<NormalFormDrift>& pieces) {
  if (history.size() < 2) throw std::invalid_argument("shift_drift_bounds: needs at least two steps");
  if (references.size() != history.size()) throw std::invalid_argument("shift_drift_bounds: one reference per step");
  if (!pieces.empty() && pieces.size() != history.size())
    throw std::invalid_argument("shift_drift_bounds: one drift entry per step");
  DriftReport rep;
  for (std::size_t i = 0; i < history.size(); ++i) {
    DriftRow row;
    row.step = static_cast<int>(i);
    row.shift = history[i].delta.size() ? history[i].delta.norm() : 0.0;
    row.reference = references[i];
    row.ratio = row.shift == 0.0 ? 0.0 : row.shift / references[i];
    if (!pieces.empty()) row.pieces = pieces[i];
    if (i > 0 && row.shift > rep.rows.back().shift) {
      rep.decay_violations.push_back(row.step);
      rep.monotone = false;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace kamdeg
