#pragma once

#include "kamdeg/normal_form.hpp"
#include "kamdeg/series.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kamdeg {

struct ShiftResult {
  Vec delta;                 // zeta_plus - zeta
  double residual = 0.0;     // |grad g(delta) + grad_z [R](0, delta)|
  double tol = 0.0;
  bool within_ball = false;  // |delta| <= ball radius
  int newton_iters = 0;
  bool multistart = false;   // true when the grid fallback produced the zero
};

// No zero of the shift equation was located. degree is the degree of the
// shift map on the search ball when it could be computed.
struct ShiftError : Error {
  ShiftError(const std::string& what, std::optional<int> degree) : Error(what), degree(degree) {}
  std::optional<int> degree;
};

struct ShiftOptions {
  double tol = 0.0;            // <= 0 selects 1e-12 * max(1, |grad_z [R]|)
  double search_radius = 0.0;  // <= 0 searches the ball itself
  int max_newton = 80;
  int grid_points = 17;        // per axis
  int seeds = 8;
};

// grad g(delta) + grad_z [R](0, delta).
Vec shift_map(const TFSeries& g, const TFSeries& r_avg, const Vec& delta);

// Zero of the shift map: damped Newton from the origin, then a grid-seeded
// multistart when the Jacobian is singular or Newton stalls.
ShiftResult find_shift(const TFSeries& g, const TFSeries& r_avg, double ball_radius, const ShiftOptions& opts = {});

// (N + [R]) composed with z -> z + delta, regrouped into e, omega, h_tilde, g, g_bar.
// Linear-in-z leftovers stay in g so the regrouping is exact.
NormalForm rebuild_normal_form(const NormalForm& nf, const TFSeries& r_avg, const Vec& delta, Caps caps);

// Per-step changes of the normal-form pieces, measured with weighted_norm(s, 0).
struct NormalFormDrift {
  double e = 0.0;
  double omega = 0.0;
  double h_tilde = 0.0;
  double g = 0.0;
  double g_bar = 0.0;
};
NormalFormDrift normal_form_drift(const NormalForm& before, const NormalForm& after, double s);

struct DriftRow {
  int step = 0;
  double shift = 0.0;      // |zeta_{nu+1} - zeta_nu|
  double reference = 0.0;  // (s^{m-1} mu)^{1/L} of the previous step
  double ratio = 0.0;      // shift / reference
  NormalFormDrift pieces;
};

struct DriftReport {
  std::vector<DriftRow> rows;
  std::vector<int> decay_violations;  // steps whose shift exceeds the previous one
  bool monotone = true;
};

// references[i] is the radius the i-th shift is compared against.
DriftReport shift_drift_bounds(const std::vector<ShiftResult>& history, const std::vector<double>& references,
                               const std::vector<NormalFormDrift>& pieces = {});

}  // namespace kamdeg
