#pragma once

#include "kamdeg/kam.hpp"
#include "kamdeg/series.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace kamdeg {

struct FlowError : Error {
  using Error::Error;
};

// Fast evaluation of a real series and its gradient. Conjugate pairs are
// folded into one term, so the series must be real.
class SeriesEvaluator {
 public:
  explicit SeriesEvaluator(const TFSeries& h);

  int n() const { return n_; }
  int d() const { return d_; }
  double value(const Vec& state) const;
  // Value and gradient with respect to state = (x, y, z).
  double value_and_gradient(const Vec& state, Vec& grad) const;
  // Hamiltonian vector field: x' = H_y, y' = -H_x, u' = H_v, v' = -H_u.
  Vec field(const Vec& state) const;

 private:
  struct Group {
    std::vector<int> powers;  // iota then j
    std::vector<int> slots;   // mode slot per term
    std::vector<Complex> coeffs;
  };
  int n_ = 0, d_ = 0, kmax_ = 0;
  std::vector<std::vector<int>> modes_;
  std::vector<double> mode_k_;  // modes_ flattened, row-major
  std::vector<Group> groups_;
  int max_power_ = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;  // x reduced to [0, 2pi)
  std::vector<double> energy;
  double energy_drift = 0.0;  // |H(end) - H(start)|
  double drift_constant = 0.0;  // energy_drift / (h^4 T)
  double max_yz = 0.0;        // max over all steps of |(y, z)|
  bool escaped = false;       // left the escape radius (or overflowed) before T
  Vec last;                   // final finite state, x not reduced
  double t_end = 0.0;
};

struct FlowOptions {
  int record_every = 0;        // 0 records only the endpoints
  double escape_radius = 0.0;  // 0 disables; measured on (y, z)
};

// Classical fourth-order Runge-Kutta with fixed step.
Trajectory integrate_flow(const TFSeries& h, const Vec& initial, double T, double step, const FlowOptions& opts = {});
Trajectory integrate_flow(const SeriesEvaluator& ev, const Vec& initial, double T, double step,
                          const FlowOptions& opts = {});
void write_trajectory(std::ostream& os, const Trajectory& traj);

// Time-one map of the flow of F.
Vec time_one_map(const SeriesEvaluator& f, const Vec& state, double step);

struct TorusCheck {
  double deviation = 0.0;  // max over trajectories and time of |(y, z)|
  double energy_drift = 0.0;
  double x_advance_error = 0.0;  // max |x(T) - x0 - omega T| (unwrapped)
  int trajectories = 0;
};

// Integrates from n_angles points on {y = 0, z = 0}.
TorusCheck torus_deviation(const TFSeries& h_final, const Vec& omega, double T, double step, int n_angles = 16);

struct CounterexampleReport {
  bool in_scope = true;
  double epsilon = 0.0;
  double symbolic_sup = 0.0;     // upper bound of v' = -H_u from the coefficients
  bool symbolic_ok = false;      // symbolic_sup <= -eps^2
  double scan_min = 0.0;         // min of u^2 + eps^2 over the scan
  bool root_free = false;
  double T = 0.0;
  double v0 = 0.0;
  double v_end = 0.0;
  double t_end = 0.0;            // T, or the escape time
  bool escaped = false;
  bool drift_certified = false;  // v(t_end) <= v0 - eps^2 T
  bool slope_ok = false;         // v drops by at least eps^2 dt between samples
  int trajectories = 0;
  std::string summary;
};

// H = omega y + (u^3 + v^3)/3 + eps^2 u.
TFSeries counterexample_hamiltonian(double epsilon, double omega);
CounterexampleReport prop2_check(double epsilon, double omega, double T, double step = 1e-3);

struct ConsistencyReport {
  double max_difference = 0.0;
  double scale = 0.0;  // max |H| at the sample points
  int points = 0;
};

// Compares the step output at p with the step input at phi_F^1(p + delta)
// on random points of the output domain.
ConsistencyReport transform_consistency(const KamState& before, const KamState& after, int points,
                                        std::uint64_t seed, double step = 1e-2);

}  // namespace kamdeg
