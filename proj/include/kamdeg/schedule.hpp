#pragma once

#include "kamdeg/common.hpp"

#include <array>
#include <string>
#include <vector>

namespace kamdeg {

enum class ScheduleMode { paper, practical };

std::string to_string(ScheduleMode mode);
ScheduleMode parse_schedule_mode(const std::string& text);

struct ScheduleConfig {
  double epsilon = 1e-6;
  int m = 0;           // 0 derives m from L
  double L = 0.0;      // 0 takes the largest L admissible for m
  int n = 2;
  int d = 1;
  double tau = 2.0;
  double s = 0.5;
  double r = 0.5;
  double sigma = 1.0;  // convexity constant of the normal part
  ScheduleMode mode = ScheduleMode::practical;
  int k_base = 8;      // practical mode: K_{nu+1} = k_base * 2^nu
  std::array<double, 7> c{1, 1, 1, 1, 1, 1, 1};  // c0 .. c6
};

// Least integer m >= (L + sqrt(L^2 + 16L + 16)) / 4.
int m_from_L(double L);
// Largest L compatible with m.
double max_L_for_m(int m);

// Parameters of one step.
struct StepParams {
  int nu = 0;
  double r = 0.0, s = 0.0, gamma = 0.0, mu = 0.0, beta = 0.0, sigma = 0.0;
  double alpha = 0.0;  // s^{1/(m+1)}
  double K = 0.0;      // K_nu (K_0 = 0)
};

struct Schedule {
  ScheduleConfig config;
  int m = 0;
  double L = 0.0;
  double rho = 0.0;
  int eta = 0;
  double exponent = 0.0;  // (m+1)(2d)^m
  double gamma0 = 0.0, mu0 = 0.0, s0 = 0.0, r0 = 0.0, beta0 = 0.0, sigma0 = 0.0;
  double c0 = 1.0;        // max of c1..c6 and 1
  double mu_star = 0.0;

  int n() const { return config.n; }
  int d() const { return config.d; }
  double tau() const { return config.tau; }
  ScheduleMode mode() const { return config.mode; }

  // Parameters of step nu from the recursions.
  StepParams at(int nu) const;
  // K_{nu+1} from s_nu.
  double next_K(int nu, double s_nu) const;
  // Translation ball radius (s^{m-1} mu)^{1/L}.
  double ball_radius(const StepParams& p) const;
  // gamma^{(m+1)(2d)^m} s^m mu, the perturbation target at a step.
  double perturbation_bound(const StepParams& p) const;
};

Schedule init_schedule(const ScheduleConfig& config);

// x0 (1/2 + 1/2^{nu+1}), the common form of r, beta, gamma and sigma.
double halving_closed_form(double x0, int nu);
// s_nu = (1/8)^{(m+1)((1+1/(m+1))^nu - 1)} s_0^{(1+1/(m+1))^nu}.
double s_closed_form(const Schedule& sched, int nu);

struct HypothesisRow {
  std::string name;
  std::string formula;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool pass = false;
};

struct HypothesisReport {
  int step = 0;
  std::vector<HypothesisRow> rows;
  int pass_count() const;
  const HypothesisRow& get(const std::string& name) const;
};

// Measured quantities fed to the hypothesis checks.
struct HypothesisInputs {
  int nu = 0;
  double p0_norm_over_eps = 0.0;  // |P_0| / eps on D(s_0, r_0)
  double h_tilde_drift = 0.0;     // max_i |d_y^i (h_tilde - h_tilde_0)|
  double m_star = 0.0;            // max_i |d_y^i h_tilde_0|
};

// int_K^inf t^n e^{-a t} dt in closed form.
double tail_integral(int n, double a, double K);
// log of sum_{0<|k|<=K} |k|^{E tau + m} e^{-|k| delta / 8}, summed over |k|_1 shells.
double log_gamma_sum(const Schedule& sched, double K, double delta);
// Number of k in Z^n with |k|_1 = kappa.
double lattice_shell_count(int n, long long kappa);

HypothesisReport verify_hypotheses(const Schedule& sched, const HypothesisInputs& in);

}  // namespace kamdeg
