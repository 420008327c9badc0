#include "kamdeg/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kamdeg {

std::string to_string(ScheduleMode mode) { return mode == ScheduleMode::paper ? "paper" : "practical"; }

ScheduleMode parse_schedule_mode(const std::string& text) {
  if (text == "paper") return ScheduleMode::paper;
  if (text == "practical") return ScheduleMode::practical;
  throw std::invalid_argument("unknown schedule mode '" + text + "' (expected paper or practical)");
}

int m_from_L(double L) {
  if (!(L >= 2.0)) throw std::invalid_argument("m_from_L: L must be >= 2");
  return static_cast<int>(std::ceil((L + std::sqrt(L * L + 16.0 * L + 16.0)) / 4.0 - 1e-12));
}

double max_L_for_m(int m) { return 2.0 * (m * static_cast<double>(m) - 1.0) / (m + 2.0); }

namespace {

double lower_m_bound(double L) { return (L + std::sqrt(L * L + 16.0 * L + 16.0)) / 4.0; }

double log_factorial(double n) { return std::lgamma(n + 1.0); }

double log_sum_exp(const std::vector<double>& logs) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logs) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : logs) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

}  // namespace

Schedule init_schedule(const ScheduleConfig& cfg) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw std::invalid_argument("init_schedule: need 0 < epsilon < 1");
  if (cfg.n < 1 || cfg.d < 1) throw std::invalid_argument("init_schedule: need n >= 1 and d >= 1");
  if (!(cfg.tau > cfg.n - 1)) throw std::invalid_argument("init_schedule: need tau > n - 1");
  if (!(cfg.s > 0.0 && cfg.s < 1.0) || !(cfg.r > 0.0 && cfg.r < 1.0))
    throw std::invalid_argument("init_schedule: need 0 < s, r < 1");
  if (!(cfg.sigma > 0.0)) throw std::invalid_argument("init_schedule: need sigma > 0");
  if (cfg.k_base < 1) throw std::invalid_argument("init_schedule: k_base must be >= 1");

  Schedule sc;
  sc.config = cfg;
  if (cfg.m == 0 && cfg.L == 0.0) throw std::invalid_argument("init_schedule: give m or L");
  if (cfg.m == 0) {
    sc.L = cfg.L;
    sc.m = m_from_L(cfg.L);
  } else {
    sc.m = cfg.m;
    sc.L = cfg.L == 0.0 ? max_L_for_m(cfg.m) : cfg.L;
    if (!(sc.L >= 2.0)) throw std::invalid_argument("init_schedule: m = " + std::to_string(cfg.m) + " admits no L >= 2");
    if (sc.m < lower_m_bound(sc.L) - 1e-12)
      throw std::invalid_argument("init_schedule: m = " + std::to_string(sc.m) + " is below the bound " +
                                  format_double(lower_m_bound(sc.L)) + " for L = " + format_double(sc.L));
  }
  const int m = sc.m;
  sc.rho = 1.0 / (2.0 * (m + 1));
  sc.eta = static_cast<int>(std::floor(std::log(2.0) / std::log1p(sc.rho))) + 1;
  sc.exponent = (m + 1) * std::pow(2.0 * cfg.d, m);
  const double eps = cfg.epsilon;
  sc.gamma0 = std::pow(eps, 1.0 / (2.0 * m * sc.exponent));
  sc.mu0 = std::pow(eps, 1.0 / (8.0 * (m + 1)));
  sc.s0 = cfg.s * std::pow(eps, 1.0 / (8.0 * (m + 1))) * std::pow(sc.gamma0, sc.exponent);
  sc.r0 = cfg.r;
  sc.beta0 = cfg.s;
  sc.sigma0 = cfg.sigma;
  sc.c0 = std::max(1.0, *std::max_element(cfg.c.begin() + 1, cfg.c.end()));
  sc.mu_star = cfg.s * cfg.s * std::pow(eps, 1.0 / (4.0 * (m + 1))) * std::pow(sc.gamma0, 2.0 * sc.exponent);
  return sc;
}

double Schedule::next_K(int nu, double s_nu) const {
  if (config.mode == ScheduleMode::practical) return config.k_base * std::ldexp(1.0, nu);
  return std::pow(std::floor(std::log(1.0 / s_nu)) + 1.0, 3.0 * eta);
}

StepParams Schedule::at(int nu) const {
  if (nu < 0) throw std::invalid_argument("Schedule::at: nu must be >= 0");
  StepParams p;
  p.r = r0;
  p.beta = beta0;
  p.gamma = gamma0;
  p.sigma = sigma0;
  p.s = s0;
  p.mu = mu0;
  p.K = 0.0;
  for (int i = 0; i < nu; ++i) {
    p.K = next_K(i, p.s);
    p.r = p.r / 2.0 + r0 / 4.0;
    p.beta = p.beta / 2.0 + beta0 / 4.0;
    p.gamma = p.gamma / 2.0 + gamma0 / 4.0;
    p.sigma = p.sigma / 2.0 + sigma0 / 4.0;
    p.mu = std::pow(8.0, m) * c0 * p.mu * std::pow(p.s, rho);
    p.s = std::pow(p.s, 1.0 / (m + 1)) * p.s / 8.0;
  }
  p.nu = nu;
  p.alpha = std::pow(p.s, 1.0 / (m + 1));
  return p;
}

double Schedule::ball_radius(const StepParams& p) const { return std::pow(std::pow(p.s, m - 1) * p.mu, 1.0 / L); }

double Schedule::perturbation_bound(const StepParams& p) const {
  return std::pow(p.gamma, exponent) * std::pow(p.s, m) * p.mu;
}

double halving_closed_form(double x0, int nu) { return x0 * (0.5 + std::ldexp(1.0, -(nu + 1))); }

double s_closed_form(const Schedule& sched, int nu) {
  const double q = std::pow(1.0 + 1.0 / (sched.m + 1), nu);
  return std::pow(1.0 / 8.0, (sched.m + 1) * (q - 1.0)) * std::pow(sched.s0, q);
}

int HypothesisReport::pass_count() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const HypothesisRow& r) { return r.pass; }));
}

const HypothesisRow& HypothesisReport::get(const std::string& name) const {
  for (const HypothesisRow& r : rows)
    if (r.name == name) return r;
  throw std::out_of_range("no hypothesis named " + name);
}

double tail_integral(int n, double a, double K) {
  if (n < 0 || !(a > 0.0)) throw std::invalid_argument("tail_integral: need n >= 0 and a > 0");
  const double lead = log_factorial(n) - (n + 1) * std::log(a);
  if (K <= 0.0) return std::exp(lead);
  std::vector<double> logs;
  for (int j = 0; j <= n; ++j) logs.push_back(j * std::log(a * K) - log_factorial(j));
  return std::exp(lead - a * K + log_sum_exp(logs));
}

double lattice_shell_count(int n, long long kappa) {
  if (kappa == 0) return 1.0;
  double total = 0.0;
  for (int i = 1; i <= n && i <= kappa; ++i) {
    const double log_binom_n = log_factorial(n) - log_factorial(i) - log_factorial(n - i);
    const double km1 = static_cast<double>(kappa - 1);
    const double log_binom_k = log_factorial(km1) - log_factorial(i - 1) - log_factorial(km1 - (i - 1));
    total += std::exp(i * std::log(2.0) + log_binom_n + log_binom_k);
  }
  return std::round(total);
}

double log_gamma_sum(const Schedule& sched, double K, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("log_gamma_sum: delta must be > 0");
  const double p = sched.exponent * sched.tau() + sched.m;
  const double a = delta / 8.0;
  const double peak = (p + sched.n()) / a;
  const double kmax = std::floor(K);
  double acc = -std::numeric_limits<double>::infinity();
  for (double kappa = 1.0; kappa <= kmax; kappa += 1.0) {
    const double term = std::log(lattice_shell_count(sched.n(), static_cast<long long>(kappa))) +
                        p * std::log(kappa) - a * kappa;
    acc = acc == -std::numeric_limits<double>::infinity()
              ? term
              : std::max(acc, term) + std::log1p(std::exp(-std::abs(acc - term)));
    // Past the peak the terms decay at least geometrically.
    if (kappa > 2.0 * peak && term < acc - 60.0) break;
  }
  return acc;
}

namespace {

HypothesisRow make_row(const std::string& name, const std::string& formula, double lhs, double rhs) {
  HypothesisRow row{name, formula, lhs, rhs, rhs - lhs, false};
  row.pass = row.margin > 0.0;
  return row;
}

}  // namespace

HypothesisReport verify_hypotheses(const Schedule& sc, const HypothesisInputs& in) {
  const int m = sc.m, n = sc.n();
  const double tau = sc.tau();
  const StepParams cur = sc.at(in.nu);
  const StepParams nxt = sc.at(in.nu + 1);
  const StepParams prv = sc.at(std::max(0, in.nu - 1));
  const auto& c = sc.config.c;
  const double E = sc.exponent;
  const double s = cur.s, mu = cur.mu, Kp = nxt.K;
  const double dr = cur.r - nxt.r;
  const double gam = std::exp(log_gamma_sum(sc, Kp, dr));

  HypothesisReport rep;
  rep.step = in.nu;
  auto& rows = rep.rows;
  rows.push_back(make_row("H0", "eps^{m/(8(m+1))} |P|/s^m <= 1",
                          std::pow(sc.config.epsilon, m / (8.0 * (m + 1))) * in.p0_norm_over_eps /
                              std::pow(sc.config.s, m),
                          1.0));
  rows.push_back(make_row("H1", "int_{K+}^inf t^n e^{-t (r-r+)/16} dt <= s", tail_integral(n, dr / 16.0, Kp), s));
  rows.push_back(make_row("H2", "max_i |d_y^i (h~ - h~0)| <= s0^{1/2}", in.h_tilde_drift, std::sqrt(sc.s0)));
  rows.push_back(make_row("H3", "4 s < (gamma - gamma+) / ((M*+2) K+^{tau+1})", 4.0 * s,
                          (cur.gamma - nxt.gamma) / ((in.m_star + 2.0) * std::pow(Kp, tau + 1.0))));
  rows.push_back(make_row("H4", "c3 (s-^{m-1} mu-)^{1/L} < alpha s / 8", c[3] * sc.ball_radius(prv),
                          cur.alpha * s / 8.0));
  rows.push_back(make_row("H5", "c4 mu Gamma < (r - r+)/4", c[4] * mu * gam, dr / 4.0));
  rows.push_back(make_row("H6", "c4 s^{m-1} mu Gamma < alpha s / 8", c[4] * std::pow(s, m - 1) * mu * gam,
                          cur.alpha * s / 8.0));
  rows.push_back(make_row("H7", "c3 mu Gamma + c3 (s^{m-1} mu)^{1/L} < beta - beta+",
                          c[3] * mu * gam + c[3] * sc.ball_radius(cur), cur.beta - nxt.beta));
  rows.push_back(make_row("H8", "3 s K+^{2tau+1} <= min{(gamma-gamma+)/gamma0, (gamma^2-gamma+^2)/gamma0^2}",
                          3.0 * s * std::pow(Kp, 2.0 * tau + 1.0),
                          std::min((cur.gamma - nxt.gamma) / sc.gamma0,
                                   (cur.gamma * cur.gamma - nxt.gamma * nxt.gamma) / (sc.gamma0 * sc.gamma0))));
  const double ge = std::pow(cur.gamma, E);
  const double delta = std::pow(cur.alpha, m + 1) * std::pow(s, m + 1) * mu * (std::pow(s, m - 2) * mu * gam * gam + gam) +
                       ge * std::pow(s, 2 * m - 2) * mu * mu * gam + ge * std::pow(s, m + 1) * mu * sc.c0;
  rows.push_back(make_row("H9", "c6 Delta <= gamma+^E s+^m mu+", c[6] * delta, sc.perturbation_bound(nxt)));
  return rep;
}

}  // namespace kamdeg
