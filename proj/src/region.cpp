#include "kamdeg/region.hpp"

#include "kamdeg/homological.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace kamdeg {

OmegaMap::OmegaMap(int params, std::vector<std::vector<Monomial>> components)
    : params_(params), comps_(std::move(components)) {
  if (params_ < 1) throw std::invalid_argument("OmegaMap: need at least one parameter");
  for (const auto& comp : comps_)
    for (const Monomial& mono : comp) {
      if (static_cast<int>(mono.powers.size()) != params_)
        throw DimensionError("OmegaMap: monomial has " + std::to_string(mono.powers.size()) + " exponents, expected " +
                             std::to_string(params_));
      for (int p : mono.powers)
        if (p < 0) throw std::invalid_argument("OmegaMap: negative exponent");
    }
}

OmegaMap OmegaMap::identity(int n) {
  std::vector<std::vector<Monomial>> comps(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> p(n, 0);
    p[i] = 1;
    comps[i].push_back({1.0, p});
  }
  return OmegaMap(n, std::move(comps));
}

OmegaMap OmegaMap::constant(const Vec& omega, int params) {
  std::vector<std::vector<Monomial>> comps(omega.size());
  for (int i = 0; i < omega.size(); ++i) comps[i].push_back({omega[i], std::vector<int>(params, 0)});
  return OmegaMap(params, std::move(comps));
}

Vec OmegaMap::operator()(const Vec& xi) const { return derivative(xi, std::vector<int>(params_, 0)); }

Vec OmegaMap::derivative(const Vec& xi, const std::vector<int>& alpha) const {
  if (xi.size() != params_ || static_cast<int>(alpha.size()) != params_)
    throw DimensionError("OmegaMap: parameter vector has length " + std::to_string(xi.size()) + ", expected " +
                         std::to_string(params_));
  Vec out = Vec::Zero(n());
  for (int i = 0; i < n(); ++i) {
    for (const Monomial& mono : comps_[i]) {
      double v = mono.coeff;
      for (int j = 0; j < params_ && v != 0.0; ++j) {
        const int p = mono.powers[j], a = alpha[j];
        if (a > p) {
          v = 0.0;
          break;
        }
        for (int q = 0; q < a; ++q) v *= p - q;
        if (p - a > 0) v *= std::pow(xi[j], p - a);
      }
      out[i] += v;
    }
  }
  return out;
}

double ParamBox::volume() const { return (hi - lo).prod(); }

void check_box(const ParamBox& box) {
  if (box.lo.size() == 0 || box.lo.size() != box.hi.size())
    throw DimensionError("parameter box bounds must be nonempty and of equal length");
  for (int i = 0; i < box.lo.size(); ++i)
    if (!(box.lo[i] < box.hi[i])) throw std::invalid_argument("parameter box needs lo < hi componentwise");
}

namespace {

int l1(const std::vector<int>& k) {
  int s = 0;
  for (int v : k) s += std::abs(v);
  return s;
}

// One representative per +-k pair, sorted by |k|.
std::vector<std::vector<int>> canonical_modes(int n, int k_lo, int k_hi) {
  std::vector<std::vector<int>> out;
  if (k_hi <= k_lo || k_hi < 1) return out;
  for (auto& k : modes_in_ball(n, k_hi)) {
    if (l1(k) <= k_lo) continue;
    const auto first = std::find_if(k.begin(), k.end(), [](int v) { return v != 0; });
    if (*first > 0) out.push_back(k);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return l1(a) < l1(b); });
  return out;
}

struct ModeChecker {
  int n = 0;
  double gamma = 0.0, tau = 0.0;
  int m = 0;
  std::vector<DegreeClass> classes;

  // True when k violates a small-divisor bound at (omega, hess); kind reports which.
  bool resonant(const std::vector<int>& k, const Vec& omega, const Mat& hess, ZoneKind* kind = nullptr) const {
    const int kn = l1(k);
    const double bound = gamma / std::pow(static_cast<double>(kn), tau);
    double kw = 0.0;
    for (int i = 0; i < n; ++i) kw += k[i] * omega[i];
    if (!(std::abs(kw) > bound)) {
      if (kind) *kind = ZoneKind::scalar;
      return true;
    }
    if (hess.size() == 0 || hess.isZero(0.0)) return false;
    for (const DegreeClass& cls : classes) {
      const CMat a = static_cast<double>(kn) * build_divisor_matrix(k, omega, hess, cls);
      Eigen::JacobiSVD<CMat> svd(a);
      const double smin = svd.singularValues()(svd.singularValues().size() - 1);
      if (!(smin > bound)) {
        if (kind) *kind = ZoneKind::matrix;
        return true;
      }
    }
    return false;
  }
};

ModeChecker make_checker(int n, const HessianMap& hess, double gamma, double tau, int m) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("nonresonance: gamma must be >= 0");
  ModeChecker c{n, gamma, tau, m, {}};
  if (hess) c.classes = degree_classes(n, m, 1);
  return c;
}

Mat hessian_at(const HessianMap& hess, const Vec& xi) { return hess ? hess(xi) : Mat(); }

}  // namespace

ResonanceZone resonance_zone(const std::vector<int>& k, int step, const OmegaMap& omega, const HessianMap& hess,
                             double gamma, double tau, int m) {
  const ModeChecker checker = make_checker(omega.n(), hess, gamma, tau, m);
  ResonanceZone zone;
  zone.k = k;
  zone.step = step;
  zone.kind = hess ? ZoneKind::matrix : ZoneKind::scalar;
  zone.contains = [checker, k, omega, hess](const Vec& xi) {
    return checker.resonant(k, omega(xi), hessian_at(hess, xi));
  };
  return zone;
}

A1Result check_A1(const ParamBox& box, const OmegaMap& omega, int M, int sample_grid, int k_dir) {
  check_box(box);
  if (box.dim() != omega.params()) throw DimensionError("check_A1: box and frequency map dimensions differ");
  if (M < 0 || sample_grid < 1 || k_dir < 1) throw std::invalid_argument("check_A1: need M >= 0, grid >= 1, k_dir >= 1");
  const int p = box.dim(), n = omega.n();
  std::vector<std::vector<int>> alphas;
  for (int order = 0; order <= M; ++order)
    for (auto& a : compositions(p, order)) alphas.push_back(a);
  const auto dirs = canonical_modes(n, 0, k_dir);

  A1Result res;
  res.min_jet = std::numeric_limits<double>::infinity();
  res.directions = static_cast<int>(dirs.size());
  std::vector<int> counter(p, 0);
  while (true) {
    Vec xi(p);
    for (int j = 0; j < p; ++j)
      xi[j] = sample_grid == 1 ? 0.5 * (box.lo[j] + box.hi[j])
                               : box.lo[j] + (box.hi[j] - box.lo[j]) * counter[j] / (sample_grid - 1);
    std::vector<Vec> jets;
    for (const auto& a : alphas) jets.push_back(omega.derivative(xi, a));
    for (const auto& k : dirs) {
      const double kn = l1(k);
      double jet = 0.0;
      for (const Vec& dv : jets) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += k[i] / kn * dv[i];
        jet = std::max(jet, std::abs(v));
      }
      res.min_jet = std::min(res.min_jet, jet);
      if (jet < 1e-8) {
        res.pass = false;
        if (res.violations.size() < 20) res.violations.push_back({xi, k, jet});
      }
    }
    ++res.points;
    int j = 0;
    while (j < p && ++counter[j] == sample_grid) counter[j++] = 0;
    if (j == p) break;
  }
  return res;
}

double FilterResult::fraction() const { return samples.empty() ? 0.0 : static_cast<double>(excluded) / samples.size(); }

double FilterResult::standard_error() const {
  if (samples.empty()) return 0.0;
  const double f = fraction();
  return std::sqrt(f * (1.0 - f) / samples.size());
}

std::vector<Vec> sample_box(const ParamBox& box, int samples, std::uint64_t seed) {
  check_box(box);
  if (samples < 1) throw std::invalid_argument("sample_box: samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec> out(samples, Vec(box.dim()));
  for (Vec& xi : out)
    for (int j = 0; j < box.dim(); ++j) xi[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * unit(rng);
  return out;
}

FilterResult filter_params(const std::vector<Vec>& samples, const OmegaMap& omega, const HessianMap& hess,
                           double gamma, double tau, int k_lo, int k_hi, int m) {
  const ModeChecker checker = make_checker(omega.n(), hess, gamma, tau, m);
  const auto modes = canonical_modes(omega.n(), k_lo, k_hi);
  FilterResult res;
  res.samples = samples;
  res.survives.assign(samples.size(), 1);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vec w = omega(samples[i]);
    const Mat h = hessian_at(hess, samples[i]);
    for (const auto& k : modes) {
      if (checker.resonant(k, w, h)) {
        res.survives[i] = 0;
        ++res.exclusions[k];
      }
    }
    if (!res.survives[i]) ++res.excluded;
  }
  return res;
}

FilterResult filter_params(const ParamBox& box, const OmegaMap& omega, const HessianMap& hess, double gamma,
                           double tau, int k_lo, int k_hi, int m, int samples, std::uint64_t seed) {
  if (samples < 1000) throw std::invalid_argument("filter_params: samples must be >= 1000");
  if (box.dim() != omega.params()) throw DimensionError("filter_params: box and frequency map dimensions differ");
  return filter_params(sample_box(box, samples, seed), omega, hess, gamma, tau, k_lo, k_hi, m);
}

std::vector<MeasureRow> measure_estimate(const ParamBox& box, const OmegaMap& omega, const HessianMap& hess,
                                         const ScheduleConfig& base, const std::vector<double>& epsilons,
                                         int steps, int samples, std::uint64_t seed, int M) {
  if (steps < 1) throw std::invalid_argument("measure_estimate: steps must be >= 1");
  if (samples < 1) throw std::invalid_argument("measure_estimate: samples must be >= 1");
  if (box.dim() != omega.params()) throw DimensionError("measure_estimate: box and frequency map dimensions differ");
  const std::vector<Vec> pts = sample_box(box, samples, seed);
  std::vector<MeasureRow> rows;
  for (double eps : epsilons) {
    ScheduleConfig cfg = base;
    cfg.epsilon = eps;
    cfg.n = omega.n();
    const Schedule sc = init_schedule(cfg);
    struct Window {
      ModeChecker checker;
      std::vector<std::vector<int>> modes;
    };
    std::vector<Window> windows;
    MeasureRow row;
    row.epsilon = eps;
    row.gamma0 = sc.gamma0;
    row.steps = steps;
    row.samples = samples;
    for (int nu = 0; nu < steps; ++nu) {
      const StepParams cur = sc.at(nu), nxt = sc.at(nu + 1);
      if (nxt.K > 4096.0) throw std::invalid_argument("measure_estimate: window too large; use practical mode");
      Window w{make_checker(omega.n(), hess, cur.gamma, sc.tau(), sc.m),
               canonical_modes(omega.n(), static_cast<int>(cur.K), static_cast<int>(nxt.K))};
      for (const auto& k : w.modes)
        row.reference += 2.0 * std::pow(cur.gamma, 1.0 / (M + 1)) / std::pow(l1(k), sc.tau() / (M + 1));
      windows.push_back(std::move(w));
    }
    for (const Vec& xi : pts) {
      const Vec w = omega(xi);
      const Mat h = hessian_at(hess, xi);
      bool hit = false;
      for (const Window& win : windows) {
        for (const auto& k : win.modes) {
          if (win.checker.resonant(k, w, h)) {
            ++row.by_norm[l1(k)];
            hit = true;
            break;
          }
        }
        if (hit) break;
      }
      row.excluded += hit;
    }
    row.fraction = static_cast<double>(row.excluded) / samples;
    row.half_width = 1.96 * std::sqrt(row.fraction * (1.0 - row.fraction) / samples);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace kamdeg
