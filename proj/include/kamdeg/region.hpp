#pragma once

#include "kamdeg/common.hpp"
#include "kamdeg/schedule.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace kamdeg {

// Polynomial frequency map xi -> omega(xi) with exact derivatives.
class OmegaMap {
 public:
  struct Monomial {
    double coeff = 0.0;
    std::vector<int> powers;  // one exponent per parameter
  };

  OmegaMap() = default;
  OmegaMap(int params, std::vector<std::vector<Monomial>> components);

  static OmegaMap identity(int n);
  static OmegaMap constant(const Vec& omega, int params);

  int params() const { return params_; }
  int n() const { return static_cast<int>(comps_.size()); }
  const std::vector<std::vector<Monomial>>& components() const { return comps_; }

  Vec operator()(const Vec& xi) const;
  // Mixed partial derivative d^alpha omega at xi.
  Vec derivative(const Vec& xi, const std::vector<int>& alpha) const;

 private:
  int params_ = 0;
  std::vector<std::vector<Monomial>> comps_;
};

struct ParamBox {
  Vec lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
};
void check_box(const ParamBox& box);

// Hessian of g at the torus as a function of xi; empty means zero.
using HessianMap = std::function<Mat(const Vec&)>;

enum class ZoneKind { scalar, matrix };

// Parameters excised at a step because the small-divisor bound fails for k.
struct ResonanceZone {
  std::vector<int> k;
  int step = 0;
  ZoneKind kind = ZoneKind::scalar;
  std::function<bool(const Vec&)> contains;
};

ResonanceZone resonance_zone(const std::vector<int>& k, int step, const OmegaMap& omega, const HessianMap& hess,
                             double gamma, double tau, int m);

struct A1Witness {
  Vec xi;
  std::vector<int> k;
  double jet = 0.0;  // largest derivative magnitude found
};

struct A1Result {
  bool pass = true;
  double min_jet = 0.0;
  int points = 0;
  int directions = 0;
  std::vector<A1Witness> violations;
};

// Checks max_{|alpha|<=M} |d^alpha <k/|k|, omega(xi)>| >= 1e-8 on a grid of xi
// and all directions 0 < |k| <= k_dir.
A1Result check_A1(const ParamBox& box, const OmegaMap& omega, int M, int sample_grid, int k_dir = 8);

struct FilterResult {
  std::vector<Vec> samples;
  std::vector<std::uint8_t> survives;
  std::map<std::vector<int>, int> exclusions;  // failures per mode
  int excluded = 0;
  double fraction() const;
  double standard_error() const;
};

// Uniform samples of the box drawn from seed.
std::vector<Vec> sample_box(const ParamBox& box, int samples, std::uint64_t seed);

// Nonresonance over the window k_lo < |k| <= k_hi for each sample.
FilterResult filter_params(const std::vector<Vec>& samples, const OmegaMap& omega, const HessianMap& hess,
                           double gamma, double tau, int k_lo, int k_hi, int m);
FilterResult filter_params(const ParamBox& box, const OmegaMap& omega, const HessianMap& hess, double gamma,
                           double tau, int k_lo, int k_hi, int m, int samples, std::uint64_t seed);

struct MeasureRow {
  double epsilon = 0.0;
  double gamma0 = 0.0;
  int steps = 0;
  int samples = 0;
  int excluded = 0;
  double fraction = 0.0;
  double half_width = 0.0;  // 95% binomial half-width
  double reference = 0.0;   // sum over windows of gamma_nu^{1/(M+1)} |k|^{-tau/(M+1)}
  std::map<int, int> by_norm;  // |k| -> samples first excluded at that norm
};

// Accumulated exclusion through the given number of steps for each epsilon.
// The sample set is shared across epsilons.
std::vector<MeasureRow> measure_estimate(const ParamBox& box, const OmegaMap& omega, const HessianMap& hess,
                                         const ScheduleConfig& base, const std::vector<double>& epsilons,
                                         int steps, int samples, std::uint64_t seed, int M = 1);

}  // namespace kamdeg
