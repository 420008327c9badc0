#include "kamdeg/flow.hpp"

#include "kamdeg/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace kamdeg {

namespace {

bool canonical_mode(const MultiIndex& idx, int n) {
  for (int i = 0; i < n; ++i)
    if (idx.v[i] != 0) return idx.v[i] > 0;
  return true;
}

void check_state(const Vec& state, int n, int d, const char* who) {
  if (state.size() != 2 * n + 2 * d)
    throw DimensionError(std::string(who) + ": state has length " + std::to_string(state.size()) + ", expected " +
                         std::to_string(2 * n + 2 * d));
}

}  // namespace

SeriesEvaluator::SeriesEvaluator(const TFSeries& h) : n_(h.n()), d_(h.d()) {
  double scale = 0.0;
  for (const Term& t : h.terms()) scale = std::max(scale, std::abs(t.c));
  if (reality_defect(h) > 1e-12 * scale)
    throw std::invalid_argument("SeriesEvaluator: series is not real-valued");

  const int vars = n_ + 2 * d_;
  std::map<std::vector<int>, int> group_of, mode_of;
  for (const Term& t : h.terms()) {
    if (!canonical_mode(t.idx, n_)) continue;
    std::vector<int> k(n_), powers(vars);
    bool zero = true;
    for (int i = 0; i < n_; ++i) {
      k[i] = t.idx.v[i];
      zero = zero && k[i] == 0;
      kmax_ = std::max(kmax_, std::abs(k[i]));
    }
    for (int a = 0; a < vars; ++a) {
      powers[a] = t.idx.v[n_ + a];
      max_power_ = std::max(max_power_, powers[a]);
    }
    auto [mit, mnew] = mode_of.try_emplace(k, static_cast<int>(modes_.size()));
    if (mnew) modes_.push_back(k);
    auto [git, gnew] = group_of.try_emplace(powers, static_cast<int>(groups_.size()));
    if (gnew) groups_.push_back({powers, {}, {}});
    // Every value is 2 Re(sum); the real zero mode enters with half weight.
    groups_[git->second].slots.push_back(mit->second);
    groups_[git->second].coeffs.push_back(zero ? Complex(0.5 * t.c.real(), 0.0) : t.c);
  }
  for (const auto& k : modes_) mode_k_.insert(mode_k_.end(), k.begin(), k.end());
}

double SeriesEvaluator::value(const Vec& state) const {
  Vec g;
  return value_and_gradient(state, g);
}

double SeriesEvaluator::value_and_gradient(const Vec& state, Vec& grad) const {
  check_state(state, n_, d_, "SeriesEvaluator");
  const int vars = n_ + 2 * d_;
  grad.setZero(n_ + vars);

  // e^{i p x_i} for |p| <= kmax.
  const int width = 2 * kmax_ + 1;
  thread_local std::vector<Complex> phase, modes;
  thread_local std::vector<double> powers, sk;
  phase.resize(static_cast<std::size_t>(n_ * width));
  for (int i = 0; i < n_; ++i) {
    Complex* row = phase.data() + i * width + kmax_;
    const Complex base(std::cos(state[i]), std::sin(state[i]));
    row[0] = 1.0;
    for (int p = 1; p <= kmax_; ++p) {
      const Complex q = row[p - 1];
      row[p] = Complex(q.real() * base.real() - q.imag() * base.imag(), q.real() * base.imag() + q.imag() * base.real());
      row[-p] = std::conj(row[p]);
    }
  }
  modes.resize(modes_.size());
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    Complex e = 1.0;
    for (int i = 0; i < n_; ++i)
      if (modes_[m][i] != 0) {
        const Complex p = phase[i * width + kmax_ + modes_[m][i]];
        e = Complex(e.real() * p.real() - e.imag() * p.imag(), e.real() * p.imag() + e.imag() * p.real());
      }
    modes[m] = e;
  }

  // Powers of y and z.
  const int pw = max_power_ + 1;
  powers.resize(static_cast<std::size_t>(vars * pw));
  for (int a = 0; a < vars; ++a) {
    double* row = powers.data() + a * pw;
    row[0] = 1.0;
    for (int p = 1; p < pw; ++p) row[p] = row[p - 1] * state[n_ + a];
  }

  double value = 0.0;
  sk.resize(n_);  // imaginary parts of sum c e^{ikx} k_i
  for (const Group& g : groups_) {
    double sre = 0.0;
    std::fill(sk.begin(), sk.end(), 0.0);
    for (std::size_t t = 0; t < g.slots.size(); ++t) {
      const int slot = g.slots[t];
      const Complex c = g.coeffs[t], e = modes[slot];
      // Plain products avoid the library's inf/nan handling in complex multiply.
      const double re = c.real() * e.real() - c.imag() * e.imag();
      const double im = c.real() * e.imag() + c.imag() * e.real();
      sre += re;
      const double* k = mode_k_.data() + static_cast<std::size_t>(slot) * n_;
      for (int i = 0; i < n_; ++i) sk[i] += im * k[i];
    }
    double mono = 1.0;
    for (int a = 0; a < vars; ++a) mono *= powers[a * pw + g.powers[a]];
    const double re = 2.0 * sre;
    value += re * mono;
    for (int i = 0; i < n_; ++i) grad[i] -= 2.0 * sk[i] * mono;
    for (int a = 0; a < vars; ++a) {
      const int e = g.powers[a];
      if (e == 0) continue;
      double dm = e * powers[a * pw + e - 1];
      for (int b = 0; b < vars; ++b)
        if (b != a) dm *= powers[b * pw + g.powers[b]];
      grad[n_ + a] += re * dm;
    }
  }
  return value;
}

Vec SeriesEvaluator::field(const Vec& state) const {
  Vec g;
  value_and_gradient(state, g);
  Vec f(g.size());
  for (int i = 0; i < n_; ++i) {
    f[i] = g[n_ + i];
    f[n_ + i] = -g[i];
  }
  const int zu = 2 * n_, zv = 2 * n_ + d_;
  for (int a = 0; a < d_; ++a) {
    f[zu + a] = g[zv + a];
    f[zv + a] = -g[zu + a];
  }
  return f;
}

namespace {

Vec rk4_step(const SeriesEvaluator& ev, const Vec& s, double h) {
  const Vec k1 = ev.field(s);
  const Vec k2 = ev.field(s + 0.5 * h * k1);
  const Vec k3 = ev.field(s + 0.5 * h * k2);
  const Vec k4 = ev.field(s + h * k3);
  return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// stableNorm: deviations far below 1e-154 would underflow when squared.
double yz_norm(const Vec& s, int n) { return s.tail(s.size() - n).stableNorm(); }

Vec reduced(Vec s, int n) {
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < n; ++i) {
    s[i] = std::fmod(s[i], two_pi);
    if (s[i] < 0.0) s[i] += two_pi;
  }
  return s;
}

}  // namespace

Trajectory integrate_flow(const TFSeries& h, const Vec& initial, double T, double step, const FlowOptions& opts) {
  return integrate_flow(SeriesEvaluator(h), initial, T, step, opts);
}

Trajectory integrate_flow(const SeriesEvaluator& ev, const Vec& initial, double T, double step,
                          const FlowOptions& opts) {
  if (!(T > 0.0) || !(step > 0.0)) throw std::invalid_argument("integrate_flow: T and step must be positive");
  if (opts.record_every < 0 || opts.escape_radius < 0.0)
    throw std::invalid_argument("integrate_flow: negative option");
  check_state(initial, ev.n(), ev.d(), "integrate_flow");
  if (!initial.allFinite()) throw FlowError("integrate_flow: initial state is not finite");

  const long steps = std::max(1L, static_cast<long>(std::ceil(T / step - 1e-9)));
  const double h = T / static_cast<double>(steps);
  Trajectory out;
  Vec s = initial;
  const double e0 = ev.value(s);
  out.times.push_back(0.0);
  out.states.push_back(reduced(s, ev.n()));
  out.energy.push_back(e0);
  out.max_yz = yz_norm(s, ev.n());
  long done = 0;
  for (long i = 1; i <= steps; ++i) {
    Vec next = rk4_step(ev, s, h);
    const bool finite = next.allFinite();
    if (opts.escape_radius > 0.0 && (!finite || yz_norm(next, ev.n()) > opts.escape_radius)) {
      if (finite) {
        s = std::move(next);
        done = i;
      }
      out.escaped = true;
      break;
    }
    if (!finite)
      throw FlowError("integrate_flow: state became non-finite at t = " + format_double(static_cast<double>(i) * h));
    s = std::move(next);
    done = i;
    out.max_yz = std::max(out.max_yz, yz_norm(s, ev.n()));
    if (opts.record_every > 0 && i % opts.record_every == 0 && i != steps) {
      out.times.push_back(static_cast<double>(i) * h);
      out.states.push_back(reduced(s, ev.n()));
      out.energy.push_back(ev.value(s));
    }
  }
  out.t_end = static_cast<double>(done) * h;
  out.last = s;
  const double e1 = ev.value(s);
  if (done > 0 && out.times.back() < out.t_end) {
    out.times.push_back(out.t_end);
    out.states.push_back(reduced(s, ev.n()));
    out.energy.push_back(e1);
  }
  out.energy_drift = std::abs(e1 - e0);
  if (out.t_end > 0.0) out.drift_constant = out.energy_drift / (h * h * h * h * out.t_end);
  if (!out.escaped) out.max_yz = std::max(out.max_yz, yz_norm(s, ev.n()));
  return out;
}

void write_trajectory(std::ostream& os, const Trajectory& traj) {
  os << "# t state... H\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << format_double(traj.times[i]);
    for (Eigen::Index a = 0; a < traj.states[i].size(); ++a) os << '\t' << format_double(traj.states[i][a]);
    os << '\t' << format_double(traj.energy[i]) << '\n';
  }
}

Vec time_one_map(const SeriesEvaluator& f, const Vec& state, double step) {
  return integrate_flow(f, state, 1.0, step).last;
}

TorusCheck torus_deviation(const TFSeries& h_final, const Vec& omega, double T, double step, int n_angles) {
  if (n_angles < 1) throw std::invalid_argument("torus_deviation: n_angles must be >= 1");
  const int n = h_final.n(), d = h_final.d();
  if (omega.size() != n)
    throw DimensionError("torus_deviation: omega has length " + std::to_string(omega.size()) + ", series has n = " +
                         std::to_string(n));
  const SeriesEvaluator ev(h_final);
  // Kronecker sequence with the fractional parts of sqrt(prime) as rates.
  static constexpr double kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  TorusCheck out;
  for (int t = 0; t < n_angles; ++t) {
    Vec s = Vec::Zero(2 * n + 2 * d);
    for (int i = 0; i < n; ++i) {
      const double rate = std::sqrt(kPrimes[i % 16]);
      const double frac = std::fmod(t * (rate - std::floor(rate)) + 0.5 / n_angles * (i + 1), 1.0);
      s[i] = 2.0 * std::numbers::pi * frac;
    }
    const Trajectory traj = integrate_flow(ev, s, T, step);
    out.deviation = std::max(out.deviation, traj.max_yz);
    out.energy_drift = std::max(out.energy_drift, traj.energy_drift);
    out.x_advance_error =
        std::max(out.x_advance_error, (traj.last.head(n) - s.head(n) - omega * T).lpNorm<Eigen::Infinity>());
    ++out.trajectories;
  }
  return out;
}

TFSeries counterexample_hamiltonian(double epsilon, double omega) {
  const Caps caps = Caps::ample();
  std::vector<Term> terms = {{make_index({0}, {1}, {0, 0}), omega},
                             {make_index({0}, {0}, {3, 0}), 1.0 / 3.0},
                             {make_index({0}, {0}, {0, 3}), 1.0 / 3.0},
                             {make_index({0}, {0}, {1, 0}), epsilon * epsilon}};
  return TFSeries::from_terms(1, 1, caps, std::move(terms));
}

CounterexampleReport prop2_check(double epsilon, double omega, double T, double step) {
  if (!(T > 0.0) || !(step > 0.0)) throw std::invalid_argument("prop2_check: T and step must be positive");
  CounterexampleReport rep;
  rep.epsilon = epsilon;
  rep.T = T;
  const double eps2 = epsilon * epsilon;
  if (eps2 == 0.0) {
    rep.in_scope = false;
    rep.summary = "out of scope: eps = 0 leaves the invariant torus z = 0 in place";
    return rep;
  }
  const TFSeries h = counterexample_hamiltonian(epsilon, omega);

  // v' = -H_u. Bound its supremum from the coefficients: a constant plus
  // z-only terms with even exponents and nonpositive coefficients.
  const TFSeries vdot = -partial_derivative(h, Var::z(0));
  double constant = 0.0;
  bool bounded = true;
  for (const Term& t : vdot.terms()) {
    const bool z_only = t.idx.v[0] == 0 && t.idx.v[1] == 0;
    const bool even = t.idx.v[2] % 2 == 0 && t.idx.v[3] % 2 == 0;
    const bool is_const = z_only && t.idx.v[2] == 0 && t.idx.v[3] == 0;
    if (is_const) {
      constant += t.c.real();
    } else if (!(z_only && even && t.c.real() <= 0.0 && t.c.imag() == 0.0)) {
      bounded = false;
    }
  }
  rep.symbolic_sup = bounded ? constant : std::numeric_limits<double>::infinity();
  rep.symbolic_ok = rep.symbolic_sup <= -eps2 * (1.0 - 1e-12);

  // Scan of u^2 + eps^2 on [-10, 10], grid includes u = 0.
  rep.scan_min = std::numeric_limits<double>::infinity();
  for (int i = -10000; i <= 10000; ++i) {
    const double u = i * 1e-3;
    rep.scan_min = std::min(rep.scan_min, u * u + eps2);
  }
  rep.root_free = rep.scan_min > 0.0;

  const SeriesEvaluator ev(h);
  FlowOptions opts;
  opts.escape_radius = 1e6;
  opts.record_every = std::max(1, static_cast<int>(std::lround(0.1 / step)));
  const double offsets[][2] = {{0.0, 0.0}, {0.05, 0.05}, {0.05, -0.05}, {-0.05, 0.05}, {-0.05, -0.05}};
  rep.drift_certified = true;
  rep.slope_ok = true;
  for (const auto& off : offsets) {
    Vec s(4);
    s << 0.0, 0.0, off[0], off[1];
    const Trajectory traj = integrate_flow(ev, s, T, step, opts);
    const double v0 = s[3], v1 = traj.last[3];
    const bool ok = v1 <= v0 - eps2 * T;
    rep.drift_certified = rep.drift_certified && ok;
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
      const double dv = traj.states[i][3] - traj.states[i - 1][3];
      const double dt = traj.times[i] - traj.times[i - 1];
      if (!(dv <= -eps2 * dt * (1.0 - 1e-9))) rep.slope_ok = false;
    }
    if (rep.trajectories == 0) {
      rep.v0 = v0;
      rep.v_end = v1;
      rep.t_end = traj.t_end;
      rep.escaped = traj.escaped;
    }
    ++rep.trajectories;
  }

  std::ostringstream os;
  os << "v' <= " << format_double(rep.symbolic_sup) << (rep.symbolic_ok ? " (<= -eps^2)" : " (bound not shown)")
     << "; min u^2+eps^2 on [-10,10] = " << format_double(rep.scan_min) << "; v(" << format_double(rep.t_end)
     << ") - v(0) = " << format_double(rep.v_end - rep.v0) << (rep.escaped ? " (escaped before T)" : "")
     << "; certified v(T) <= v(0) - eps^2 T: " << (rep.drift_certified ? "yes" : "no");
  rep.summary = os.str();
  return rep;
}

ConsistencyReport transform_consistency(const KamState& before, const KamState& after, int points,
                                        std::uint64_t seed, double step) {
  if (points < 1) throw std::invalid_argument("transform_consistency: points must be >= 1");
  if (!after.last_generator || !after.last_shift)
    throw std::invalid_argument("transform_consistency: state carries no step data");
  const int n = before.N.n(), d = before.N.d();
  const SeriesEvaluator h_in(to_series(before.N, Caps::ample()) + before.P);
  const SeriesEvaluator h_out(to_series(after.N, Caps::ample()) + after.P);
  const SeriesEvaluator gen(*after.last_generator);
  const Vec& delta = after.last_shift->delta;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi), unit(-1.0, 1.0);
  const double s = after.params.s;
  ConsistencyReport rep;
  for (int p = 0; p < points; ++p) {
    Vec st(2 * n + 2 * d);
    for (int i = 0; i < n; ++i) st[i] = angle(rng);
    for (int i = n; i < 2 * n; ++i) st[i] = s * s * unit(rng);
    for (int i = 2 * n; i < st.size(); ++i) st[i] = s * unit(rng);
    const double lhs = h_out.value(st);
    Vec q = st;
    q.tail(2 * d) += delta;
    const double rhs = h_in.value(time_one_map(gen, q, step));
    rep.max_difference = std::max(rep.max_difference, std::abs(lhs - rhs));
    rep.scale = std::max(rep.scale, std::abs(lhs));
    ++rep.points;
  }
  return rep;
}

}  // namespace kamdeg
