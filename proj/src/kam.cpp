#include "kamdeg/kam.hpp"

#include <algorithm>
#include <cmath>

namespace kamdeg {

namespace {

constexpr double kMaxIterableK = 4096.0;

// max over multi-indices |i| <= m of weighted_norm(d_y^i f, s, 0).
double y_derivative_norm(const TFSeries& f, int m, double s) {
  const int n = f.n();
  double best = 0.0;
  for (int order = 0; order <= m; ++order) {
    for (const std::vector<int>& mi : compositions(n, order)) {
      TFSeries cur = f;
      for (int i = 0; i < n && !cur.empty(); ++i)
        for (int rep = 0; rep < mi[i] && !cur.empty(); ++rep) cur = partial_derivative(cur, Var::y(i));
      best = std::max(best, weighted_norm(cur, s, 0.0));
    }
  }
  return best;
}

DomainParams domain_of(const StepParams& p) { return {p.s, p.r}; }

}  // namespace

KamState initial_state(const NormalForm& N, const TFSeries& P, const Schedule& sched) {
  if (N.n() != sched.n() || N.d() != sched.d() || P.n() != sched.n() || P.d() != sched.d())
    throw DimensionError("initial_state: normal form, perturbation and schedule dimensions differ");
  KamState st;
  st.N = N;
  st.P = P;
  st.params = sched.at(0);
  st.omega0 = N.omega;
  st.h_tilde0 = N.h_tilde;
  st.p0_norm = majorant_norm(P, domain_of(st.params));
  st.norm_history.push_back({0, st.p0_norm, sched.perturbation_bound(st.params)});
  return st;
}

Caps step_caps(const Schedule& sched, const StepParams& next) {
  const double k = std::min(2.0 * next.K, kMaxIterableK);
  return {static_cast<int>(k), 2 * sched.m};
}

HypothesisReport verify_hypotheses(const KamState& state, const Schedule& sched) {
  HypothesisInputs in;
  in.nu = state.step;
  in.p0_norm_over_eps = state.p0_norm / sched.config.epsilon;
  in.h_tilde_drift = y_derivative_norm(state.N.h_tilde - state.h_tilde0, sched.m, state.params.s);
  in.m_star = y_derivative_norm(state.h_tilde0, sched.m, state.params.s);
  return verify_hypotheses(sched, in);
}

KamState kam_step(const KamState& state, const Schedule& sched) {
  const int m = sched.m;
  const StepParams& cur = state.params;
  const StepParams nxt = sched.at(state.step + 1);
  if (nxt.K > kMaxIterableK)
    throw std::invalid_argument("kam_step: K = " + format_double(nxt.K) +
                                " is not iterable; use practical mode for iteration");
  const int k_plus = static_cast<int>(nxt.K);
  const Caps caps = step_caps(sched, nxt);
  const NormalForm& N = state.N;

  const Truncation tr = truncate(state.P, k_plus, m);
  const TFSeries& R = tr.R;
  const TFSeries r_avg = average(R);

  const CertificateSet certs =
      certify_nonresonance(N.omega, hessian_at_origin(N.g), cur.gamma, sched.tau(), k_plus, m);
  const HomologicalSolution sol = solve_homological(N, R, certs, m, caps);
  const TFSeries& F = sol.F;

  // H o phi_F = N + [R] + (P - R) + Q + sum_{q>=1} ad^q P / q! + sum_{p>=1} ad^p X / (p+1)!,
  // with X = {N,F} = Q - R + [R].
  const TFSeries X = with_caps(sol.Q - R + r_avg, caps);
  LieOptions lie;
  lie.dom = domain_of(cur);
  TFSeries p_bar = with_caps(state.P - R, caps) + with_caps(sol.Q, caps);
  if (!F.empty()) {
    p_bar = p_bar + lie_series(with_caps(state.P, caps), F, caps, 1, 0, lie);
    p_bar = p_bar + lie_series(X, F, caps, 1, 1, lie);
  }

  const StepParams prv = sched.at(std::max(0, state.step - 1));
  const double ball = sched.ball_radius(prv);
  ShiftOptions so;
  so.search_radius = sched.mode() == ScheduleMode::practical ? std::max(ball, 1.0) : ball;
  const ShiftResult shift = find_shift(N.g, r_avg, ball, so);
  if (sched.mode() == ScheduleMode::paper && !shift.within_ball)
    throw ShiftError("find_shift: zero found outside the translation ball of radius " + format_double(ball),
                     std::nullopt);

  KamState out;
  out.step = state.step + 1;
  out.params = nxt;
  out.omega0 = state.omega0;
  out.h_tilde0 = state.h_tilde0;
  out.p0_norm = state.p0_norm;
  out.N = rebuild_normal_form(N, r_avg, shift.delta, Caps{caps.k_max, Caps::ample().w_max});
  TFSeries p_plus = shift_z(p_bar, shift.delta, caps);

  // Any z-linear leftover of g is perturbation, not normal form.
  const int n = N.n(), d = N.d();
  const TFSeries lin = filter(out.N.g, [n, d](const MultiIndex& idx) { return z_degree(idx, n, d) == 1; });
  out.N.g = out.N.g - lin;
  out.P = p_plus + with_caps(lin, caps);
  out.linear_residual = majorant_norm(lin, domain_of(nxt));

  const double new_norm = majorant_norm(out.P, domain_of(nxt));
  const double old_norm = state.norm_history.empty() ? majorant_norm(state.P, domain_of(cur))
                                                     : state.norm_history.back().norm;
  if (new_norm > old_norm)
    throw DivergenceError("kam_step: perturbation norm grew from " + format_double(old_norm) + " to " +
                          format_double(new_norm) + " at step " + std::to_string(out.step));
  out.norm_history = state.norm_history;
  out.norm_history.push_back({out.step, new_norm, sched.perturbation_bound(nxt)});
  out.last_generator = F;
  out.last_shift = shift;
  return out;
}

RunResult run(const KamState& initial, const Schedule& sched, int max_steps, double stop_norm,
              const StepCallback& on_step) {
  if (max_steps < 1) throw std::invalid_argument("run: max_steps must be >= 1");
  RunResult res;
  KamState st = initial;
  auto row_of = [&](const KamState& s, double shift_norm, int passed) {
    StepRow row;
    row.step = s.step;
    row.r = s.params.r;
    row.s = s.params.s;
    row.gamma = s.params.gamma;
    row.mu = s.params.mu;
    row.K = s.params.K;
    row.norm = s.norm_history.back().norm;
    row.bound = s.norm_history.back().bound;
    row.omega_drift = (s.N.omega - s.omega0).norm();
    row.shift = shift_norm;
    row.grad_g0 = z_gradient(s.N.g, Vec::Zero(2 * s.N.d())).norm();
    row.hypotheses_passed = passed;
    return row;
  };

  std::vector<NormalFormDrift> pieces;
  std::vector<double> references;
  for (int it = 0; it < max_steps; ++it) {
    const HypothesisReport hyp = verify_hypotheses(st, sched);
    res.hypotheses.push_back(hyp);
    if (it == 0) res.rows.push_back(row_of(st, 0.0, hyp.pass_count()));
    else res.rows.back().hypotheses_passed = hyp.pass_count();
    if (st.norm_history.back().norm <= stop_norm) break;
    try {
      KamState next = kam_step(st, sched);
      const StepParams prv = sched.at(std::max(0, st.step - 1));
      const double ref = sched.ball_radius(prv);
      const double domega = (next.N.omega - st.N.omega).norm();
      res.drift_constant = std::max(res.drift_constant, domega / ref);
      pieces.push_back(normal_form_drift(st.N, next.N, next.params.s));
      references.push_back(ref);
      res.shifts.push_back(*next.last_shift);
      res.rows.push_back(row_of(next, next.last_shift->delta.norm(), 0));
      if (on_step) on_step(next);
      st = std::move(next);
    } catch (const ResonanceError& e) {
      res.failure_kind = "resonance";
      res.failure = e.what();
    } catch (const ShiftError& e) {
      res.failure_kind = "shift";
      res.failure = e.what();
      res.failure_degree = e.degree;
    } catch (const DivergenceError& e) {
      res.failure_kind = "divergence";
      res.failure = e.what();
    } catch (const SingularBlockError& e) {
      res.failure_kind = "solve";
      res.failure = e.what();
    } catch (const std::exception& e) {
      res.failure_kind = "other";
      res.failure = e.what();
    }
    if (!res.failure.empty()) break;
  }
  if (res.failure.empty() && res.hypotheses.size() < res.rows.size()) {
    const HypothesisReport hyp = verify_hypotheses(st, sched);
    res.rows.back().hypotheses_passed = hyp.pass_count();
    res.hypotheses.push_back(hyp);
  }
  if (res.shifts.size() >= 2) res.drift = shift_drift_bounds(res.shifts, references, pieces);
  res.completed = res.failure.empty();
  res.final_state = st;
  return res;
}

}  // namespace kamdeg
