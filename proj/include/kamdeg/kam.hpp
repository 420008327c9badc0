#pragma once

#include "kamdeg/homological.hpp"
#include "kamdeg/normal_form.hpp"
#include "kamdeg/schedule.hpp"
#include "kamdeg/translation.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kamdeg {

struct DivergenceError : Error {
  using Error::Error;
};

struct NormRow {
  int step = 0;
  double norm = 0.0;   // majorant norm of P on D(s_nu, r_nu)
  double bound = 0.0;  // gamma^E s^m mu
};

struct KamState {
  int step = 0;
  NormalForm N;
  TFSeries P;
  StepParams params;
  std::vector<NormRow> norm_history;
  Vec omega0;
  TFSeries h_tilde0;
  double p0_norm = 0.0;  // |P_0| on D(s_0, r_0)
  // Data of the most recent step, kept for the transformation oracles.
  std::optional<TFSeries> last_generator;
  std::optional<ShiftResult> last_shift;
  double linear_residual = 0.0;  // z-linear part of g moved back into P
};

KamState initial_state(const NormalForm& N, const TFSeries& P, const Schedule& sched);

// Storage caps used while building step nu's output.
Caps step_caps(const Schedule& sched, const StepParams& next);

HypothesisReport verify_hypotheses(const KamState& state, const Schedule& sched);

// One full cycle: truncate, solve, transform, translate, rebuild.
KamState kam_step(const KamState& state, const Schedule& sched);

struct StepRow {
  int step = 0;
  double r = 0.0, s = 0.0, gamma = 0.0, mu = 0.0, K = 0.0;
  double norm = 0.0, bound = 0.0;
  double omega_drift = 0.0;  // |omega_nu - omega_0|
  double shift = 0.0;        // |zeta_nu - zeta_{nu-1}|
  double grad_g0 = 0.0;      // |grad g_nu(0)|
  int hypotheses_passed = 0;
};

struct RunResult {
  KamState final_state;
  std::vector<StepRow> rows;
  std::vector<HypothesisReport> hypotheses;
  std::vector<ShiftResult> shifts;
  std::optional<DriftReport> drift;
  double drift_constant = 0.0;  // max |omega_{nu+1} - omega_nu| / (s_{nu-1}^{m-1} mu_{nu-1})^{1/L}
  bool completed = false;
  std::string failure;       // empty on success
  std::string failure_kind;  // resonance, shift, divergence, solve, other
  std::optional<int> failure_degree;
};

using StepCallback = std::function<void(const KamState&)>;

// Iterates kam_step until max_steps, until |P| <= stop_norm, or until a step fails.
// on_step sees every state produced by a completed step.
RunResult run(const KamState& initial, const Schedule& sched, int max_steps, double stop_norm = 0.0,
              const StepCallback& on_step = {});

}  // namespace kamdeg
