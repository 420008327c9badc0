#include "kamdeg/report.hpp"

#include "kamdeg/degree.hpp"
#include "kamdeg/flow.hpp"
#include "kamdeg/kam.hpp"
#include "kamdeg/normal_form.hpp"
#include "kamdeg/region.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kamdeg {

bool RunReport::passed() const {
  if (checks.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const ReportCheck& c) { return c.pass; });
}

namespace {

std::string clean(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  return s;
}

std::string num(double v) { return format_double(v); }
std::string yes_no(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string render_text(const RunReport& report) {
  std::ostringstream os;
  os << "command: " << report.command << "\nstatus: " << (report.passed() ? "PASS" : "FAIL") << "\n\n[metadata]\n";
  for (const ReportField& f : report.metadata) os << "  " << f.key << " = " << f.value << '\n';
  for (const ReportSection& sec : report.sections) {
    os << "\n[" << sec.name << "]\n";
    for (const ReportField& f : sec.fields) {
      os << "  " << f.key << " = " << f.value;
      if (!f.unit.empty()) os << "  (" << f.unit << ')';
      os << '\n';
    }
    for (const ReportTable& t : sec.tables) {
      os << "  table " << t.name << ":\n";
      std::vector<std::size_t> width(t.columns.size());
      std::vector<std::string> heads(t.columns.size());
      for (std::size_t c = 0; c < t.columns.size(); ++c) {
        heads[c] = t.columns[c] + (t.units[c].empty() ? "" : " [" + t.units[c] + "]");
        width[c] = heads[c].size();
        for (const auto& row : t.rows) width[c] = std::max(width[c], row[c].size());
      }
      auto line = [&](const std::vector<std::string>& cells) {
        os << "   ";
        for (std::size_t c = 0; c < cells.size(); ++c) {
          os << ' ' << cells[c];
          if (c + 1 < cells.size()) os << std::string(width[c] - cells[c].size(), ' ');
        }
        os << '\n';
      };
      line(heads);
      for (const auto& row : t.rows) line(row);
    }
  }
  os << "\n[checks]\n";
  for (const ReportCheck& c : report.checks)
    os << "  " << (c.pass ? "PASS" : "FAIL") << ' ' << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
  if (!report.diagnostics.empty()) {
    os << "\n[diagnostics]\n";
    for (const std::string& d : report.diagnostics) os << "  " << d << '\n';
  }
  return os.str();
}

std::string render_tsv(const RunReport& report) {
  std::ostringstream os;
  os << "section\tkey\tvalue\tunit\n";
  os << "status\tcommand\t" << clean(report.command) << "\t\n";
  os << "status\tpassed\t" << yes_no(report.passed()) << "\t\n";
  for (const ReportField& f : report.metadata) os << "metadata\t" << f.key << '\t' << clean(f.value) << '\t' << f.unit << '\n';
  for (const ReportSection& sec : report.sections) {
    for (const ReportField& f : sec.fields)
      os << sec.name << '\t' << f.key << '\t' << clean(f.value) << '\t' << f.unit << '\n';
    for (const ReportTable& t : sec.tables)
      for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c = 0; c < t.columns.size(); ++c)
          os << sec.name << '\t' << t.name << '[' << r << "]." << t.columns[c] << '\t' << clean(t.rows[r][c]) << '\t'
             << t.units[c] << '\n';
  }
  for (const ReportCheck& c : report.checks)
    os << "checks\t" << c.name << '\t' << (c.pass ? "pass" : "fail") << '\t' << clean(c.detail) << '\n';
  for (std::size_t i = 0; i < report.diagnostics.size(); ++i)
    os << "diagnostics\t" << i << '\t' << clean(report.diagnostics[i]) << "\t\n";
  return os.str();
}

namespace {

struct Context {
  const RunSpec& spec;
  const DispatchOptions& opts;
  ScheduleConfig config;
  int steps;
  int samples;
  std::uint64_t seed;
};

ReportSection schedule_section(const Schedule& sc) {
  ReportSection sec{"schedule", {}, {}};
  sec.fields = {{"mode", to_string(sc.mode()), ""},
                {"epsilon", num(sc.config.epsilon), "perturbation size"},
                {"m", std::to_string(sc.m), "truncation degree"},
                {"L", num(sc.L), "convexity exponent"},
                {"tau", num(sc.tau()), "Diophantine exponent"},
                {"rho", num(sc.rho), "exponent"},
                {"eta", std::to_string(sc.eta), "exponent"},
                {"E", num(sc.exponent), "gamma exponent (m+1)(2d)^m"},
                {"gamma0", num(sc.gamma0), "Diophantine constant"},
                {"mu0", num(sc.mu0), "scale"},
                {"s0", num(sc.s0), "action radius"},
                {"r0", num(sc.r0), "strip width"}};
  return sec;
}

NormalForm spec_normal_form(const RunSpec& spec) {
  NormalForm nf = make_normal_form(spec.omega, spec.d, Caps::ample());
  nf.h_tilde = spec.h_tilde;
  nf.g = spec.g;
  return nf;
}

struct KamOutcome {
  std::optional<RunResult> result;
};

KamOutcome run_kam(const Context& ctx, RunReport& rep) {
  KamOutcome out;
  Schedule sc;
  try {
    sc = init_schedule(ctx.config);
  } catch (const std::exception& e) {
    rep.diagnostics.push_back(std::string("schedule: ") + e.what());
    rep.checks.push_back({"schedule initialised", false, e.what()});
    return out;
  }
  rep.sections.push_back(schedule_section(sc));

  const NormalForm nf = spec_normal_form(ctx.spec);
  KamState st;
  try {
    st = initial_state(nf, ctx.spec.perturbation, sc);
  } catch (const std::exception& e) {
    rep.diagnostics.push_back(std::string("initial state: ") + e.what());
    rep.checks.push_back({"initial state", false, e.what()});
    return out;
  }

  StepCallback dump;
  const bool dumping = ctx.opts.dump_series || ctx.spec.dump_series;
  if (dumping) {
    const std::filesystem::path dir = ctx.opts.dump_dir.empty() ? ctx.spec.out_dir : ctx.opts.dump_dir;
    std::filesystem::create_directories(dir);
    dump = [dir](const KamState& s) {
      const std::string stem = "step_" + std::to_string(s.step);
      std::ofstream nfile(dir / (stem + ".N.tfs")), pfile(dir / (stem + ".P.tfs"));
      write_series(nfile, to_series(s.N, Caps::ample()));
      write_series(pfile, s.P);
    };
    dump(st);
  }

  RunResult res = run(st, sc, ctx.steps, ctx.spec.stop_norm, dump);

  ReportSection sec{"kam", {}, {}};
  sec.fields = {{"steps_requested", std::to_string(ctx.steps), "count"},
                {"steps_completed", std::to_string(res.final_state.step), "count"},
                {"completed", yes_no(res.completed), ""},
                {"drift_constant", num(res.drift_constant), "|omega_+ - omega| / ball radius"}};
  ReportTable steps{"steps",
                    {"nu", "r", "s", "gamma", "mu", "K", "norm", "bound", "omega_drift", "shift", "grad_g0",
                     "hypotheses"},
                    {"", "strip width", "action radius", "Diophantine constant", "scale", "|k| l1",
                     "majorant norm on D(s_nu,r_nu)", "gamma^E s^m mu", "abs", "abs", "abs", "passed of 10"},
                    {}};
  for (const StepRow& r : res.rows)
    steps.rows.push_back({std::to_string(r.step), num(r.r), num(r.s), num(r.gamma), num(r.mu), num(r.K), num(r.norm),
                          num(r.bound), num(r.omega_drift), num(r.shift), num(r.grad_g0),
                          std::to_string(r.hypotheses_passed)});
  sec.tables.push_back(std::move(steps));
  ReportTable hyp{"hypotheses", {"nu", "name", "lhs", "rhs", "margin", "pass"}, {"", "", "", "", "rhs - lhs", ""}, {}};
  for (const HypothesisReport& h : res.hypotheses)
    for (const HypothesisRow& row : h.rows)
      hyp.rows.push_back({std::to_string(h.step), row.name, num(row.lhs), num(row.rhs), num(row.margin),
                          yes_no(row.pass)});
  sec.tables.push_back(std::move(hyp));
  if (res.drift) {
    ReportTable drift{"shift_drift", {"nu", "shift", "reference", "ratio"},
                      {"", "abs", "(s^{m-1} mu)^{1/L}", "shift / reference"}, {}};
    for (const DriftRow& r : res.drift->rows)
      drift.rows.push_back({std::to_string(r.step), num(r.shift), num(r.reference), num(r.ratio)});
    sec.tables.push_back(std::move(drift));
  }
  if (!res.completed) {
    sec.fields.push_back({"failure_kind", res.failure_kind, ""});
    sec.fields.push_back({"failure", res.failure, ""});
    if (res.failure_degree) sec.fields.push_back({"failure_degree", std::to_string(*res.failure_degree), "Brouwer degree"});
    rep.diagnostics.push_back(res.failure_kind + ": " + res.failure);
  }
  rep.sections.push_back(std::move(sec));

  rep.checks.push_back({"run completed", res.completed, res.completed ? "" : res.failure_kind});
  bool monotone = true, grads = true;
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    monotone = monotone && res.rows[i].norm < res.rows[i - 1].norm;
    grads = grads && res.rows[i].grad_g0 <= 1e-10;
  }
  rep.checks.push_back({"perturbation norm decreases", monotone, ""});
  rep.checks.push_back({"grad g(0) <= 1e-10 after each step", grads, ""});
  out.result = std::move(res);
  return out;
}

void verify_torus(const Context& ctx, const RunResult& res, RunReport& rep) {
  const KamState& f = res.final_state;
  const TFSeries h = to_series(f.N, Caps::ample()) + f.P;
  ReportSection sec{"torus", {}, {}};
  try {
    const TorusCheck tc = torus_deviation(h, f.N.omega, ctx.spec.torus_T, ctx.spec.torus_h, ctx.spec.torus_angles);
    const double norm = f.norm_history.back().norm;
    const double bound = 10.0 * norm * ctx.spec.torus_T;
    sec.fields = {{"T", num(ctx.spec.torus_T), "time"},
                  {"h", num(ctx.spec.torus_h), "time step"},
                  {"angles", std::to_string(tc.trajectories), "count"},
                  {"deviation", num(tc.deviation), "max |(y,z)|"},
                  {"bound", num(bound), "10 |P_final| T"},
                  {"energy_drift", num(tc.energy_drift), "abs"},
                  {"x_advance_error", num(tc.x_advance_error), "max |x(T) - x0 - omega T|"}};
    rep.checks.push_back({"torus deviation <= 10 |P_final| T", tc.deviation <= bound, ""});
  } catch (const std::exception& e) {
    rep.diagnostics.push_back(std::string("torus: ") + e.what());
    rep.checks.push_back({"torus deviation <= 10 |P_final| T", false, e.what()});
  }
  rep.sections.push_back(std::move(sec));
}

void check_nondegeneracy(const Context& ctx, RunReport& rep) {
  const RunSpec& spec = ctx.spec;
  ReportSection a0{"A0", {}, {}};
  try {
    const BoxRegion region{Vec::Zero(2 * spec.d), spec.a0_radius, 1024};
    const A0Certificate cert = check_A0(spec.g, region, spec.a0_samples, ctx.seed);
    a0.fields = {{"degree", std::to_string(cert.degree), "Brouwer degree of grad g"},
                 {"degree_method", cert.degree_method, ""},
                 {"degree_odd", yes_no(cert.degree % 2 != 0), ""},
                 {"borsuk_pass", yes_no(cert.borsuk.pass), ""},
                 {"borsuk_defect", num(cert.borsuk.worst_defect), "relative"},
                 {"L", num(cert.convexity.L), "convexity exponent"},
                 {"sigma", num(cert.convexity.sigma), "convexity constant"},
                 {"convexity_samples", std::to_string(cert.convexity.sample_count), "count"},
                 {"message", cert.message, ""}};
    rep.checks.push_back({"A0 nondegeneracy", cert.pass, cert.message});
    if (!cert.pass) rep.diagnostics.push_back("A0: " + cert.message);
  } catch (const std::exception& e) {
    rep.diagnostics.push_back(std::string("A0: ") + e.what());
    rep.checks.push_back({"A0 nondegeneracy", false, e.what()});
  }
  rep.sections.push_back(std::move(a0));

  ReportSection a1{"A1", {}, {}};
  try {
    const bool has_map = spec.omega_map.has_value() && spec.box.dim() > 0;
    const ParamBox box = has_map ? spec.box : ParamBox{Vec::Zero(1), Vec::Ones(1)};
    const OmegaMap omega = has_map ? *spec.omega_map : OmegaMap::constant(spec.omega, 1);
    const A1Result res = check_A1(box, omega, spec.jet_order, spec.a1_grid, spec.a1_directions);
    a1.fields = {{"frequency_map", has_map ? "omega_map" : "constant omega", ""},
                 {"M", std::to_string(spec.jet_order), "derivative order"},
                 {"points", std::to_string(res.points), "count"},
                 {"directions", std::to_string(res.directions), "count"},
                 {"min_jet", num(res.min_jet), "max_|alpha|<=M |d^alpha <k/|k|,omega>|"},
                 {"violations", std::to_string(res.violations.size()), "count"}};
    rep.checks.push_back({"A1 frequency nondegeneracy", res.pass, ""});
  } catch (const std::exception& e) {
    rep.diagnostics.push_back(std::string("A1: ") + e.what());
    rep.checks.push_back({"A1 frequency nondegeneracy", false, e.what()});
  }
  rep.sections.push_back(std::move(a1));
}

void estimate_measure(const Context& ctx, RunReport& rep) {
  const RunSpec& spec = ctx.spec;
  if (spec.box.dim() == 0 || !spec.omega_map || spec.epsilons.empty()) {
    const std::string why = "estimate-measure needs [region] lo/hi/epsilons and [omega_map]";
    rep.diagnostics.push_back(why);
    rep.checks.push_back({"measure inputs", false, why});
    return;
  }
  HessianMap hess;
  if (spec.d > 0) {
    const Mat h0 = hessian_at_origin(spec.g);
    if (h0.norm() > 0.0) hess = [h0](const Vec&) { return h0; };
  }
  ReportSection sec{"measure", {}, {}};
  try {
    const auto rows = measure_estimate(spec.box, *spec.omega_map, hess, ctx.config, spec.epsilons, spec.measure_steps,
                                       ctx.samples, ctx.seed, spec.jet_order);
    sec.fields = {{"samples", std::to_string(ctx.samples), "count"},
                  {"steps", std::to_string(spec.measure_steps), "count"},
                  {"box_volume", num(spec.box.volume()), "parameter volume"}};
    ReportTable t{"exclusion",
                  {"epsilon", "gamma0", "excluded", "fraction", "half_width", "reference"},
                  {"", "Diophantine constant", "count", "of box volume", "95% binomial", "sum gamma^{1/(M+1)} |k|^{-tau/(M+1)}"},
                  {}};
    for (const MeasureRow& r : rows)
      t.rows.push_back({num(r.epsilon), num(r.gamma0), std::to_string(r.excluded), num(r.fraction),
                        num(r.half_width), num(r.reference)});
    sec.tables.push_back(std::move(t));
    // Trend as epsilon decreases.
    std::vector<MeasureRow> sorted = rows;
    std::sort(sorted.begin(), sorted.end(), [](const MeasureRow& a, const MeasureRow& b) { return a.epsilon > b.epsilon; });
    bool trend = true;
    for (std::size_t i = 1; i < sorted.size(); ++i) trend = trend && sorted[i].fraction <= sorted[i - 1].fraction;
    rep.checks.push_back({"excluded fraction nonincreasing as epsilon decreases", trend, ""});
  } catch (const std::exception& e) {
    rep.diagnostics.push_back(std::string("measure: ") + e.what());
    rep.checks.push_back({"measure estimate", false, e.what()});
  }
  rep.sections.push_back(std::move(sec));
}

void counterexample(const Context& ctx, RunReport& rep) {
  const RunSpec& spec = ctx.spec;
  ReportSection sec{"counterexample", {}, {}};
  try {
    const CounterexampleReport p = prop2_check(spec.cx_epsilon, spec.cx_omega, spec.cx_T, spec.cx_h);
    sec.fields = {{"epsilon", num(p.epsilon), ""}, {"omega", num(spec.cx_omega), ""}, {"in_scope", yes_no(p.in_scope), ""}};
    if (p.in_scope) {
      const double eps2 = p.epsilon * p.epsilon;
      sec.fields.insert(sec.fields.end(),
                        {{"vdot_sup", num(p.symbolic_sup), "symbolic bound of v' = -u^2 - eps^2"},
                         {"scan_min", num(p.scan_min), "min of u^2 + eps^2 on [-10,10]"},
                         {"no_real_solution", yes_no(p.root_free),
                          "u^2 + eps^2 = 0 has no real solution: min " + num(p.scan_min) + " > 0"},
                         {"T", num(p.T), "time"},
                         {"t_end", num(p.t_end), "time reached"},
                         {"escaped", yes_no(p.escaped), "left |(y,z)| <= 1e6 before T"},
                         {"v0", num(p.v0), ""},
                         {"v_end", num(p.v_end), ""},
                         {"v_bound", num(p.v0 - eps2 * p.T), "v0 - eps^2 T"},
                         {"trajectories", std::to_string(p.trajectories), "count"}});
      rep.checks.push_back({"symbolic drift v' <= -eps^2", p.symbolic_ok, ""});
      rep.checks.push_back({"no real solution of u^2 + eps^2 = 0", p.root_free, ""});
      rep.checks.push_back({"v(T) <= v(0) - eps^2 T", p.drift_certified, ""});
      rep.checks.push_back({"v decreases with slope <= -eps^2", p.slope_ok, ""});
    } else {
      rep.checks.push_back({"counterexample in scope", false, p.summary});
    }
    sec.fields.push_back({"summary", p.summary, ""});
  } catch (const std::exception& e) {
    rep.diagnostics.push_back(std::string("counterexample: ") + e.what());
    rep.checks.push_back({"counterexample", false, e.what()});
  }
  rep.sections.push_back(std::move(sec));
}

}  // namespace

RunReport dispatch(const std::string& command, const RunSpec& spec, const DispatchOptions& opts) {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw std::invalid_argument("unknown command '" + command + "'");
  if (opts.steps && *opts.steps < 1) throw std::invalid_argument("--steps must be >= 1");
  if (opts.samples && *opts.samples < 1) throw std::invalid_argument("--samples must be >= 1");

  Context ctx{spec, opts, spec.schedule, opts.steps.value_or(spec.max_steps), opts.samples.value_or(spec.samples),
              opts.seed.value_or(spec.seed)};
  if (opts.mode) ctx.config.mode = *opts.mode;

  RunReport rep;
  rep.command = command;
  rep.metadata = {{"spec_hash", spec_hash(spec), "FNV-1a of the canonical spec"},
                  {"seed", std::to_string(ctx.seed), ""},
                  {"mode", to_string(ctx.config.mode), ""},
                  {"n", std::to_string(spec.n), ""},
                  {"d", std::to_string(spec.d), ""}};

  if (command == "check-nondegeneracy") {
    check_nondegeneracy(ctx, rep);
  } else if (command == "run-kam" || command == "verify-torus") {
    const KamOutcome k = run_kam(ctx, rep);
    const bool chain = command == "verify-torus" || spec.chain_torus;
    if (chain) {
      if (k.result && k.result->completed) {
        verify_torus(ctx, *k.result, rep);
      } else {
        rep.checks.push_back({"torus deviation <= 10 |P_final| T", false, "no completed run to verify"});
      }
    }
  } else if (command == "estimate-measure") {
    estimate_measure(ctx, rep);
  } else {
    counterexample(ctx, rep);
  }
  return rep;
}

}  // namespace kamdeg
