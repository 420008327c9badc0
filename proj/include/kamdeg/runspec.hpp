#pragma once

#include "kamdeg/region.hpp"
#include "kamdeg/schedule.hpp"
#include "kamdeg/series.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kamdeg {

// Malformed input, positioned at a 1-based line and column.
struct SpecError : Error {
  SpecError(int line, int column, const std::string& message);
  int line = 0;
  int column = 0;
};

// Everything a command needs. Series rows with k != 0 whose conjugate
// partner is absent stand for the real pair c e^{ikx} + conj(c) e^{-ikx}.
struct RunSpec {
  // [system]
  Vec omega;
  int n = 0;
  int d = 0;
  TFSeries h_tilde, g, perturbation;

  // [schedule]
  ScheduleConfig schedule;
  int max_steps = 4;
  double stop_norm = 0.0;

  // [region]
  ParamBox box;  // empty when absent
  int samples = 10000;
  std::uint64_t seed = 1;
  std::vector<double> epsilons;
  int measure_steps = 3;
  int jet_order = 1;  // M in the A1 check and the zone exponent
  int a1_grid = 21;
  int a1_directions = 8;
  double a0_radius = 1.0;
  int a0_samples = 10000;

  // [omega_map]
  std::optional<OmegaMap> omega_map;

  // [torus]
  double torus_T = 100.0;
  double torus_h = 1e-3;
  int torus_angles = 16;
  bool chain_torus = false;

  // [counterexample]
  double cx_epsilon = 0.1;
  double cx_omega = 1.0;
  double cx_T = 100.0;
  double cx_h = 1e-3;

  // [output]
  std::string out_dir = "out";
  bool dump_series = false;
};

RunSpec parse_spec(std::istream& is);
RunSpec parse_spec_string(const std::string& text);
// Throws std::runtime_error when the file cannot be opened.
RunSpec load_spec(const std::string& path);

// Canonical text: every key, series rows for the canonical half of each pair.
void write_spec(std::ostream& os, const RunSpec& spec);
std::string spec_to_string(const RunSpec& spec);

bool spec_equal(const RunSpec& a, const RunSpec& b);

// FNV-1a of the canonical text, as 16 hex digits.
std::string spec_hash(const RunSpec& spec);

}  // namespace kamdeg
