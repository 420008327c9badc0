#pragma once

#include "kamdeg/runspec.hpp"
#include "kamdeg/schedule.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kamdeg {

struct ReportField {
  std::string key;
  std::string value;
  std::string unit;  // scale or unit of the value; empty for labels
};

struct ReportTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::string> units;  // one per column
  std::vector<std::vector<std::string>> rows;
};

struct ReportSection {
  std::string name;
  std::vector<ReportField> fields;
  std::vector<ReportTable> tables;
};

struct ReportCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunReport {
  std::string command;
  std::vector<ReportField> metadata;
  std::vector<ReportSection> sections;
  std::vector<ReportCheck> checks;
  std::vector<std::string> diagnostics;

  // True when at least one check ran and every check passed.
  bool passed() const;
  int exit_code() const { return passed() ? 0 : 1; }
};

// Both renderings are built from the same strings.
std::string render_text(const RunReport& report);
std::string render_tsv(const RunReport& report);

inline const std::vector<std::string> kCommands = {"check-nondegeneracy", "run-kam", "estimate-measure",
                                                   "verify-torus", "counterexample"};

struct DispatchOptions {
  std::optional<ScheduleMode> mode;
  std::optional<int> steps;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  bool dump_series = false;
  std::string dump_dir;  // series files go here when dumping
};

// Runs one command. Unknown commands throw std::invalid_argument; failures of
// the numerical modules end up as diagnostics and failed checks.
RunReport dispatch(const std::string& command, const RunSpec& spec, const DispatchOptions& opts = {});

}  // namespace kamdeg
