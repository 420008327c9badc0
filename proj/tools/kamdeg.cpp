#include "kamdeg/report.hpp"
#include "kamdeg/runspec.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Lower-dimensional KAM tori for completely degenerate normal parts"};
  std::string command, spec_path, out_dir, mode;
  int steps = 0, samples = 0;
  std::uint64_t seed = 0;
  bool quiet = false, dump = false;

  app.add_option("command", command, "check-nondegeneracy | run-kam | estimate-measure | verify-torus | counterexample")
      ->required()
      ->check(CLI::IsMember(kamdeg::kCommands));
  app.add_option("--spec", spec_path, "spec file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "report directory (default: [output] dir)");
  app.add_option("--mode", mode, "schedule mode")->check(CLI::IsMember({"paper", "practical"}));
  auto* steps_opt = app.add_option("--steps", steps, "maximum KAM steps")->check(CLI::PositiveNumber);
  auto* samples_opt = app.add_option("--samples", samples, "measure samples")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "seed for all sampling");
  app.add_flag("--quiet", quiet, "do not print the report");
  app.add_flag("--dump-series", dump, "write N and P after every step");
  CLI11_PARSE(app, argc, argv);

  try {
    const kamdeg::RunSpec spec = kamdeg::load_spec(spec_path);
    const std::filesystem::path dir = out_dir.empty() ? spec.out_dir : out_dir;
    kamdeg::DispatchOptions opts;
    if (!mode.empty()) opts.mode = kamdeg::parse_schedule_mode(mode);
    if (*steps_opt) opts.steps = steps;
    if (*samples_opt) opts.samples = samples;
    if (*seed_opt) opts.seed = seed;
    opts.dump_series = dump;
    opts.dump_dir = (dir / "series").string();

    const kamdeg::RunReport report = kamdeg::dispatch(command, spec, opts);
    std::filesystem::create_directories(dir);
    const std::string text = kamdeg::render_text(report);
    std::ofstream(dir / "report.txt") << text;
    std::ofstream(dir / "report.tsv") << kamdeg::render_tsv(report);
    if (!quiet) std::cout << text;
    return report.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "kamdeg: " << e.what() << '\n';
    return 2;
  }
}
