#include <exception>
#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "irsbf/experiment.hpp"

namespace ex = irsbf::experiment;

int main(int argc, char** argv) {
  CLI::App app{"IRS passive beamforming experiments"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_dir;
  int workers = 1;
  std::int64_t seed_offset = 0;

  auto* run = app.add_subcommand("run", "run every (sweep value, seed) instance of a spec");
  run->add_option("spec", spec_path, "experiment spec (JSON)")->required();
  run->add_option("--out", out_dir, "output directory, overrides output_dir");
  run->add_option("--workers", workers, "parallel workers")->check(CLI::PositiveNumber);
  run->add_option("--seed-offset", seed_offset, "added to every seed");

  auto* validate = app.add_subcommand("validate", "check a spec and print the effective config");
  validate->add_option("spec", spec_path, "experiment spec (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    auto spec = ex::load_spec(spec_path);
    if (!out_dir.empty()) spec.output_dir = out_dir;
    if (*validate) {
      ex::check(spec);
      std::cout << ex::effective_config(spec).dump(2) << '\n';
      return 0;
    }
    const int failures = ex::run(spec, {workers, seed_offset}, std::cerr);
    std::cerr << "wrote " << (spec.output_dir / "results.csv").string() << '\n';
    if (failures > 0) {
      std::cerr << "error: " << failures << " instance(s) failed, see summary.txt\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
