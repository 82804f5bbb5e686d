#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "irsbf/admm_common.hpp"
#include "irsbf/io.hpp"
#include "irsbf/oracle.hpp"
#include "irsbf/scene.hpp"
#include "irsbf/sdr.hpp"

namespace irsbf::experiment {

enum class Method { admm, sdr_scheme1, sdr_scheme2, oracle };
enum class SweepVar { elements, users };

std::string to_string(Method m);
std::string to_string(SweepVar v);  // "N" or "K"

struct SdrSettings {
  sdr::Options options;
  int trials = 10000;  // Gaussian randomization draws
};

struct OracleSettings {
  int phases = 64;
  int radius_levels = 2;
  double budget = 1e7;
};

struct ExperimentSpec {
  ScenarioConfig scenario;
  BeamMode mode = BeamMode::multicast;
  std::vector<Method> methods;
  SweepVar sweep_var = SweepVar::elements;
  std::vector<int> sweep_values;  // empty runs the scenario as given
  std::vector<std::uint64_t> seeds;
  SolverConfig solver;
  SdrSettings sdr;
  OracleSettings oracle;
  std::filesystem::path output_dir = "results";
  bool traces = false;  // per-run ADMM iteration traces

  bool has(Method m) const;
  /// Sweep values, or the scenario's own N or K if none were given.
  std::vector<int> values() const;
  ScenarioConfig scenario_for(int value, std::uint64_t seed) const;
};

/// Throws std::invalid_argument naming the offending field.
ExperimentSpec parse_spec(const io::Json& j);
ExperimentSpec load_spec(const std::filesystem::path& path);

/// Schema and budget checks that do not run any solver.
/// Throws std::invalid_argument or std::length_error with a field-specific message.
void check(const ExperimentSpec& spec);

/// The spec with every default filled in, powers in dBm.
io::Json effective_config(const ExperimentSpec& spec);

/// One results.csv row.
struct ResultRow {
  Method method = Method::admm;
  Regime regime = Regime::disk;
  int value = 0;
  std::uint64_t seed = 0;
  double min_metric = 0.0;
  long iterations = 0;
  bool converged = false;
  double sdr_bound = 0.0;  // certified SDR value, when SDR ran on this instance
  bool has_sdr_bound = false;
  int dominance_ok = -1;   // admm rows with an SDR bound: 1 or 0, else -1
  double wall_time_s = 0.0;
};

/// Everything produced for one (sweep value, seed) instance.
struct CellResult {
  std::vector<ResultRow> rows;
  SolveReport admm;  // empty unless admm ran
  std::string error;
};

/// Runs every selected method on one instance.
CellResult run_cell(const ExperimentSpec& spec, int value, std::uint64_t seed);

/// Fixed column order:
///   method,regime,sweep_var,value,seed,min_metric,iterations,converged,sdr_bound,dominance_ok
void write_results_csv(std::ostream& os, const ExperimentSpec& spec,
                       const std::vector<ResultRow>& rows);
/// method,regime,sweep_var,value,seed,wall_time_s
void write_timings_csv(std::ostream& os, const ExperimentSpec& spec,
                       const std::vector<ResultRow>& rows);
void write_summary(std::ostream& os, const ExperimentSpec& spec,
                   const std::vector<ResultRow>& rows);

struct RunOptions {
  int workers = 1;
  std::int64_t seed_offset = 0;
};

/// Runs all cells, writes results.csv, timings.csv, summary.txt (and traces/)
/// under spec.output_dir. Rows are ordered by (value, seed) regardless of the
/// worker count. Returns the number of failed cells; completed rows are
/// written even when some cells fail.
int run(const ExperimentSpec& spec, const RunOptions& opts, std::ostream& log);

}  // namespace irsbf::experiment
