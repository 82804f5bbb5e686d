#include "irsbf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "irsbf/beamformers.hpp"
#include "irsbf/downlink.hpp"
#include "irsbf/multicast.hpp"

namespace irsbf::experiment {

std::string to_string(Method m) {
  switch (m) {
    case Method::admm: return "admm";
    case Method::sdr_scheme1: return "sdr+scheme1";
    case Method::sdr_scheme2: return "sdr+scheme2";
    case Method::oracle: return "oracle";
  }
  return "?";
}

std::string to_string(SweepVar v) { return v == SweepVar::elements ? "N" : "K"; }

bool ExperimentSpec::has(Method m) const {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

std::vector<int> ExperimentSpec::values() const {
  if (!sweep_values.empty()) return sweep_values;
  return {sweep_var == SweepVar::elements ? scenario.elements : scenario.users};
}

ScenarioConfig ExperimentSpec::scenario_for(int value, std::uint64_t seed) const {
  ScenarioConfig c = scenario;
  if (sweep_var == SweepVar::elements)
    c.elements = value;
  else
    c.users = value;
  c.rng_seed = seed;
  return c;
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

void reject_unknown(const io::Json& j, const std::string& where,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, v] : j.items()) {
    (void)v;
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      fail(where + key + ": unknown key");
  }
}

double get_number(const io::Json& j, const std::string& name) {
  if (!j.is_number()) fail(name + ": expected a number");
  return j.get<double>();
}

int get_int(const io::Json& j, const std::string& name) {
  if (!j.is_number_integer()) fail(name + ": expected an integer");
  return j.get<int>();
}

Method parse_method(const std::string& s) {
  if (s == "admm") return Method::admm;
  if (s == "sdr+scheme1") return Method::sdr_scheme1;
  if (s == "sdr+scheme2") return Method::sdr_scheme2;
  if (s == "oracle") return Method::oracle;
  fail("methods: unknown method '" + s + "' (admm, sdr+scheme1, sdr+scheme2, oracle)");
}

}  // namespace

ExperimentSpec parse_spec(const io::Json& j) {
  if (!j.is_object()) fail("spec: expected a JSON object");
  reject_unknown(j, "", {"scenario", "mode", "methods", "sweep", "seeds", "solver", "sdr", "oracle",
                         "output_dir", "traces"});
  ExperimentSpec s;
  if (j.contains("scenario")) s.scenario = io::scenario_from_json(j["scenario"]);

  if (!j.contains("mode")) fail("mode: missing (multicast or downlink)");
  const auto& mode = j["mode"];
  if (mode == "multicast")
    s.mode = BeamMode::multicast;
  else if (mode == "downlink")
    s.mode = BeamMode::downlink;
  else
    fail("mode: expected multicast or downlink");

  if (!j.contains("methods")) fail("methods: missing");
  if (!j["methods"].is_array()) fail("methods: expected a list");
  for (const auto& m : j["methods"]) {
    if (!m.is_string()) fail("methods: expected strings");
    const Method parsed = parse_method(m.get<std::string>());
    if (!s.has(parsed)) s.methods.push_back(parsed);
  }

  if (j.contains("sweep")) {
    const auto& sw = j["sweep"];
    if (!sw.is_object()) fail("sweep: expected {variable, values}");
    reject_unknown(sw, "sweep.", {"variable", "values"});
    if (sw.contains("variable")) {
      if (sw["variable"] == "N")
        s.sweep_var = SweepVar::elements;
      else if (sw["variable"] == "K")
        s.sweep_var = SweepVar::users;
      else
        fail("sweep.variable: expected N or K");
    }
    if (sw.contains("values")) {
      if (!sw["values"].is_array()) fail("sweep.values: expected a list");
      for (const auto& v : sw["values"]) s.sweep_values.push_back(get_int(v, "sweep.values"));
    }
  }

  if (j.contains("seeds")) {
    const auto& sd = j["seeds"];
    if (sd.is_array()) {
      for (const auto& v : sd) {
        if (!v.is_number_unsigned()) fail("seeds: expected non-negative integers");
        s.seeds.push_back(v.get<std::uint64_t>());
      }
    } else if (sd.is_object()) {
      reject_unknown(sd, "seeds.", {"first", "count"});
      std::uint64_t first = 0;
      if (sd.contains("first")) {
        if (!sd["first"].is_number_unsigned()) fail("seeds.first: expected a non-negative integer");
        first = sd["first"].get<std::uint64_t>();
      }
      const int count = sd.contains("count") ? get_int(sd["count"], "seeds.count") : 50;
      if (count < 1) fail("seeds.count: must be >= 1");
      for (int i = 0; i < count; ++i) s.seeds.push_back(first + i);
    } else {
      fail("seeds: expected a list or {first, count}");
    }
  } else {
    for (std::uint64_t i = 0; i < 50; ++i) s.seeds.push_back(i);
  }

  if (j.contains("solver")) {
    const auto& so = j["solver"];
    if (!so.is_object()) fail("solver: expected an object");
    reject_unknown(so, "solver.", {"rho", "inner_max_iters", "outer_iters", "tolerance", "init",
                                   "init_seed"});
    if (so.contains("rho")) s.solver.rho = get_number(so["rho"], "solver.rho");
    if (so.contains("inner_max_iters"))
      s.solver.inner_max_iters = get_int(so["inner_max_iters"], "solver.inner_max_iters");
    if (so.contains("outer_iters"))
      s.solver.outer_iters = get_int(so["outer_iters"], "solver.outer_iters");
    if (so.contains("tolerance")) s.solver.tolerance = get_number(so["tolerance"], "solver.tolerance");
    if (so.contains("init")) {
      if (so["init"] == "zeros")
        s.solver.init = InitMode::zeros;
      else if (so["init"] == "random_phase")
        s.solver.init = InitMode::random_phase;
      else
        fail("solver.init: expected zeros or random_phase");
    }
    if (so.contains("init_seed")) {
      if (!so["init_seed"].is_number_unsigned()) fail("solver.init_seed: expected a non-negative integer");
      s.solver.init_seed = so["init_seed"].get<std::uint64_t>();
    }
  }

  if (j.contains("sdr")) {
    const auto& sd = j["sdr"];
    if (!sd.is_object()) fail("sdr: expected an object");
    reject_unknown(sd, "sdr.", {"tolerance", "trials", "diagonal", "max_iterations"});
    if (sd.contains("tolerance"))
      s.sdr.options.tolerance = get_number(sd["tolerance"], "sdr.tolerance");
    if (sd.contains("trials")) s.sdr.trials = get_int(sd["trials"], "sdr.trials");
    if (sd.contains("diagonal")) {
      if (sd["diagonal"] == "at_most_one")
        s.sdr.options.diagonal = sdr::Diagonal::at_most_one;
      else if (sd["diagonal"] == "equal_one")
        s.sdr.options.diagonal = sdr::Diagonal::equal_one;
      else
        fail("sdr.diagonal: expected at_most_one or equal_one");
    }
    if (sd.contains("max_iterations"))
      s.sdr.options.max_iterations = get_int(sd["max_iterations"], "sdr.max_iterations");
  }

  if (j.contains("oracle")) {
    const auto& o = j["oracle"];
    if (!o.is_object()) fail("oracle: expected an object");
    reject_unknown(o, "oracle.", {"phases", "radius_levels", "budget"});
    if (o.contains("phases")) s.oracle.phases = get_int(o["phases"], "oracle.phases");
    if (o.contains("radius_levels"))
      s.oracle.radius_levels = get_int(o["radius_levels"], "oracle.radius_levels");
    if (o.contains("budget")) s.oracle.budget = get_number(o["budget"], "oracle.budget");
  }

  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) fail("output_dir: expected a string");
    s.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("traces")) {
    if (!j["traces"].is_boolean()) fail("traces: expected true or false");
    s.traces = j["traces"].get<bool>();
  }
  return s;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read spec file " + path.string());
  io::Json j;
  try {
    j = io::Json::parse(in);
  } catch (const io::Json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return parse_spec(j);
}

void check(const ExperimentSpec& s) {
  if (s.methods.empty()) fail("methods: at least one method is required");
  if (s.seeds.empty()) fail("seeds: at least one seed is required");
  for (int v : s.values()) {
    if (s.sweep_var == SweepVar::elements && v < 0) fail("sweep.values: N must be >= 0");
    if (s.sweep_var == SweepVar::users && v < 1) fail("sweep.values: K must be >= 1");
  }
  s.solver.validate();
  for (int v : s.values()) s.scenario_for(v, 0).validate();

  const bool wants_sdr = s.has(Method::sdr_scheme1) || s.has(Method::sdr_scheme2);
  if (wants_sdr && s.mode != BeamMode::multicast)
    fail("methods: sdr+scheme1/sdr+scheme2 are only available in multicast mode");
  if (wants_sdr) {
    if (!(s.sdr.options.tolerance > 0.0)) fail("sdr.tolerance: must be > 0");
    if (s.sdr.trials < 1) fail("sdr.trials: must be >= 1");
    if (s.sdr.options.max_iterations < 1) fail("sdr.max_iterations: must be >= 1");
  }
  if (s.mode == BeamMode::downlink)
    for (int v : s.values()) {
      const auto c = s.scenario_for(v, 0);
      if (c.users > c.antennas)
        fail("scenario.users: zero-forcing beams need users <= antennas (K=" +
             std::to_string(c.users) + ", M=" + std::to_string(c.antennas) + ")");
    }
  if (s.has(Method::oracle)) {
    for (int v : s.values()) {
      const int n = s.scenario_for(v, 0).elements;
      for (Regime r : {Regime::disk, Regime::circle}) {
        oracle::GridSpec g{s.oracle.phases, r, s.oracle.radius_levels, s.oracle.budget};
        try {
          g.check(n);
        } catch (const std::length_error& e) {
          throw std::length_error(std::string("oracle: ") + e.what() + " (" +
                                  std::string(irsbf::to_string(r)) + " regime)");
        }
      }
    }
  }
}

io::Json effective_config(const ExperimentSpec& s) {
  io::Json j;
  j["scenario"] = io::scenario_to_json(s.scenario);
  j["mode"] = std::string(irsbf::to_string(s.mode));
  io::Json methods = io::Json::array();
  for (Method m : s.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["sweep"] = {{"variable", to_string(s.sweep_var)}, {"values", s.values()}};
  j["seeds"] = s.seeds;
  j["solver"] = {{"rho", s.solver.rho},
                 {"inner_max_iters", s.solver.inner_max_iters},
                 {"outer_iters", s.solver.outer_iters},
                 {"tolerance", s.solver.tolerance},
                 {"init", s.solver.init == InitMode::zeros ? "zeros" : "random_phase"},
                 {"init_seed", s.solver.init_seed}};
  j["sdr"] = {{"tolerance", s.sdr.options.tolerance},
              {"trials", s.sdr.trials},
              {"diagonal", s.sdr.options.diagonal == sdr::Diagonal::at_most_one ? "at_most_one"
                                                                                 : "equal_one"},
              {"max_iterations", s.sdr.options.max_iterations}};
  j["oracle"] = {{"phases", s.oracle.phases},
                 {"radius_levels", s.oracle.radius_levels},
                 {"budget", s.oracle.budget}};
  j["output_dir"] = s.output_dir.string();
  j["traces"] = s.traces;
  return j;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Scheme-1 draws use their own stream so they never alias the channel draws.
constexpr std::uint64_t kRandomizationSalt = 0x9E3779B97F4A7C15ull;

}  // namespace

CellResult run_cell(const ExperimentSpec& spec, int value, std::uint64_t seed) {
  CellResult cell;
  const ScenarioConfig cfg = spec.scenario_for(value, seed);
  const ChannelSet cs = generate_scenario(cfg);
  const TransmitBeams beams = spec.mode == BeamMode::multicast
                                  ? mrt_multicast(cs, cfg.transmit_power_w)
                                  : zf_downlink(cs, cfg.transmit_power_w);

  auto row = [&](Method m, Regime r, double metric, long iters, bool conv, double t) {
    ResultRow x;
    x.method = m;
    x.regime = r;
    x.value = value;
    x.seed = seed;
    x.min_metric = metric;
    x.iterations = iters;
    x.converged = conv;
    x.wall_time_s = t;
    return x;
  };

  for (Method m : {Method::admm, Method::oracle}) {
    if (!spec.has(m)) continue;
    if (m == Method::admm) {
      SolverConfig sc = spec.solver;
      sc.init_seed = spec.solver.init_seed + seed;
      sc.record_trace = spec.traces;
      const auto t0 = Clock::now();
      cell.admm = spec.mode == BeamMode::multicast ? multicast::solve(cs, beams.common(), sc)
                                                   : downlink::solve_dl(cs, beams, sc);
      const double t = seconds_since(t0);
      const auto& rep = cell.admm;
      cell.rows.push_back(row(m, Regime::disk, rep.min_metric_disk, rep.total_inner_iterations,
                              rep.converged, t));
      cell.rows.push_back(row(m, Regime::circle, rep.min_metric_circle,
                              rep.total_inner_iterations, rep.converged, t));
    } else {
      for (Regime r : {Regime::disk, Regime::circle}) {
        oracle::GridSpec g{spec.oracle.phases, r, spec.oracle.radius_levels, spec.oracle.budget};
        const auto t0 = Clock::now();
        const auto res = oracle::grid_search(cs, beams, g);
        cell.rows.push_back(row(m, r, res.value, static_cast<long>(res.points), true,
                                seconds_since(t0)));
      }
    }
  }

  const bool s1 = spec.has(Method::sdr_scheme1), s2 = spec.has(Method::sdr_scheme2);
  if (s1 || s2) {
    const auto aff = multicast::precompute_affine(cs, beams.common());
    const auto prob = sdr::build(aff);
    const auto t0 = Clock::now();
    const auto sol = sdr::solve(prob, spec.sdr.options);
    const double t_sdr = seconds_since(t0);
    const long steps = sol.iterations;
    // Recovered phases are unit-modulus, so they score identically in both regimes.
    auto emit = [&](Method m, const ReflectCoeffs& phi, double t) {
      const double v = min_metric(cs, phi.values(), beams);
      for (Regime r : {Regime::disk, Regime::circle})
        cell.rows.push_back(row(m, r, v, steps, sol.converged, t));
    };
    if (s1) {
      const auto t1 = Clock::now();
      const auto phi = sdr::recover_scheme1(sol.psi, prob, spec.sdr.trials, seed ^ kRandomizationSalt);
      emit(Method::sdr_scheme1, phi, t_sdr + seconds_since(t1));
    }
    if (s2) {
      const auto t1 = Clock::now();
      const auto phi = sdr::recover_scheme2(sol.psi);
      emit(Method::sdr_scheme2, phi, t_sdr + seconds_since(t1));
    }
    const double slack = spec.sdr.options.tolerance * sol.upper_bound;
    for (auto& r : cell.rows) {
      r.sdr_bound = sol.gamma;
      r.has_sdr_bound = true;
      if (r.method == Method::admm)
        r.dominance_ok = r.min_metric <= sol.gamma + slack + 1e-12 * std::abs(sol.gamma) ? 1 : 0;
    }
  }

  std::stable_sort(cell.rows.begin(), cell.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return static_cast<int>(a.method) < static_cast<int>(b.method);
  });
  return cell;
}

void write_results_csv(std::ostream& os, const ExperimentSpec& spec,
                       const std::vector<ResultRow>& rows) {
  os << "method,regime,sweep_var,value,seed,min_metric,iterations,converged,sdr_bound,dominance_ok\n";
  const std::string var = to_string(spec.sweep_var);
  for (const auto& r : rows) {
    os << to_string(r.method) << ',' << irsbf::to_string(r.regime) << ',' << var << ',' << r.value
       << ',' << r.seed << ',' << io::format_double(r.min_metric) << ',' << r.iterations << ','
       << (r.converged ? 1 : 0) << ',';
    if (r.has_sdr_bound) os << io::format_double(r.sdr_bound);
    os << ',';
    if (r.dominance_ok >= 0) os << r.dominance_ok;
    os << '\n';
  }
}

void write_timings_csv(std::ostream& os, const ExperimentSpec& spec,
                       const std::vector<ResultRow>& rows) {
  os << "method,regime,sweep_var,value,seed,wall_time_s\n";
  const std::string var = to_string(spec.sweep_var);
  for (const auto& r : rows)
    os << to_string(r.method) << ',' << irsbf::to_string(r.regime) << ',' << var << ',' << r.value
       << ',' << r.seed << ',' << io::format_double(r.wall_time_s) << '\n';
}

void write_summary(std::ostream& os, const ExperimentSpec& spec,
                   const std::vector<ResultRow>& rows) {
  struct Acc {
    int n = 0;
    double metric = 0.0, time = 0.0;
    int converged = 0, dominance_fail = 0;
  };
  std::map<std::tuple<int, int, int>, Acc> acc;
  for (const auto& r : rows) {
    auto& a = acc[{r.value, static_cast<int>(r.method), static_cast<int>(r.regime)}];
    ++a.n;
    a.metric += r.min_metric;
    a.time += r.wall_time_s;
    a.converged += r.converged ? 1 : 0;
    a.dominance_fail += r.dominance_ok == 0 ? 1 : 0;
  }
  const std::string var = to_string(spec.sweep_var);
  os << "mode: " << irsbf::to_string(spec.mode) << ", " << spec.seeds.size()
     << " seed(s) per point\n";
  os << "wall time covers the solver call only; SDR rows include the SDP solve and the recovery step\n\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-4s %6s  %-12s %-7s %14s %12s %9s\n", var.c_str(), "value",
                "method", "regime", "mean_metric", "mean_time_s", "converged");
  os << buf;
  for (const auto& [key, a] : acc) {
    const auto [value, method, regime] = key;
    std::snprintf(buf, sizeof buf, "%-4s %6d  %-12s %-7s %14.6g %12.4g %5d/%-3d\n", var.c_str(),
                  value, to_string(static_cast<Method>(method)).c_str(),
                  std::string(irsbf::to_string(static_cast<Regime>(regime))).c_str(),
                  a.metric / a.n, a.time / a.n, a.converged, a.n);
    os << buf;
    if (a.dominance_fail > 0)
      os << "  warning: ADMM exceeded the SDR bound on " << a.dominance_fail << " instance(s)\n";
  }
}

int run(const ExperimentSpec& spec_in, const RunOptions& opts, std::ostream& log) {
  ExperimentSpec spec = spec_in;
  for (auto& s : spec.seeds) s += static_cast<std::uint64_t>(opts.seed_offset);
  check(spec);

  struct Task {
    int value;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (int v : spec.values())
    for (auto s : spec.seeds) tasks.push_back({v, s});

  std::vector<CellResult> results(tasks.size());
  std::atomic<size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = run_cell(spec, tasks[i].value, tasks[i].seed);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
      std::lock_guard lock(log_mutex);
      log << "[" << (i + 1) << "/" << tasks.size() << "] " << to_string(spec.sweep_var) << "="
          << tasks[i].value << " seed=" << tasks[i].seed
          << (results[i].error.empty() ? "" : " FAILED: " + results[i].error) << '\n';
    }
  };
  const int n_workers = std::clamp(opts.workers, 1, static_cast<int>(std::max<size_t>(1, tasks.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<ResultRow> rows;
  int failures = 0;
  for (const auto& r : results) {
    if (!r.error.empty()) ++failures;
    rows.insert(rows.end(), r.rows.begin(), r.rows.end());
  }

  std::filesystem::create_directories(spec.output_dir);
  auto open = [&](const std::string& name) {
    std::ofstream os(spec.output_dir / name);
    if (!os) throw std::runtime_error("cannot write " + (spec.output_dir / name).string());
    return os;
  };
  {
    auto os = open("results.csv");
    write_results_csv(os, spec, rows);
  }
  {
    auto os = open("timings.csv");
    write_timings_csv(os, spec, rows);
  }
  {
    auto os = open("summary.txt");
    write_summary(os, spec, rows);
    if (failures > 0) {
      os << '\n' << failures << " instance(s) failed:\n";
      for (size_t i = 0; i < tasks.size(); ++i)
        if (!results[i].error.empty())
          os << "  " << to_string(spec.sweep_var) << "=" << tasks[i].value
             << " seed=" << tasks[i].seed << ": " << results[i].error << '\n';
    }
  }
  if (spec.traces && spec.has(Method::admm)) {
    const auto dir = spec.output_dir / "traces";
    std::filesystem::create_directories(dir);
    for (size_t i = 0; i < tasks.size(); ++i) {
      if (!results[i].error.empty()) continue;
      std::ofstream os(dir / ("admm_" + to_string(spec.sweep_var) + std::to_string(tasks[i].value) +
                              "_seed" + std::to_string(tasks[i].seed) + ".csv"));
      io::write_trace_csv(os, results[i].admm);
    }
  }
  return failures;
}

}  // namespace irsbf::experiment
