#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "irsbf/experiment.hpp"

using namespace irsbf;
using namespace irsbf::experiment;
using Catch::Approx;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const char* text) {
  try {
    check(parse_spec(io::Json::parse(text)));
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(cells);
  }
  return rows;
}

const char* kSmall = R"({
  "scenario": {"antennas": 4, "users": 2},
  "mode": "multicast",
  "methods": ["admm", "sdr+scheme1", "sdr+scheme2", "oracle"],
  "sweep": {"variable": "N", "values": [0, 2]},
  "seeds": [3, 4],
  "sdr": {"trials": 200},
  "oracle": {"phases": 16}
})";

}  // namespace

TEST_CASE("spec validation errors") {
  CHECK(error_of(R"({"methods": ["admm"]})").find("mode") != std::string::npos);
  CHECK(error_of(R"({"mode": "multicast", "methods": []})").find("methods") != std::string::npos);
  CHECK(error_of(R"({"mode": "broadcast", "methods": ["admm"]})").find("mode") !=
        std::string::npos);
  CHECK(error_of(R"({"mode": "multicast", "methods": ["magic"]})").find("magic") !=
        std::string::npos);
  CHECK(error_of(R"({"mode": "downlink", "methods": ["sdr+scheme1"]})").find("multicast") !=
        std::string::npos);
  CHECK(error_of(R"({"mode": "multicast", "methods": ["oracle"], "sweep": {"values": [10]}})")
            .find("budget") != std::string::npos);
  CHECK(error_of(R"({"mode": "multicast", "methods": ["admm"], "sweep": {"values": [-1]}})")
            .find("sweep") != std::string::npos);
  CHECK(error_of(R"({"mode": "multicast", "methods": ["admm"], "solver": {"rho": -1}})")
            .find("rho") != std::string::npos);
  CHECK(error_of(R"({"mode": "multicast", "methods": ["admm"], "extra": 1})").find("extra") !=
        std::string::npos);
  CHECK(error_of(R"({"mode": "downlink", "methods": ["admm"], "scenario": {"antennas": 2, "users": 4}})")
            .find("users") != std::string::npos);
}

TEST_CASE("effective config carries the defaults") {
  const auto spec = parse_spec(io::Json::parse(R"({"mode": "multicast", "methods": ["admm"]})"));
  CHECK_NOTHROW(check(spec));
  const auto j = effective_config(spec);
  CHECK(j["scenario"]["noise_power_dbm"].get<double>() == Approx(-40.0));
  CHECK(j["scenario"]["transmit_power_dbm"].get<double>() == Approx(10.0));
  CHECK(j["scenario"]["antennas"] == 30);
  CHECK(j["scenario"]["users"] == 15);
  CHECK(j["seeds"].size() == 50u);
  CHECK(j["solver"]["inner_max_iters"] == 2000);
  CHECK(j["solver"]["outer_iters"] == 5);
  CHECK(j["sdr"]["trials"] == 10000);
}

TEST_CASE("run writes deterministic results") {
  const auto base = std::filesystem::temp_directory_path() / "irsbf_experiment_test";
  std::filesystem::remove_all(base);
  auto spec = parse_spec(io::Json::parse(kSmall));

  std::ostringstream log;
  spec.output_dir = base / "a";
  CHECK(run(spec, {1, 0}, log) == 0);
  spec.output_dir = base / "b";
  CHECK(run(spec, {3, 0}, log) == 0);

  const auto a = slurp(base / "a" / "results.csv");
  CHECK(a == slurp(base / "b" / "results.csv"));
  CHECK(std::filesystem::exists(base / "a" / "timings.csv"));
  CHECK(slurp(base / "a" / "summary.txt").find("mean_metric") != std::string::npos);

  const auto rows = csv_rows(a);
  REQUIRE(rows.size() == 1 + 2 * 2 * 4 * 2);
  CHECK(a.rfind("method,regime,sweep_var,value,seed,min_metric,iterations,converged,sdr_bound,"
                "dominance_ok\n",
                0) == 0);

  // With no IRS every method scores the direct-link value.
  for (std::uint64_t seed : {3u, 4u}) {
    std::vector<double> at_zero;
    for (size_t i = 1; i < rows.size(); ++i)
      if (rows[i][3] == "0" && rows[i][4] == std::to_string(seed))
        at_zero.push_back(std::stod(rows[i][5]));
    REQUIRE(at_zero.size() == 8u);
    for (double v : at_zero) CHECK(v == Approx(at_zero.front()).epsilon(1e-12));
  }
  for (size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 10u);
    CHECK(!rows[i][8].empty());
    if (rows[i][0] == "admm")
      CHECK(rows[i][9] == "1");
    else
      CHECK(rows[i][9].empty());
  }

  spec.output_dir = base / "c";
  CHECK(run(spec, {1, 10}, log) == 0);
  const auto shifted = csv_rows(slurp(base / "c" / "results.csv"));
  CHECK(shifted[1][4] == "13");
  std::filesystem::remove_all(base);
}

TEST_CASE("traces are written on request") {
  const auto base = std::filesystem::temp_directory_path() / "irsbf_trace_test";
  std::filesystem::remove_all(base);
  auto spec = parse_spec(io::Json::parse(R"({
    "scenario": {"antennas": 4, "users": 2, "elements": 3},
    "mode": "downlink", "methods": ["admm"], "seeds": [1], "traces": true
  })"));
  spec.output_dir = base;
  std::ostringstream log;
  CHECK(run(spec, {}, log) == 0);
  CHECK(std::filesystem::exists(base / "traces" / "admm_N3_seed1.csv"));
  std::filesystem::remove_all(base);
}
