#include "irsbf/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace irsbf::io {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

Point2 point_from(const Json& j, const char* key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(std::string(key) + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

double number_from(const Json& j, const std::string& key) {
  if (!j.is_number()) fail(key + ": expected a number");
  return j.get<double>();
}

int int_from(const Json& j, const std::string& key) {
  if (!j.is_number_integer()) fail(key + ": expected an integer");
  return j.get<int>();
}

}  // namespace

ScenarioConfig scenario_from_json(const Json& j) {
  if (!j.is_object()) fail("scenario: expected an object");
  ScenarioConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "antennas") {
      c.antennas = int_from(v, key);
    } else if (key == "elements") {
      c.elements = int_from(v, key);
    } else if (key == "users") {
      c.users = int_from(v, key);
    } else if (key == "transmit_power_dbm") {
      c.transmit_power_w = dbm_to_watt(number_from(v, key));
    } else if (key == "noise_power_dbm") {
      c.noise_power_w.clear();
      if (v.is_array()) {
        if (v.empty()) fail(key + ": empty list");
        for (const auto& x : v) c.noise_power_w.push_back(dbm_to_watt(number_from(x, key)));
      } else {
        c.noise_power_w.push_back(dbm_to_watt(number_from(v, key)));
      }
    } else if (key == "bs_position") {
      c.bs_position = point_from(v, "bs_position");
    } else if (key == "irs_position") {
      c.irs_position = point_from(v, "irs_position");
    } else if (key == "user_region") {
      if (!v.is_object()) fail(key + ": expected {x_min, x_max, y_min, y_max}");
      for (const auto& [rk, rv] : v.items()) {
        const double x = number_from(rv, key + "." + rk);
        if (rk == "x_min") c.user_region.x_min = x;
        else if (rk == "x_max") c.user_region.x_max = x;
        else if (rk == "y_min") c.user_region.y_min = x;
        else if (rk == "y_max") c.user_region.y_max = x;
        else fail(key + "." + rk + ": unknown key");
      }
    } else if (key == "pathloss_exponents") {
      if (!v.is_object()) fail(key + ": expected {bs_irs, bs_user, irs_user}");
      for (const auto& [pk, pv] : v.items()) {
        const double x = number_from(pv, key + "." + pk);
        if (pk == "bs_irs") c.pathloss.bs_irs = x;
        else if (pk == "bs_user") c.pathloss.bs_user = x;
        else if (pk == "irs_user") c.pathloss.irs_user = x;
        else fail(key + "." + pk + ": unknown key");
      }
    } else if (key == "rng_seed") {
      if (!v.is_number_unsigned()) fail(key + ": expected a non-negative integer");
      c.rng_seed = v.get<std::uint64_t>();
    } else {
      fail(key + ": unknown key");
    }
  }
  c.validate();
  return c;
}

Json scenario_to_json(const ScenarioConfig& c) {
  Json j;
  j["antennas"] = c.antennas;
  j["elements"] = c.elements;
  j["users"] = c.users;
  j["transmit_power_dbm"] = watt_to_dbm(c.transmit_power_w);
  if (c.noise_power_w.size() == 1) {
    j["noise_power_dbm"] = watt_to_dbm(c.noise_power_w.front());
  } else {
    Json arr = Json::array();
    for (double w : c.noise_power_w) arr.push_back(watt_to_dbm(w));
    j["noise_power_dbm"] = arr;
  }
  j["bs_position"] = {c.bs_position.x, c.bs_position.y};
  j["irs_position"] = {c.irs_position.x, c.irs_position.y};
  j["user_region"] = {{"x_min", c.user_region.x_min},
                      {"x_max", c.user_region.x_max},
                      {"y_min", c.user_region.y_min},
                      {"y_max", c.user_region.y_max}};
  j["pathloss_exponents"] = {{"bs_irs", c.pathloss.bs_irs},
                             {"bs_user", c.pathloss.bs_user},
                             {"irs_user", c.pathloss.irs_user}};
  j["rng_seed"] = c.rng_seed;
  return j;
}

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

void put(std::ostream& os, const char* tag, long i, long j, Complex v) {
  os << tag << ' ' << i << ' ' << j << ' ' << format_double(v.real()) << ' '
     << format_double(v.imag()) << '\n';
}

struct LineReader {
  explicit LineReader(std::istream& in) : is(in) {}

  std::istream& is;
  int line_no = 0;
  std::string line;

  // Next non-blank line that is not a comment.
  bool next(std::istringstream& ss) {
    while (std::getline(is, line)) {
      ++line_no;
      const auto p = line.find_first_not_of(" \t\r");
      if (p == std::string::npos || line[p] == '#') continue;
      ss.clear();
      ss.str(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void error(const std::string& what) const {
    fail("line " + std::to_string(line_no) + ": " + what);
  }

  void expect_header(const std::string& header) {
    if (!std::getline(is, line)) fail("empty input");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) error("expected header '" + header + "'");
  }
};

void check_index(const LineReader& r, long i, long n, const char* what) {
  if (i < 0 || i >= n) r.error(std::string(what) + " index out of range");
}

}  // namespace

void write_channels(std::ostream& os, const ChannelSet& cs) {
  cs.validate();
  const int M = cs.antennas(), N = cs.elements(), K = cs.users();
  os << "# irsbf-channels v1\n";
  os << "dims " << M << ' ' << N << ' ' << K << '\n';
  for (int k = 0; k < K; ++k) os << "noise " << k << ' ' << format_double(cs.noise[k]) << '\n';
  for (int k = 0; k < static_cast<int>(cs.user_positions.size()); ++k)
    os << "pos " << k << ' ' << format_double(cs.user_positions[k].x) << ' '
       << format_double(cs.user_positions[k].y) << '\n';
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < M; ++m) put(os, "f", k, m, cs.f[k][m]);
  for (int k = 0; k < K; ++k)
    for (int n = 0; n < N; ++n) put(os, "h", k, n, cs.h[k][n]);
  for (int n = 0; n < N; ++n)
    for (int m = 0; m < M; ++m) put(os, "G", n, m, cs.G(n, m));
}

ChannelSet read_channels(std::istream& is) {
  LineReader r{is};
  r.expect_header("# irsbf-channels v1");
  std::istringstream ss;
  std::string tag;
  long M = -1, N = -1, K = -1;
  if (!r.next(ss) || !(ss >> tag >> M >> N >> K) || tag != "dims") r.error("expected 'dims M N K'");
  if (M < 1 || N < 0 || K < 1) r.error("invalid dims");

  ChannelSet cs;
  cs.G = MatrixXcd::Zero(N, M);
  cs.f.assign(K, VectorXcd::Zero(M));
  cs.h.assign(K, VectorXcd::Zero(N));
  cs.noise.assign(K, 0.0);
  std::vector<Point2> pos(K);
  bool any_pos = false;
  while (r.next(ss)) {
    if (!(ss >> tag)) r.error("missing tag");
    long i = 0, j = 0;
    double a = 0.0, b = 0.0;
    if (tag == "noise") {
      if (!(ss >> i >> a)) r.error("expected 'noise k value'");
      check_index(r, i, K, "user");
      cs.noise[i] = a;
    } else if (tag == "pos") {
      if (!(ss >> i >> a >> b)) r.error("expected 'pos k x y'");
      check_index(r, i, K, "user");
      pos[i] = {a, b};
      any_pos = true;
    } else if (tag == "f" || tag == "h" || tag == "G") {
      if (!(ss >> i >> j >> a >> b)) r.error("expected '" + tag + " i j re im'");
      if (tag == "f") {
        check_index(r, i, K, "user");
        check_index(r, j, M, "antenna");
        cs.f[i][j] = {a, b};
      } else if (tag == "h") {
        check_index(r, i, K, "user");
        check_index(r, j, N, "element");
        cs.h[i][j] = {a, b};
      } else {
        check_index(r, i, N, "element");
        check_index(r, j, M, "antenna");
        cs.G(i, j) = {a, b};
      }
    } else {
      r.error("unknown tag '" + tag + "'");
    }
  }
  if (any_pos) cs.user_positions = pos;
  cs.validate();
  return cs;
}

void save_channels(const std::filesystem::path& path, const ChannelSet& cs) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_channels(os, cs);
}

ChannelSet load_channels(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return read_channels(is);
}

void write_beams(std::ostream& os, const TransmitBeams& beams) {
  const long J = static_cast<long>(beams.vectors.size());
  const long M = J > 0 ? beams.vectors.front().size() : 0;
  os << "# irsbf-beams v1\n";
  os << "mode " << to_string(beams.mode) << '\n';
  os << "dims " << M << ' ' << J << '\n';
  for (long j = 0; j < J; ++j)
    for (long m = 0; m < M; ++m) put(os, "b", j, m, beams.vectors[j][m]);
}

TransmitBeams read_beams(std::istream& is) {
  LineReader r{is};
  r.expect_header("# irsbf-beams v1");
  std::istringstream ss;
  std::string tag, mode;
  TransmitBeams beams;
  if (!r.next(ss) || !(ss >> tag >> mode) || tag != "mode") r.error("expected 'mode ...'");
  if (mode == "multicast") beams.mode = BeamMode::multicast;
  else if (mode == "downlink") beams.mode = BeamMode::downlink;
  else r.error("unknown mode '" + mode + "'");
  long M = -1, J = -1;
  if (!r.next(ss) || !(ss >> tag >> M >> J) || tag != "dims") r.error("expected 'dims M J'");
  if (M < 1 || J < 1) r.error("invalid dims");
  beams.vectors.assign(J, VectorXcd::Zero(M));
  while (r.next(ss)) {
    long j = 0, m = 0;
    double a = 0.0, b = 0.0;
    if (!(ss >> tag >> j >> m >> a >> b) || tag != "b") r.error("expected 'b j m re im'");
    check_index(r, j, J, "beam");
    check_index(r, m, M, "antenna");
    beams.vectors[j][m] = {a, b};
  }
  return beams;
}

namespace {

Json complex_array(const VectorXcd& v) {
  Json arr = Json::array();
  for (const auto& c : v) arr.push_back({c.real(), c.imag()});
  return arr;
}

}  // namespace

Json report_to_json(const SolveReport& rep) {
  Json j;
  j["mode"] = std::string(to_string(rep.mode));
  j["initial_min_metric"] = rep.initial_min_metric;
  j["min_metric_disk"] = rep.min_metric_disk;
  j["min_metric_circle"] = rep.min_metric_circle;
  j["user_metric_disk"] = rep.user_metric_disk;
  j["user_metric_circle"] = rep.user_metric_circle;
  j["total_inner_iterations"] = rep.total_inner_iterations;
  j["converged"] = rep.converged;
  j["wall_time_s"] = rep.wall_time_s;
  Json rounds = Json::array();
  for (const auto& r : rep.rounds)
    rounds.push_back({{"round", r.round},
                      {"surrogate_gamma", r.surrogate_gamma},
                      {"min_metric", r.min_metric},
                      {"inner_iterations", r.inner_iterations},
                      {"inner_converged", r.inner_converged}});
  j["rounds"] = rounds;
  j["phi_disk"] = complex_array(rep.phi_disk);
  j["phi_circle"] = complex_array(rep.phi_circle);
  return j;
}

void write_trace_csv(std::ostream& os, const SolveReport& rep) {
  os << "round,iteration,gamma,min_metric,primal_residual,dual_residual\n";
  for (const auto& t : rep.trace)
    os << t.round << ',' << t.iteration << ',' << format_double(t.gamma) << ','
       << format_double(t.min_metric) << ',' << format_double(t.primal_residual) << ','
       << format_double(t.dual_residual) << '\n';
}

}  // namespace irsbf::io
