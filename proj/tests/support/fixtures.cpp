#include "support/fixtures.hpp"

#include <numbers>

#include "irsbf/beamformers.hpp"

namespace fixtures {

ScenarioConfig config(int M, int N, int K, std::uint64_t seed) {
  ScenarioConfig c;
  c.antennas = M;
  c.elements = N;
  c.users = K;
  c.rng_seed = seed;
  return c;
}

Instance multicast_instance(int M, int N, int K, std::uint64_t seed) {
  const auto c = config(M, N, K, seed);
  Instance in{generate_scenario(c), {}};
  in.beams = mrt_multicast(in.cs, c.transmit_power_w);
  return in;
}

Instance downlink_instance(int M, int N, int K, std::uint64_t seed) {
  const auto c = config(M, N, K, seed);
  Instance in{generate_scenario(c), {}};
  in.beams = zf_downlink(in.cs, c.transmit_power_w);
  return in;
}

VectorXcd random_complex(std::mt19937_64& rng, Eigen::Index n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  VectorXcd v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

VectorXcd random_disk(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorXcd v(n);
  for (auto& x : v) x = std::polar(std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng));
  return v;
}

VectorXd random_real(std::mt19937_64& rng, Eigen::Index n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  VectorXd v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace fixtures
