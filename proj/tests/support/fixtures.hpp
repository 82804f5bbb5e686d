#pragma once

#include <cstdint>
#include <random>

#include "irsbf/scene.hpp"

namespace fixtures {

using namespace irsbf;

struct Instance {
  ChannelSet cs;
  TransmitBeams beams;
};

/// Default geometry and powers with the given sizes.
ScenarioConfig config(int M, int N, int K, std::uint64_t seed);

/// MRT multicast beam at the configured power.
Instance multicast_instance(int M, int N, int K, std::uint64_t seed);
/// ZF downlink beams at the configured power.
Instance downlink_instance(int M, int N, int K, std::uint64_t seed);

VectorXcd random_complex(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0);
/// Uniform on the unit disk, elementwise.
VectorXcd random_disk(std::mt19937_64& rng, Eigen::Index n);
VectorXd random_real(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0);

}  // namespace fixtures
