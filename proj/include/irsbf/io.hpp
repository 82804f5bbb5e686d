#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "irsbf/admm_common.hpp"
#include "irsbf/scene.hpp"

namespace irsbf::io {

using Json = nlohmann::ordered_json;

/// Keys: antennas, elements, users, transmit_power_dbm, noise_power_dbm (number
/// or per-user array), bs_position [x, y], irs_position [x, y], user_region
/// {x_min, x_max, y_min, y_max}, pathloss_exponents {bs_irs, bs_user, irs_user},
/// rng_seed. Missing keys keep their defaults; unknown keys are rejected.
ScenarioConfig scenario_from_json(const Json& j);
Json scenario_to_json(const ScenarioConfig& cfg);

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Line-oriented text, one entry per line:
///   # irsbf-channels v1
///   dims M N K
///   noise k value
///   pos k x y
///   f k m re im
///   h k n re im
///   G n m re im
void write_channels(std::ostream& os, const ChannelSet& cs);
ChannelSet read_channels(std::istream& is);
void save_channels(const std::filesystem::path& path, const ChannelSet& cs);
ChannelSet load_channels(const std::filesystem::path& path);

///   # irsbf-beams v1
///   mode multicast|downlink
///   dims M J
///   b j m re im
void write_beams(std::ostream& os, const TransmitBeams& beams);
TransmitBeams read_beams(std::istream& is);

Json report_to_json(const SolveReport& report);

/// Columns: round,iteration,gamma,min_metric,primal_residual,dual_residual
void write_trace_csv(std::ostream& os, const SolveReport& report);

}  // namespace irsbf::io
