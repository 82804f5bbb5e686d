#pragma once

#include "irsbf/scene.hpp"

namespace irsbf {

/// Matched filter on the noise-weighted sum of direct channels,
/// b ~ sum_k f_k / sigma_k, scaled to ||b||^2 = power.
/// Throws std::domain_error("degenerate channels") if that sum vanishes.
TransmitBeams mrt_multicast(const ChannelSet& cs, double power);

/// Zero-forcing on the direct links only: B = F (F^H F)^-1, each column then
/// rescaled to power / K. Requires M >= K and full-column-rank F.
/// Throws std::domain_error("ZF infeasible") otherwise.
///
/// The IRS path is not nulled, so interference reappears once phi != 0.
TransmitBeams zf_downlink(const ChannelSet& cs, double power);

}  // namespace irsbf
