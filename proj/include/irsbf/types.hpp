#pragma once

#include <cmath>
#include <complex>
#include <string_view>

#include <Eigen/Dense>

namespace irsbf {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::RowVectorXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Feasible set for the reflecting coefficients.
///  disk:   |phi_n| <= 1
///  circle: |phi_n| == 1
enum class Regime { disk, circle };

/// Multicast sends one common beam; downlink sends one beam per user.
enum class BeamMode { multicast, downlink };

constexpr std::string_view to_string(Regime r) { return r == Regime::disk ? "disk" : "circle"; }
constexpr std::string_view to_string(BeamMode m) {
  return m == BeamMode::multicast ? "multicast" : "downlink";
}

inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }

}  // namespace irsbf
