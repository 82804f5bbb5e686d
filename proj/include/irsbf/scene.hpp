#pragma once

#include <cstdint>
#include <vector>

#include "irsbf/types.hpp"

namespace irsbf {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Rect {
  double x_min = -20.0;
  double x_max = 20.0;
  double y_min = -20.0;
  double y_max = 20.0;
};

struct PathlossExponents {
  double bs_irs = 3.0;
  double bs_user = 3.0;
  double irs_user = 2.0;
};

/// Problem-instance generator settings. Powers are stored in watts.
struct ScenarioConfig {
  int antennas = 30;  // M
  int elements = 32;  // N, 0 means no IRS
  int users = 15;     // K
  double transmit_power_w = dbm_to_watt(10.0);
  // One entry broadcasts to every user, otherwise exactly one per user.
  std::vector<double> noise_power_w{dbm_to_watt(-40.0)};
  Point2 bs_position{-50.0, 0.0};
  Point2 irs_position{0.0, 30.0};
  Rect user_region{};
  PathlossExponents pathloss{};
  std::uint64_t rng_seed = 0;

  double noise_power(int k) const;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// All complex channels of one instance.
///  G: N x M (BS -> IRS), h[k]: N (IRS -> user k), f[k]: M (BS -> user k).
struct ChannelSet {
  MatrixXcd G;
  std::vector<VectorXcd> h;
  std::vector<VectorXcd> f;
  std::vector<double> noise;
  std::vector<Point2> user_positions;

  int antennas() const { return f.empty() ? static_cast<int>(G.cols()) : static_cast<int>(f.front().size()); }
  int elements() const { return static_cast<int>(G.rows()); }
  int users() const { return static_cast<int>(f.size()); }

  /// Throws std::invalid_argument on inconsistent shapes or non-positive noise.
  void validate() const;
};

/// Fixed BS beams: one vector in multicast mode, one per user in downlink mode.
struct TransmitBeams {
  BeamMode mode = BeamMode::multicast;
  std::vector<VectorXcd> vectors;

  double total_power() const;
  const VectorXcd& common() const;  // multicast beam
};

/// Reflecting-coefficient vector tagged with the constraint set it satisfies.
class ReflectCoeffs {
 public:
  static constexpr double kTolerance = 1e-9;

  /// Throws std::invalid_argument if phi violates the regime.
  ReflectCoeffs(VectorXcd phi, Regime regime);

  static bool satisfies(const VectorXcd& phi, Regime regime);

  const VectorXcd& values() const { return phi_; }
  Regime regime() const { return regime_; }
  Eigen::Index size() const { return phi_.size(); }

 private:
  VectorXcd phi_;
  Regime regime_;
};

double distance(Point2 a, Point2 b);

/// Large-scale gain d^(-exponent), no reference distance.
double pathloss_gain(double distance_m, double exponent);

/// Draws one instance. Element n's BS->IRS row and IRS->user taps are drawn
/// together, so for a fixed seed the first N' < N elements of a larger
/// instance coincide with the smaller instance. Direct links are drawn first
/// and do not depend on N.
ChannelSet generate_scenario(const ScenarioConfig& config);

/// Composite row channel of user k: h_k^H Phi^H G + f_k^H (1 x M).
RowVectorXcd effective_row(const ChannelSet& cs, const VectorXcd& phi, int k);

double snr_multicast(const ChannelSet& cs, const VectorXcd& phi, const VectorXcd& b, int k);
double sinr_downlink(const ChannelSet& cs, const VectorXcd& phi, const TransmitBeams& beams,
                     int k);

/// SNR (multicast) or SINR (downlink) of every user.
std::vector<double> user_metrics(const ChannelSet& cs, const VectorXcd& phi,
                                 const TransmitBeams& beams);
double min_metric(const ChannelSet& cs, const VectorXcd& phi, const TransmitBeams& beams);

/// Radial projection onto |phi_n| = 1. Exact zeros map to 1.
VectorXcd project_unit_modulus(const VectorXcd& phi);
ReflectCoeffs project_unit_modulus(const ReflectCoeffs& phi);

/// Elementwise projection onto the closed unit disk.
VectorXcd project_disk(const VectorXcd& phi);

}  // namespace irsbf
