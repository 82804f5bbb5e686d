#include "irsbf/scene.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace irsbf {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument(field + ": " + what);
}

// Circularly-symmetric complex Gaussian with E|x|^2 = variance.
Complex draw_cn(std::mt19937_64& rng, std::normal_distribution<double>& normal, double variance) {
  const double scale = std::sqrt(variance / 2.0);
  const double re = normal(rng);
  const double im = normal(rng);
  return {scale * re, scale * im};
}

}  // namespace

double ScenarioConfig::noise_power(int k) const {
  return noise_power_w.size() == 1 ? noise_power_w.front() : noise_power_w.at(k);
}

void ScenarioConfig::validate() const {
  require(antennas >= 1, "antennas", "must be >= 1");
  require(elements >= 0, "elements", "must be >= 0");
  require(users >= 1, "users", "must be >= 1");
  require(transmit_power_w > 0.0 && std::isfinite(transmit_power_w), "transmit_power",
          "must be strictly positive");
  require(noise_power_w.size() == 1 || noise_power_w.size() == static_cast<size_t>(users),
          "noise_power", "needs one value or one per user");
  for (double s : noise_power_w)
    require(s > 0.0 && std::isfinite(s), "noise_power", "must be strictly positive");
  require(pathloss.bs_irs >= 0.0 && pathloss.bs_user >= 0.0 && pathloss.irs_user >= 0.0,
          "pathloss_exponents", "must be >= 0");
  require(user_region.x_max > user_region.x_min && user_region.y_max > user_region.y_min,
          "user_region", "must be a non-degenerate rectangle");
}

void ChannelSet::validate() const {
  require(!f.empty(), "f", "needs at least one user");
  const auto n = G.rows();
  const auto m = f.front().size();
  require(n == 0 || G.cols() == m, "G", "column count must equal antenna count");
  require(h.size() == f.size(), "h", "one IRS->user channel per user");
  require(noise.size() == f.size(), "noise", "one noise power per user");
  for (size_t k = 0; k < f.size(); ++k) {
    require(f[k].size() == m, "f", "length must equal antenna count");
    require(h[k].size() == n, "h", "length must equal element count");
    require(noise[k] > 0.0, "noise", "must be strictly positive");
  }
}

double TransmitBeams::total_power() const {
  double p = 0.0;
  for (const auto& v : vectors) p += v.squaredNorm();
  return p;
}

const VectorXcd& TransmitBeams::common() const {
  if (mode != BeamMode::multicast || vectors.size() != 1)
    throw std::invalid_argument("beams: expected a single multicast beam");
  return vectors.front();
}

ReflectCoeffs::ReflectCoeffs(VectorXcd phi, Regime regime) : phi_(std::move(phi)), regime_(regime) {
  if (!satisfies(phi_, regime_))
    throw std::invalid_argument(std::string("reflect coefficients violate the ") +
                                std::string(to_string(regime_)) + " constraint");
}

bool ReflectCoeffs::satisfies(const VectorXcd& phi, Regime regime) {
  for (Eigen::Index n = 0; n < phi.size(); ++n) {
    const double a = std::abs(phi[n]);
    if (regime == Regime::disk && a > 1.0 + kTolerance) return false;
    if (regime == Regime::circle && std::abs(a - 1.0) > kTolerance) return false;
  }
  return true;
}

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double pathloss_gain(double distance_m, double exponent) {
  if (distance_m <= 0.0) throw std::invalid_argument("pathloss: distance must be positive");
  return std::pow(distance_m, -exponent);
}

ChannelSet generate_scenario(const ScenarioConfig& config) {
  config.validate();
  const int M = config.antennas;
  const int N = config.elements;
  const int K = config.users;

  std::mt19937_64 rng(config.rng_seed);
  std::uniform_real_distribution<double> ux(config.user_region.x_min, config.user_region.x_max);
  std::uniform_real_distribution<double> uy(config.user_region.y_min, config.user_region.y_max);
  std::normal_distribution<double> normal(0.0, 1.0);

  ChannelSet cs;
  cs.user_positions.resize(K);
  for (auto& p : cs.user_positions) {
    p.x = ux(rng);
    p.y = uy(rng);
  }
  cs.noise.resize(K);
  for (int k = 0; k < K; ++k) cs.noise[k] = config.noise_power(k);

  cs.f.assign(K, VectorXcd(M));
  for (int k = 0; k < K; ++k) {
    const double g = pathloss_gain(distance(config.bs_position, cs.user_positions[k]),
                                   config.pathloss.bs_user);
    for (int m = 0; m < M; ++m) cs.f[k][m] = draw_cn(rng, normal, g);
  }

  const double g_bs_irs =
      pathloss_gain(distance(config.bs_position, config.irs_position), config.pathloss.bs_irs);
  std::vector<double> g_irs_user(K);
  for (int k = 0; k < K; ++k)
    g_irs_user[k] = pathloss_gain(distance(config.irs_position, cs.user_positions[k]),
                                  config.pathloss.irs_user);

  cs.G.resize(N, M);
  cs.h.assign(K, VectorXcd(N));
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < M; ++m) cs.G(n, m) = draw_cn(rng, normal, g_bs_irs);
    for (int k = 0; k < K; ++k) cs.h[k][n] = draw_cn(rng, normal, g_irs_user[k]);
  }
  return cs;
}

RowVectorXcd effective_row(const ChannelSet& cs, const VectorXcd& phi, int k) {
  if (k < 0 || k >= cs.users()) throw std::invalid_argument("effective_row: user index out of range");
  if (phi.size() != cs.elements())
    throw std::invalid_argument("effective_row: phi length must equal element count");
  RowVectorXcd row = cs.f[k].adjoint();
  if (cs.elements() > 0) {
    // h^H Phi^H = (Phi h)^H = (h .* phi)^H
    const VectorXcd reflected = cs.h[k].cwiseProduct(phi);
    row.noalias() += reflected.adjoint() * cs.G;
  }
  return row;
}

double snr_multicast(const ChannelSet& cs, const VectorXcd& phi, const VectorXcd& b, int k) {
  if (b.size() != cs.antennas()) throw std::invalid_argument("snr: beam length mismatch");
  const Complex y = (effective_row(cs, phi, k) * b)(0);
  return std::norm(y) / cs.noise[k];
}

namespace {

double sinr_from_row(const RowVectorXcd& row, const TransmitBeams& beams, int k, double noise) {
  double signal = 0.0;
  double interference = 0.0;
  for (size_t j = 0; j < beams.vectors.size(); ++j) {
    const double p = std::norm((row * beams.vectors[j])(0));
    if (static_cast<int>(j) == k)
      signal = p;
    else
      interference += p;
  }
  return signal / (noise + interference);
}

}  // namespace

double sinr_downlink(const ChannelSet& cs, const VectorXcd& phi, const TransmitBeams& beams,
                     int k) {
  if (beams.mode != BeamMode::downlink || beams.vectors.size() != static_cast<size_t>(cs.users()))
    throw std::invalid_argument("sinr: expected one downlink beam per user");
  return sinr_from_row(effective_row(cs, phi, k), beams, k, cs.noise[k]);
}

std::vector<double> user_metrics(const ChannelSet& cs, const VectorXcd& phi,
                                 const TransmitBeams& beams) {
  std::vector<double> out(cs.users());
  for (int k = 0; k < cs.users(); ++k)
    out[k] = beams.mode == BeamMode::multicast ? snr_multicast(cs, phi, beams.common(), k)
                                               : sinr_downlink(cs, phi, beams, k);
  return out;
}

double min_metric(const ChannelSet& cs, const VectorXcd& phi, const TransmitBeams& beams) {
  const auto m = user_metrics(cs, phi, beams);
  return *std::min_element(m.begin(), m.end());
}

VectorXcd project_unit_modulus(const VectorXcd& phi) {
  VectorXcd out(phi.size());
  for (Eigen::Index n = 0; n < phi.size(); ++n) {
    const double a = std::abs(phi[n]);
    out[n] = a > 0.0 ? phi[n] / a : Complex(1.0, 0.0);
  }
  return out;
}

ReflectCoeffs project_unit_modulus(const ReflectCoeffs& phi) {
  return ReflectCoeffs(project_unit_modulus(phi.values()), Regime::circle);
}

VectorXcd project_disk(const VectorXcd& phi) {
  VectorXcd out = phi;
  for (Eigen::Index n = 0; n < out.size(); ++n) {
    const double a = std::abs(out[n]);
    if (a > 1.0) out[n] /= a;
  }
  return out;
}

}  // namespace irsbf
