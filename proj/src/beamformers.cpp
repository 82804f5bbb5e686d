#include "irsbf/beamformers.hpp"

#include <stdexcept>

namespace irsbf {

TransmitBeams mrt_multicast(const ChannelSet& cs, double power) {
  if (cs.users() < 1) throw std::invalid_argument("mrt: needs at least one user");
  if (!(power > 0.0)) throw std::invalid_argument("mrt: power must be positive");
  VectorXcd b = VectorXcd::Zero(cs.antennas());
  for (int k = 0; k < cs.users(); ++k) b += cs.f[k] / std::sqrt(cs.noise[k]);
  const double norm = b.norm();
  if (!(norm > 0.0)) throw std::domain_error("degenerate channels");
  b *= std::sqrt(power) / norm;
  return {BeamMode::multicast, {b}};
}

TransmitBeams zf_downlink(const ChannelSet& cs, double power) {
  const int M = cs.antennas();
  const int K = cs.users();
  if (!(power > 0.0)) throw std::invalid_argument("zf: power must be positive");
  if (M < K) throw std::domain_error("ZF infeasible");

  MatrixXcd F(M, K);
  for (int k = 0; k < K; ++k) F.col(k) = cs.f[k];
  Eigen::ColPivHouseholderQR<MatrixXcd> qr(F);
  qr.setThreshold(1e-10);
  if (qr.rank() < K) throw std::domain_error("ZF infeasible");

  const MatrixXcd gram = F.adjoint() * F;
  const MatrixXcd B = F * gram.ldlt().solve(MatrixXcd::Identity(K, K));

  TransmitBeams beams{BeamMode::downlink, {}};
  beams.vectors.reserve(K);
  const double per_user = std::sqrt(power / K);
  for (int k = 0; k < K; ++k) {
    const double n = B.col(k).norm();
    if (!(n > 0.0)) throw std::domain_error("ZF infeasible");
    beams.vectors.emplace_back(B.col(k) * (per_user / n));
  }
  return beams;
}

}  // namespace irsbf
