#include "irsbf/admm_common.hpp"

#include <numbers>
#include <random>
#include <stdexcept>

#include "irsbf/scene.hpp"

namespace irsbf {

void SolverConfig::validate() const {
  if (!(rho > 0.0)) throw std::invalid_argument("rho: must be positive");
  if (inner_max_iters < 1) throw std::invalid_argument("inner_max_iters: must be >= 1");
  if (outer_iters < 1) throw std::invalid_argument("outer_iters: must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance: must be positive");
}

VectorXcd update_y(const VectorXcd& tau3) { return project_disk(tau3); }

double update_gamma(const VectorXd& tau6, double rho) {
  const auto K = static_cast<double>(tau6.size());
  return (1.0 + rho * tau6.sum()) / (rho * K);
}

VectorXcd initial_phi(int elements, const SolverConfig& cfg) {
  if (cfg.init == InitMode::zeros) return VectorXcd::Zero(elements);
  std::mt19937_64 rng(cfg.init_seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  VectorXcd phi(elements);
  for (auto& p : phi) p = std::polar(1.0, angle(rng));
  return phi;
}

}  // namespace irsbf
