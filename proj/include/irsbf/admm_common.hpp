#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "irsbf/types.hpp"

namespace irsbf {

enum class InitMode { zeros, random_phase };

/// Settings shared by the multicast and downlink SCA + ADMM solvers.
struct SolverConfig {
  double rho = 1.0;            // augmented-Lagrangian penalty
  int inner_max_iters = 2000;  // ADMM cap per SCA round
  int outer_iters = 5;         // SCA rounds
  double tolerance = 1e-6;     // on sqrt(primal^2 + dual^2)
  InitMode init = InitMode::zeros;
  std::uint64_t init_seed = 0;  // random_phase only
  bool record_trace = false;    // per-iteration trace in the report

  /// Throws std::invalid_argument on non-positive settings.
  void validate() const;
};

/// Residuals of one ADMM iteration.
struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double combined() const { return std::hypot(primal, dual); }
};

/// Called once per ADMM iteration with the current (phi, gamma).
using IterationObserver =
    std::function<void(int iteration, const VectorXcd& phi, double gamma, const Residuals& r)>;

/// Outcome of one convex inner problem.
struct InnerResult {
  VectorXcd phi;   // feasible (disk) point
  double gamma = 0.0;  // surrogate objective at phi
  int iterations = 0;
  bool converged = false;
  int factorizations = 0;
  Residuals final_residuals;
  std::vector<Residuals> residual_history;
};

struct IterationRecord {
  int round = 0;
  int iteration = 0;
  double gamma = 0.0;
  double min_metric = 0.0;  // true metric at the disk-projected phi
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

struct RoundRecord {
  int round = 0;
  double surrogate_gamma = 0.0;
  double min_metric = 0.0;
  int inner_iterations = 0;
  bool inner_converged = false;
};

/// Result of a full SCA solve in either mode.
struct SolveReport {
  BeamMode mode = BeamMode::multicast;
  VectorXcd phi_disk;
  VectorXcd phi_circle;
  double initial_min_metric = 0.0;
  double min_metric_disk = 0.0;
  double min_metric_circle = 0.0;
  std::vector<double> user_metric_disk;
  std::vector<double> user_metric_circle;
  std::vector<RoundRecord> rounds;
  std::vector<IterationRecord> trace;
  int total_inner_iterations = 0;
  bool converged = false;  // every inner problem met the tolerance
  double wall_time_s = 0.0;
};

/// Projection of each tau_n onto the closed unit disk.
VectorXcd update_y(const VectorXcd& tau3);

/// gamma minimizing -gamma + rho/2 ||tau6 - gamma 1||^2.
double update_gamma(const VectorXd& tau6, double rho);

/// Initial expansion point for a solve.
VectorXcd initial_phi(int elements, const SolverConfig& cfg);

}  // namespace irsbf
