#pragma once

#include <vector>

#include "irsbf/admm_common.hpp"
#include "irsbf/scene.hpp"

namespace irsbf::downlink {

/// sigma-normalized per-pair coefficients:
///   alpha_{k,j} = conj(h_k) .* (G b_j) / sigma_k,  beta_{k,j} = b_j^H f_k / sigma_k
/// so that SINR_k = |alpha_{k,k}^H phi + beta_{k,k}|^2 / (1 + ||Lambda_k^H phi + beta_hat_k||^2).
struct Affine {
  std::vector<MatrixXcd> alpha;      // alpha[k]: N x K, column j is alpha_{k,j}
  MatrixXcd beta;                    // K x K, beta(k, j) = beta_{k,j}
  std::vector<MatrixXcd> lambda;     // lambda[k]: N x (K-1), interfering columns of alpha[k]
  std::vector<VectorXcd> beta_hat;   // beta_hat[k]: K-1 interfering entries of row k of beta

  int elements() const { return alpha.empty() ? 0 : static_cast<int>(alpha.front().rows()); }
  int users() const { return static_cast<int>(beta.rows()); }

  Complex signal_amplitude(int k, const VectorXcd& phi) const;
  double interference(int k, const VectorXcd& phi) const;  // ||Lambda_k^H phi + beta_hat_k||^2
  double sinr(int k, const VectorXcd& phi) const;
  VectorXd sinr(const VectorXcd& phi) const;
  double min_sinr(const VectorXcd& phi) const;
  /// Quadratic-over-linear numerator term d_k(phi, gamma) = |alpha_kk^H phi + beta_kk|^2 / gamma.
  double quad_over_lin(int k, const VectorXcd& phi, double gamma) const;
};

Affine precompute_affine(const ChannelSet& cs, const TransmitBeams& beams);

/// Convex restriction of the SINR constraints at (phi_e, gamma_e):
///   2 Re{t_hat_k^H phi} + s_hat_k >= q_k gamma + ||Lambda_k^H phi + beta_hat_k||^2
struct Linearization {
  MatrixXcd t_hat;               // N x K, column k is t_hat_k
  VectorXd s_hat;                // K
  VectorXd q;                    // K, >= 0
  std::vector<MatrixXcd> T;      // T[k] = [t_hat_k, Lambda_k], N x K
  std::vector<VectorXcd> beta_hat;
  VectorXcd expansion;
  double expansion_gamma = 0.0;

  int elements() const { return static_cast<int>(t_hat.rows()); }
  int users() const { return static_cast<int>(t_hat.cols()); }

  /// Left side minus right side of user k's restricted constraint.
  double constraint(int k, const VectorXcd& phi, double gamma) const;
  /// Largest gamma that keeps every restricted constraint satisfied at phi.
  double max_gamma(const VectorXcd& phi) const;
};

/// Throws std::domain_error("infeasible expansion point") unless gamma_e > 0.
Linearization linearize_dl(const Affine& aff, const VectorXcd& phi_e, double gamma_e);

/// Data of g_hat(mu) on the infeasible branch of the (x_k, z_k) projection:
///   g_hat(mu) = 2 (Re tau_11 + mu) + s_hat - q (tau_2 - mu q / 2) - c / (1 + mu)^2
struct CubicData {
  double re_tau11 = 0.0;
  double s_hat = 0.0;
  double q = 0.0;
  double tau2 = 0.0;
  double c = 0.0;  // ||tau_1,rest + beta_hat||^2
};

double g_hat(const CubicData& d, double mu);
double g_hat_derivative(const CubicData& d, double mu);

/// Unique positive root of g_hat; requires g_hat(0) < 0.
/// Safeguarded Newton inside a doubling bracket [0, mu_hi].
double cubic_root(const CubicData& d);

struct XzPoint {
  VectorXcd x;  // K
  double z;
  double mu;  // 0 on the feasible branch
};

/// Projection of (tau1, tau2) onto {(x, z) : 2 Re x_1 + s_hat - q z - ||x_rest + beta_hat||^2 >= 0}.
XzPoint update_xz_dl(const VectorXcd& tau1, double tau2, double s_hat, double q,
                     const VectorXcd& beta_hat);

/// phi = (I + sum_k T_k T_k^H)^-1 (tau5 + sum_k T_k tau4_k).
VectorXcd update_phi_dl(const std::vector<MatrixXcd>& T, const std::vector<VectorXcd>& tau4,
                        const VectorXcd& tau5);

struct AdmmState {
  std::vector<VectorXcd> x;  // K blocks of length K
  VectorXcd y;
  VectorXd z;
  VectorXcd phi;
  double gamma = 0.0;
  std::vector<VectorXcd> u;
  VectorXcd v;
  VectorXd w;
};

/// Returns the best disk-feasible iterate by max_gamma, seeded with the expansion point.
InnerResult solve_inner_dl(const Linearization& lin, const SolverConfig& cfg,
                           const IterationObserver& observer = {});

/// Lower bound on gamma_e for the first linearization.
inline constexpr double kGammaFloor = 1e-6;

SolveReport solve_dl(const ChannelSet& cs, const TransmitBeams& beams, const SolverConfig& cfg);

}  // namespace irsbf::downlink
