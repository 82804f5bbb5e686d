#pragma once

#include "irsbf/admm_common.hpp"
#include "irsbf/scene.hpp"

namespace irsbf::multicast {

/// SNR_k(phi) = |alpha_k^H phi + beta_k|^2 with
///   alpha_k = conj(h_k) .* (G b) / sigma_k,   beta_k = b^H f_k / sigma_k.
struct Affine {
  MatrixXcd alpha;  // N x K, column k is alpha_k
  VectorXcd beta;   // K

  int elements() const { return static_cast<int>(alpha.rows()); }
  int users() const { return static_cast<int>(beta.size()); }
  VectorXcd amplitudes(const VectorXcd& phi) const;  // alpha^H phi + beta
  VectorXd snr(const VectorXcd& phi) const;
  double min_snr(const VectorXcd& phi) const;
};

Affine precompute_affine(const ChannelSet& cs, const VectorXcd& b);

/// First-order minorant of every SNR_k at phi_e:
///   SNR_k(phi) >= 2 Re{t_k^H phi} + s_k
struct Linearization {
  MatrixXcd T;  // N x K, column k is t_k
  VectorXd s;   // K
  VectorXcd expansion;

  int elements() const { return static_cast<int>(T.rows()); }
  int users() const { return static_cast<int>(T.cols()); }
  VectorXd surrogate(const VectorXcd& phi) const;
  double min_surrogate(const VectorXcd& phi) const;
};

Linearization linearize(const Affine& aff, const VectorXcd& phi_e);

/// Projection of (tau1, tau2) onto {(x, z) : z - 2 Re{x} - s <= 0}.
struct XzPoint {
  Complex x;
  double z;
};
XzPoint update_xz(Complex tau1, double tau2, double s);

struct PhiGamma {
  VectorXcd phi;
  double gamma;
};

/// Minimizer of rho/2 (||tau4 - T^H phi||^2 + ||tau5 - phi||^2 + ||tau6 - gamma 1||^2) - gamma.
/// Factors I + T T^H on every call; solve_inner keeps one factorization per round.
PhiGamma update_phi_gamma(const Linearization& lin, const VectorXcd& tau4, const VectorXcd& tau5,
                          const VectorXd& tau6, double rho);

/// ADMM state for the multicast inner problem.
struct AdmmState {
  VectorXcd x;  // K, copy of T^H phi
  VectorXcd y;  // N, copy of phi
  VectorXd z;   // K, copy of gamma 1
  VectorXcd phi;
  double gamma = 0.0;
  VectorXcd u;
  VectorXcd v;
  VectorXd w;
};

/// max gamma s.t. 2 Re{t_k^H phi} + s_k >= gamma, |phi_n| <= 1.
/// Returns the best disk-feasible iterate by surrogate value; the expansion
/// point itself is a candidate, so the result never scores below it.
InnerResult solve_inner(const Linearization& lin, const SolverConfig& cfg,
                        const IterationObserver& observer = {});

/// SCA on the max-min SNR problem with the common beam b held fixed.
SolveReport solve(const ChannelSet& cs, const VectorXcd& b, const SolverConfig& cfg);

}  // namespace irsbf::multicast
