#pragma once

#include <cstdint>
#include <vector>

#include "irsbf/multicast.hpp"
#include "irsbf/scene.hpp"

namespace irsbf::sdr {

/// Lifted multicast problem: with phi_bar = [phi; 1] and
/// alpha_bar_k = [alpha_k; conj(beta_k)], SNR_k = Tr(Psi Xi_k) where
/// Psi = phi_bar phi_bar^H and Xi_k = alpha_bar_k alpha_bar_k^H.
struct Problem {
  std::vector<VectorXcd> alpha_bar;  // K vectors of length N + 1

  int dimension() const { return alpha_bar.empty() ? 0 : static_cast<int>(alpha_bar.front().size()); }
  int users() const { return static_cast<int>(alpha_bar.size()); }
  MatrixXcd xi(int k) const;
  /// min_k Tr(Psi Xi_k)
  double value(const MatrixXcd& psi) const;
  /// min_k |alpha_bar_k^H [phi; 1]|^2, the multicast min-SNR of phi.
  double min_snr(const VectorXcd& phi) const;
};

Problem build(const multicast::Affine& aff);

/// Diagonal constraint on the first N entries of Psi.
enum class Diagonal { at_most_one, equal_one };

struct Options {
  double tolerance = 1e-3;      // relative width of the certified gamma interval
  int max_iterations = 20000;
  int check_every = 10;         // iterations between certificate evaluations
  Diagonal diagonal = Diagonal::at_most_one;
};

struct Solution {
  MatrixXcd psi;            // feasible for the relaxation, achieves gamma exactly
  double gamma = 0.0;       // certified achievable value (lower end of the interval)
  double upper_bound = 0.0; // certified by a dual-feasible pair
  bool rank_one = false;    // second eigenvalue <= 1e-6 x first
  bool converged = false;   // interval width <= tolerance x upper_bound
  int iterations = 0;
  double wall_time_s = 0.0;
};

/// max gamma s.t. Tr(Psi Xi_k) >= gamma, [Psi]_nn <= 1 (or == 1), [Psi]_{N+1,N+1} = 1, Psi >= 0.
///
/// ADMM on the dual of the slack-augmented standard form: each iteration is one
/// linear solve with a prefactored Gram matrix and one Hermitian
/// eigendecomposition that projects onto the PSD cone. Every few iterations the
/// PSD primal block is rescaled into the feasible set (raising the lower end)
/// and the dual multipliers are shifted into dual feasibility (lowering the
/// upper end), so both ends of the returned interval are certified.
Solution solve(const Problem& prob, const Options& opts = {});

/// Frobenius-nearest PSD matrix: eigenvalues clipped at zero.
MatrixXcd psd_project(const MatrixXcd& h);

/// Gaussian randomization: best of `trials` draws from CN(0, Psi), each mapped
/// through phi_n = unit(xi_n / xi_{N+1}). Deterministic given the seed.
ReflectCoeffs recover_scheme1(const MatrixXcd& psi, const Problem& prob, int trials,
                              std::uint64_t seed);

/// Principal-eigenvector recovery. Ties in the top eigenvalue are broken by
/// projecting e_{N+1} onto the top eigenspace, with the phase fixed so the
/// last entry is real positive. Throws std::domain_error("degenerate principal
/// eigenvector") if that last entry vanishes.
ReflectCoeffs recover_scheme2(const MatrixXcd& psi);

}  // namespace irsbf::sdr
