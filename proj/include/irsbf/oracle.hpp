#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include "irsbf/downlink.hpp"
#include "irsbf/multicast.hpp"
#include "irsbf/scene.hpp"

// Ground-truth generators used to validate the solvers. Nothing here calls
// into the solver code paths it is meant to check.
namespace irsbf::oracle {

struct GridSpec {
  int phases = 64;               // P, includes phase 0
  Regime regime = Regime::circle;
  int radius_levels = 2;         // disk only: radii 1/R, 2/R, ..., 1
  double budget = 1e7;           // max grid points

  /// Number of grid points for N elements, saturating at UINT64_MAX.
  std::uint64_t points(int elements) const;
  /// Throws std::length_error("grid budget exceeded ...") if points(N) > budget.
  void check(int elements) const;
};

struct GridResult {
  VectorXcd phi;
  double value = 0.0;
  std::uint64_t points = 0;
};

/// Exhaustive max over the grid of min_k metric. Ties keep the lowest grid index.
GridResult grid_search(const ChannelSet& cs, const TransmitBeams& beams, const GridSpec& spec);

/// grid_search with results cached as text files under cache_dir/key.grid.
GridResult grid_search_cached(const ChannelSet& cs, const TransmitBeams& beams,
                              const GridSpec& spec, const std::filesystem::path& cache_dir,
                              const std::string& key);

struct ReferenceResult {
  VectorXcd phi;
  double gamma = 0.0;
  int iterations = 0;
};

/// Projected subgradient ascent over the unit disk with steps c / sqrt(t),
/// restarted from the best point with c halved every `iters / 20` steps.
/// Multicast: maximizes min_k 2 Re{t_k^H phi} + s_k.
ReferenceResult subgradient_reference(const multicast::Linearization& lin, int iters = 100000);
/// Downlink: maximizes min_k (2 Re{t_k^H phi} + s_k - ||Lambda_k^H phi + beta_hat_k||^2) / q_k.
ReferenceResult subgradient_reference(const downlink::Linearization& lin, int iters = 100000);

/// A scalar function and its claimed first-order minorant, both over a real
/// parameter vector, plus a sampler for the region where minorization must hold.
struct LinearizedModel {
  std::function<double(const VectorXd&)> exact;
  std::function<double(const VectorXd&)> surrogate;
  VectorXd expansion;
  std::function<VectorXd(std::mt19937_64&)> sample;
};

struct CheckTolerances {
  double tangency = 1e-10;     // relative to max(1, |f(x_e)|)
  double minorization = 1e-10; // relative to max(1, |f(x)|)
  double gradient = 1e-5;      // relative
  double fd_step = 1e-6;
};

struct LinearizationReport {
  bool ok = true;
  double tangency_error = 0.0;
  double max_violation = 0.0;  // max of surrogate - exact over samples (scaled)
  double gradient_error = 0.0;
  int samples = 0;
  std::string details;
};

LinearizationReport linearization_check(const LinearizedModel& model, int samples,
                                        std::uint64_t seed, const CheckTolerances& tol = {});

/// SNR_k against its minorant over (Re phi, Im phi), phi sampled in the disk.
LinearizedModel multicast_model(const multicast::Affine& aff, const multicast::Linearization& lin,
                                int k);

/// d_k(phi, gamma) against 2 Re{t_hat_k^H phi} + s_hat_k + 1 - q_k gamma over
/// (Re phi, Im phi, gamma), phi sampled in the disk and gamma in (0, 4 gamma_e].
LinearizedModel downlink_model(const downlink::Affine& aff, const downlink::Linearization& lin,
                               int k);

}  // namespace irsbf::oracle
