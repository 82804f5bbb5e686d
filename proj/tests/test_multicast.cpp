#include <catch_amalgamated.hpp>

#include "irsbf/multicast.hpp"
#include "irsbf/oracle.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace irsbf;
using namespace irsbf::multicast;
using Catch::Approx;

TEST_CASE("affine form reproduces the multicast snr") {
  const auto in = fixtures::multicast_instance(6, 5, 4, 2);
  const auto aff = precompute_affine(in.cs, in.beams.common());
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const VectorXcd phi = fixtures::random_disk(rng, 5);
    const VectorXd snr = aff.snr(phi);
    for (int k = 0; k < 4; ++k) {
      const double ref = snr_multicast(in.cs, phi, in.beams.common(), k);
      CHECK(std::abs(snr[k] - ref) <= 1e-10 * ref);
    }
  }

  const auto zero_b = precompute_affine(in.cs, VectorXcd::Zero(6));
  CHECK(zero_b.alpha.norm() == 0.0);
  CHECK(zero_b.beta.norm() == 0.0);

  auto cs = in.cs;
  for (auto& h : cs.h) h.setZero();
  const auto no_h = precompute_affine(cs, in.beams.common());
  CHECK(no_h.alpha.norm() == 0.0);
  CHECK(no_h.min_snr(fixtures::random_disk(rng, 5)) == Approx(no_h.beta.cwiseAbs2().minCoeff()));

  CHECK_THROWS_AS(precompute_affine(in.cs, VectorXcd::Zero(5)), std::invalid_argument);
}

TEST_CASE("linearization is a tight global minorant") {
  const auto in = fixtures::multicast_instance(6, 5, 4, 3);
  const auto aff = precompute_affine(in.cs, in.beams.common());

  const auto at_zero = linearize(aff, VectorXcd::Zero(5));
  for (int k = 0; k < 4; ++k) {
    CHECK((at_zero.T.col(k) - aff.beta[k] * aff.alpha.col(k)).norm() <= 1e-15 * aff.alpha.norm());
    CHECK(at_zero.s[k] == Approx(std::norm(aff.beta[k])).epsilon(1e-15));
  }

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    const VectorXcd phi_e = fixtures::random_disk(rng, 5);
    const auto lin = linearize(aff, phi_e);
    for (int k = 0; k < 4; ++k) {
      const auto rep = oracle::linearization_check(oracle::multicast_model(aff, lin, k), 1000,
                                                   100 + trial);
      INFO(rep.details);
      CHECK(rep.ok);
    }
  }
}

TEST_CASE("x/z projection") {
  auto p = update_xz(1.0, 0.0, 0.0);
  CHECK(p.x == Complex(1.0, 0.0));
  CHECK(p.z == 0.0);

  p = update_xz(0.0, 1.0, 0.0);
  CHECK(p.x.real() == Approx(0.4));
  CHECK(p.z == Approx(0.8));
  CHECK(std::abs(p.z - 2.0 * p.x.real()) <= 1e-12);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    const Complex tau1{g(rng), g(rng)};
    const double tau2 = g(rng), s = g(rng);
    const auto got = update_xz(tau1, tau2, s);
    const auto ref = oracles::project_xz_multicast(tau1, tau2, s);
    CHECK(std::abs(got.x - ref.x) <= 1e-8);
    CHECK(std::abs(got.z - ref.z) <= 1e-8);
    CHECK(got.z - 2.0 * got.x.real() - s <= 1e-12);
  }
}

TEST_CASE("y and gamma updates") {
  VectorXcd tau(3);
  tau << 0.3, Complex(0.0, 2.0), Complex(-0.6, 0.8);
  const VectorXcd y = update_y(tau);
  CHECK(y[0] == Complex(0.3, 0.0));
  CHECK(std::abs(y[1] - Complex(0.0, 1.0)) < 1e-15);
  CHECK(y[2] == tau[2]);

  VectorXd tau6(2);
  tau6 << 1.0, 1.0;
  CHECK(update_gamma(tau6, 1.0) == Approx(1.5));
}

TEST_CASE("phi update zeroes the gradient") {
  std::mt19937_64 rng(6);
  const int N = 6, K = 3;
  Linearization lin{fixtures::random_complex(rng, N * K).reshaped(N, K), VectorXd::Zero(K),
                    VectorXcd::Zero(N)};
  const VectorXcd tau4 = fixtures::random_complex(rng, K);
  const VectorXcd tau5 = fixtures::random_complex(rng, N);
  const VectorXd tau6 = fixtures::random_real(rng, K);
  const auto out = update_phi_gamma(lin, tau4, tau5, tau6, 0.7);
  // d/d conj(phi) of ||tau4 - T^H phi||^2 + ||tau5 - phi||^2
  const VectorXcd grad = -lin.T * (tau4 - lin.T.adjoint() * out.phi) - (tau5 - out.phi);
  CHECK(grad.norm() <= 1e-10 * (1.0 + tau5.norm()));
  CHECK(out.gamma == Approx((1.0 + 0.7 * tau6.sum()) / (0.7 * K)));

  Linearization flat{MatrixXcd::Zero(N, K), VectorXd::Zero(K), VectorXcd::Zero(N)};
  CHECK((update_phi_gamma(flat, tau4, tau5, tau6, 1.0).phi - tau5).norm() <= 1e-15);
}

TEST_CASE("inner solve on analytic cases") {
  SolverConfig cfg;
  Linearization one{MatrixXcd::Ones(1, 1), VectorXd::Zero(1), VectorXcd::Zero(1)};
  const auto r = solve_inner(one, cfg);
  CHECK(std::abs(r.phi[0] - 1.0) <= 1e-4);
  CHECK(r.gamma == Approx(2.0).epsilon(1e-4));
  CHECK(r.factorizations == 1);

  VectorXd s(3);
  s << 2.0, -1.0, 0.5;
  Linearization flat{MatrixXcd::Zero(4, 3), s, VectorXcd::Zero(4)};
  CHECK(solve_inner(flat, cfg).gamma == Approx(-1.0));
}

TEST_CASE("inner solve matches a subgradient reference") {
  SolverConfig cfg;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto in = fixtures::multicast_instance(6, 4, 3, seed);
    const auto aff = precompute_affine(in.cs, in.beams.common());
    const auto lin = linearize(aff, VectorXcd::Zero(4));
    const auto got = solve_inner(lin, cfg);
    const auto ref = oracle::subgradient_reference(lin);
    INFO("seed " << seed << " admm " << got.gamma << " reference " << ref.gamma);
    CHECK(std::abs(got.gamma - ref.gamma) <= 1e-4 * std::max(1.0, std::abs(ref.gamma)));
    CHECK(ReflectCoeffs::satisfies(got.phi, Regime::disk));
    CHECK(got.factorizations == 1);
  }
}

TEST_CASE("inner solve feasibility at convergence") {
  const auto in = fixtures::multicast_instance(6, 8, 3, 4);
  const auto aff = precompute_affine(in.cs, in.beams.common());
  const auto lin = linearize(aff, VectorXcd::Zero(8));
  SolverConfig cfg;
  cfg.inner_max_iters = 20000;
  const auto r = solve_inner(lin, cfg);
  REQUIRE(r.converged);
  CHECK(r.final_residuals.primal <= 10 * cfg.tolerance);
  CHECK(r.residual_history.size() == static_cast<size_t>(r.iterations));
}

TEST_CASE("full solve") {
  SolverConfig cfg;
  const auto in = fixtures::multicast_instance(6, 8, 4, 7);
  const auto rep = solve(in.cs, in.beams.common(), cfg);
  CHECK(rep.rounds.size() == 5u);
  CHECK(rep.min_metric_disk >= rep.initial_min_metric);
  for (size_t i = 1; i < rep.rounds.size(); ++i)
    CHECK(rep.rounds[i].min_metric >= rep.rounds[i - 1].min_metric - 1e-8);
  CHECK(ReflectCoeffs::satisfies(rep.phi_disk, Regime::disk));
  CHECK(ReflectCoeffs::satisfies(rep.phi_circle, Regime::circle));
  CHECK(rep.min_metric_disk == Approx(min_metric(in.cs, rep.phi_disk, in.beams)).epsilon(1e-12));
  CHECK(rep.min_metric_circle ==
        Approx(min_metric(in.cs, rep.phi_circle, in.beams)).epsilon(1e-12));

  cfg.record_trace = true;
  const auto traced = solve(in.cs, in.beams.common(), cfg);
  CHECK(static_cast<int>(traced.trace.size()) == traced.total_inner_iterations);
  CHECK(traced.min_metric_disk == rep.min_metric_disk);
}

TEST_CASE("single user reaches the phase-aligned optimum") {
  const auto in = fixtures::multicast_instance(4, 2, 1, 13);
  const auto aff = precompute_affine(in.cs, in.beams.common());
  const auto rep = solve(in.cs, in.beams.common(), {});
  const double opt = oracles::single_user_optimum(aff.alpha.col(0), aff.beta[0]);
  CHECK(rep.min_metric_circle >= 0.98 * opt);
}

TEST_CASE("no reflecting elements") {
  const auto in = fixtures::multicast_instance(4, 0, 3, 1);
  const auto aff = precompute_affine(in.cs, in.beams.common());
  const auto rep = solve(in.cs, in.beams.common(), {});
  CHECK(rep.min_metric_disk == Approx(aff.beta.cwiseAbs2().minCoeff()).epsilon(1e-12));
  CHECK(rep.min_metric_circle == rep.min_metric_disk);
}
