#include <catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "irsbf/multicast.hpp"
#include "irsbf/sdr.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace irsbf;
using namespace irsbf::sdr;
using Catch::Approx;

namespace {

struct Reference {
  Problem prob;
  double gamma = 0.0;
  double gamma_equal = 0.0;
};

std::vector<Reference> load_reference() {
  std::ifstream in(IRSBF_FIXTURE_DIR "/sdr_reference.txt");
  REQUIRE(in);
  std::vector<Reference> out;
  std::string line, tag;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    ss >> tag;
    if (tag == "instance") {
      int id, n, K;
      std::string t;
      Reference r;
      ss >> id >> t >> n >> t >> K >> t >> r.gamma >> t >> r.gamma_equal;
      r.prob.alpha_bar.assign(K, VectorXcd::Zero(n));
      out.push_back(r);
    } else if (tag == "a") {
      int k, i;
      double re, im;
      ss >> k >> i >> re >> im;
      out.back().prob.alpha_bar[k][i] = {re, im};
    }
  }
  return out;
}

void check_feasible(const Problem& prob, const Solution& sol, Diagonal diag) {
  const auto n = prob.dimension();
  const auto& psi = sol.psi;
  CHECK((psi - psi.adjoint()).norm() <= 1e-12 * psi.norm());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(psi);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
  CHECK(std::abs(psi(n - 1, n - 1) - 1.0) <= 1e-9);
  for (int i = 0; i < n - 1; ++i) {
    if (diag == Diagonal::at_most_one)
      CHECK(psi(i, i).real() <= 1.0 + 1e-9);
    else
      CHECK(std::abs(psi(i, i) - 1.0) <= 1e-9);
  }
  CHECK(prob.value(psi) >= sol.gamma * (1 - 1e-12));
  CHECK(sol.gamma <= sol.upper_bound);
}

}  // namespace

TEST_CASE("lifted problem") {
  const auto in = fixtures::multicast_instance(5, 4, 3, 1);
  const auto aff = multicast::precompute_affine(in.cs, in.beams.common());
  const auto prob = build(aff);
  CHECK(prob.dimension() == 5);
  CHECK(prob.users() == 3);
  std::mt19937_64 rng(3);
  const VectorXcd phi = fixtures::random_disk(rng, 4);
  VectorXcd bar(5);
  bar << phi, 1.0;
  const MatrixXcd psi = bar * bar.adjoint();
  for (int k = 0; k < 3; ++k) {
    const MatrixXcd xi = prob.xi(k);
    CHECK(xi.trace().real() == Approx(prob.alpha_bar[k].squaredNorm()).epsilon(1e-14));
    const double snr = snr_multicast(in.cs, phi, in.beams.common(), k);
    CHECK((psi * xi).trace().real() == Approx(snr).epsilon(1e-10));
  }
  CHECK(prob.min_snr(phi) == Approx(aff.min_snr(phi)).epsilon(1e-12));

  multicast::Affine only_beta{MatrixXcd::Zero(2, 1), VectorXcd::Constant(1, Complex(0.0, 2.0))};
  const MatrixXcd xi = build(only_beta).xi(0);
  CHECK(xi(2, 2).real() == Approx(4.0));
  CHECK(xi.norm() == Approx(4.0));
}

TEST_CASE("psd projection") {
  CHECK(psd_project(MatrixXcd::Identity(3, 3)).isApprox(MatrixXcd::Identity(3, 3)));
  MatrixXcd d = MatrixXcd::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -1.0;
  MatrixXcd expect = MatrixXcd::Zero(2, 2);
  expect(0, 0) = 1.0;
  CHECK((psd_project(d) - expect).norm() <= 1e-15);

  std::mt19937_64 rng(2);
  const MatrixXcd a = fixtures::random_complex(rng, 36).reshaped(6, 6);
  const MatrixXcd h = a + a.adjoint();
  const MatrixXcd p = psd_project(h);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(p);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  CHECK((psd_project(p) - p).norm() <= 1e-12 * p.norm());
  // Frobenius optimality: no PSD perturbation direction does better.
  for (int t = 0; t < 20; ++t) {
    const VectorXcd v = fixtures::random_complex(rng, 6);
    const MatrixXcd other = p + 0.1 * v * v.adjoint();
    CHECK((h - p).norm() <= (h - other).norm() + 1e-12);
  }
}

TEST_CASE("single element single user") {
  Problem prob{{VectorXcd::Ones(2)}};
  const auto sol = solve(prob);
  CHECK(sol.gamma == Approx(4.0).epsilon(1e-3));
  CHECK(sol.upper_bound >= 4.0 * (1 - 1e-9));
  CHECK(sol.converged);
  check_feasible(prob, sol, Diagonal::at_most_one);
}

TEST_CASE("single user matches the phase-aligned value") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const VectorXcd a = fixtures::random_complex(rng, 7);
    Problem prob{{a}};
    const auto sol = solve(prob);
    const double opt = oracles::single_user_optimum(a.head(6), std::conj(a[6]));
    CHECK(sol.upper_bound >= opt * (1 - 1e-9));
    CHECK(sol.gamma >= opt * (1 - 1e-3));
    CHECK(sol.gamma <= opt * (1 + 1e-9));
  }
}

TEST_CASE("agrees with an interior-point reference") {
  for (const auto& ref : load_reference()) {
    for (Diagonal diag : {Diagonal::at_most_one, Diagonal::equal_one}) {
      Options opts;
      opts.diagonal = diag;
      const auto sol = solve(ref.prob, opts);
      const double expect = diag == Diagonal::at_most_one ? ref.gamma : ref.gamma_equal;
      INFO("n=" << ref.prob.dimension() << " K=" << ref.prob.users() << " gamma=" << sol.gamma
                << " upper=" << sol.upper_bound << " reference=" << expect);
      CHECK(sol.converged);
      CHECK(sol.gamma <= expect * (1 + 1e-6));
      CHECK(sol.upper_bound >= expect * (1 - 1e-6));
      CHECK(sol.gamma >= expect * (1 - opts.tolerance));
      check_feasible(ref.prob, sol, diag);
    }
  }
}

TEST_CASE("equality diagonal is equivalent") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto in = fixtures::multicast_instance(5, 6, 3, seed);
    const auto prob = build(multicast::precompute_affine(in.cs, in.beams.common()));
    Options eq;
    eq.diagonal = Diagonal::equal_one;
    const auto a = solve(prob);
    const auto b = solve(prob, eq);
    CHECK(std::abs(a.gamma - b.gamma) <= 2 * eq.tolerance * a.upper_bound);
    check_feasible(prob, b, Diagonal::equal_one);
  }
}

TEST_CASE("relaxation dominates the solver") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto in = fixtures::multicast_instance(6, 8, 3, seed);
    const auto aff = multicast::precompute_affine(in.cs, in.beams.common());
    const auto sol = solve(build(aff));
    const auto rep = multicast::solve(in.cs, in.beams.common(), {});
    CHECK(rep.min_metric_disk <= sol.upper_bound * (1 + 1e-9));
  }
}

TEST_CASE("zero channel") {
  Problem prob{{VectorXcd::Zero(3), VectorXcd::Ones(3)}};
  const auto sol = solve(prob);
  CHECK(sol.gamma == 0.0);
  CHECK(sol.upper_bound == 0.0);
}

TEST_CASE("scheme 1 recovery") {
  std::mt19937_64 rng(9);
  const VectorXcd phi = project_unit_modulus(fixtures::random_complex(rng, 5));
  VectorXcd bar(6);
  bar << phi, 1.0;
  const MatrixXcd psi = bar * bar.adjoint();
  Problem prob{{fixtures::random_complex(rng, 6), fixtures::random_complex(rng, 6)}};
  const auto rec = recover_scheme1(psi, prob, 3, 1);
  CHECK((rec.values() - phi).norm() <= 1e-10);
  CHECK(rec.regime() == Regime::circle);

  const auto in = fixtures::multicast_instance(5, 6, 4, 2);
  const auto p = build(multicast::precompute_affine(in.cs, in.beams.common()));
  const auto sol = solve(p);
  const auto one = recover_scheme1(sol.psi, p, 1, 7);
  const auto many = recover_scheme1(sol.psi, p, 1000, 7);
  CHECK(p.min_snr(many.values()) >= p.min_snr(one.values()));
  CHECK(ReflectCoeffs::satisfies(many.values(), Regime::circle));
  CHECK(recover_scheme1(sol.psi, p, 1000, 7).values() == many.values());
  CHECK(p.min_snr(many.values()) <= sol.upper_bound * (1 + 1e-9));
}

TEST_CASE("scheme 2 recovery") {
  std::mt19937_64 rng(10);
  const VectorXcd phi = project_unit_modulus(fixtures::random_complex(rng, 4));
  VectorXcd bar(5);
  bar << phi, 1.0;
  const auto rec = recover_scheme2(bar * bar.adjoint());
  CHECK((rec.values() - phi).norm() <= 1e-10);

  const auto ident = recover_scheme2(MatrixXcd::Identity(4, 4));
  CHECK(ident.values() == VectorXcd::Ones(3));

  const MatrixXcd a = fixtures::random_complex(rng, 25).reshaped(5, 5);
  const MatrixXcd psd = a * a.adjoint();
  const auto r1 = recover_scheme2(psd);
  CHECK(ReflectCoeffs::satisfies(r1.values(), Regime::circle));
  CHECK(recover_scheme2(psd).values() == r1.values());

  MatrixXcd no_last = MatrixXcd::Zero(3, 3);
  no_last(0, 0) = 1.0;
  CHECK_THROWS_WITH(recover_scheme2(no_last),
                    Catch::Matchers::ContainsSubstring("degenerate principal eigenvector"));
}
