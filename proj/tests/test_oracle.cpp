#include <catch_amalgamated.hpp>

#include <filesystem>

#include "irsbf/multicast.hpp"
#include "irsbf/oracle.hpp"
#include "support/fixtures.hpp"

using namespace irsbf;
using namespace irsbf::oracle;
using Catch::Approx;

namespace {

// N = 1, K = 1 with alpha = beta = 1: SNR = |conj(phi) + 1|^2 under unit noise.
fixtures::Instance unit_instance() {
  fixtures::Instance in;
  in.cs.G = MatrixXcd::Ones(1, 1);
  in.cs.h = {VectorXcd::Ones(1)};
  in.cs.f = {VectorXcd::Ones(1)};
  in.cs.noise = {1.0};
  in.beams = {BeamMode::multicast, {VectorXcd::Ones(1)}};
  return in;
}

}  // namespace

TEST_CASE("grid budget") {
  GridSpec g;
  CHECK(g.points(3) == 64u * 64u * 64u);
  CHECK_NOTHROW(g.check(3));
  CHECK_THROWS_AS(g.check(10), std::length_error);
  CHECK_THROWS_WITH(g.check(10), Catch::Matchers::ContainsSubstring("grid budget exceeded"));
  g.regime = Regime::disk;
  CHECK(g.points(2) == 128u * 128u);
  CHECK(GridSpec{}.points(200) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("grid on analytic cases") {
  const auto in = unit_instance();
  const auto r = grid_search(in.cs, in.beams, GridSpec{4});
  CHECK(r.value == Approx(4.0));
  CHECK(std::abs(r.phi[0] - 1.0) < 1e-15);
  CHECK(r.points == 4u);

  const auto none = fixtures::multicast_instance(4, 0, 3, 2);
  const auto aff = multicast::precompute_affine(none.cs, none.beams.common());
  const auto g0 = grid_search(none.cs, none.beams, {});
  CHECK(g0.value == Approx(aff.beta.cwiseAbs2().minCoeff()).epsilon(1e-12));
  CHECK(g0.points == 1u);
}

TEST_CASE("grid values match the metric and refine monotonically") {
  const auto in = fixtures::multicast_instance(4, 2, 2, 5);
  double prev = 0.0;
  for (int P : {8, 16, 32, 64}) {
    const auto r = grid_search(in.cs, in.beams, GridSpec{P});
    CHECK(r.value == Approx(min_metric(in.cs, r.phi, in.beams)).epsilon(1e-12));
    CHECK(r.value >= prev);
    prev = r.value;
  }
  const auto dl = fixtures::downlink_instance(4, 2, 2, 5);
  const auto r = grid_search(dl.cs, dl.beams, GridSpec{16});
  CHECK(r.value == Approx(min_metric(dl.cs, r.phi, dl.beams)).epsilon(1e-12));

  GridSpec disk{16, Regime::disk, 3};
  const auto rd = grid_search(in.cs, in.beams, disk);
  CHECK(rd.points == 48u * 48u);
  CHECK(rd.value >= grid_search(in.cs, in.beams, GridSpec{16}).value);
}

TEST_CASE("grid cache round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "irsbf_grid_cache_test";
  std::filesystem::remove_all(dir);
  const auto in = fixtures::multicast_instance(4, 2, 2, 6);
  const auto a = grid_search_cached(in.cs, in.beams, GridSpec{16}, dir, "k");
  CHECK(std::filesystem::exists(dir / "k.grid"));
  const auto b = grid_search_cached(in.cs, in.beams, GridSpec{16}, dir, "k");
  CHECK(a.value == b.value);
  CHECK(a.phi == b.phi);
  std::filesystem::remove_all(dir);
}

TEST_CASE("subgradient reference") {
  multicast::Linearization one{MatrixXcd::Ones(1, 1), VectorXd::Zero(1), VectorXcd::Zero(1)};
  const auto r = subgradient_reference(one);
  CHECK(r.gamma == Approx(2.0).margin(1e-3));
  CHECK(std::abs(r.phi[0] - 1.0) <= 1e-3);

  VectorXd s(2);
  s << 0.5, 3.0;
  multicast::Linearization flat{MatrixXcd::Zero(3, 2), s, VectorXcd::Zero(3)};
  CHECK(subgradient_reference(flat).gamma == Approx(0.5));
}

TEST_CASE("linearization check catches a wrong minorant") {
  const auto in = fixtures::multicast_instance(4, 3, 2, 1);
  const auto aff = multicast::precompute_affine(in.cs, in.beams.common());
  auto lin = multicast::linearize(aff, VectorXcd::Zero(3));
  const auto good = linearization_check(multicast_model(aff, lin, 0), 200, 1);
  CHECK(good.ok);
  lin.T *= 1.5;
  const auto bad = linearization_check(multicast_model(aff, lin, 0), 200, 1);
  CHECK_FALSE(bad.ok);
  CHECK_FALSE(bad.details.empty());

  multicast::Affine zero{MatrixXcd::Zero(2, 1), VectorXcd::Ones(1)};
  const auto zl = multicast::linearize(zero, VectorXcd::Zero(2));
  const auto z = linearization_check(multicast_model(zero, zl, 0), 50, 2);
  CHECK(z.ok);
  CHECK(z.gradient_error == 0.0);
}
