#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "unifold/error.hpp"
#include "unifold/prop_verify.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace unifold;

namespace {

// Random admissible configuration (not restricted to the failure region).
ThreeDiracConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> eps(0.01, 0.99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const double e1 = eps(rng);
    const double e3 = eps(rng);
    if (e1 + e3 >= 1.0 - 1e-6) continue;
    const Mu1Range r = admissible_mu1(e1, e3);
    const double mu1 = r.lo + (r.hi - r.lo) * (0.001 + 0.998 * unit(rng));
    try {
      return reconstruct(mu1, e1, e3);
    } catch (const Infeasible&) {
    }
  }
}

}  // namespace

TEST_CASE("reconstruction yields a standardized ordered mixture", "[prop_verify]") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 500; ++trial) {
    const ThreeDiracConfig c = random_config(rng);
    const std::vector<oracle::Point> p{{c.mu1, c.eps1}, {c.mu2, c.eps2}, {c.mu3, c.eps3}};
    CHECK_THAT(oracle::mean(p), WithinAbs(0.0, 1e-10));
    CHECK_THAT(oracle::variance(p), WithinAbs(1.0, 1e-10));
    CHECK(c.mu1 < c.mu2);
    CHECK(c.mu2 < c.mu3);
    CHECK_THAT(c.eps1 + c.eps2 + c.eps3, WithinAbs(1.0, 1e-15));
  }
}

TEST_CASE("reconstruction rejects infeasible parameters", "[prop_verify]") {
  CHECK_THROWS_AS(reconstruct(-1.0, 0.6, 0.5), Infeasible);
  CHECK_THROWS_AS(reconstruct(0.5, 0.3, 0.3), Infeasible);
  CHECK_THROWS_AS(reconstruct(-5.0, 0.3, 0.3), Infeasible);
  CHECK_THROWS_AS(reconstruct(-1.0, 0.0, 0.3), Infeasible);
}

TEST_CASE("bounds at a symmetric configuration", "[prop_verify]") {
  const Prop3Bounds b = bounds(0.25, 0.25);
  // r1 = 3, r3 = 1/3: U1 = -(sqrt 2 / 2) sqrt(4), F = -(sqrt 3 / 2) sqrt 3.
  CHECK_THAT(b.u1, WithinAbs(-std::sqrt(2.0), 1e-14));
  CHECK_THAT(b.f, WithinAbs(-1.5, 1e-14));
  CHECK(b.u == std::max(b.u1, b.u2));
  CHECK(b.f < b.u);
}

TEST_CASE("pivot location and failure predicates agree with brute force",
          "[prop_verify][oracle]") {
  std::mt19937_64 rng(53);
  int first_gap = 0;
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const ThreeDiracConfig c = random_config(rng);
    const Prop3Check r = check_prop3(c);
    INFO("mu1=" << c.mu1 << " eps1=" << c.eps1 << " eps3=" << c.eps3);
    CHECK(r.pivot_agrees);
    CHECK(r.failure_agrees);
    first_gap += r.oracle_first_gap ? 1 : 0;
    failures += r.oracle_fails ? 1 : 0;
  }
  CHECK(first_gap > 50);
  CHECK(failures > 10);
}

TEST_CASE("brute-force pivot agrees with the test-side oracle", "[prop_verify][oracle]") {
  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 100; ++trial) {
    const ThreeDiracConfig c = random_config(rng);
    const auto ours = brute_force_pivot(c.to_sample());
    const auto theirs = oracle::brute_force_min({{c.mu1, c.eps1}, {c.mu2, c.eps2}, {c.mu3, c.eps3}});
    CHECK_THAT(ours.folded_variance, WithinAbs(theirs.value, 1e-10));
  }
}

TEST_CASE("second-step objectives are positive on coarse and default grids",
          "[prop_verify]") {
  const SecondStepReport coarse = verify_second_step(20, 20);
  CHECK(coarse.all_positive);
  CHECK(coarse.feasible_cells > 0);

  const SecondStepReport r100 = verify_second_step(100, 100);
  REQUIRE(r100.all_positive);
  // Grid minima from an independent scan of the same 100^3 lattice.
  CHECK_THAT(r100.objectives[0].grid_minimum, WithinRel(1.1604, 1e-3));
  CHECK_THAT(r100.objectives[1].grid_minimum, WithinRel(1.2474, 1e-3));
  CHECK_THAT(r100.objectives[2].grid_minimum, WithinRel(0.008176, 1e-3));
  CHECK_THAT(r100.objectives[3].grid_minimum, WithinRel(0.016874, 1e-3));
  for (const auto& o : r100.objectives) {
    CHECK(o.minimum <= o.grid_minimum);
    CHECK(second_step_objectives(o.mu1, o.eps1, o.eps3).has_value());
  }
}

TEST_CASE("search arguments are validated", "[prop_verify]") {
  CHECK_THROWS_AS(verify_second_step(0, 10), InvalidParameter);
  CHECK_THROWS_AS(verify_second_step(1, 10), InvalidParameter);
  CHECK_THROWS_AS(verify_second_step(10, 0), InvalidParameter);
  SearchBox empty;
  empty.mu1_lo = -10.0;
  empty.mu1_hi = -9.0;  // below F everywhere
  CHECK_THROWS_AS(verify_second_step(10, 5, empty), InvalidParameter);
}

TEST_CASE("two-step procedure never fails on three-point mixtures", "[prop_verify]") {
  Rng rng = make_stream(61, {});
  const NeverFailsReport r = dftu_never_fails_3dirac(2000, rng);
  CHECK(r.trials == 2000);
  CHECK(r.counterexamples == 0);
  CHECK(r.outside_failure_region == 0);
  CHECK(r.max_sfr2 < 1.0);
  CHECK(r.min_sfr1 >= 1.0 - 1e-9);
}

TEST_CASE("population double folding", "[prop_verify]") {
  const auto balanced = build_sample({{-2.0, 1.0}, {0.0, 1.0}, {2.0, 1.0}});
  const PopulationDoubleFolding r = population_double_folding(balanced);
  CHECK_THAT(r.sfr1, WithinAbs(1.0, 1e-9));
  CHECK_FALSE(r.stopped_at_step1);
  REQUIRE(r.sfr2);
  CHECK_THAT(*r.sfr2, WithinAbs(0.0, 1e-9));

  const auto two = build_sample({{-1.0, 0.5}, {1.0, 0.5}});
  CHECK(population_double_folding(two).stopped_at_step1);
  CHECK_FALSE(population_double_folding(two).sfr2);
}
