#include "support.hpp"

#include <gmt/generators.hpp>
#include <gmt/verify.hpp>

#include <doctest.h>

#include <limits>

using namespace gmt;

TEST_CASE("safe_ratio") {
  CHECK(safe_ratio(0.0, 0.0) == 0.0);
  CHECK(safe_ratio(1.0, 4.0) == 0.25);
  CHECK(safe_ratio(1.0, 0.0) == std::numeric_limits<double>::infinity());
}

TEST_CASE("main lemma check") {
  const Kernel k = riesz_kernel(1, 2);

  SUBCASE("single atom") {
    const Measure one(2, 1, {0.0, 0.0}, {2.0});
    const MainLemmaResult r = main_lemma_check(one, k, std::vector<double>{0.1, 1.0}, 4);
    CHECK(r.lhs == 0.0);
    CHECK(r.ratio == 0.0);
    CHECK(r.rhs == 2.0);
  }

  SUBCASE("against a direct double sum") {
    std::mt19937_64 rng(31);
    const Measure mu = testing_support::random_cloud(rng, 2, 1, 40, 0.01);
    const std::vector<double> grid = default_eps_grid(mu, 4);
    double lhs = 0.0;
    for (double eps : grid) {
      double s = 0.0;
      for (Index i = 0; i < mu.size(); ++i) {
        const double t = norm(t_eps(k, mu, {}, mu.point(i), eps));
        s += mu.weight(i) * t * t;
      }
      lhs = std::max(lhs, s);
    }
    double jones = 0.0;
    for (Index i = 0; i < mu.size(); ++i) jones += mu.weight(i) * jones_integral(mu, mu.point(i), mu.r_min(), mu.diameter(), 4);
    const MainLemmaResult r = main_lemma_check(mu, k, grid, 4);
    CHECK(r.lhs == doctest::Approx(lhs).epsilon(1e-12));
    CHECK(r.jones == doctest::Approx(jones).epsilon(1e-12));
    CHECK(r.rhs == doctest::Approx(mu.total_mass() + jones).epsilon(1e-12));
    CHECK(r.ratio == doctest::Approx(lhs / (mu.total_mass() + jones)).epsilon(1e-12));
    CHECK_THROWS_AS(main_lemma_check(mu, k, std::vector<double>{0.0, 1.0}, 4), Error);
  }

  SUBCASE("zero kernel") {
    const Measure c = cantor4(3);
    CHECK(main_lemma_check(c, zero_kernel(1, 2), default_eps_grid(c, 4), 4).lhs == 0.0);
  }
}

TEST_CASE("ball sampling") {
  const Kernel k = riesz_kernel(1, 2);
  const Measure c = cantor4(3);
  const std::vector<double> grid = default_eps_grid(c, 4);
  const std::vector<Ball> balls{Ball(std::vector<double>{5.0, 5.0}, 0.5),
                                Ball(std::vector<double>{0.5, 0.5}, 2.0)};
  const BallSampleResult r = t1_ball_check(c, k, balls, grid, 4);
  REQUIRE(r.ratios.size() == 2);
  CHECK(r.ratios[0] == 0.0);
  CHECK(r.ratios[1] == doctest::Approx(main_lemma_check(c, k, grid, 4).ratio).epsilon(1e-14));
  CHECK(r.worst == r.ratios[1]);

  const std::vector<Ball> rb = random_balls(c, 20, 3);
  REQUIRE(rb.size() == 20);
  for (const Ball& b : rb) {
    CHECK(b.radius >= c.r_min());
    CHECK(b.radius <= c.diameter() * (1.0 + 1e-12));
    CHECK(!c.ball_indices(b.center, 0.0).empty());
  }
  const std::vector<Ball> again = random_balls(c, 20, 3);
  CHECK(again[7].radius == rb[7].radius);
}

TEST_CASE("capacity") {
  SUBCASE("uniform segment") {
    // unit mass on a unit segment: no beta contribution and A close to 2
    const Measure seg = segment(2000).with_r_min(0.01);
    const CapacityResult r = capacity_lower_bound(seg, 4);
    CHECK(r.jones <= 1e-20);
    CHECK(r.density >= 2.0);
    CHECK(r.density <= 2.1);
    CHECK(r.bound == doctest::Approx(1.0 / r.density).epsilon(1e-12));
    CHECK(r.bound <= 0.5);
    CHECK(r.bound >= 0.47);
    CHECK_FALSE(r.sub_resolution);
  }

  SUBCASE("scale invariance") {
    const Measure c = cantor4(3);
    const CapacityResult a = capacity_lower_bound(c, 4);
    const CapacityResult b = capacity_lower_bound(c.scaled(7.5), 4);
    CHECK(a.jones > 0.0);
    CHECK(b.bound == doctest::Approx(a.bound).epsilon(1e-12));
    CHECK(b.t_star == doctest::Approx(a.t_star / 7.5).epsilon(1e-12));
    // t solves t A + t^2 I = 1 at the argmin
    CHECK(a.t_star * a.density + a.t_star * a.t_star * a.jones == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("single atom") {
    const Measure one(2, 1, {0.0, 0.0}, {3.0}, 0.2);
    const CapacityResult r = capacity_lower_bound(one, 4);
    CHECK(r.sub_resolution);
    CHECK(r.density == doctest::Approx(15.0));
    CHECK(r.bound == doctest::Approx(0.2));
  }

  CHECK_THROWS_AS(capacity_lower_bound(Measure::empty(2, 1), 4), Error);
}

TEST_CASE("sampled kernel constants") {
  const Kernel k = riesz_kernel(1, 2);
  std::mt19937_64 rng(13);
  const Measure mu = testing_support::random_cloud(rng, 2, 1, 200);

  const std::vector<double> zero(200, 0.0);
  CHECK(suppression_constant(k, mu, zero, 1000, 1).value == 0.0);
  // constant Phi = c: |k| c / (1 + |k|^2 c^2) <= 1/2
  const std::vector<double> flat(200, 0.05);
  const SampledConstant s = suppression_constant(k, mu, flat, 1000, 1);
  CHECK(s.value <= 0.5);
  CHECK(s.value > 0.0);
  CHECK(s.samples > 900);

  const TruncationConstants none = truncation_constants(k, mu, zero, 200, 2);
  CHECK(none.above.value == 0.0);
  CHECK(none.above.samples == 200);
  CHECK(none.below.samples == 0);

  std::vector<double> phi(200);
  for (Index i = 0; i < 200; ++i) phi[i] = std::abs(mu.point(i)[0] - 0.5) / 2.0;
  const TruncationConstants t = truncation_constants(k, mu, phi, 400, 2);
  CHECK(t.above.samples + t.below.samples > 300);
  CHECK(std::isfinite(t.above.value));
  CHECK(std::isfinite(t.below.value));

  const SampledConstant sm = smoothness_check(k, 5000, 4);
  CHECK(sm.samples == 5000);
  CHECK(sm.value <= 1.0);
  CHECK(smoothness_check(cauchy_kernel(), 5000, 4).value <= 1.0);
}

TEST_CASE("growth tail") {
  const Measure seg = segment(500);
  const GrowthTailResult g = growth_tail_check(seg, 300, 5);
  double c0 = 0.0;
  for (Index i = 0; i < seg.size(); ++i) c0 = std::max(c0, sup_density(seg, seg.point(i), seg.r_min()));
  CHECK(g.c0 == c0);
  CHECK(g.bound == 4.0);
  CHECK(g.worst <= g.bound);
  CHECK(g.samples == 300);
}

TEST_CASE("tree checks") {
  const Kernel k = riesz_kernel(1, 2);
  const Measure mu = testing_support::two_clusters(120, 100.0);
  const Lattice lat(mu, LatticeParams{});
  const Corona c(lat, CoronaParams{});
  const TreeGeometry geo(c, 0);
  const auto& members = lat.cell(c.tree(0).top).members;
  std::vector<Index> sample;
  for (std::size_t s = 0; s < members.size(); s += 10) sample.push_back(members[s]);

  SUBCASE("cotlar with f = 0") {
    const std::vector<double> f(mu.size(), 0.0);
    const CotlarResult r = cotlar_check(geo, k, f, sample);
    CHECK(r.constant == 0.0);
    CHECK(r.flagged == 0);
  }

  SUBCASE("cotlar with f = 1") {
    const CotlarResult r = cotlar_check(geo, k, {}, sample);
    CHECK(r.samples == sample.size());
    CHECK(std::isfinite(r.constant));
    CHECK(r.constant > 0.0);
  }

  SUBCASE("domination") {
    const BumpFamily bump = lattice_bump(lat);
    const DominationResult z = pointwise_domination_check(geo, zero_kernel(1, 2), bump, sample);
    CHECK(z.constant == 0.0);
    CHECK(z.theta_br == c.theta_big(c.tree(0).top));
    const DominationResult r = pointwise_domination_check(geo, k, bump, sample);
    CHECK(r.samples == sample.size());
    CHECK(std::isfinite(r.constant));
  }
}
