#include "support.hpp"

#include <gmt/corona.hpp>
#include <gmt/generators.hpp>

#include <doctest.h>

#include <limits>

using namespace gmt;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("uniform segment has a single tree") {
  const Lattice lat(segment(400), LatticeParams{});
  const Corona c(lat, CoronaParams{});
  CHECK(c.top() == std::vector<Index>{lat.root()});
  REQUIRE(c.tree_count() == 1);
  CHECK(c.tree(0).cells.size() == lat.cell_count());
  CHECK(c.tree(0).stop.empty());
  CHECK(c.tree(0).good_mass == doctest::Approx(1.0));
  for (Index q = 0; q < lat.cell_count(); ++q) CHECK(c.coherence_term(q) <= 1e-20);

  const PackingAudit p = packing_audit(c, 4);
  CHECK(p.ratio <= 1.0);
  CHECK(p.lhs == doctest::Approx(p.rhs));
}

TEST_CASE("no rule fires with infinite thresholds") {
  const Lattice lat(cantor4(4), LatticeParams{});
  CoronaParams params;
  params.a_stop = kInf;
  params.tau = kInf;
  const Corona c(lat, params);
  CHECK(c.top() == std::vector<Index>{lat.root()});
  CHECK(c.tree(0).cells.size() == lat.cell_count());
  CHECK(c.tree(0).good.size() == lat.measure().size());
  CHECK(packing_audit(c, 4).ratio <= 1.0);
}

TEST_CASE("parameter validation") {
  const Lattice lat(segment(20), LatticeParams{});
  CoronaParams p;
  p.a_stop = 1.0;
  CHECK_THROWS_AS(Corona(lat, p), Error);
  p = CoronaParams{};
  p.tau = 0.0;
  CHECK_THROWS_AS(Corona(lat, p), Error);
  const Corona c(lat, CoronaParams{});
  if (lat.cell_count() > 1) CHECK_THROWS_AS((void)c.tree_of_top(lat.cell_count() - 1), Error);
}

TEST_CASE("density stop isolates the heavy cluster") {
  const std::size_t count = 200;
  const Measure mu = testing_support::two_clusters(count, 100.0);
  const Lattice lat(mu, LatticeParams{});
  const Corona c(lat, CoronaParams{});
  REQUIRE(c.top().size() > 1);

  // oracle: the root theta and the enlarged theta of each stop, by direct count
  const Index root = lat.root();
  double root_mass = 0.0;
  const Ball big = lat.big_ball(root);
  for (Index i = 0; i < mu.size(); ++i) {
    if (distance(mu.point(i), big.center) <= big.radius) root_mass += mu.weight(i);
  }
  const double theta_r = root_mass / big.radius;
  CHECK(c.theta_big(root) == doctest::Approx(theta_r).epsilon(1e-14));

  bool heavy_stop = false;
  for (Index s : c.tree(0).stop) {
    const Cell& q = lat.cell(s);
    const bool heavy = std::all_of(q.members.begin(), q.members.end(), [&](Index i) { return i < count; });
    if (!heavy) continue;
    heavy_stop = true;
    CHECK(q.doubling);
    // a descendant-or-self of the stop (or the stop itself) crossed the density cap
    bool fired = false;
    std::vector<Index> walk{s};
    while (!walk.empty()) {
      const Index p = walk.back();
      walk.pop_back();
      fired = fired || c.theta_enlarged(p) > 4.0 * theta_r;
      for (Index ch : lat.cell(p).children) walk.push_back(ch);
    }
    CHECK(fired);
  }
  CHECK(heavy_stop);

  const CoronaCheck check = check_corona(c);
  CHECK(check.ok());
  CHECK(check.tree_density_ratio <= c.c_tree());
}

TEST_CASE("trees partition the lattice") {
  const Lattice lat(cantor4(5), LatticeParams{});
  const Corona c(lat, CoronaParams{});
  std::vector<int> seen(lat.cell_count(), 0);
  for (std::size_t t = 0; t < c.tree_count(); ++t) {
    const CoronaTree& tr = c.tree(t);
    CHECK(c.tree_of_top(tr.top) == t);
    CHECK(c.is_top(tr.top));
    for (Index q : tr.cells) {
      ++seen[q];
      CHECK(c.tree_of_cell(q) == t);
      CHECK(lat.is_descendant(q, tr.top));
    }
    for (Index s : tr.stop) {
      CHECK(c.is_top(s));
      CHECK(lat.cell(s).parent.has_value());
      CHECK(c.tree_of_cell(*lat.cell(s).parent) == t);
    }
    // Good(R) plus the stop cells tile R
    double mass = tr.good_mass;
    for (Index s : tr.stop) mass += lat.mass(s);
    CHECK(mass == doctest::Approx(lat.mass(tr.top)).epsilon(1e-12));
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));

  const CoronaCheck check = check_corona(c);
  CHECK(check.ok());
}

TEST_CASE("delta_mu") {
  SUBCASE("empty domain") {
    const Lattice lat(cantor4(2), LatticeParams{});
    CHECK(delta_mu(lat, lat.root(), lat.root()).value == 0.0);
  }

  SUBCASE("one outside atom") {
    const Measure mu(2, 1, {0.0, 0.0, 1.0, 0.0}, {1.0, 0.3});
    LatticeParams p;
    p.a0 = 10.0;
    const Lattice lat(mu, p);
    const Index q = lat.cell_of(0, 1);
    const DeltaResult d = delta_mu(lat, q, lat.root());
    CHECK(d.value == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(d.excluded == 0);
    CHECK_THROWS_AS(delta_mu(lat, lat.root(), q), Error);
  }

  SUBCASE("cantor corner against a direct sum") {
    const Lattice lat(cantor4(4), LatticeParams{});
    const Measure& mu = lat.measure();
    const Index r = lat.root();
    const Ball two = lat.big_ball(r).scaled(2.0);
    for (int k = 1; k <= std::min(2, lat.depth()); ++k) {
      for (Index q : lat.level(k)) {
        const auto& mem = lat.cell(q).members;
        double expect = 0.0;
        for (Index i = 0; i < mu.size(); ++i) {
          if (std::binary_search(mem.begin(), mem.end(), i)) continue;
          if (distance(mu.point(i), two.center) > two.radius) continue;
          expect += mu.weight(i) / distance(mu.point(i), lat.center(q));
        }
        CHECK(delta_mu(lat, q, r).value == doctest::Approx(expect).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("tree geometry") {
  const Measure mu = testing_support::two_clusters(200, 100.0);
  const Lattice lat(mu, LatticeParams{});
  const Corona c(lat, CoronaParams{});
  const TreeGeometry geo(c, 0);
  const CoronaTree& tr = c.tree(0);

  // d_R at a tree cell center is at most its side
  for (Index q : tr.cells) CHECK(geo.d_r(lat.center(q)) <= lat.cell(q).ell * (1.0 + 1e-15));

  // brute-force infimum
  for (Index i = 0; i < mu.size(); i += 17) {
    double best = kInf;
    for (Index q : tr.cells) best = std::min(best, distance(mu.point(i), lat.center(q)) + lat.cell(q).ell);
    CHECK(geo.d_r_atoms()[i] == best);
  }

  // Good atoms lie under depth-exhausted tree cells
  for (Index i : tr.good) CHECK(geo.d_r_atoms()[i] <= 2.0 * lat.cell(lat.deepest_cell(i)).ell);

  // 1-Lipschitz on random pairs
  std::mt19937_64 rng(8);
  for (int s = 0; s < 10000; ++s) {
    const std::vector<double> x{2.0 * uniform01(rng) - 0.5, uniform01(rng) - 0.5};
    const std::vector<double> y{2.0 * uniform01(rng) - 0.5, uniform01(rng) - 0.5};
    CHECK(std::abs(geo.d_r(x) - geo.d_r(y)) <= distance(x, y) * (1.0 + 1e-12) + 1e-15);
  }

  const double a0 = lat.params().a0;
  const std::vector<double> phi = geo.phi_atoms();
  for (Index i = 0; i < mu.size(); ++i) CHECK(phi[i] == doctest::Approx(geo.d_r_atoms()[i] / (20.0 * a0 * a0)));
  for (Index s : tr.stop) {
    for (Index i : lat.cell(s).members) CHECK(phi[i] <= lat.cell(s).ell / (10.0 * a0));
  }

  const Ball b0 = geo.b0();
  CHECK(b0.radius == doctest::Approx(29.0 * lat.scale(0)));

  // Reg cells: disjoint, inside stop cells, with d_R comparable to the side
  const auto& reg = geo.reg();
  REQUIRE_FALSE(reg.empty());
  for (std::size_t a = 0; a < reg.size(); ++a) {
    for (std::size_t b = a + 1; b < reg.size(); ++b) {
      CHECK_FALSE(lat.is_descendant(reg[a], reg[b]));
      CHECK_FALSE(lat.is_descendant(reg[b], reg[a]));
    }
    bool inside = false;
    for (Index s : tr.stop) inside = inside || lat.is_descendant(reg[a], s);
    CHECK(inside);
    for (Index i : lat.cell(reg[a]).members) CHECK(geo.d_r_atoms()[i] >= 10.0 * lat.cell(reg[a]).ell);
  }
}

TEST_CASE("single-tree geometry has no regularized cells") {
  const Lattice lat(segment(300), LatticeParams{});
  const Corona c(lat, CoronaParams{});
  const TreeGeometry geo(c, 0);
  CHECK(geo.reg().empty());
  for (double v : geo.d_r_atoms()) CHECK(v <= 2.0 * lat.cell(lat.level(lat.depth()).front()).ell);
}

TEST_CASE("packing on cantor sets") {
  for (int g : {4, 5}) {
    const Lattice lat(cantor4(g), LatticeParams{});
    const Corona c(lat, CoronaParams{});
    const PackingAudit p = packing_audit(c, 4);
    double lhs = 0.0;
    for (Index r : c.top()) lhs += c.theta_big(r) * c.theta_big(r) * lat.mass(r);
    CHECK(p.lhs == doctest::Approx(lhs).epsilon(1e-14));
    CHECK(p.rhs > 0.0);
    CHECK(std::isfinite(p.ratio));
  }
  // packing ratios across generations (frozen from a reference run)
  const double r4 = packing_audit(Corona(Lattice(cantor4(4), LatticeParams{}), CoronaParams{}), 4).ratio;
  CHECK(r4 == doctest::Approx(1.437).epsilon(0.01));
}
