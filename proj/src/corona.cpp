#include <gmt/beta.hpp>
#include <gmt/corona.hpp>
#include <gmt/parallel.hpp>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace gmt {

namespace {

double theta_at(const Measure& mu, PointView z, double r) {
  const double rr = std::max(r, mu.r_min());
  return ball_mass(mu, z, rr) / std::pow(rr, mu.n());
}

}  // namespace

Corona::Corona(const Lattice& lattice, CoronaParams params) : lattice_(&lattice), params_(params) {
  if (!(params_.a_stop > 1.0)) throw Error("corona: A_stop must exceed 1");
  if (!(params_.tau > 0.0)) throw Error("corona: tau must be positive");
  const Measure& mu = lattice.measure();
  const std::size_t cells = lattice.cell_count();
  const int n = mu.n();

  theta_big_.resize(cells);
  theta_enlarged_.resize(cells);
  coherence_.resize(cells);
  parallel_for(cells, [&](std::size_t id) {
    const Ball big = lattice.big_ball(id);
    theta_big_[id] = ball_mass(mu, big) / std::pow(big.radius, n);
    const Ball enl = big.scaled(1.1);
    theta_enlarged_[id] = theta_at(mu, enl.center, enl.radius);
    if (enl.radius >= mu.r_min()) {
      const double b = beta2(mu, enl).value;
      coherence_[id] = b * b * theta_enlarged_[id];
    }
  });

  tree_of_cell_.assign(cells, kNone);
  top_slot_.assign(cells, kNone);
  top_.push_back(lattice.root());
  top_slot_[lattice.root()] = 0;

  for (std::size_t t = 0; t < top_.size(); ++t) {
    const Index r = top_[t];
    const double theta_r = theta_big_[r];
    const double density_cap = params_.a_stop * theta_r;
    const double excess_cap = params_.tau * theta_r;

    // Candidates: first cells on each branch where a rule fires.
    std::vector<Index> candidates;
    std::vector<std::pair<Index, double>> stack;
    for (auto it = lattice.cell(r).children.rbegin(); it != lattice.cell(r).children.rend(); ++it)
      stack.emplace_back(*it, 0.0);
    while (!stack.empty()) {
      const auto [q, above] = stack.back();
      stack.pop_back();
      const double excess = above + coherence_[q];
      if (theta_enlarged_[q] > density_cap || excess > excess_cap) {
        candidates.push_back(q);
        continue;
      }
      const auto& ch = lattice.cell(q).children;
      for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.emplace_back(*it, excess);
    }

    std::vector<Index> stops;
    for (Index q : candidates) {
      Index p = q;
      bool found = false;
      for (;;) {
        if (lattice.cell(p).doubling) {
          found = true;
          break;
        }
        const Index up = *lattice.cell(p).parent;
        if (up == r) break;
        p = up;
      }
      if (found) {
        stops.push_back(p);
      } else {
        const DoublingCover cover = cover_by_doubling(lattice, q);
        stops.insert(stops.end(), cover.cells.begin(), cover.cells.end());
        ++fallbacks_;
      }
    }
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
    // Keep maximal elements.
    std::vector<char> is_stop(cells, 0);
    for (Index s : stops) is_stop[s] = 1;
    std::vector<Index> maximal;
    for (Index s : stops) {
      bool covered = false;
      for (auto p = lattice.cell(s).parent; p && *p != r; p = lattice.cell(*p).parent) {
        if (is_stop[*p]) {
          covered = true;
          break;
        }
      }
      if (!covered) maximal.push_back(s);
    }
    std::fill(is_stop.begin(), is_stop.end(), 0);
    for (Index s : maximal) is_stop[s] = 1;

    CoronaTree tree;
    tree.top = r;
    tree.stop = maximal;
    std::vector<Index> walk{r};
    while (!walk.empty()) {
      const Index q = walk.back();
      walk.pop_back();
      tree.cells.push_back(q);
      tree_of_cell_[q] = t;
      for (Index c : lattice.cell(q).children) {
        if (!is_stop[c]) walk.push_back(c);
      }
    }
    std::sort(tree.cells.begin(), tree.cells.end());
    std::vector<char> stopped(mu.size(), 0);
    for (Index s : maximal) {
      for (Index i : lattice.cell(s).members) stopped[i] = 1;
    }
    for (Index i : lattice.cell(r).members) {
      if (!stopped[i]) {
        tree.good.push_back(i);
        tree.good_mass += mu.weight(i);
      }
    }
    for (Index s : maximal) {
      top_slot_[s] = top_.size();
      top_.push_back(s);
    }
    trees_.push_back(std::move(tree));
  }
}

std::size_t Corona::tree_of_top(Index cell) const {
  if (top_slot_[cell] == kNone) throw Error("cell is not a Top cell");
  return top_slot_[cell];
}

double Corona::c_tree() const {
  const double own = lattice_->doubling_constant() / std::pow(1.1, lattice_->measure().n());
  return std::max(params_.a_stop, own);
}

Corona build_corona(const Lattice& lattice, const CoronaParams& params) { return Corona(lattice, params); }

DeltaResult delta_mu(const Lattice& lattice, Index q, Index r) {
  if (!lattice.is_descendant(q, r)) throw Error("delta_mu requires Q inside R");
  const Measure& mu = lattice.measure();
  const Cell& cq = lattice.cell(q);
  const PointView z = lattice.center(q);
  DeltaResult out;
  for (Index i : mu.ball_indices(lattice.big_ball(r).scaled(2.0))) {
    if (lattice.cell_of(i, cq.k) == q) continue;
    const double t = distance(mu.point(i), z);
    if (t == 0.0) {
      ++out.excluded;
      continue;
    }
    out.value += mu.weight(i) / std::pow(t, mu.n());
  }
  return out;
}

TreeGeometry::TreeGeometry(const Corona& corona, std::size_t tree) : corona_(&corona), tree_(tree) {
  const Lattice& lat = corona.lattice();
  const Measure& mu = lat.measure();
  const CoronaTree& tr = corona.tree(tree);
  top_ = tr.top;
  phi_div_ = 20.0 * lat.params().a0 * lat.params().a0;
  for (Index q : tr.cells) {
    const PointView z = lat.center(q);
    centers_.insert(centers_.end(), z.begin(), z.end());
    sides_.push_back(lat.cell(q).ell);
  }

  d_atoms_.resize(mu.size());
  parallel_for(mu.size(), [&](std::size_t i) { d_atoms_[i] = d_r(mu.point(i)); });

  // min of d_R over the members of every cell, bottom-up
  std::vector<double> cell_min(lat.cell_count(), std::numeric_limits<double>::infinity());
  for (Index i = 0; i < mu.size(); ++i) {
    double& m = cell_min[lat.deepest_cell(i)];
    m = std::min(m, d_atoms_[i]);
  }
  for (int k = lat.depth(); k >= 1; --k) {
    for (Index id : lat.level(k)) {
      double& m = cell_min[*lat.cell(id).parent];
      m = std::min(m, cell_min[id]);
    }
  }

  const double threshold = 60.0 * lat.cell(lat.level(lat.depth()).front()).ell;
  std::vector<Index> reg;
  for (Index i : mu.ball_indices(b0())) {
    if (!(d_atoms_[i] > threshold)) continue;
    Index q = lat.deepest_cell(i);
    if (lat.cell(q).ell > cell_min[q] / 60.0) continue;
    while (lat.cell(q).parent) {
      const Index p = *lat.cell(q).parent;
      if (lat.cell(p).ell > cell_min[p] / 60.0) break;
      q = p;
    }
    reg.push_back(q);
  }
  std::sort(reg.begin(), reg.end());
  reg.erase(std::unique(reg.begin(), reg.end()), reg.end());
  reg_ = std::move(reg);
}

double TreeGeometry::d_r(PointView x) const {
  const auto d = x.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < sides_.size(); ++t) {
    const double v = distance(x, PointView(centers_.data() + t * d, d)) + sides_[t];
    best = std::min(best, v);
  }
  return best;
}

std::vector<double> TreeGeometry::phi_atoms() const {
  std::vector<double> out(d_atoms_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = d_atoms_[i] / phi_div_;
  return out;
}

Ball TreeGeometry::b0() const {
  const Lattice& lat = corona_->lattice();
  return Ball(lat.center(top_), 29.0 * lat.scale(lat.cell(top_).k));
}

PackingAudit packing_audit(const Corona& corona, int per_octave) {
  const Lattice& lat = corona.lattice();
  const Measure& mu = lat.measure();
  PackingAudit out;
  for (Index r : corona.top()) {
    const double t = corona.theta_big(r);
    out.lhs += t * t * lat.mass(r);
  }
  const Index root = lat.root();
  const double t0 = corona.theta_big(root);
  out.rhs = t0 * t0 * lat.mass(root);
  const double r_hi = lat.cell(root).ell;
  if (r_hi > mu.r_min()) {
    const JonesIntegrator jones(mu);
    std::vector<double> vals(mu.size());
    parallel_for(mu.size(), [&](std::size_t i) { vals[i] = jones.integrate(mu.point(i), mu.r_min(), r_hi, per_octave); });
    for (Index i = 0; i < mu.size(); ++i) out.rhs += mu.weight(i) * vals[i];
  }
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
  return out;
}

double b0_constant(const Lattice& lattice) {
  const int n = lattice.measure().n();
  return std::max({lattice.doubling_constant(), std::pow(280.0 / 29.0, n), std::pow(29.0 / 28.0, n)});
}

namespace {

// Uniform sample in the ball B(c, rad).
std::vector<double> sample_ball(std::mt19937_64& rng, PointView c, double rad) {
  const std::size_t d = c.size();
  std::vector<double> p(d);
  for (;;) {
    double s = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      p[a] = 2.0 * uniform01(rng) - 1.0;
      s += p[a] * p[a];
    }
    if (s <= 1.0) break;
  }
  for (std::size_t a = 0; a < d; ++a) p[a] = c[a] + rad * p[a];
  return p;
}

}  // namespace

CoronaCheck check_corona(const Corona& corona, const CoronaCheckOptions& opt) {
  const Lattice& lat = corona.lattice();
  const Measure& mu = lat.measure();
  const double a0 = lat.params().a0;
  const int n = mu.n();
  CoronaCheck out;
  out.reg_min_ratio = std::numeric_limits<double>::infinity();
  out.b0_ratio_min = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(opt.seed);

  out.root_is_top = !corona.top().empty() && corona.top().front() == lat.root();
  std::vector<int> owner(lat.cell_count(), 0);
  for (const CoronaTree& t : corona.trees()) {
    for (Index q : t.cells) ++owner[q];
  }
  for (int c : owner) {
    if (c != 1) out.tree_partition = false;
  }

  const double c_tree = corona.c_tree();
  for (const CoronaTree& t : corona.trees()) {
    const double theta_r = corona.theta_big(t.top);
    for (Index q : t.cells) {
      const double ratio = corona.theta_enlarged(q) / theta_r;
      out.tree_density_ratio = std::max(out.tree_density_ratio, ratio);
      const double cap = q == t.top ? c_tree : corona.params().a_stop;
      if (ratio > cap) out.tree_density = false;
    }
    if (t.top != lat.root() && !lat.cell(t.top).doubling) out.top_doubling = false;
  }

  // Stop^k stratification, walking k generations down from every Top cell.
  for (const CoronaTree& t : corona.trees()) {
    for (Index s1 : t.stop) {
      std::vector<std::pair<Index, int>> frontier{{s1, 1}};
      while (!frontier.empty()) {
        const auto [q, k] = frontier.back();
        frontier.pop_back();
        if (lat.cell(q).k - lat.cell(s1).k < k - 1) out.stop_stratification = false;
        for (Index s : corona.tree(corona.tree_of_top(q)).stop) frontier.emplace_back(s, k + 1);
      }
    }
  }

  const double c_prime = b0_constant(lat);
  const double deepest_ell = lat.cell(lat.level(lat.depth()).front()).ell;
  std::vector<double> lo(static_cast<std::size_t>(mu.dim()), std::numeric_limits<double>::infinity());
  std::vector<double> hi(static_cast<std::size_t>(mu.dim()), -std::numeric_limits<double>::infinity());
  for (Index i = 0; i < mu.size(); ++i) {
    for (std::size_t a = 0; a < lo.size(); ++a) {
      lo[a] = std::min(lo[a], mu.point(i)[a]);
      hi[a] = std::max(hi[a], mu.point(i)[a]);
    }
  }
  const double pad = 0.1 * std::max(mu.diameter(), mu.r_min());

  const std::size_t pairs_per_tree = std::max<std::size_t>(1, opt.lipschitz_pairs / corona.tree_count());
  for (std::size_t t = 0; t < corona.tree_count(); ++t) {
    const CoronaTree& tr = corona.tree(t);
    const TreeGeometry geo(corona, t);

    // d_R is 1-Lipschitz: random pairs drawn from atoms and the padded box.
    auto draw = [&]() {
      std::vector<double> p(lo.size());
      if (uniform01(rng) < 0.5 && mu.size() > 0) {
        const auto i = static_cast<Index>(uniform01(rng) * static_cast<double>(mu.size()));
        const PointView q = mu.point(std::min(i, mu.size() - 1));
        p.assign(q.begin(), q.end());
      } else {
        for (std::size_t a = 0; a < p.size(); ++a) p[a] = lo[a] - pad + (hi[a] - lo[a] + 2.0 * pad) * uniform01(rng);
      }
      return p;
    };
    for (std::size_t k = 0; k < pairs_per_tree; ++k) {
      const std::vector<double> x = draw(), y = draw();
      const double dx = geo.d_r(x), dy = geo.d_r(y), dxy = distance(x, y);
      // allowance for rounding in the two minima only
      if (std::abs(dx - dy) > dxy + 1e-12 * (dx + dy + dxy)) out.lipschitz = false;
      ++out.lipschitz_pairs;
    }

    // Reg(R): disjointness, containment in Stop(R), bounds on d_R near each cell.
    std::vector<int> hits(mu.size(), 0);
    for (Index q : geo.reg()) {
      for (Index i : lat.cell(q).members) {
        if (++hits[i] > 1) out.reg_disjoint = false;
      }
      if (lat.is_descendant(q, tr.top)) {
        bool inside = false;
        for (Index s : tr.stop) inside = inside || lat.is_descendant(q, s);
        if (!inside) out.reg_in_stop = false;
      }
      const double ell = lat.cell(q).ell;
      const PointView z = lat.center(q);
      std::vector<std::vector<double>> xs;
      xs.emplace_back(z.begin(), z.end());
      for (std::size_t s = 0; s < opt.samples_per_reg_cell; ++s) xs.push_back(sample_ball(rng, z, 50.0 * ell));
      for (const auto& x : xs) {
        const double dv = geo.d_r(x);
        out.reg_min_ratio = std::min(out.reg_min_ratio, dv / ell);
        out.reg_max_ratio = std::max(out.reg_max_ratio, dv / (a0 * ell));
        if (dv < 10.0 * ell) out.reg_lower = false;
        if (dv > 61.0 * a0 * ell) out.reg_upper = false;
        ++out.reg_samples;
      }
    }
    {
      std::vector<double> centers;
      double ell_max = 0.0;
      for (Index q : geo.reg()) {
        const PointView z = lat.center(q);
        centers.insert(centers.end(), z.begin(), z.end());
        ell_max = std::max(ell_max, lat.cell(q).ell);
      }
      const KdTree index(centers, mu.dim());
      const auto& reg = geo.reg();
      for (std::size_t a = 0; a < reg.size(); ++a) {
        const double la = lat.cell(reg[a]).ell;
        index.for_each_in_ball(lat.center(reg[a]), 50.0 * (la + ell_max), [&](Index b) {
          const double lb = lat.cell(reg[b]).ell;
          if (distance(lat.center(reg[a]), lat.center(reg[b])) > 50.0 * (la + lb)) return;
          const double ratio = la / lb;
          out.reg_neighbor_ratio = std::max(out.reg_neighbor_ratio, ratio);
          if (ratio > 7.0 * a0 || ratio < 1.0 / (7.0 * a0)) out.reg_neighbor = false;
        });
      }
    }

    const std::vector<double> phi = geo.phi_atoms();
    for (Index s : tr.stop) {
      const double cap = lat.cell(s).ell / (10.0 * a0);
      for (Index i : lat.cell(s).members) {
        if (phi[i] > cap) out.phi_stop = false;
      }
    }
    for (Index i : tr.good) {
      if (geo.d_r_atoms()[i] > 2.0 * deepest_ell) out.good_small = false;
    }

    const Ball b0 = geo.b0();
    const double ratio = (ball_mass(mu, b0) / std::pow(b0.radius, n)) / corona.theta_big(tr.top);
    out.b0_ratio_min = std::min(out.b0_ratio_min, ratio);
    out.b0_ratio_max = std::max(out.b0_ratio_max, ratio);
    if (lat.cell(tr.top).doubling && (ratio > c_prime || ratio < 1.0 / c_prime)) out.b0_comparable = false;

    // Empirical C_1 in mu(B(x, r) cap B_R) <= C_1 theta(B_R) r^n, r >= Phi_R(x).
    const Ball br = lat.big_ball(tr.top);
    const Measure local = restrict_to_ball(mu, br);
    const std::vector<Index> inside = mu.ball_indices(br);
    const std::size_t stride = std::max<std::size_t>(1, inside.size() / opt.growth_samples_per_tree);
    for (std::size_t k = 0; k < inside.size(); k += stride) {
      const Index i = inside[k];
      const double r_lo = std::max(phi[i], mu.r_min());
      const double c1 = sup_density(local, mu.point(i), r_lo) / corona.theta_big(tr.top);
      out.growth_c1 = std::max(out.growth_c1, c1);
    }
  }
  if (!std::isfinite(out.reg_min_ratio)) out.reg_min_ratio = 0.0;
  if (!std::isfinite(out.b0_ratio_min)) out.b0_ratio_min = 0.0;
  return out;
}

}  // namespace gmt
