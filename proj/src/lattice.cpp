#include <gmt/lattice.hpp>

#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace gmt {

namespace {

struct KeyHash {
  std::size_t operator()(const std::vector<long long>& key) const {
    std::size_t h = 1469598103934665603ULL;
    for (long long v : key) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

// Uniform hash grid over atom indices; neighbours of a point within one cell
// side are found among the 3^d surrounding buckets.
class HashGrid {
 public:
  HashGrid(const Measure& mu, double side) : mu_(mu), side_(side) {}

  void insert(Index i) { buckets_[key(mu_.point(i))].push_back(i); }

  template <class Fn>
  void for_each_near(PointView x, Fn&& fn) const {
    const std::vector<long long> base = key(x);
    std::vector<long long> probe(base.size());
    const auto d = base.size();
    std::size_t total = 1;
    for (std::size_t a = 0; a < d; ++a) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t c = code;
      for (std::size_t a = 0; a < d; ++a) {
        probe[a] = base[a] + static_cast<long long>(c % 3) - 1;
        c /= 3;
      }
      const auto it = buckets_.find(probe);
      if (it == buckets_.end()) continue;
      for (Index i : it->second) fn(i);
    }
  }

 private:
  std::vector<long long> key(PointView x) const {
    std::vector<long long> k(x.size());
    for (std::size_t a = 0; a < x.size(); ++a) k[a] = static_cast<long long>(std::floor(x[a] / side_));
    return k;
  }

  const Measure& mu_;
  double side_;
  std::unordered_map<std::vector<long long>, std::vector<Index>, KeyHash> buckets_;
};

bool lex_less(const Measure& mu, Index a, Index b) {
  const PointView pa = mu.point(a), pb = mu.point(b);
  for (std::size_t c = 0; c < pa.size(); ++c) {
    if (pa[c] != pb[c]) return pa[c] < pb[c];
  }
  return a < b;
}

// Nearest net point to x; the net is maximal at spacing `side`, so one is
// always found among the neighbouring buckets.
Index nearest(const Measure& mu, const HashGrid& grid, PointView x) {
  Index best = std::numeric_limits<Index>::max();
  double best_d = std::numeric_limits<double>::infinity();
  grid.for_each_near(x, [&](Index c) {
    const double t = distance(x, mu.point(c));
    if (t < best_d || (t == best_d && c < best)) {
      best_d = t;
      best = c;
    }
  });
  if (best == std::numeric_limits<Index>::max()) throw Error("lattice: net is not maximal");
  return best;
}

double max_distance(const Measure& mu, PointView z, const std::vector<Index>& members) {
  double m = 0.0;
  for (Index i : members) m = std::max(m, distance(z, mu.point(i)));
  return m;
}

double exact_diameter(const Measure& mu, const std::vector<Index>& members) {
  double m = 0.0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    const PointView p = mu.point(members[a]);
    for (std::size_t b = a + 1; b < members.size(); ++b) m = std::max(m, distance(p, mu.point(members[b])));
  }
  return m;
}

}  // namespace

Lattice::Lattice(Measure mu, LatticeParams params) : mu_(std::move(mu)), params_(params) {
  if (!(params_.c0 > 1.0)) throw Error("lattice: C0 must exceed 1");
  if (!(params_.a0 > 1.0)) throw Error("lattice: A0 must exceed 1");
  if (params_.max_depth < 1) throw Error("lattice: max_depth must be >= 1");
  if (params_.strict && !strict_regime()) throw Error("lattice: strict mode requires A0 > 5000 C0");
  if (mu_.is_empty()) throw Error("lattice: empty measure");
  c_db_ = params_.doubling_constant > 0.0 ? params_.doubling_constant : std::pow(128.0, mu_.n());

  const std::size_t count = mu_.size();
  const double diam = mu_.diameter();
  // B_R0 = 28 B(R0) then has radius diam and holds every atom.
  unit_ = diam > 0.0 ? diam / 28.0 : mu_.r_min();

  std::vector<Index> lex(count);
  std::iota(lex.begin(), lex.end(), Index{0});
  std::sort(lex.begin(), lex.end(), [&](Index a, Index b) { return lex_less(mu_, a, b); });
  std::size_t distinct = count == 0 ? 0 : 1;
  for (std::size_t k = 1; k < count; ++k) {
    if (distance(mu_.point(lex[k - 1]), mu_.point(lex[k])) > 0.0) ++distinct;
  }

  // Level 0 is the root alone; below it, nested greedy nets.
  std::vector<std::vector<Index>> nets;
  std::vector<char> in_net(count, 0);
  std::vector<Index> net{lex.front()};
  in_net[lex.front()] = 1;
  nets.push_back(net);
  for (int k = 1;; ++k) {
    const double side = 10.0 * scale(k);
    HashGrid grid(mu_, side);
    for (Index c : net) grid.insert(c);
    for (Index a : lex) {
      if (in_net[a]) continue;
      bool free = true;
      grid.for_each_near(mu_.point(a), [&](Index c) {
        if (free && distance(mu_.point(a), mu_.point(c)) <= side) free = false;
      });
      if (free) {
        net.push_back(a);
        in_net[a] = 1;
        grid.insert(a);
      }
    }
    std::sort(net.begin(), net.end());
    nets.push_back(net);
    if (net.size() == distinct || k >= params_.max_depth) break;
  }
  const int depth = static_cast<int>(nets.size()) - 1;

  // Bottom-up assignment: atoms to deepest centers, centers to their
  // nearest center one level up.
  std::vector<std::vector<Index>> center_at(nets.size(), std::vector<Index>(count));
  {
    HashGrid grid(mu_, 10.0 * scale(depth));
    for (Index c : nets.back()) grid.insert(c);
    for (Index i = 0; i < count; ++i) center_at.back()[i] = nearest(mu_, grid, mu_.point(i));
  }
  std::fill(center_at.front().begin(), center_at.front().end(), nets.front().front());
  for (int k = depth - 1; k >= 1; --k) {
    HashGrid grid(mu_, 10.0 * scale(k));
    for (Index c : nets[static_cast<std::size_t>(k)]) grid.insert(c);
    std::unordered_map<Index, Index> up;
    for (Index c : nets[static_cast<std::size_t>(k + 1)]) up[c] = nearest(mu_, grid, mu_.point(c));
    for (Index i = 0; i < count; ++i) center_at[static_cast<std::size_t>(k)][i] = up.at(center_at[static_cast<std::size_t>(k + 1)][i]);
  }

  // Cells, level by level, ordered by center index.
  levels_.resize(nets.size());
  cell_at_.assign(nets.size(), std::vector<Index>(count));
  for (int k = 0; k <= depth; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    std::unordered_map<Index, Index> id_of;
    for (Index c : nets[ku]) {
      Cell cell;
      cell.id = cells_.size();
      cell.k = k;
      cell.center = c;
      cell.ell = 56.0 * params_.c0 * scale(k);
      id_of[c] = cell.id;
      levels_[ku].push_back(cell.id);
      cells_.push_back(std::move(cell));
    }
    for (Index i = 0; i < count; ++i) {
      const Index id = id_of.at(center_at[ku][i]);
      cell_at_[ku][i] = id;
      cells_[id].members.push_back(i);
    }
    if (k > 0) {
      for (Index id : levels_[ku]) {
        const Index p = cell_at_[ku - 1][cells_[id].center];
        cells_[id].parent = p;
        cells_[p].children.push_back(id);
      }
    }
  }

  for (Cell& q : cells_) {
    const PointView z = mu_.point(q.center);
    const double s = scale(q.k);
    const double reach = max_distance(mu_, z, q.members);
    q.r = std::clamp(reach / 28.0, s, params_.c0 * s);
    bool ok = reach <= 28.0 * q.r;
    for (Index i : mu_.ball_indices(z, q.r)) {
      if (cell_at_[static_cast<std::size_t>(q.k)][i] != q.id) ok = false;
    }
    q.conforming = ok;
  }
  classify_doubling();
}

void Lattice::classify_doubling() {
  for (Cell& q : cells_) {
    const PointView z = mu_.point(q.center);
    q.doubling = ball_mass(mu_, z, 100.0 * q.r) <= c_db_ * ball_mass(mu_, z, q.r);
  }
}

bool Lattice::is_descendant(Index q, Index r) const {
  const int kr = cells_[r].k;
  while (cells_[q].k > kr) q = *cells_[q].parent;
  return q == r;
}

double Lattice::mass(Index id) const {
  double s = 0.0;
  for (Index i : cells_[id].members) s += mu_.weight(i);
  return s;
}

Lattice build_lattice(const Measure& mu, const LatticeParams& params) { return Lattice(mu, params); }

std::vector<bool> classify_doubling(const Lattice& lattice) {
  std::vector<bool> out(lattice.cell_count());
  for (Index id = 0; id < lattice.cell_count(); ++id) out[id] = lattice.cell(id).doubling;
  return out;
}

BoundaryLayer boundary_layer_mass(const Lattice& lattice, Index q, double lambda) {
  if (!(lambda > 0.0) || lambda > 1.0) throw Error("boundary layer: lambda must lie in (0, 1]");
  const Measure& mu = lattice.measure();
  const Cell& cell = lattice.cell(q);
  const double width = lambda * cell.ell;
  BoundaryLayer out;
  auto in_q = [&](Index i) { return lattice.cell_of(i, cell.k) == q; };
  for (Index i : cell.members) {
    bool near = false;
    mu.index().for_each_in_ball(mu.point(i), width, [&](Index j) { near = near || !in_q(j); });
    if (near) out.inner += mu.weight(i);
  }
  for (Index i : mu.ball_indices(lattice.big_ball(q).scaled(4.0))) {
    if (in_q(i)) continue;
    bool near = false;
    mu.index().for_each_in_ball(mu.point(i), width, [&](Index j) { near = near || in_q(j); });
    if (near) out.outer += mu.weight(i);
  }
  return out;
}

double boundary_ratio(const Lattice& lattice, Index q, double lambda) {
  const BoundaryLayer b = boundary_layer_mass(lattice, q, lambda);
  const double denom = std::sqrt(lambda) * ball_mass(lattice.measure(), lattice.big_ball(q).scaled(3.5));
  return (b.inner + b.outer) / denom;
}

namespace {
void cover_rec(const Lattice& lattice, Index q, DoublingCover& out) {
  const Cell& cell = lattice.cell(q);
  if (cell.doubling) {
    out.cells.push_back(q);
    return;
  }
  if (cell.children.empty()) {
    out.uncovered.insert(out.uncovered.end(), cell.members.begin(), cell.members.end());
    return;
  }
  for (Index c : cell.children) cover_rec(lattice, c, out);
}
}  // namespace

DoublingCover cover_by_doubling(const Lattice& lattice, Index r) {
  DoublingCover out;
  cover_rec(lattice, r, out);
  std::sort(out.uncovered.begin(), out.uncovered.end());
  for (Index i : out.uncovered) out.uncovered_mass += lattice.measure().weight(i);
  return out;
}

LatticeCheck check_lattice(const Lattice& lattice) {
  const Measure& mu = lattice.measure();
  const std::size_t count = mu.size();
  LatticeCheck out;
  out.diam_lower_ratio = std::numeric_limits<double>::infinity();
  const double c0 = lattice.params().c0;

  for (int k = 0; k <= lattice.depth(); ++k) {
    std::vector<int> seen(count, 0);
    for (Index id : lattice.level(k)) {
      for (Index i : lattice.cell(id).members) {
        ++seen[i];
        if (lattice.cell_of(i, k) != id) out.partition = false;
      }
    }
    for (int s : seen) {
      if (s != 1) out.partition = false;
    }

    // 5B disjointness among conforming cells of this level.
    const std::vector<Index>& lv = lattice.level(k);
    std::vector<double> centers;
    double r_max = 0.0;
    for (Index id : lv) {
      const PointView z = lattice.center(id);
      centers.insert(centers.end(), z.begin(), z.end());
      r_max = std::max(r_max, lattice.cell(id).r);
    }
    const KdTree tree(centers, mu.dim());
    for (std::size_t a = 0; a < lv.size(); ++a) {
      const Cell& qa = lattice.cell(lv[a]);
      if (!qa.conforming) continue;
      tree.for_each_in_ball(lattice.center(lv[a]), 5.0 * (qa.r + r_max), [&](Index b) {
        if (b == a) return;
        const Cell& qb = lattice.cell(lv[b]);
        if (!qb.conforming) return;
        if (distance(lattice.center(lv[a]), lattice.center(lv[b])) <= 5.0 * qa.r + 5.0 * qb.r) out.disjoint_5b = false;
      });
    }
  }

  for (const Cell& q : lattice.cells()) {
    if (!q.conforming) ++out.nonconforming;
    if (q.parent) {
      const Cell& p = lattice.cell(*q.parent);
      if (p.k != q.k - 1 || !std::includes(p.members.begin(), p.members.end(), q.members.begin(), q.members.end()))
        out.nesting = false;
    }
    const PointView z = mu.point(q.center);
    for (Index i : mu.ball_indices(z, q.r)) {
      if (lattice.cell_of(i, q.k) != q.id) out.containment = false;
    }
    const double reach = max_distance(mu, z, q.members);
    if (reach > 28.0 * q.r) out.containment = false;
    if (!q.conforming || q.members.size() < 2) continue;
    const double diam = exact_diameter(mu, q.members);
    if (diam > q.ell) out.diam_upper = false;
    if (diam > 0.0) out.diam_lower_ratio = std::min(out.diam_lower_ratio, 28.0 * c0 * diam / q.ell);
  }
  if (!std::isfinite(out.diam_lower_ratio)) out.diam_lower_ratio = 0.0;
  return out;
}

}  // namespace gmt
