#include <gmt/operators.hpp>

#include <algorithm>
#include <numeric>

namespace gmt {

namespace {

double fval(std::span<const double> f, Index i) { return f.empty() ? 1.0 : f[i]; }

// Contribution of atom i to T(f mu)(x), written to out.
void term(const Kernel& k, const Measure& mu, std::span<const double> f, PointView x, Index i,
          const Suppression* phi, std::span<double> out) {
  if (phi) {
    suppressed_kernel(k, x, mu.point(i), phi->phi_x, phi->phi_atoms[i], out);
  } else {
    const auto d = x.size();
    double diff[16];
    std::vector<double> heap;
    double* p = diff;
    if (d > 16) {
      heap.resize(d);
      p = heap.data();
    }
    for (std::size_t a = 0; a < d; ++a) p[a] = x[a] - mu.point(i)[a];
    k.eval(PointView(p, d), out);
  }
  const double s = fval(f, i) * mu.weight(i);
  for (double& v : out) v *= s;
}

}  // namespace

std::vector<double> t_eps(const Kernel& k, const Measure& mu, std::span<const double> f, PointView x, double eps,
                          const Suppression* phi) {
  if (!(eps > 0.0)) throw Error("truncation radius must be positive");
  const auto m = static_cast<std::size_t>(k.components());
  std::vector<double> sum(m, 0.0), t(m);
  for (Index i = 0; i < mu.size(); ++i) {
    if (!(distance(x, mu.point(i)) > eps)) continue;
    term(k, mu, f, x, i, phi, t);
    for (std::size_t c = 0; c < m; ++c) sum[c] += t[c];
  }
  return sum;
}

double t_star(const Kernel& k, const Measure& mu, std::span<const double> f, PointView x,
              std::span<const double> eps_grid, const Suppression* phi) {
  double best = 0.0;
  for (double eps : eps_grid) best = std::max(best, norm(t_eps(k, mu, f, x, eps, phi)));
  return best;
}

double t_star_exact(const Kernel& k, const Measure& mu, std::span<const double> f, PointView x, double eps_min,
                    const Suppression* phi) {
  const auto m = static_cast<std::size_t>(k.components());
  std::vector<std::pair<double, Index>> by_dist;
  by_dist.reserve(mu.size());
  for (Index i = 0; i < mu.size(); ++i) {
    const double t = distance(x, mu.point(i));
    if (t > eps_min && t > 0.0) by_dist.emplace_back(t, i);
  }
  // Farthest first; T_eps for eps in [next distance, d_g) is the sum over
  // groups strictly farther than eps.
  std::sort(by_dist.begin(), by_dist.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  std::vector<double> sum(m, 0.0), t(m);
  double best = 0.0;
  std::size_t g = 0;
  while (g < by_dist.size()) {
    const double dg = by_dist[g].first;
    while (g < by_dist.size() && by_dist[g].first == dg) {
      term(k, mu, f, x, by_dist[g].second, phi, t);
      for (std::size_t c = 0; c < m; ++c) sum[c] += t[c];
      ++g;
    }
    best = std::max(best, norm(sum));
  }
  return best;
}

std::vector<double> default_eps_grid(const Measure& mu, int per_octave) {
  const double lo = 0.5 * mu.r_min();
  const double hi = std::max(mu.diameter(), lo);
  return geometric_grid(lo, hi, per_octave);
}

double m_r_phi(const Measure& mu, std::span<const double> f, PointView x, double phi_x) {
  if (!(phi_x >= 0.0)) throw Error("suppressing function must be nonnegative");
  return sup_density(mu, x, std::max(phi_x, mu.r_min()), f);
}

double m_tilde(const Measure& sigma, std::span<const double> f, PointView x, MaximalVariant variant) {
  const std::size_t count = sigma.size();
  if (count == 0) return 0.0;
  const double power = variant == MaximalVariant::plain ? 1.0 : 1.5;
  std::vector<std::pair<double, Index>> by_dist(count);
  for (Index i = 0; i < count; ++i) by_dist[i] = {distance(x, sigma.point(i)), i};
  std::sort(by_dist.begin(), by_dist.end());
  std::vector<double> dist(count), num(count + 1, 0.0), den(count + 1, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    const Index i = by_dist[k].second;
    dist[k] = by_dist[k].first;
    const double w = sigma.weight(i);
    num[k + 1] = num[k] + std::pow(std::abs(fval(f, i)), power) * w;
    den[k + 1] = den[k] + w;
  }
  // Both masses are step functions of r, constant on [b, next breakpoint).
  std::vector<double> radii;
  radii.reserve(2 * count + 1);
  for (double t : dist) {
    if (t > 0.0) {
      radii.push_back(t);
      radii.push_back(t / 3.0);
    }
  }
  const double min_pos = radii.empty() ? 1.0 : *std::min_element(radii.begin(), radii.end());
  radii.push_back(0.5 * min_pos);  // stands for r -> 0+
  double best = 0.0;
  for (double r : radii) {
    const auto kn = static_cast<std::size_t>(std::upper_bound(dist.begin(), dist.end(), r) - dist.begin());
    const auto kd = static_cast<std::size_t>(std::upper_bound(dist.begin(), dist.end(), 3.0 * r) - dist.begin());
    if (den[kd] <= 0.0) continue;
    best = std::max(best, num[kn] / den[kd]);
  }
  return variant == MaximalVariant::plain ? best : std::pow(best, 2.0 / 3.0);
}

double KrEvaluation::discrepancy() const {
  double s = 0.0;
  for (std::size_t c = 0; c < chain.size(); ++c) {
    const double t = chain[c] - telescoped[c];
    s += t * t;
  }
  return std::sqrt(s);
}

KrEvaluation k_r_operator(const Corona& corona, std::size_t tree, const Kernel& k, const BumpFamily& bump, Index x) {
  const Lattice& lat = corona.lattice();
  const Measure& mu = lat.measure();
  const CoronaTree& tr = corona.tree(tree);
  const Cell& top = lat.cell(tr.top);
  if (lat.cell_of(x, top.k) != tr.top) throw Error("K_R evaluation point lies outside R");

  KrEvaluation out;
  out.j_begin = top.k;
  out.j_end = lat.depth() + 1;
  for (int j = top.k; j <= lat.depth(); ++j) {
    if (corona.tree_of_cell(lat.cell_of(x, j)) != tree) {
      out.j_end = j;
      break;
    }
  }

  const auto m = static_cast<std::size_t>(k.components());
  out.chain.assign(m, 0.0);
  out.telescoped.assign(m, 0.0);
  std::vector<double> kv(m);
  const PointView px = mu.point(x);
  std::vector<double> diff(px.size());
  for (Index i = 0; i < mu.size(); ++i) {
    const double t = distance(px, mu.point(i));
    if (t == 0.0) continue;  // every phi_j and psi difference vanishes at 0
    if (t > bump.support_outer(out.j_begin)) continue;
    for (std::size_t a = 0; a < diff.size(); ++a) diff[a] = px[a] - mu.point(i)[a];
    k.eval(diff, kv);
    const double w = mu.weight(i);
    double kn = 0.0;
    for (double v : kv) kn += v * v;
    kn = std::sqrt(kn);
    for (int j = out.j_begin; j < out.j_end; ++j) {
      const double ph = bump.phi(j, t);
      if (ph == 0.0) continue;
      for (std::size_t c = 0; c < m; ++c) out.chain[c] += ph * kv[c] * w;
      out.scale += std::abs(ph) * kn * w;
    }
    const double tele = bump.psi(out.j_begin, t) - bump.psi(out.j_end, t);
    for (std::size_t c = 0; c < m; ++c) out.telescoped[c] += tele * kv[c] * w;
  }
  return out;
}

BumpFamily lattice_bump(const Lattice& lattice) { return BumpFamily(lattice.params().a0, 1000.0 * lattice.unit()); }

}  // namespace gmt
