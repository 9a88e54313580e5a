#include <gmt/parallel.hpp>
#include <gmt/verify.hpp>

#include <algorithm>
#include <limits>
#include <random>

namespace gmt {

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  if (!(hi > lo)) return lo;
  return lo * std::exp(std::log(hi / lo) * uniform01(rng));
}

Index random_index(std::mt19937_64& rng, std::size_t count) {
  return std::min(static_cast<Index>(uniform01(rng) * static_cast<double>(count)), count - 1);
}

double jones_sum(const Measure& mu, int per_octave) {
  if (!(mu.diameter() > mu.r_min())) return 0.0;
  const JonesIntegrator jones(mu);
  std::vector<double> vals(mu.size());
  parallel_for(mu.size(), [&](std::size_t i) {
    vals[i] = jones.integrate(mu.point(i), mu.r_min(), mu.diameter(), per_octave);
  });
  double s = 0.0;
  for (Index i = 0; i < mu.size(); ++i) s += mu.weight(i) * vals[i];
  return s;
}

// T_Phi(f sigma)(y_j) = sum over atoms l at positive distance of
// k_Phi(y_j, y_l) f_l w_l.
std::vector<double> suppressed_at(const Kernel& k, const Measure& sigma, std::span<const double> f,
                                  std::span<const double> phi, Index j) {
  const auto m = static_cast<std::size_t>(k.components());
  std::vector<double> sum(m, 0.0), t(m);
  const PointView y = sigma.point(j);
  for (Index l = 0; l < sigma.size(); ++l) {
    if (distance(y, sigma.point(l)) == 0.0) continue;
    suppressed_kernel(k, y, sigma.point(l), phi[j], phi[l], t);
    const double s = (f.empty() ? 1.0 : f[l]) * sigma.weight(l);
    for (std::size_t c = 0; c < m; ++c) sum[c] += t[c] * s;
  }
  return sum;
}

struct Localized {
  Measure sigma;
  std::vector<double> phi;  // Phi_R at the atoms of sigma
  std::vector<double> f;    // f at the atoms of sigma (empty means 1)
};

Localized localize(const TreeGeometry& geo, std::span<const double> f) {
  const Measure& mu = geo.corona().lattice().measure();
  const std::vector<Index> atoms = mu.ball_indices(geo.b0());
  const std::vector<double> phi_all = geo.phi_atoms();
  Localized out{restrict_indices(mu, atoms), {}, {}};
  out.phi.reserve(atoms.size());
  for (Index i : atoms) out.phi.push_back(phi_all[i]);
  if (!f.empty()) {
    out.f.reserve(atoms.size());
    for (Index i : atoms) out.f.push_back(f[i]);
  }
  return out;
}

}  // namespace

double safe_ratio(double lhs, double rhs) {
  if (rhs > 0.0) return lhs / rhs;
  return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

MainLemmaResult main_lemma_check(const Measure& mu, const Kernel& k, std::span<const double> eps_grid,
                                 int per_octave) {
  MainLemmaResult out;
  if (mu.is_empty()) return out;
  std::vector<double> grid(eps_grid.begin(), eps_grid.end());
  std::sort(grid.begin(), grid.end());
  for (double e : grid) {
    if (!(e > 0.0)) throw Error("truncation radii must be positive");
  }
  const std::size_t g = grid.size();
  const auto m = static_cast<std::size_t>(k.components());
  const std::size_t count = mu.size();

  // sq[i * g + e] = |T_eps_e mu(x_i)|^2. An atom at distance t counts for
  // every eps_e < t, so it is bucketed at the first grid index with eps >= t
  // and the values are suffix sums over buckets.
  std::vector<double> sq(count * g, 0.0);
  parallel_for(count, [&](std::size_t i) {
    std::vector<double> bucket((g + 1) * m, 0.0), kv(m), diff(static_cast<std::size_t>(mu.dim()));
    const PointView x = mu.point(i);
    for (Index j = 0; j < count; ++j) {
      const double t = distance(x, mu.point(j));
      const auto b = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), t) - grid.begin());
      if (b == 0) continue;
      for (std::size_t a = 0; a < diff.size(); ++a) diff[a] = x[a] - mu.point(j)[a];
      k.eval(diff, kv);
      const double w = mu.weight(j);
      for (std::size_t c = 0; c < m; ++c) bucket[b * m + c] += kv[c] * w;
    }
    std::vector<double> run(m, 0.0);
    for (std::size_t e = g; e-- > 0;) {
      for (std::size_t c = 0; c < m; ++c) run[c] += bucket[(e + 1) * m + c];
      double s = 0.0;
      for (double v : run) s += v * v;
      sq[i * g + e] = s;
    }
  });
  for (std::size_t e = 0; e < g; ++e) {
    double s = 0.0;
    for (Index i = 0; i < count; ++i) s += mu.weight(i) * sq[i * g + e];
    if (s > out.lhs) {
      out.lhs = s;
      out.best_eps = grid[e];
    }
  }
  out.jones = jones_sum(mu, per_octave);
  out.rhs = mu.total_mass() + out.jones;
  out.ratio = safe_ratio(out.lhs, out.rhs);
  return out;
}

BallSampleResult t1_ball_check(const Measure& mu, const Kernel& k, std::span<const Ball> balls,
                               std::span<const double> eps_grid, int per_octave) {
  BallSampleResult out;
  out.ratios.reserve(balls.size());
  for (const Ball& b : balls) {
    const Measure sub = restrict_to_ball(mu, b);
    const double r = sub.is_empty() ? 0.0 : main_lemma_check(sub, k, eps_grid, per_octave).ratio;
    out.ratios.push_back(r);
    out.worst = std::max(out.worst, r);
  }
  return out;
}

std::vector<Ball> random_balls(const Measure& mu, std::size_t count, std::uint64_t seed) {
  std::vector<Ball> out;
  if (mu.is_empty()) return out;
  std::mt19937_64 rng(seed);
  const double hi = std::max(mu.diameter(), mu.r_min());
  for (std::size_t s = 0; s < count; ++s) {
    const Index i = random_index(rng, mu.size());
    out.emplace_back(mu.point(i), log_uniform(rng, mu.r_min(), hi));
  }
  return out;
}

CotlarResult cotlar_check(const TreeGeometry& geo, const Kernel& k, std::span<const double> f,
                          std::span<const Index> sample) {
  const Measure& mu = geo.corona().lattice().measure();
  const Localized loc = localize(geo, f);
  const Measure& sigma = loc.sigma;
  CotlarResult out;
  if (sigma.is_empty()) return out;

  std::vector<double> s_abs(sigma.size());
  parallel_for(sigma.size(), [&](std::size_t j) { s_abs[j] = norm(suppressed_at(k, sigma, loc.f, loc.phi, j)); });

  const std::vector<double> phi_all = geo.phi_atoms();
  std::vector<double> lhs(sample.size()), rhs(sample.size());
  parallel_for(sample.size(), [&](std::size_t s) {
    const PointView x = mu.point(sample[s]);
    const Suppression sup{phi_all[sample[s]], loc.phi};
    lhs[s] = t_star_exact(k, sigma, loc.f, x, 0.0, &sup);
    rhs[s] = m_tilde(sigma, s_abs, x, MaximalVariant::plain) +
             m_tilde(sigma, loc.f, x, MaximalVariant::three_halves);
  });
  for (std::size_t s = 0; s < sample.size(); ++s) {
    if (rhs[s] <= 0.0) {
      if (lhs[s] > 0.0) ++out.flagged;
      continue;
    }
    ++out.samples;
    const double r = lhs[s] / rhs[s];
    if (r > out.constant) {
      out.constant = r;
      out.worst_lhs = lhs[s];
      out.worst_rhs = rhs[s];
    }
  }
  return out;
}

DominationResult pointwise_domination_check(const TreeGeometry& geo, const Kernel& k, const BumpFamily& bump,
                                            std::span<const Index> sample) {
  const Corona& corona = geo.corona();
  const Localized loc = localize(geo, {});
  const std::vector<double> phi_all = geo.phi_atoms();
  DominationResult out;
  out.theta_br = corona.theta_big(geo.top());
  std::vector<double> c(sample.size());
  parallel_for(sample.size(), [&](std::size_t s) {
    const Index x = sample[s];
    const KrEvaluation kr = k_r_operator(corona, geo.tree_index(), k, bump, x);
    const Suppression sup{phi_all[x], loc.phi};
    const double tstar = loc.sigma.is_empty()
                             ? 0.0
                             : t_star_exact(k, loc.sigma, {}, corona.lattice().measure().point(x), 0.0, &sup);
    c[s] = std::max(0.0, norm(kr.chain) - tstar) / out.theta_br;
  });
  for (double v : c) out.constant = std::max(out.constant, v);
  out.samples = sample.size();
  return out;
}

CapacityResult capacity_lower_bound(const Measure& mu, int per_octave) {
  if (mu.is_empty()) throw Error("capacity bound needs a nonempty measure");
  CapacityResult out;
  out.sub_resolution = mu.size() == 1 || mu.diameter() == 0.0;
  const JonesIntegrator jones(mu);
  const double diam = mu.diameter();
  const double tail = jones.tail(std::max(diam, mu.r_min()));
  std::vector<double> a(mu.size()), integral(mu.size());
  parallel_for(mu.size(), [&](std::size_t i) {
    const PointView x = mu.point(i);
    a[i] = sup_density(mu, x, mu.r_min());
    integral[i] = tail + (diam > mu.r_min() ? jones.integrate(x, mu.r_min(), diam, per_octave) : 0.0);
  });
  out.t_star = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < mu.size(); ++i) {
    const double A = a[i], I = integral[i];
    const double t = I > 0.0 ? (-A + std::sqrt(A * A + 4.0 * I)) / (2.0 * I) : 1.0 / A;
    if (t < out.t_star) {
      out.t_star = t;
      out.argmin = i;
      out.density = A;
      out.jones = I;
    }
  }
  out.bound = out.t_star * mu.total_mass();
  return out;
}

SampledConstant suppression_constant(const Kernel& k, const Measure& mu, std::span<const double> phi,
                                     std::size_t pairs, std::uint64_t seed) {
  SampledConstant out;
  if (mu.size() < 2) return out;
  std::mt19937_64 rng(seed);
  std::vector<double> kv(static_cast<std::size_t>(k.components()));
  for (std::size_t s = 0; s < pairs; ++s) {
    const Index i = random_index(rng, mu.size());
    const Index j = random_index(rng, mu.size());
    if (distance(mu.point(i), mu.point(j)) == 0.0) continue;
    suppressed_kernel(k, mu.point(i), mu.point(j), phi[i], phi[j], kv);
    const double big = std::max(phi[i], phi[j]);
    out.value = std::max(out.value, norm(kv) * std::pow(big, k.n()));
    ++out.samples;
  }
  return out;
}

TruncationConstants truncation_constants(const Kernel& k, const Measure& mu, std::span<const double> phi,
                                         std::size_t samples, std::uint64_t seed) {
  TruncationConstants out;
  if (mu.size() < 2) return out;
  struct Draw {
    Index x;
    double eps;
    bool above;
  };
  std::mt19937_64 rng(seed);
  std::vector<Draw> draws;
  const double hi = std::max(mu.diameter(), mu.r_min());
  for (std::size_t s = 0; s < samples; ++s) {
    const Index x = random_index(rng, mu.size());
    const double ph = phi[x];
    const bool above = ph == 0.0 || uniform01(rng) < 0.5;
    double eps;
    if (above) {
      eps = log_uniform(rng, std::max(ph, 0.5 * mu.r_min()), std::max(hi, 2.0 * ph));
      if (!(eps > ph)) continue;
    } else {
      eps = log_uniform(rng, 0.01 * ph, ph);
    }
    draws.push_back({x, eps, above});
  }
  std::vector<double> ratio(draws.size());
  parallel_for(draws.size(), [&](std::size_t s) {
    const Draw& dr = draws[s];
    const PointView x = mu.point(dr.x);
    const Suppression sup{phi[dr.x], phi};
    const double m = m_r_phi(mu, {}, x, phi[dr.x]);
    const std::vector<double> a = t_eps(k, mu, {}, x, dr.eps, &sup);
    const std::vector<double> b =
        dr.above ? t_eps(k, mu, {}, x, dr.eps) : t_eps(k, mu, {}, x, phi[dr.x], &sup);
    double diff = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) diff += (a[c] - b[c]) * (a[c] - b[c]);
    ratio[s] = safe_ratio(std::sqrt(diff), m);
  });
  for (std::size_t s = 0; s < draws.size(); ++s) {
    SampledConstant& target = draws[s].above ? out.above : out.below;
    target.value = std::max(target.value, ratio[s]);
    ++target.samples;
  }
  return out;
}

SampledConstant smoothness_check(const Kernel& k, std::size_t samples, std::uint64_t seed) {
  SampledConstant out;
  const double c = k.smoothness_constant();
  const auto m = static_cast<std::size_t>(k.components());
  std::mt19937_64 rng(seed);
  std::vector<double> k1(m), k2(m), k3(m), k4(m);
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<double> v = random_direction(rng, k.dim());
    const double len = log_uniform(rng, 1e-2, 1e2);
    for (double& t : v) t *= len;
    const std::vector<double> u = random_direction(rng, k.dim());
    const double h = 0.5 * len * std::max(uniform01(rng), 1e-6);
    // x - y = v, x' - y = v + h u
    std::vector<double> vp(v), nv(v), nvp(v);
    for (std::size_t a = 0; a < v.size(); ++a) {
      vp[a] = v[a] + h * u[a];
      nv[a] = -v[a];
      nvp[a] = -vp[a];
    }
    k.eval(v, k1);
    k.eval(vp, k2);
    k.eval(nv, k3);
    k.eval(nvp, k4);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t q = 0; q < m; ++q) {
      d1 += (k1[q] - k2[q]) * (k1[q] - k2[q]);
      d2 += (k3[q] - k4[q]) * (k3[q] - k4[q]);
    }
    const double lhs = (std::sqrt(d1) + std::sqrt(d2)) * std::pow(len, k.n() + 1);
    out.value = std::max(out.value, safe_ratio(lhs, c * h));
    ++out.samples;
  }
  return out;
}

GrowthTailResult growth_tail_check(const Measure& mu, std::size_t samples, std::uint64_t seed) {
  GrowthTailResult out;
  out.bound = annulus_constant(mu.n());
  if (mu.is_empty()) return out;
  std::vector<double> sup(mu.size());
  parallel_for(mu.size(), [&](std::size_t i) { sup[i] = sup_density(mu, mu.point(i), mu.r_min()); });
  for (double v : sup) out.c0 = std::max(out.c0, v);

  std::mt19937_64 rng(seed);
  std::vector<std::pair<Index, double>> draws(samples);
  const double hi = std::max(mu.diameter(), mu.r_min());
  for (auto& d : draws) {
    d.first = random_index(rng, mu.size());
    d.second = log_uniform(rng, mu.r_min(), hi);
  }
  std::vector<double> ratio(samples);
  parallel_for(samples, [&](std::size_t s) {
    const double r = draws[s].second;
    ratio[s] = annulus_tail(mu, mu.point(draws[s].first), r) * r / out.c0;
  });
  for (double v : ratio) out.worst = std::max(out.worst, v);
  out.samples = samples;
  return out;
}

}  // namespace gmt
