#include <gmt/measure.hpp>

#include <algorithm>
#include <limits>
#include <numeric>

namespace gmt {

namespace {

void validate_dims(int dim, int n) {
  if (dim < 1) throw Error("ambient dimension must be >= 1");
  if (n < 1 || n >= dim) throw Error("target dimension n must satisfy 1 <= n < dim");
}

}  // namespace

Measure::Measure(int dim, int n, std::vector<double> coords, std::vector<double> weights,
                 std::optional<double> r_min) {
  validate_dims(dim, n);
  const auto d = static_cast<std::size_t>(dim);
  if (coords.size() != weights.size() * d) throw Error("coordinate array does not match weight count");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw Error("weight of atom " + std::to_string(i) + " is not a positive finite number");
  }
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i])) throw Error("coordinate of atom " + std::to_string(i / d) + " is not finite");
  }

  auto data = std::make_shared<Data>();
  data->dim = dim;
  data->n = n;
  data->coords = std::move(coords);
  data->weights = std::move(weights);
  for (double w : data->weights) data->total_mass += w;

  const std::size_t count = data->weights.size();
  double min_nonzero = std::numeric_limits<double>::infinity();
  double diam = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const PointView a(data->coords.data() + i * d, d);
    for (std::size_t j = i + 1; j < count; ++j) {
      const double t = distance(a, PointView(data->coords.data() + j * d, d));
      diam = std::max(diam, t);
      if (t > 0.0) min_nonzero = std::min(min_nonzero, t);
    }
  }
  data->diameter = diam;
  if (r_min) {
    if (!(*r_min > 0.0) || !std::isfinite(*r_min)) throw Error("r_min must be positive and finite");
    data->r_min = *r_min;
  } else {
    data->r_min = std::isfinite(min_nonzero) ? 0.5 * min_nonzero : 1.0;
  }
  data->tree = KdTree(data->coords, dim);
  data_ = std::move(data);
}

Measure Measure::empty(int dim, int n, double r_min) { return Measure(dim, n, {}, {}, r_min); }

std::vector<Index> Measure::ball_indices(PointView center, double radius) const {
  return data_->tree.query(center, radius);
}

Measure Measure::scaled(double t) const {
  if (!(t > 0.0)) throw Error("scaling factor must be positive");
  std::vector<double> w(data_->weights);
  for (double& x : w) x *= t;
  return Measure(dim(), n(), data_->coords, std::move(w), r_min());
}

Measure Measure::with_r_min(double r) const { return Measure(dim(), n(), data_->coords, data_->weights, r); }

Measure Measure::transformed(std::span<const double> rotation, std::span<const double> shift) const {
  const auto d = static_cast<std::size_t>(dim());
  if (rotation.size() != d * d || shift.size() != d) throw Error("transform has wrong shape");
  std::vector<double> out(data_->coords.size());
  for (std::size_t i = 0; i < size(); ++i) {
    const PointView p = point(i);
    for (std::size_t a = 0; a < d; ++a) {
      double s = shift[a];
      for (std::size_t b = 0; b < d; ++b) s += rotation[a * d + b] * p[b];
      out[i * d + a] = s;
    }
  }
  return Measure(dim(), n(), std::move(out), data_->weights, r_min());
}

double ball_mass(const Measure& mu, PointView center, double radius) {
  double s = 0.0;
  for (Index i : mu.ball_indices(center, radius)) s += mu.weight(i);
  return s;
}

double ball_mass(const Measure& mu, const Ball& b) { return ball_mass(mu, b.center, b.radius); }

double ball_mass(const Measure& mu, PointView center, double radius, std::span<const double> f) {
  if (f.empty()) return ball_mass(mu, center, radius);
  double s = 0.0;
  for (Index i : mu.ball_indices(center, radius)) s += std::abs(f[i]) * mu.weight(i);
  return s;
}

double density_theta(const Measure& mu, PointView x, double r) {
  if (!(r > 0.0)) throw Error("density radius must be positive");
  return ball_mass(mu, x, r) / std::pow(r, mu.n());
}

double growth_constant(const Measure& mu, std::span<const Index> centers, std::span<const double> scale_grid) {
  if (scale_grid.empty()) throw Error("growth_constant: empty scale grid");
  for (double r : scale_grid) {
    if (!(r >= mu.r_min() * (1.0 - 1e-12))) throw Error("growth_constant: scale below resolution r_min");
  }
  double best = 0.0;
  for (Index c : centers) {
    for (double r : scale_grid) best = std::max(best, density_theta(mu, mu.point(c), r));
  }
  return best;
}

double growth_constant(const Measure& mu, std::span<const double> scale_grid) {
  std::vector<Index> all(mu.size());
  std::iota(all.begin(), all.end(), Index{0});
  return growth_constant(mu, all, scale_grid);
}

double sup_density(const Measure& mu, PointView x, double r_lo, std::span<const double> f) {
  if (!(r_lo > 0.0)) throw Error("sup_density: lower radius must be positive");
  const std::size_t count = mu.size();
  std::vector<std::pair<double, Index>> by_dist;
  by_dist.reserve(count);
  for (Index i = 0; i < count; ++i) by_dist.emplace_back(distance(x, mu.point(i)), i);
  std::sort(by_dist.begin(), by_dist.end());
  const double n = mu.n();
  auto mass_of = [&](Index i) { return f.empty() ? mu.weight(i) : std::abs(f[i]) * mu.weight(i); };

  double mass = 0.0;
  std::size_t k = 0;
  while (k < count && by_dist[k].first <= r_lo) mass += mass_of(by_dist[k++].second);
  double best = mass / std::pow(r_lo, n);
  while (k < count) {
    const double r = by_dist[k].first;
    while (k < count && by_dist[k].first == r) mass += mass_of(by_dist[k++].second);
    best = std::max(best, mass / std::pow(r, n));
  }
  return best;
}

double annulus_tail(const Measure& mu, PointView x, double r) {
  const double p = mu.n() + 1;
  double s = 0.0;
  for (Index i = 0; i < mu.size(); ++i) {
    const double t = distance(x, mu.point(i));
    if (t > r) s += mu.weight(i) / std::pow(t, p);
  }
  return s;
}

Measure restrict_indices(const Measure& mu, std::span<const Index> indices) {
  if (indices.empty()) return Measure::empty(mu.dim(), mu.n(), mu.r_min());
  const auto d = static_cast<std::size_t>(mu.dim());
  std::vector<double> coords;
  std::vector<double> weights;
  coords.reserve(indices.size() * d);
  weights.reserve(indices.size());
  for (Index i : indices) {
    const PointView p = mu.point(i);
    coords.insert(coords.end(), p.begin(), p.end());
    weights.push_back(mu.weight(i));
  }
  return Measure(mu.dim(), mu.n(), std::move(coords), std::move(weights), mu.r_min());
}

Measure restrict(const Measure& mu, const std::function<bool(PointView)>& keep) {
  std::vector<Index> kept;
  for (Index i = 0; i < mu.size(); ++i) {
    if (keep(mu.point(i))) kept.push_back(i);
  }
  return restrict_indices(mu, kept);
}

Measure restrict_to_ball(const Measure& mu, const Ball& b) { return restrict_indices(mu, mu.ball_indices(b)); }

std::vector<double> geometric_grid(double lo, double hi, int per_octave) {
  if (!(lo > 0.0) || !(hi >= lo)) throw Error("geometric_grid: need 0 < lo <= hi");
  if (per_octave < 1) throw Error("geometric_grid: per_octave must be >= 1");
  const double step = std::log(2.0) / per_octave;
  const auto count = static_cast<long>(std::floor(std::log(hi / lo) / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count) + 2);
  for (long j = 0; j <= count; ++j) grid.push_back(std::min(hi, lo * std::exp(static_cast<double>(j) * step)));
  if (grid.back() < hi * (1.0 - 1e-12)) grid.push_back(hi);
  return grid;
}

}  // namespace gmt
