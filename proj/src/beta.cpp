#include <gmt/beta.hpp>
#include <gmt/parallel.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>

namespace gmt {

namespace {

struct Fit {
  double mass = 0.0;
  Eigen::VectorXd centroid;
  Eigen::MatrixXd vectors;  // columns, ascending eigenvalue
  double residual = 0.0;
};

// Weighted centroid, covariance eigenvectors, and the residual computed
// directly from the trailing directions (avoids summing tiny eigenvalues,
// which would leave sqrt(eps) noise for flat data).
template <class Atoms>
Fit fit_plane(const Measure& mu, const Atoms& atoms, std::size_t count) {
  const int d = mu.dim();
  const int n = mu.n();
  Fit f;
  f.centroid = Eigen::VectorXd::Zero(d);
  for (std::size_t k = 0; k < count; ++k) {
    const Index i = atoms[k];
    const double w = mu.weight(i);
    const PointView p = mu.point(i);
    f.mass += w;
    for (int a = 0; a < d; ++a) f.centroid[a] += w * p[a];
  }
  if (f.mass <= 0.0) return f;
  f.centroid /= f.mass;

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd v(d);
  for (std::size_t k = 0; k < count; ++k) {
    const Index i = atoms[k];
    const PointView p = mu.point(i);
    for (int a = 0; a < d; ++a) v[a] = p[a] - f.centroid[a];
    cov.noalias() += mu.weight(i) * v * v.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  f.vectors = eig.eigenvectors();

  const int trailing = d - n;
  for (std::size_t k = 0; k < count; ++k) {
    const Index i = atoms[k];
    const PointView p = mu.point(i);
    for (int a = 0; a < d; ++a) v[a] = p[a] - f.centroid[a];
    double s = 0.0;
    for (int c = 0; c < trailing; ++c) {
      const double t = f.vectors.col(c).dot(v);
      s += t * t;
    }
    f.residual += mu.weight(i) * s;
  }
  return f;
}

void require_resolved(const Measure& mu, const Ball& b) {
  if (b.radius < mu.r_min()) throw Error("ball radius below resolution r_min");
}

double p_objective(const Measure& mu, std::span<const Index> atoms, const Eigen::VectorXd& m,
                   const Eigen::MatrixXd& normals, double r, double p) {
  const int d = mu.dim();
  Eigen::VectorXd v(d);
  double s = 0.0;
  for (Index i : atoms) {
    const PointView x = mu.point(i);
    for (int a = 0; a < d; ++a) v[a] = x[a] - m[a];
    double q = 0.0;
    for (int c = 0; c < normals.cols(); ++c) {
      const double t = normals.col(c).dot(v);
      q += t * t;
    }
    s += mu.weight(i) * std::pow(std::sqrt(q) / r, p);
  }
  return s / std::pow(r, mu.n());
}

}  // namespace

BetaResult beta2_of(const Measure& mu, std::span<const Index> atoms, const Ball& b) {
  require_resolved(mu, b);
  BetaResult out;
  out.ball = b;
  if (atoms.empty()) {
    out.null_plane = true;
    return out;
  }
  const Fit f = fit_plane(mu, atoms, atoms.size());
  const int d = mu.dim();
  const int n = mu.n();
  out.mass_in_ball = f.mass;
  out.value = std::sqrt(f.residual / std::pow(b.radius, n + 2));
  out.centroid.assign(f.centroid.data(), f.centroid.data() + d);
  out.basis.resize(static_cast<std::size_t>(n * d));
  for (int a = 0; a < n; ++a) {
    for (int c = 0; c < d; ++c) out.basis[static_cast<std::size_t>(a * d + c)] = f.vectors(c, d - n + a);
  }
  return out;
}

BetaResult beta2(const Measure& mu, const Ball& b) {
  require_resolved(mu, b);
  return beta2_of(mu, mu.ball_indices(b), b);
}

double plane_beta_p(const Measure& mu, const Ball& b, double p, std::span<const double> point,
                    std::span<const double> basis) {
  if (p < 1.0) throw Error("beta_p requires p >= 1");
  const auto d = static_cast<std::size_t>(mu.dim());
  const auto n = static_cast<std::size_t>(mu.n());
  if (point.size() != d || basis.size() != n * d) throw Error("plane has wrong shape");
  std::vector<double> v(d);
  double s = 0.0;
  for (Index i : mu.ball_indices(b)) {
    const PointView x = mu.point(i);
    for (std::size_t a = 0; a < d; ++a) v[a] = x[a] - point[a];
    for (std::size_t t = 0; t < n; ++t) {
      double dot = 0.0;
      for (std::size_t a = 0; a < d; ++a) dot += v[a] * basis[t * d + a];
      for (std::size_t a = 0; a < d; ++a) v[a] -= dot * basis[t * d + a];
    }
    s += mu.weight(i) * std::pow(norm(v) / b.radius, p);
  }
  return std::pow(s / std::pow(b.radius, static_cast<double>(n)), 1.0 / p);
}

double beta_p(const Measure& mu, const Ball& b, double p) {
  if (p < 1.0) throw Error("beta_p requires p >= 1");
  require_resolved(mu, b);
  const std::vector<Index> atoms = mu.ball_indices(b);
  if (atoms.empty()) return 0.0;
  const Fit f = fit_plane(mu, atoms, atoms.size());
  const int d = mu.dim();
  const int n = mu.n();
  const double r = b.radius;

  Eigen::VectorXd m = f.centroid;
  Eigen::MatrixXd tangents = f.vectors.rightCols(n);
  Eigen::MatrixXd normals = f.vectors.leftCols(d - n);
  double best = p_objective(mu, atoms, m, normals, r, p);

  double shift_step = 0.25 * r;
  double angle_step = 0.25;
  constexpr int kMaxIterations = 200;
  constexpr double kTol = 1e-10;
  for (int iter = 0; iter < kMaxIterations && best > 0.0; ++iter) {
    const double before = best;
    for (int c = 0; c < d - n; ++c) {
      for (double sign : {1.0, -1.0}) {
        const Eigen::VectorXd cand = m + sign * shift_step * normals.col(c);
        const double val = p_objective(mu, atoms, cand, normals, r, p);
        if (val < best) {
          best = val;
          m = cand;
        }
      }
      for (int a = 0; a < n; ++a) {
        for (double sign : {1.0, -1.0}) {
          const double ca = std::cos(sign * angle_step);
          const double sa = std::sin(sign * angle_step);
          Eigen::MatrixXd cand_n = normals;
          cand_n.col(c) = -sa * tangents.col(a) + ca * normals.col(c);
          const double val = p_objective(mu, atoms, m, cand_n, r, p);
          if (val < best) {
            best = val;
            tangents.col(a) = ca * tangents.col(a) + sa * normals.col(c);
            normals = cand_n;
          }
        }
      }
    }
    if (best >= before * (1.0 - kTol)) {
      shift_step *= 0.5;
      angle_step *= 0.5;
      if (angle_step < kTol) break;
    }
  }
  return std::pow(best, 1.0 / p);
}

std::vector<double> jones_nodes(double r_lo, double r_hi, int per_octave) {
  if (!(r_lo > 0.0) || !(r_lo < r_hi)) throw Error("jones integral needs 0 < r_lo < r_hi");
  if (per_octave < 1) throw Error("scales per octave must be >= 1");
  const double log_rho = std::log(2.0) / per_octave;
  const auto count = static_cast<long>(std::floor(std::log(r_hi / r_lo) / log_rho + 1e-9));
  std::vector<double> nodes;
  nodes.reserve(static_cast<std::size_t>(std::max(0L, count)));
  for (long j = 1; j <= count; ++j) nodes.push_back(std::max(r_lo, r_hi * std::exp(-static_cast<double>(j) * log_rho)));
  return nodes;
}

JonesIntegrator::JonesIntegrator(Measure mu) : mu_(std::move(mu)) {
  std::vector<Index> all(mu_.size());
  std::iota(all.begin(), all.end(), Index{0});
  if (!all.empty()) global_residual_ = fit_plane(mu_, all, all.size()).residual;
}

JonesIntegrator::Sorted JonesIntegrator::sort_from(PointView x) const {
  const std::size_t count = mu_.size();
  std::vector<std::pair<double, Index>> tmp(count);
  for (Index i = 0; i < count; ++i) tmp[i] = {distance(x, mu_.point(i)), i};
  std::sort(tmp.begin(), tmp.end());
  Sorted s;
  s.dist.resize(count);
  s.order.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    s.dist[k] = tmp[k].first;
    s.order[k] = tmp[k].second;
  }
  return s;
}

double JonesIntegrator::residual_of_prefix(const Sorted& s, std::size_t count) const {
  if (count == mu_.size()) return global_residual_;
  if (count <= static_cast<std::size_t>(mu_.n()) + 1) return 0.0;  // an n-plane fits n+1 atoms
  return fit_plane(mu_, s.order, count).residual;
}

double JonesIntegrator::integrate(PointView x, double r_lo, double r_hi, int per_octave) const {
  const std::vector<double> nodes = jones_nodes(r_lo, r_hi, per_octave);
  if (mu_.is_empty() || nodes.empty()) return 0.0;
  const Sorted s = sort_from(x);
  const double log_rho = std::log(2.0) / per_octave;
  const int n = mu_.n();

  std::vector<double> prefix_mass(s.order.size() + 1, 0.0);
  for (std::size_t k = 0; k < s.order.size(); ++k) prefix_mass[k + 1] = prefix_mass[k] + mu_.weight(s.order[k]);

  double total = 0.0;
  std::size_t last_count = static_cast<std::size_t>(-1);
  double res = 0.0;
  for (double r : nodes) {
    const auto count = static_cast<std::size_t>(std::upper_bound(s.dist.begin(), s.dist.end(), r) - s.dist.begin());
    if (count != last_count) {
      res = residual_of_prefix(s, count);
      last_count = count;
    }
    if (res == 0.0) continue;
    const double theta = prefix_mass[count] / std::pow(r, n);
    total += res / std::pow(r, n + 2) * theta;
  }
  return total * log_rho;
}

double JonesIntegrator::tail(double r_tail) const {
  if (!(r_tail > 0.0)) return 0.0;
  const int n = mu_.n();
  return global_residual_ * mu_.total_mass() / ((2.0 * n + 2.0) * std::pow(r_tail, 2 * n + 2));
}

std::vector<BetaProfileRow> JonesIntegrator::profile(Index center, double r_lo, double r_hi, int per_octave) const {
  const std::vector<double> nodes = jones_nodes(r_lo, r_hi, per_octave);
  const Sorted s = sort_from(mu_.point(center));
  const int n = mu_.n();
  std::vector<BetaProfileRow> rows;
  rows.reserve(nodes.size());
  double mass = 0.0;
  std::size_t k = 0;
  // nodes decrease; walk them in increasing order and reverse at the end
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    const double r = *it;
    while (k < s.dist.size() && s.dist[k] <= r) mass += mu_.weight(s.order[k++]);
    const double res = residual_of_prefix(s, k);
    BetaProfileRow row;
    row.center = center;
    row.r = r;
    row.beta = std::sqrt(res / std::pow(r, n + 2));
    row.theta = mass / std::pow(r, n);
    row.integrand = row.beta * row.beta * row.theta;
    rows.push_back(row);
  }
  std::reverse(rows.begin(), rows.end());
  return rows;
}

double jones_integral(const Measure& mu, PointView x, double r_lo, double r_hi, int per_octave) {
  return JonesIntegrator(mu).integrate(x, r_lo, r_hi, per_octave);
}

ConditionResult condition_check(const Measure& mu, const Ball& b, int per_octave) {
  require_resolved(mu, b);
  ConditionResult out;
  const std::vector<Index> atoms = mu.ball_indices(b);
  for (Index i : atoms) out.mass += mu.weight(i);
  if (atoms.empty()) {
    out.empty = true;
    return out;
  }
  if (b.radius <= mu.r_min()) return out;
  const JonesIntegrator jones(mu);
  std::vector<double> vals(atoms.size());
  parallel_for(atoms.size(), [&](std::size_t k) {
    vals[k] = jones.integrate(mu.point(atoms[k]), mu.r_min(), b.radius, per_octave);
  });
  double s = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) s += mu.weight(atoms[k]) * vals[k];
  out.ratio = s / out.mass;
  return out;
}

}  // namespace gmt
