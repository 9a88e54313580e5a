#pragma once

// Independent oracles and small instance builders shared by the tests.

#include <gmt/measure.hpp>

#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace testing_support {

using gmt::Measure;

constexpr double kPi = 3.14159265358979323846;

inline Measure random_cloud(std::mt19937_64& rng, int dim, int n, std::size_t count, double r_min = 1e-3) {
  std::vector<double> coords, weights;
  for (std::size_t i = 0; i < count; ++i) {
    for (int a = 0; a < dim; ++a) coords.push_back(gmt::uniform01(rng) * (1.0 + a));
    weights.push_back(0.1 + gmt::uniform01(rng));
  }
  return Measure(dim, n, coords, weights, r_min);
}

// Sum of w (dist to the plane through the best offset)^2 for a plane with
// unit normals `normals` (rows), over atoms in the ball.
inline double plane_residual(const Measure& mu, const std::vector<double>& center, double r,
                             const std::vector<std::vector<double>>& normals) {
  std::vector<gmt::Index> in;
  for (gmt::Index i = 0; i < mu.size(); ++i) {
    if (gmt::distance(mu.point(i), center) <= r) in.push_back(i);
  }
  double total = 0.0;
  for (const auto& nu : normals) {
    // best offset along nu is the weighted mean of the projections
    double wsum = 0.0, mean = 0.0;
    for (auto i : in) {
      double p = 0.0;
      for (int a = 0; a < mu.dim(); ++a) p += mu.point(i)[a] * nu[a];
      mean += mu.weight(i) * p;
      wsum += mu.weight(i);
    }
    if (wsum == 0.0) return 0.0;
    mean /= wsum;
    for (auto i : in) {
      double p = 0.0;
      for (int a = 0; a < mu.dim(); ++a) p += mu.point(i)[a] * nu[a];
      total += mu.weight(i) * (p - mean) * (p - mean);
    }
  }
  return total;
}

// Brute-force beta_2 for d = 2, n = 1: a 10^4 angle grid, then golden
// section inside the best grid cell.
inline double beta2_oracle_2d(const Measure& mu, const std::vector<double>& center, double r) {
  auto res = [&](double th) {
    return plane_residual(mu, center, r, {{-std::sin(th), std::cos(th)}});
  };
  const int grid = 10000;
  const double step = kPi / grid;
  int best = 0;
  double best_v = res(0.0);
  for (int j = 1; j < grid; ++j) {
    const double v = res(j * step);
    if (v < best_v) {
      best_v = v;
      best = j;
    }
  }
  double lo = (best - 1) * step, hi = (best + 1) * step;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    if (res(a) < res(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  const double v = std::min(best_v, res(0.5 * (lo + hi)));
  return std::sqrt(v / std::pow(r, mu.n() + 2));
}

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Mat3 axis_rotation(int axis, double t) {
  Mat3 m{};
  const int i = (axis + 1) % 3, j = (axis + 2) % 3;
  m[axis][axis] = 1.0;
  m[i][i] = std::cos(t);
  m[j][j] = std::cos(t);
  m[i][j] = -std::sin(t);
  m[j][i] = std::sin(t);
  return m;
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  // uniform unit quaternion
  std::vector<double> q = gmt::random_direction(rng, 4);
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return Mat3{{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
               {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
               {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}};
}

// Brute-force beta_2 in d = 3: 10^4 random rotations (the plane is spanned
// by the first n columns), then pattern search over small rotations.
inline double beta2_oracle_3d(const Measure& mu, const std::vector<double>& center, double r,
                              std::mt19937_64& rng) {
  const int n = mu.n();
  auto res = [&](const Mat3& m) {
    std::vector<std::vector<double>> normals;
    for (int c = n; c < 3; ++c) normals.push_back({m[0][c], m[1][c], m[2][c]});
    return plane_residual(mu, center, r, normals);
  };
  Mat3 best = random_rotation(rng);
  double best_v = res(best);
  for (int s = 1; s < 10000; ++s) {
    const Mat3 m = random_rotation(rng);
    const double v = res(m);
    if (v < best_v) {
      best_v = v;
      best = m;
    }
  }
  double step = 0.05;
  while (step > 1e-13) {
    bool moved = false;
    for (int axis = 0; axis < 3; ++axis) {
      for (double sgn : {1.0, -1.0}) {
        const Mat3 m = mul(axis_rotation(axis, sgn * step), best);
        const double v = res(m);
        if (v < best_v) {
          best_v = v;
          best = m;
          moved = true;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return std::sqrt(best_v / std::pow(r, n + 2));
}

// Two far clusters on a line: `count` atoms of weight `heavy` near the
// origin and `count` atoms of weight 1 near (1, 0).
inline Measure two_clusters(std::size_t count, double heavy) {
  std::vector<double> coords, weights;
  for (std::size_t i = 0; i < count; ++i) {
    coords.push_back(0.01 * static_cast<double>(i) / static_cast<double>(count));
    coords.push_back(0.0);
    weights.push_back(heavy / static_cast<double>(count));
  }
  for (std::size_t i = 0; i < count; ++i) {
    coords.push_back(1.0 + 0.01 * static_cast<double>(i) / static_cast<double>(count));
    coords.push_back(0.0);
    weights.push_back(1.0 / static_cast<double>(count));
  }
  return Measure(2, 1, coords, weights);
}

}  // namespace testing_support
