#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmt {

/// Raised on violated preconditions and malformed input.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Index = std::size_t;
using PointView = std::span<const double>;

/// Euclidean distance. Every ball query in the library goes through this
/// function so that membership decisions agree bit-for-bit across code paths.
inline double distance(PointView a, PointView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

inline double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine draw.
/// Unlike std::uniform_real_distribution this is the same on every platform.
template <class Engine>
double uniform01(Engine& rng) {
  return static_cast<double>(static_cast<std::uint64_t>(rng()) >> 11) * 0x1.0p-53;
}

/// Uniformly distributed unit vector in R^d (normalized Box-Muller draws).
template <class Engine>
std::vector<double> random_direction(Engine& rng, int d) {
  std::vector<double> v(static_cast<std::size_t>(d));
  double s = 0.0;
  while (s < 1e-12) {
    s = 0.0;
    for (auto& x : v) {
      const double u1 = uniform01(rng), u2 = uniform01(rng);
      x = std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
      s += x * x;
    }
  }
  const double r = std::sqrt(s);
  for (auto& x : v) x /= r;
  return v;
}

/// Closed ball B(center, radius).
struct Ball {
  std::vector<double> center;
  double radius = 0.0;

  Ball() = default;
  Ball(std::vector<double> c, double r) : center(std::move(c)), radius(r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw Error("ball radius must be positive and finite");
  }
  Ball(PointView c, double r) : Ball(std::vector<double>(c.begin(), c.end()), r) {}

  /// Concentric ball with radius scaled by lambda.
  [[nodiscard]] Ball scaled(double lambda) const { return Ball(center, lambda * radius); }

  [[nodiscard]] bool contains(PointView p) const { return distance(center, p) <= radius; }
};

}  // namespace gmt
