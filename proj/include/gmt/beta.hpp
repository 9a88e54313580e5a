#pragma once

#include <gmt/measure.hpp>

#include <vector>

namespace gmt {

/// Best-fitting affine n-plane for mu restricted to a ball, and the L2 beta
/// number of that ball.
struct BetaResult {
  double value = 0.0;
  /// True when mu(B) = 0; centroid and basis are then empty.
  bool null_plane = false;
  std::vector<double> centroid;
  /// n orthonormal direction vectors, row-major n x d.
  std::vector<double> basis;
  Ball ball;
  double mass_in_ball = 0.0;
};

/// beta_{mu,2}(B): exact, via the weighted covariance of the atoms in B.
/// Throws if r(B) < r_min.
BetaResult beta2(const Measure& mu, const Ball& b);

/// Same for an explicit atom subset (the atoms of mu in b, in any fixed order).
BetaResult beta2_of(const Measure& mu, std::span<const Index> atoms, const Ball& b);

/// beta_{mu,p}(B) for p >= 1 by coordinate descent from the beta2 plane.
/// The result is the objective at a local minimizer, hence an upper bound for
/// the infimum over planes.
double beta_p(const Measure& mu, const Ball& b, double p);

/// p-objective (1/r^n) sum w (dist/r)^p, raised to 1/p, for a given plane.
double plane_beta_p(const Measure& mu, const Ball& b, double p, std::span<const double> point,
                    std::span<const double> basis);

/// Geometric nodes r_hi * rho^-j, j = 1..J, rho = 2^(1/per_octave), the last
/// node clamped to r_lo. Each carries weight ln(rho).
std::vector<double> jones_nodes(double r_lo, double r_hi, int per_octave);

struct BetaProfileRow {
  Index center = 0;
  double r = 0.0;
  double beta = 0.0;
  double theta = 0.0;
  double integrand = 0.0;  // beta^2 theta
};

/// Evaluates beta2(x, r)^2 theta(x, r) on all radii for one center at a time.
/// Atoms are sorted by distance from x once; each ball is a prefix. For radii
/// beyond the farthest atom the global residual is reused.
class JonesIntegrator {
 public:
  explicit JonesIntegrator(Measure mu);

  /// Left Riemann sum of beta^2 theta dr/r over jones_nodes(r_lo, r_hi).
  [[nodiscard]] double integrate(PointView x, double r_lo, double r_hi, int per_octave) const;
  /// Closed form of the integral over (r_tail, infinity), valid when every
  /// atom lies within r_tail of x: Res * mass / ((2n+2) r_tail^(2n+2)).
  [[nodiscard]] double tail(double r_tail) const;
  [[nodiscard]] std::vector<BetaProfileRow> profile(Index center, double r_lo, double r_hi, int per_octave) const;

  [[nodiscard]] const Measure& measure() const { return mu_; }
  /// Least-squares residual of the whole measure against its best n-plane.
  [[nodiscard]] double global_residual() const { return global_residual_; }

 private:
  struct Sorted {
    std::vector<double> dist;
    std::vector<Index> order;
  };
  [[nodiscard]] Sorted sort_from(PointView x) const;
  [[nodiscard]] double residual_of_prefix(const Sorted& s, std::size_t count) const;

  Measure mu_;
  double global_residual_ = 0.0;
};

/// Integral of beta^2 theta dr/r over [r_lo, r_hi] at x.
double jones_integral(const Measure& mu, PointView x, double r_lo, double r_hi, int per_octave);

struct ConditionResult {
  double ratio = 0.0;
  double mass = 0.0;
  bool empty = false;
};

/// (sum over atoms x_i in B of w_i * jones(x_i, r_min, r(B))) / mu(B).
ConditionResult condition_check(const Measure& mu, const Ball& b, int per_octave);

}  // namespace gmt
