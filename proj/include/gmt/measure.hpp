#pragma once

#include <gmt/common.hpp>
#include <gmt/spatial_index.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace gmt {

/// A finite positive measure given by weighted atoms in R^d, together with
/// the target dimension n used for densities and beta numbers.
///
/// Instances are immutable and cheap to copy (shared storage). All queries are
/// read-only and safe to run concurrently. Sums are always accumulated in
/// ascending point-index order, so results do not depend on the spatial index.
///
/// Scale-dependent quantities are truncated below at the resolution r_min,
/// which defaults to half the smallest nonzero pairwise distance (1.0 when
/// all atoms coincide).
class Measure {
 public:
  Measure(int dim, int n, std::vector<double> coords, std::vector<double> weights,
          std::optional<double> r_min = std::nullopt);

  /// Zero measure; returned by restrictions that keep no atom.
  static Measure empty(int dim, int n, double r_min = 1.0);

  [[nodiscard]] int dim() const { return data_->dim; }
  [[nodiscard]] int n() const { return data_->n; }
  [[nodiscard]] std::size_t size() const { return data_->weights.size(); }
  [[nodiscard]] bool is_empty() const { return data_->weights.empty(); }
  [[nodiscard]] double total_mass() const { return data_->total_mass; }
  [[nodiscard]] double r_min() const { return data_->r_min; }
  /// Diameter of the support (0 for a single atom or the empty measure).
  [[nodiscard]] double diameter() const { return data_->diameter; }

  [[nodiscard]] PointView point(Index i) const {
    const auto d = static_cast<std::size_t>(data_->dim);
    return {data_->coords.data() + i * d, d};
  }
  [[nodiscard]] double weight(Index i) const { return data_->weights[i]; }
  [[nodiscard]] std::span<const double> coords() const { return data_->coords; }
  [[nodiscard]] std::span<const double> weights() const { return data_->weights; }

  /// Indices of atoms in the closed ball, ascending.
  [[nodiscard]] std::vector<Index> ball_indices(PointView center, double radius) const;
  [[nodiscard]] std::vector<Index> ball_indices(const Ball& b) const {
    return ball_indices(b.center, b.radius);
  }
  [[nodiscard]] const KdTree& index() const { return data_->tree; }

  /// Same atoms with every weight multiplied by t > 0; r_min is kept.
  [[nodiscard]] Measure scaled(double t) const;
  /// Same atoms with a different resolution.
  [[nodiscard]] Measure with_r_min(double r_min) const;
  /// Atoms mapped by x -> rotation * x + shift (rotation is d x d row-major).
  [[nodiscard]] Measure transformed(std::span<const double> rotation, std::span<const double> shift) const;

 private:
  struct Data {
    int dim = 0;
    int n = 0;
    std::vector<double> coords;
    std::vector<double> weights;
    double total_mass = 0.0;
    double r_min = 1.0;
    double diameter = 0.0;
    KdTree tree;
  };
  explicit Measure(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  std::shared_ptr<const Data> data_;
};

/// mu(B), exact, closed ball.
double ball_mass(const Measure& mu, const Ball& b);
double ball_mass(const Measure& mu, PointView center, double radius);

/// Weighted ball mass: sum of |f_i| w_i over atoms in the closed ball.
/// An empty f means f = 1.
double ball_mass(const Measure& mu, PointView center, double radius, std::span<const double> f);

/// theta^n(x, r) = mu(B(x, r)) / r^n.
double density_theta(const Measure& mu, PointView x, double r);

/// Largest sampled density over centers x scale_grid. A lower estimate of the
/// growth constant restricted to scales >= r_min. Throws on an empty grid or
/// on a scale below r_min.
double growth_constant(const Measure& mu, std::span<const Index> centers, std::span<const double> scale_grid);
/// Same with every atom as a center.
double growth_constant(const Measure& mu, std::span<const double> scale_grid);

/// sup_{r >= r_lo} |f mu|(B(x, r)) / r^n, exact. The function r -> mass/r^n
/// decreases between jumps, so the supremum is attained at r_lo or at one of
/// the atom distances >= r_lo.
double sup_density(const Measure& mu, PointView x, double r_lo, std::span<const double> f = {});

/// Sum over atoms with |x_i - x| > r of w_i / |x_i - x|^(n+1).
double annulus_tail(const Measure& mu, PointView x, double r);

/// Constant C in annulus_tail <= C c0 / r obtained by dyadic annuli.
inline double annulus_constant(int n) { return std::ldexp(1.0, n + 1); }

/// Atoms satisfying the predicate, weights unchanged, r_min inherited.
Measure restrict(const Measure& mu, const std::function<bool(PointView)>& keep);
/// Atoms with the given (ascending) indices.
Measure restrict_indices(const Measure& mu, std::span<const Index> indices);
/// chi_B mu.
Measure restrict_to_ball(const Measure& mu, const Ball& b);

/// Geometric grid lo, lo*rho, ... <= hi with rho = 2^(1/per_octave); hi is
/// appended if the last node falls short of it by more than rounding.
std::vector<double> geometric_grid(double lo, double hi, int per_octave);

}  // namespace gmt
