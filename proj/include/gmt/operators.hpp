#pragma once

#include <gmt/corona.hpp>
#include <gmt/kernel.hpp>
#include <gmt/measure.hpp>

#include <vector>

namespace gmt {

/// Suppressing function sampled at the evaluation point and at every atom.
struct Suppression {
  double phi_x = 0.0;
  std::span<const double> phi_atoms;
};

/// T_eps(f mu)(x) = sum over |x - x_i| > eps of K(x - x_i) f_i w_i. An empty f
/// means f = 1. With a suppression, k_Phi replaces k.
std::vector<double> t_eps(const Kernel& k, const Measure& mu, std::span<const double> f, PointView x, double eps,
                          const Suppression* phi = nullptr);

/// max over the grid of |T_eps(f mu)(x)|.
double t_star(const Kernel& k, const Measure& mu, std::span<const double> f, PointView x,
              std::span<const double> eps_grid, const Suppression* phi = nullptr);

/// sup over eps >= eps_min (eps > 0 when eps_min = 0) of |T_eps(f mu)(x)|,
/// exact: T_eps is constant between consecutive atom distances.
double t_star_exact(const Kernel& k, const Measure& mu, std::span<const double> f, PointView x,
                    double eps_min = 0.0, const Suppression* phi = nullptr);

/// Geometric eps grid from r_min/2 to diam with the given density.
std::vector<double> default_eps_grid(const Measure& mu, int per_octave);

/// M^r_Phi(f mu)(x) = sup over r >= max(Phi(x), r_min) of |f mu|(B(x, r)) / r^n.
double m_r_phi(const Measure& mu, std::span<const double> f, PointView x, double phi_x);

enum class MaximalVariant { plain, three_halves };

/// sup over r > 0 of (1/sigma(B(x, 3r))) int_{B(x, r)} |f| dsigma, or the
/// 3/2 version (power 3/2 inside, 2/3 outside). Radii with an empty
/// denominator are skipped.
double m_tilde(const Measure& sigma, std::span<const double> f, PointView x, MaximalVariant variant);

/// K_R mu(x) for an atom x of R, by two independent paths.
struct KrEvaluation {
  std::vector<double> chain;      // sum over tree cells Q containing x of T_J(Q) mu(x)
  std::vector<double> telescoped; // int [psi_J(R) - psi_J_end](x - y) k(x, y) dmu(y)
  double scale = 0.0;             // sum of |phi_j K w| over all chain terms
  int j_begin = 0;
  int j_end = 0;                  // J(P) for x in a stop cell P, depth+1 for Good
  [[nodiscard]] double discrepancy() const;
};

KrEvaluation k_r_operator(const Corona& corona, std::size_t tree, const Kernel& k, const BumpFamily& bump, Index x);

/// Bump family tied to a lattice (unit 1000 u): psi_k drops from 1 to 0
/// between s_k and 10 s_k, so psi_J(R)(x - .) is supported in B_0(R) for x
/// in R.
BumpFamily lattice_bump(const Lattice& lattice);

}  // namespace gmt
