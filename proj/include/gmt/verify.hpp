#pragma once

#include <gmt/beta.hpp>
#include <gmt/corona.hpp>
#include <gmt/kernel.hpp>
#include <gmt/lattice.hpp>
#include <gmt/operators.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gmt {

/// One measured inequality: lhs <= C rhs with C estimated by ratio.
struct CheckRecord {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::size_t samples = 0;
  std::vector<std::pair<std::string, double>> params;
  std::vector<std::string> notes;
};

/// Ratio lhs/rhs with 0/0 = 0.
double safe_ratio(double lhs, double rhs);

struct MainLemmaResult {
  double lhs = 0.0;       // max over eps of sum_i w_i |T_eps mu(x_i)|^2
  double rhs = 0.0;       // ||mu|| + sum_i w_i jones(x_i, r_min, diam)
  double ratio = 0.0;
  double best_eps = 0.0;  // eps attaining lhs
  double jones = 0.0;     // the double integral alone
};

/// Evaluates the L2 inequality on a truncation grid. The Jones term uses
/// per_octave nodes per octave between r_min and diam.
MainLemmaResult main_lemma_check(const Measure& mu, const Kernel& k, std::span<const double> eps_grid,
                                 int per_octave);

struct BallSampleResult {
  double worst = 0.0;
  std::vector<double> ratios;  // per ball, 0 for balls missing supp mu
};

/// main_lemma_check on chi_B mu for each ball.
BallSampleResult t1_ball_check(const Measure& mu, const Kernel& k, std::span<const Ball> balls,
                               std::span<const double> eps_grid, int per_octave);

/// Balls B(x_i, r) with x_i a random atom and r log-uniform in [r_min, diam].
std::vector<Ball> random_balls(const Measure& mu, std::size_t count, std::uint64_t seed);

struct CotlarResult {
  double constant = 0.0;  // max lhs / rhs
  std::size_t samples = 0;
  std::size_t flagged = 0;  // rhs = 0 with lhs > 0, excluded
  double worst_lhs = 0.0;
  double worst_rhs = 0.0;
};

/// Cotlar inequality T_{Phi,*}(f sigma)(x) <= C [M~_sigma(T_Phi(f sigma))(x) +
/// M~_{sigma,3/2} f(x)] with sigma = chi_{B_0(R)} mu and Phi = Phi_R, at the
/// given atoms. T_Phi(f sigma) on supp sigma is the sum over the other atoms.
/// f is indexed by the atoms of mu (empty means 1).
CotlarResult cotlar_check(const TreeGeometry& geo, const Kernel& k, std::span<const double> f,
                          std::span<const Index> sample);

struct DominationResult {
  double constant = 0.0;  // max c_x
  std::size_t samples = 0;
  double theta_br = 0.0;
};

/// c_x = max(0, |K_R mu(x)| - T_{Phi_R,*}(chi_{B_0(R)} mu)(x)) / theta(B_R)
/// over sampled atoms x of R.
DominationResult pointwise_domination_check(const TreeGeometry& geo, const Kernel& k, const BumpFamily& bump,
                                            std::span<const Index> sample);

struct CapacityResult {
  double t_star = 0.0;
  double bound = 0.0;     // t_star ||mu||
  Index argmin = 0;       // atom attaining t_star
  double density = 0.0;   // A at argmin
  double jones = 0.0;     // I at argmin (integral plus tail)
  bool sub_resolution = false;  // a single atom: the bound only reflects r_min
};

/// Largest multiple t mu admissible for
///   sup_x [ sup_R theta(x, R) + int_0^inf beta^2 theta dr/r ] <= 1,
/// evaluated at the atoms. theta scales like t and beta^2 theta like t^2, so
/// t_x solves t A(x) + t^2 I(x) = 1. The r-integral runs from r_min to diam
/// and the range beyond diam is added in closed form.
CapacityResult capacity_lower_bound(const Measure& mu, int per_octave);

struct SampledConstant {
  double value = 0.0;  // max over samples
  std::size_t samples = 0;
};

/// max |k_Phi(x, y)| max(Phi(x), Phi(y))^n over random pairs of atoms, the
/// empirical constant in |k_Phi| <= c min(Phi(x)^-n, Phi(y)^-n).
SampledConstant suppression_constant(const Kernel& k, const Measure& mu, std::span<const double> phi,
                                     std::size_t pairs, std::uint64_t seed);

struct TruncationConstants {
  SampledConstant above;  // eps > Phi(x): |T_{Phi,eps} - T_eps| / M^r_Phi
  SampledConstant below;  // eps <= Phi(x): |T_{Phi,eps} - T_{Phi,Phi(x)}| / M^r_Phi
};

/// Empirical constants of the two truncation comparisons for nu = mu, at
/// random (atom, eps) samples.
TruncationConstants truncation_constants(const Kernel& k, const Measure& mu, std::span<const double> phi,
                                         std::size_t samples, std::uint64_t seed);

/// max over random triples with |x - x'| <= |x - y|/2 of
///   (|k(x,y) - k(x',y)| + |k(y,x) - k(y,x')|) |x - y|^(n+1) / (C |x - x'|)
/// with C the kernel's smoothness constant. Points are drawn with
/// log-uniform scales in [1e-2, 1e2].
SampledConstant smoothness_check(const Kernel& k, std::size_t samples, std::uint64_t seed);

struct GrowthTailResult {
  double c0 = 0.0;      // exact sup over atoms x and r >= r_min of theta(x, r)
  double worst = 0.0;   // max annulus_tail(x, r) r / c0
  double bound = 0.0;   // 2^(n+1)
  std::size_t samples = 0;
};

/// annulus_tail(x, r) <= 2^(n+1) c0 / r at random atoms x and log-uniform
/// r in [r_min, diam].
GrowthTailResult growth_tail_check(const Measure& mu, std::size_t samples, std::uint64_t seed);

}  // namespace gmt
