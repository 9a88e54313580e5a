#pragma once

#include <gmt/lattice.hpp>

#include <cstdint>
#include <vector>

namespace gmt {

struct CoronaParams {
  double a_stop = 4.0;  // density stop factor
  double tau = 0.1;     // coherence stop threshold, relative to theta(B_R)
};

struct CoronaTree {
  Index top = 0;
  std::vector<Index> stop;   // maximal Top cells strictly inside top
  std::vector<Index> cells;  // Tree(top), ascending ids
  std::vector<Index> good;   // atoms of top outside every stop cell
  double good_mass = 0.0;
};

/// Stopping-time decomposition of a lattice into trees.
///
/// Walking down from a Top cell R, a cell Q becomes a candidate when
///   theta(1.1 B_Q) > a_stop theta(B_R)                       (density), or
///   sum over the chain (R, Q] of beta2(1.1 B_P)^2 theta(1.1 B_P)
///     > tau theta(B_R)                                       (coherence).
/// The stop cell for a candidate is its nearest doubling ancestor-or-self
/// below R; if there is none, the doubling cover of the candidate is used and
/// the event is counted in fallback_count(). Densities at radii below r_min
/// are evaluated at r_min.
///
/// Keeps a pointer to the lattice, which must outlive the corona.
class Corona {
 public:
  Corona(const Lattice& lattice, CoronaParams params);

  [[nodiscard]] const Lattice& lattice() const { return *lattice_; }
  [[nodiscard]] const CoronaParams& params() const { return params_; }
  /// Top cells in breadth-first order; the root comes first.
  [[nodiscard]] const std::vector<Index>& top() const { return top_; }
  [[nodiscard]] std::size_t tree_count() const { return trees_.size(); }
  [[nodiscard]] const CoronaTree& tree(std::size_t t) const { return trees_[t]; }
  [[nodiscard]] const std::vector<CoronaTree>& trees() const { return trees_; }
  /// Index of the tree whose Tree(R) contains the cell.
  [[nodiscard]] std::size_t tree_of_cell(Index cell) const { return tree_of_cell_[cell]; }
  /// Index of the tree rooted at a Top cell; throws if the cell is not Top.
  [[nodiscard]] std::size_t tree_of_top(Index cell) const;
  [[nodiscard]] bool is_top(Index cell) const { return top_slot_[cell] != kNone; }
  [[nodiscard]] std::size_t fallback_count() const { return fallbacks_; }

  /// theta(B_Q) with B_Q = 28 B(Q).
  [[nodiscard]] double theta_big(Index cell) const { return theta_big_[cell]; }
  /// theta(1.1 B_Q) at radius max(1.1 r(B_Q), r_min).
  [[nodiscard]] double theta_enlarged(Index cell) const { return theta_enlarged_[cell]; }
  /// beta2(1.1 B_Q)^2 theta(1.1 B_Q); 0 when the ball is below r_min.
  [[nodiscard]] double coherence_term(Index cell) const { return coherence_[cell]; }
  /// Bound c in theta(1.1 B_Q) <= c theta(B_R) for Q in Tree(R): a_stop, or
  /// c_db / 1.1^n for Q = R.
  [[nodiscard]] double c_tree() const;

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  const Lattice* lattice_;
  CoronaParams params_;
  std::vector<Index> top_;
  std::vector<CoronaTree> trees_;
  std::vector<std::size_t> tree_of_cell_;
  std::vector<std::size_t> top_slot_;
  std::vector<double> theta_big_;
  std::vector<double> theta_enlarged_;
  std::vector<double> coherence_;
  std::size_t fallbacks_ = 0;
};

Corona build_corona(const Lattice& lattice, const CoronaParams& params);

struct DeltaResult {
  double value = 0.0;
  std::size_t excluded = 0;  // atoms at z_Q outside Q (singular, skipped)
};

/// delta_mu(Q, R) = sum over atoms in 2 B_R \ Q of w / |x - z_Q|^n.
DeltaResult delta_mu(const Lattice& lattice, Index q, Index r);

/// Per-tree geometry: d_R, Phi_R, B_0(R) and Reg(R).
class TreeGeometry {
 public:
  TreeGeometry(const Corona& corona, std::size_t tree);

  [[nodiscard]] Index top() const { return top_; }
  /// inf over Tree(R) of |x - z_Q| + ell(Q).
  [[nodiscard]] double d_r(PointView x) const;
  /// d_R(x) / (20 a0^2).
  [[nodiscard]] double phi(PointView x) const { return d_r(x) / phi_div_; }
  /// d_R at every atom of the measure.
  [[nodiscard]] const std::vector<double>& d_r_atoms() const { return d_atoms_; }
  [[nodiscard]] std::vector<double> phi_atoms() const;
  /// B(z_R, 29 s_J(R)).
  [[nodiscard]] Ball b0() const;
  /// Maximal cells with ell(Q) <= inf_{y in Q} d_R(y) / 60 containing an atom
  /// of B_0(R) with d_R > 60 ell at the deepest level; ascending ids.
  [[nodiscard]] const std::vector<Index>& reg() const { return reg_; }
  [[nodiscard]] const Corona& corona() const { return *corona_; }
  [[nodiscard]] std::size_t tree_index() const { return tree_; }

 private:
  const Corona* corona_;
  std::size_t tree_;
  Index top_;
  double phi_div_;
  std::vector<double> centers_;  // tree cell centers, row-major
  std::vector<double> sides_;
  std::vector<double> d_atoms_;
  std::vector<Index> reg_;
};

struct PackingAudit {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

/// lhs = sum over Top of theta(B_R)^2 mu(R);
/// rhs = theta(B_R0)^2 mu(R0) + sum_i w_i jones(x_i, r_min, ell(R0)).
PackingAudit packing_audit(const Corona& corona, int per_octave);

/// Outcome of the exact and sampled structural checks of one corona.
struct CoronaCheck {
  bool root_is_top = true;
  bool tree_partition = true;
  bool tree_density = true;         // theta(1.1 B_Q) <= c_tree theta(B_R)
  double tree_density_ratio = 0.0;  // max theta(1.1 B_Q) / theta(B_R)
  bool top_doubling = true;         // all Top cells except possibly R0
  bool stop_stratification = true;
  bool lipschitz = true;
  std::size_t lipschitz_pairs = 0;
  bool reg_disjoint = true;
  bool reg_in_stop = true;
  bool reg_lower = true;  // d_R(x) >= 10 ell(Q)
  bool reg_upper = true;  // d_R(x) <= 61 a0 ell(Q)
  std::size_t reg_samples = 0;
  double reg_min_ratio = 0.0;  // min d_R(x) / ell(Q)
  double reg_max_ratio = 0.0;  // max d_R(x) / (a0 ell(Q))
  double reg_neighbor_ratio = 1.0;  // max ell(Q)/ell(Q') over touching 50-balls
  bool reg_neighbor = true;         // within [1/(7 a0), 7 a0]
  bool phi_stop = true;             // Phi_R <= ell(Q)/(10 a0) on Stop cells
  bool good_small = true;           // d_R(x) <= 2 ell(deepest cell) on Good
  double b0_ratio_min = 0.0;
  double b0_ratio_max = 0.0;
  bool b0_comparable = true;        // theta(B_0)/theta(B_R) in [1/C', C']
  double growth_c1 = 0.0;           // empirical C_1
  [[nodiscard]] bool ok() const {
    return root_is_top && tree_partition && tree_density && top_doubling && stop_stratification && lipschitz &&
           reg_disjoint && reg_in_stop && reg_lower && reg_upper && reg_neighbor && phi_stop && good_small &&
           b0_comparable;
  }
};

struct CoronaCheckOptions {
  std::uint64_t seed = 1;
  std::size_t lipschitz_pairs = 10000;
  std::size_t samples_per_reg_cell = 8;
  std::size_t growth_samples_per_tree = 64;
};

CoronaCheck check_corona(const Corona& corona, const CoronaCheckOptions& opt = {});

/// C' = max(c_db, (280/29)^n, (29/28)^n), the comparability constant between
/// theta(B_0(R)) and theta(B_R) for doubling R.
double b0_constant(const Lattice& lattice);

}  // namespace gmt
