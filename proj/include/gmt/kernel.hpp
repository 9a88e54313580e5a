#pragma once

#include <gmt/common.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gmt {

/// Odd Calderon-Zygmund kernel K on R^d \ {0} with values in R^m, together
/// with declared constants C(j) in |grad^j K(x)| <= C(j) / |x|^(n+j),
/// j = 0, 1, 2 (Frobenius norms of the derivative tensors).
class Kernel {
 public:
  using Fn = std::function<void(PointView x, std::span<double> out)>;

  Kernel(std::string name, int dim, int n, int components, Fn fn, std::array<double, 3> constants);

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int components() const { return m_; }
  [[nodiscard]] double constant(int j) const { return c_[static_cast<std::size_t>(j)]; }

  /// K(x) written to out (size components()).
  void eval(PointView x, std::span<double> out) const;
  [[nodiscard]] std::vector<double> operator()(PointView x) const;

  /// Smoothness constant in
  ///   |k(x,y) - k(x',y)| + |k(y,x) - k(y,x')| <= C |x - x'| / |x - y|^(n+1)
  /// for |x - x'| <= |x - y| / 2, from the mean value theorem: 2^(n+2) C(1).
  [[nodiscard]] double smoothness_constant() const { return std::ldexp(constant(1), n_ + 2); }

 private:
  enum class Kind { riesz, cauchy, custom };
  friend Kernel riesz_kernel(int n, int d);
  friend Kernel cauchy_kernel();

  std::string name_;
  int dim_;
  int n_;
  int m_;
  Kind kind_ = Kind::custom;
  Fn fn_;
  std::array<double, 3> c_;
};

/// x / |x|^(n+1) in R^d.
Kernel riesz_kernel(int n, int d);
/// Cauchy kernel 1/(zeta - z) written as a vector: K(w) = (-w1, w2) / |w|^2
/// for w = z - zeta in R^2, n = 1.
Kernel cauchy_kernel();
/// The zero kernel (any n < d); useful for degenerate checks.
Kernel zero_kernel(int n, int d);

struct KernelValidation {
  bool odd = true;
  /// max over samples of |grad^j K(x)| |x|^(n+j) / C(j).
  std::array<double, 3> worst_ratio{0.0, 0.0, 0.0};
  std::array<std::vector<double>, 3> worst_x;
  std::vector<double> odd_worst_x;
  [[nodiscard]] bool ok() const {
    return odd && worst_ratio[0] <= 1.1 && worst_ratio[1] <= 1.1 && worst_ratio[2] <= 1.1;
  }
};

/// Samples random x (log-uniform radius in [1e-2, 1e2], uniform direction):
/// exact oddness and derivative bounds by central differences, step 1e-5 |x|.
KernelValidation validate_kernel(const Kernel& k, std::uint64_t seed, std::size_t samples = 1000);

/// Builds a custom kernel and rejects it unless validate_kernel passes; the
/// error message names the worst sample.
Kernel make_custom_kernel(std::string name, int dim, int n, int components, Kernel::Fn fn,
                          std::array<double, 3> constants, std::uint64_t seed = 1);

/// Kernel by name for a measure of dimensions (d, n): "riesz" (x/|x|^(n+1)),
/// "cauchy" (d = 2), "zero".
Kernel kernel_by_name(const std::string& name, int dim, int n);

/// k_Phi = k / (1 + |k|^2 Phi(x)^n Phi(y)^n), evaluated for K(x - y).
void suppressed_kernel(const Kernel& k, PointView x, PointView y, double phi_x, double phi_y, std::span<double> out);

/// Radial cutoff psi with chi_B(0,0.001) <= psi <= chi_B(0,0.01) in units
/// of `unit`: quintic smoothstep in s = (t - 0.001)/0.009, t = |z|/unit.
/// psi_k(z) = psi(a0^k z), phi_k = psi_k - psi_{k+1}.
class BumpFamily {
 public:
  BumpFamily(double a0, double unit);

  [[nodiscard]] double a0() const { return a0_; }
  [[nodiscard]] double unit() const { return unit_; }
  /// Profile in t = |z| / unit.
  [[nodiscard]] static double profile(double t);
  [[nodiscard]] double psi(int k, double dist) const { return profile(std::pow(a0_, k) * dist / unit_); }
  [[nodiscard]] double phi(int k, double dist) const { return psi(k, dist) - psi(k + 1, dist); }
  /// phi_k vanishes outside [0.001 a0^(-k-1), 0.01 a0^(-k)] * unit.
  [[nodiscard]] double support_inner(int k) const { return 0.001 * unit_ * std::pow(a0_, -k - 1); }
  [[nodiscard]] double support_outer(int k) const { return 0.01 * unit_ * std::pow(a0_, -k); }

 private:
  double a0_;
  double unit_;
};

}  // namespace gmt
