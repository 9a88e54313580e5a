#include <gmt/kernel.hpp>

#include <limits>
#include <random>
#include <sstream>

namespace gmt {

Kernel::Kernel(std::string name, int dim, int n, int components, Fn fn, std::array<double, 3> constants)
    : name_(std::move(name)), dim_(dim), n_(n), m_(components), fn_(std::move(fn)), c_(constants) {
  if (dim < 1 || n < 1 || n >= dim) throw Error("kernel: need 1 <= n < d");
  if (components < 1) throw Error("kernel: need at least one component");
  for (double c : c_) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw Error("kernel: constants must be finite and nonnegative");
  }
}

void Kernel::eval(PointView x, std::span<double> out) const {
  switch (kind_) {
    case Kind::riesz: {
      double s = 0.0;
      for (double v : x) s += v * v;
      const double scale = 1.0 / std::pow(std::sqrt(s), n_ + 1);
      for (int a = 0; a < dim_; ++a) out[static_cast<std::size_t>(a)] = x[static_cast<std::size_t>(a)] * scale;
      return;
    }
    case Kind::cauchy: {
      const double s = x[0] * x[0] + x[1] * x[1];
      out[0] = -x[0] / s;
      out[1] = x[1] / s;
      return;
    }
    case Kind::custom:
      fn_(x, out);
      return;
  }
}

std::vector<double> Kernel::operator()(PointView x) const {
  std::vector<double> out(static_cast<std::size_t>(m_));
  eval(x, out);
  return out;
}

Kernel riesz_kernel(int n, int d) {
  const double nn = n;
  const double c1 = std::sqrt(nn * nn + (d - 1));
  const double c2 = (nn + 1.0) * std::sqrt(nn * nn + 3.0 * (d - 1));
  Kernel k("riesz", d, n, d, nullptr, {1.0, c1, c2});
  k.kind_ = Kernel::Kind::riesz;
  return k;
}

Kernel cauchy_kernel() {
  Kernel k("cauchy", 2, 1, 2, nullptr, {1.0, std::sqrt(2.0), 4.0});
  k.kind_ = Kernel::Kind::cauchy;
  return k;
}

Kernel zero_kernel(int n, int d) {
  return Kernel("zero", d, n, 1, [](PointView, std::span<double> out) { out[0] = 0.0; }, {0.0, 0.0, 0.0});
}

namespace {

double frob(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double bound_ratio(double value, double c) {
  if (c > 0.0) return value / c;
  return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

KernelValidation validate_kernel(const Kernel& k, std::uint64_t seed, std::size_t samples) {
  const int d = k.dim();
  const auto m = static_cast<std::size_t>(k.components());
  const auto du = static_cast<std::size_t>(d);
  std::mt19937_64 rng(seed);
  KernelValidation out;
  std::vector<double> kx(m), kneg(m), a(m), b(m), c(m), e(m);

  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<double> x = random_direction(rng, d);
    const double radius = std::pow(10.0, -2.0 + 4.0 * uniform01(rng));
    for (auto& v : x) v *= radius;
    const double nx = norm(x);

    std::vector<double> neg(x);
    for (auto& v : neg) v = -v;
    k.eval(x, kx);
    k.eval(neg, kneg);
    for (std::size_t i = 0; i < m; ++i) {
      if (kneg[i] != -kx[i] && out.odd) {
        out.odd = false;
        out.odd_worst_x = x;
      }
    }

    const double h = 1e-5 * nx;
    auto shifted = [&](std::size_t i, double si, std::size_t j, double sj) {
      std::vector<double> p(x);
      p[i] += si * h;
      p[j] += sj * h;
      return p;
    };

    std::vector<double> jac;
    jac.reserve(m * du);
    for (std::size_t i = 0; i < du; ++i) {
      k.eval(shifted(i, 1.0, i, 0.0), a);
      k.eval(shifted(i, -1.0, i, 0.0), b);
      for (std::size_t q = 0; q < m; ++q) jac.push_back((a[q] - b[q]) / (2.0 * h));
    }
    std::vector<double> hess;
    hess.reserve(m * du * du);
    for (std::size_t i = 0; i < du; ++i) {
      for (std::size_t j = 0; j < du; ++j) {
        if (i == j) {
          k.eval(shifted(i, 1.0, i, 0.0), a);
          k.eval(shifted(i, -1.0, i, 0.0), b);
          for (std::size_t q = 0; q < m; ++q) hess.push_back((a[q] - 2.0 * kx[q] + b[q]) / (h * h));
        } else {
          k.eval(shifted(i, 1.0, j, 1.0), a);
          k.eval(shifted(i, 1.0, j, -1.0), b);
          k.eval(shifted(i, -1.0, j, 1.0), c);
          k.eval(shifted(i, -1.0, j, -1.0), e);
          for (std::size_t q = 0; q < m; ++q) hess.push_back((a[q] - b[q] - c[q] + e[q]) / (4.0 * h * h));
        }
      }
    }
    const std::array<double, 3> vals{frob(kx) * std::pow(nx, k.n()), frob(jac) * std::pow(nx, k.n() + 1),
                                     frob(hess) * std::pow(nx, k.n() + 2)};
    for (int j = 0; j < 3; ++j) {
      const double r = bound_ratio(vals[static_cast<std::size_t>(j)], k.constant(j));
      if (r > out.worst_ratio[static_cast<std::size_t>(j)]) {
        out.worst_ratio[static_cast<std::size_t>(j)] = r;
        out.worst_x[static_cast<std::size_t>(j)] = x;
      }
    }
  }
  return out;
}

Kernel make_custom_kernel(std::string name, int dim, int n, int components, Kernel::Fn fn,
                          std::array<double, 3> constants, std::uint64_t seed) {
  Kernel k(std::move(name), dim, n, components, std::move(fn), constants);
  const KernelValidation v = validate_kernel(k, seed);
  if (v.ok()) return k;
  std::ostringstream msg;
  msg.precision(17);
  auto put = [&](const std::vector<double>& x) {
    msg << '(';
    for (std::size_t i = 0; i < x.size(); ++i) msg << (i ? ", " : "") << x[i];
    msg << ')';
  };
  msg << "kernel '" << k.name() << "' rejected:";
  if (!v.odd) {
    msg << " not odd at x = ";
    put(v.odd_worst_x);
    msg << ';';
  }
  for (int j = 0; j < 3; ++j) {
    if (v.worst_ratio[static_cast<std::size_t>(j)] > 1.1) {
      msg << " derivative order " << j << " exceeds C(" << j << ") by factor "
          << v.worst_ratio[static_cast<std::size_t>(j)] << " at x = ";
      put(v.worst_x[static_cast<std::size_t>(j)]);
      msg << ';';
    }
  }
  throw Error(msg.str());
}

Kernel kernel_by_name(const std::string& name, int dim, int n) {
  if (name == "riesz") return riesz_kernel(n, dim);
  if (name == "cauchy") {
    if (dim != 2) throw Error("the Cauchy kernel needs d = 2");
    return cauchy_kernel();
  }
  if (name == "zero") return zero_kernel(n, dim);
  throw Error("unknown kernel '" + name + "' (expected riesz, cauchy or zero)");
}

void suppressed_kernel(const Kernel& k, PointView x, PointView y, double phi_x, double phi_y, std::span<double> out) {
  const auto d = x.size();
  std::vector<double> diff(d);
  for (std::size_t a = 0; a < d; ++a) diff[a] = x[a] - y[a];
  k.eval(diff, out);
  const double prod = phi_x * phi_y;
  if (prod == 0.0) return;
  double s = 0.0;
  for (double v : out) s += v * v;
  const double damp = 1.0 / (1.0 + s * std::pow(prod, k.n()));
  for (double& v : out) v *= damp;
}

BumpFamily::BumpFamily(double a0, double unit) : a0_(a0), unit_(unit) {
  if (!(a0 > 1.0)) throw Error("bump family: A0 must exceed 1");
  if (!(unit > 0.0)) throw Error("bump family: unit must be positive");
}

double BumpFamily::profile(double t) {
  if (t <= 0.001) return 1.0;
  if (t >= 0.01) return 0.0;
  // 1 - smoothstep(s) = smoothstep(1 - s), nonnegative in floating point
  const double u = (0.01 - t) / 0.009;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

}  // namespace gmt
