// Acceptance run: one PASS/FAIL line per criterion.

#include "support.hpp"

#include <gmt/beta.hpp>
#include <gmt/corona.hpp>
#include <gmt/generators.hpp>
#include <gmt/kernel.hpp>
#include <gmt/lattice.hpp>
#include <gmt/operators.hpp>
#include <gmt/parallel.hpp>
#include <gmt/verify.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>

using namespace gmt;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Every beta2 evaluation of the run goes through here so that the bound
// beta^2 <= 4 theta is checked on all of them.
struct BetaBound {
  std::size_t balls = 0;
  double worst = 0.0;  // max beta^2 / (4 theta)
  void record(const Measure& mu, const Ball& b, double beta) {
    const double theta = density_theta(mu, b.center, b.radius);
    ++balls;
    const double ratio = theta > 0.0 ? beta * beta / (4.0 * theta) : (beta == 0.0 ? 0.0 : 1e300);
    worst = std::max(worst, ratio);
  }
};
BetaBound g_beta_bound;

double tracked_beta2(const Measure& mu, const Ball& b) {
  const double v = beta2(mu, b).value;
  g_beta_bound.record(mu, b, v);
  return v;
}

Outcome criterion1() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const int dim = inst < 10 ? 2 : 3;
    const int n = dim == 2 ? 1 : 1 + inst % 2;
    const std::size_t count = 10 + static_cast<std::size_t>(uniform01(rng) * 40.0);
    const Measure mu = random_cloud(rng, dim, n, count);
    const Index c = static_cast<Index>(uniform01(rng) * static_cast<double>(count));
    const PointView z = mu.point(c);
    const std::vector<double> center(z.begin(), z.end());
    const double r = 0.6 + uniform01(rng);
    const double v = tracked_beta2(mu, Ball(center, r));
    const double oracle = dim == 2 ? beta2_oracle_2d(mu, center, r) : beta2_oracle_3d(mu, center, r, rng);
    worst = std::max(worst, std::abs(v - oracle));
  }
  // plane-supported measures
  double flat = 0.0;
  for (int b = 0; b < 100; ++b) {
    const int dim = 2 + b % 2;
    const int n = dim == 2 ? 1 : 1 + (b / 2) % 2;
    std::vector<double> coords, weights;
    const Mat3 rot = random_rotation(rng);
    const double angle = 2.0 * kPi * uniform01(rng);
    for (int i = 0; i < 40; ++i) {
      double local[3] = {uniform01(rng), n == 2 ? uniform01(rng) : 0.0, 0.0};
      if (dim == 2) {
        coords.push_back(0.3 + local[0] * std::cos(angle));
        coords.push_back(-0.2 + local[0] * std::sin(angle));
      } else {
        for (int a = 0; a < 3; ++a) coords.push_back(rot[a][0] * local[0] + rot[a][1] * local[1] + 0.1 * a);
      }
      weights.push_back(0.5 + uniform01(rng));
    }
    const Measure mu(dim, n, coords, weights, 1e-3);
    const PointView z = mu.point(static_cast<Index>(uniform01(rng) * 40.0) % 40);
    flat = std::max(flat, tracked_beta2(mu, Ball(z, 0.05 + uniform01(rng))));
  }
  return {worst <= 1e-8 && flat <= 1e-12,
          "max |beta2 - oracle| = " + fmt("%.3g", worst) + " over 20 instances; max flat beta = " + fmt("%.3g", flat)};
}

std::vector<std::pair<std::string, Measure>> generated() {
  return {{"segment(1000)", segment(1000)},
          {"lipschitz_graph(1000)", lipschitz_graph(1000, 1.0, 7)},
          {"cantor4(5)", cantor4(5)},
          {"square_area(30)", square_area(30)}};
}

Outcome criterion2() {
  // random balls on every generated measure, on top of criterion 1's
  std::mt19937_64 rng(202);
  for (const auto& [name, mu] : generated()) {
    for (const Ball& b : random_balls(mu, 200, rng())) tracked_beta2(mu, b);
  }
  return {g_beta_bound.worst <= 1.0, "max beta^2/(4 theta) = " + fmt("%.4g", g_beta_bound.worst) + " over " +
                                        std::to_string(g_beta_bound.balls) + " balls"};
}

Outcome criterion3() {
  Outcome out;
  double worst = 0.0;
  for (const auto& [name, mu] : generated()) {
    const GrowthTailResult g = growth_tail_check(mu, 1000, 303);
    worst = std::max(worst, g.worst / g.bound);
    if (g.worst > g.bound) out.pass = false;
  }
  out.detail = "max annulus_tail r / (2^(n+1) c0) = " + fmt("%.4g", worst) + " (1000 samples per measure)";
  return out;
}

Outcome criterion4() {
  std::vector<std::pair<std::string, Measure>> inputs{{"segment(1000)", segment(1000)},
                                                      {"square_area(10)", square_area(10)},
                                                      {"square_area(50)", square_area(50)},
                                                      {"lipschitz_graph(500)", lipschitz_graph(500, 1.0, 3)},
                                                      {"lipschitz_graph(2000)", lipschitz_graph(2000, 1.0, 4)}};
  for (int g = 1; g <= 5; ++g) inputs.emplace_back("cantor4(" + std::to_string(g) + ")", cantor4(g));
  Outcome out;
  std::size_t cells = 0, nonconf = 0;
  for (const auto& [name, mu] : inputs) {
    const Lattice lat = build_lattice(mu, LatticeParams{});
    const LatticeCheck c = check_lattice(lat);
    cells += lat.cell_count();
    nonconf += c.nonconforming;
    if (!c.ok()) {
      out.pass = false;
      out.detail += name + " violates an invariant; ";
    }
  }
  out.detail += std::to_string(inputs.size()) + " inputs, " + std::to_string(cells) + " cells, " +
                std::to_string(nonconf) + " non-conforming";
  return out;
}

Outcome criterion5() {
  Outcome out;
  const std::vector<Kernel> kernels{riesz_kernel(1, 2), cauchy_kernel()};
  std::mt19937_64 rng(505);
  // exact identities on 10^4 pairs with one Phi value zero
  bool identity = true, antisym = true;
  for (const Kernel& k : kernels) {
    std::vector<double> a(2), b(2), c(2);
    for (int s = 0; s < 10000; ++s) {
      std::vector<double> x{uniform01(rng), uniform01(rng)}, y{uniform01(rng), uniform01(rng)};
      if (x == y) continue;
      const double px = s % 2 ? 0.0 : uniform01(rng);
      const double py = s % 2 ? uniform01(rng) : 0.0;
      suppressed_kernel(k, x, y, px, py, a);
      std::vector<double> diff{x[0] - y[0], x[1] - y[1]};
      k.eval(diff, b);
      if (a != b) identity = false;
      const double qx = uniform01(rng), qy = uniform01(rng);
      suppressed_kernel(k, x, y, qx, qy, a);
      suppressed_kernel(k, y, x, qy, qx, c);
      if (a[0] != -c[0] || a[1] != -c[1]) antisym = false;
    }
  }
  // property (2) under refinement, Phi(x) = |x_1 - 1/2| / 2
  std::vector<double> consts;
  for (std::size_t count : {1000, 2000, 4000}) {
    const Measure mu = lipschitz_graph(count, 1.0, 5);
    std::vector<double> phi(mu.size());
    for (Index i = 0; i < mu.size(); ++i) phi[i] = 0.5 * std::abs(mu.point(i)[0] - 0.5);
    double c = 0.0;
    for (const Kernel& k : kernels) c = std::max(c, suppression_constant(k, mu, phi, 10000, 7).value);
    consts.push_back(c);
  }
  bool stable = std::isfinite(consts[0]) && consts[0] > 0.0;
  for (double c : consts) stable = stable && std::abs(c - consts[0]) <= 0.2 * consts[0];
  out.pass = identity && antisym && stable;
  out.detail = std::string("k_Phi = k ") + (identity ? "exact" : "VIOLATED") + ", antisymmetry " +
               (antisym ? "exact" : "VIOLATED") + ", property (2) constants " + fmt("%.4g", consts[0]) + " / " +
               fmt("%.4g", consts[1]) + " / " + fmt("%.4g", consts[2]);
  return out;
}

Outcome criterion6() {
  std::mt19937_64 rng(606);
  const std::vector<Measure> inputs{lipschitz_graph(1000, 1.0, 7), cantor4(5), two_clusters(200, 100.0)};
  std::vector<Lattice> lats;
  std::vector<Corona> coronas;
  lats.reserve(inputs.size());
  coronas.reserve(inputs.size());
  for (const Measure& mu : inputs) {
    lats.push_back(build_lattice(mu, LatticeParams{}));
    coronas.push_back(build_corona(lats.back(), CoronaParams{}));
  }
  const std::vector<Kernel> kernels{riesz_kernel(1, 2), cauchy_kernel()};
  double worst = 0.0;
  std::size_t multi = 0;
  for (int s = 0; s < 1000; ++s) {
    const std::size_t which = static_cast<std::size_t>(s) % inputs.size();
    const Corona& cor = coronas[which];
    const std::size_t t = std::min(static_cast<std::size_t>(uniform01(rng) * cor.tree_count()), cor.tree_count() - 1);
    const auto& members = lats[which].cell(cor.tree(t).top).members;
    const Index x = members[std::min(static_cast<std::size_t>(uniform01(rng) * members.size()), members.size() - 1)];
    const KrEvaluation e = k_r_operator(cor, t, kernels[static_cast<std::size_t>(s) / 3 % 2], lattice_bump(lats[which]), x);
    if (e.j_end - e.j_begin > 1) ++multi;
    worst = std::max(worst, e.scale > 0.0 ? e.discrepancy() / e.scale : e.discrepancy());
  }
  return {worst <= 1e-12, "max |chain - telescoped| / scale = " + fmt("%.3g", worst) + " on 1000 (R, x), " +
                              std::to_string(multi) + " with several scales"};
}

Outcome criterion7() {
  struct Input {
    std::string name;
    Measure mu;
  };
  const std::vector<Input> inputs{{"cantor4(6)", cantor4(6)},
                                  {"two_clusters", two_clusters(300, 100.0)},
                                  {"lipschitz_graph(2000)", lipschitz_graph(2000, 1.0, 7)}};
  Outcome out;
  std::size_t reg_samples = 0, pairs = 0;
  double lo = 1e300, hi = 0.0;
  for (const Input& in : inputs) {
    const Lattice lat = build_lattice(in.mu, LatticeParams{});
    const Corona cor = build_corona(lat, CoronaParams{});
    const CoronaCheck c = check_corona(cor);
    pairs += c.lipschitz_pairs;
    reg_samples += c.reg_samples;
    if (c.reg_samples) {
      lo = std::min(lo, c.reg_min_ratio);
      hi = std::max(hi, c.reg_max_ratio);
    }
    const bool ok = c.lipschitz && c.reg_lower && c.reg_upper && c.reg_in_stop && c.phi_stop;
    if (!ok) {
      out.pass = false;
      out.detail += in.name + ": lipschitz " + std::to_string(c.lipschitz) + " lower " + std::to_string(c.reg_lower) +
                    " upper " + std::to_string(c.reg_upper) + " in_stop " + std::to_string(c.reg_in_stop) +
                    " phi_stop " + std::to_string(c.phi_stop) + "; ";
    }
  }
  if (reg_samples == 0) {
    out.pass = false;
    out.detail += "no Reg cells sampled; ";
  }
  out.detail += std::to_string(pairs) + " Lipschitz pairs, " + std::to_string(reg_samples) +
                " Reg samples, d_R/ell >= " + fmt("%.4g", lo) + ", d_R/(A0 ell) <= " + fmt("%.4g", hi);
  return out;
}

Outcome criterion8() {
  std::vector<double> ratio;
  std::size_t tops = 0;
  for (int g = 4; g <= 6; ++g) {
    const Measure mu = cantor4(g);
    const Lattice lat = build_lattice(mu, LatticeParams{});
    const Corona cor = build_corona(lat, CoronaParams{});
    tops += cor.top().size() - 1;
    ratio.push_back(packing_audit(cor, 4).ratio);
  }
  const double ref = ratio[1];
  bool pass = tops > 0;
  for (double r : ratio) pass = pass && std::abs(r - ref) <= 0.2 * ref;
  return {pass, "packing ratio g=4,5,6: " + fmt("%.4g", ratio[0]) + ", " + fmt("%.4g", ratio[1]) + ", " +
                    fmt("%.4g", ratio[2]) + " (" + std::to_string(tops) + " stopped Top cells)"};
}

Outcome criterion9() {
  struct Family {
    std::string name;
    std::function<Measure(int)> make;  // refinement level -> measure
  };
  const std::vector<Family> families{
      {"segment", [](int l) { return segment(500u << l); }},
      {"lipschitz_graph", [](int l) { return lipschitz_graph(500u << l, 1.0, 9); }},
      {"cantor4", [](int l) { return cantor4(4 + l); }},
  };
  Outcome out;
  for (const Family& fam : families) {
    const int levels = fam.name == "cantor4" ? 2 : 3;
    for (const std::string kname : {"riesz", "cauchy"}) {
      std::vector<double> r;
      for (int l = 0; l < levels; ++l) {
        const Measure mu = fam.make(l);
        const Kernel k = kernel_by_name(kname, mu.dim(), mu.n());
        r.push_back(main_lemma_check(mu, k, default_eps_grid(mu, 4), 4).ratio);
      }
      std::string line = fam.name + "/" + kname + ":";
      for (std::size_t l = 0; l < r.size(); ++l) {
        line += " " + fmt("%.4g", r[l]);
        if (!std::isfinite(r[l])) out.pass = false;
        if (l > 0 && std::abs(r[l] - r[l - 1]) > 0.3 * r[l - 1]) out.pass = false;
      }
      out.detail += (out.detail.empty() ? "" : "; ") + line;
    }
  }
  return out;
}

Outcome criterion10() {
  std::vector<double> bounds;
  for (std::size_t count : {2000, 5000}) bounds.push_back(capacity_lower_bound(segment(count).with_r_min(0.01), 4).bound);
  const Measure mu = segment(2000).with_r_min(0.01);
  const double b1 = capacity_lower_bound(mu, 4).bound;
  double scale_err = 0.0;
  for (double c : {1e-3, 0.37, 3.7, 250.0}) {
    scale_err = std::max(scale_err, std::abs(capacity_lower_bound(mu.scaled(c), 4).bound - b1) / b1);
  }
  const bool pass = std::abs(bounds[1] - 0.5) <= 0.02 && std::abs(bounds[1] - 0.5) <= std::abs(bounds[0] - 0.5) &&
                    scale_err <= 1e-12;
  return {pass, "bound N=2000: " + fmt("%.5f", bounds[0]) + ", N=5000: " + fmt("%.5f", bounds[1]) +
                    " (r_min = 0.01); scaling error " + fmt("%.3g", scale_err)};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion11() {
  const std::string cli = GMT_CLI_PATH;
  const std::string dir = ACCEPT_WORK_DIR;
  auto run = [&](const std::string& args) { return std::system((cli + " " + args + " 2>/dev/null").c_str()); };
  Outcome out;
  if (run("generate --kind cantor4 --generation 4 --output " + dir + "/acc_c4.csv") != 0 ||
      run("generate --kind lipschitz -N 600 --seed 3 --output " + dir + "/acc_lip.csv") != 0) {
    return {false, "generate failed"};
  }
  std::size_t compared = 0;
  for (const std::string input : {"acc_c4.csv", "acc_lip.csv"}) {
    for (const std::string cmd : {"analyze", "lattice", "corona", "verify", "capacity"}) {
      std::string a, b;
      for (int threads : {1, 8}) {
        const std::string path = dir + "/acc_" + cmd + "_" + std::to_string(threads) + ".json";
        if (run(cmd + " --input " + dir + "/" + input + " --threads " + std::to_string(threads) + " --output " +
                path) != 0) {
          return {false, cmd + " failed on " + input};
        }
        (threads == 1 ? a : b) = slurp(path);
      }
      const std::string again = dir + "/acc_again.json";
      run(cmd + " --input " + dir + "/" + input + " --threads 1 --output " + again);
      ++compared;
      if (a.empty() || a != b || a != slurp(again)) {
        out.pass = false;
        out.detail += cmd + " on " + input + " differs; ";
      }
    }
  }
  out.detail += std::to_string(compared) + " reports byte-identical across threads 1, 8 and a repeat run";
  return out;
}

}  // namespace

int main() {
  set_thread_count(0);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"beta exactness", criterion1},        {"beta bound", criterion2},
      {"growth estimate", criterion3},       {"lattice invariants", criterion4},
      {"suppressed kernel", criterion5},     {"telescoping", criterion6},
      {"tree geometry", criterion7},         {"packing stability", criterion8},
      {"main lemma stability", criterion9},  {"capacity", criterion10},
      {"determinism", criterion11},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2zu %-22s %s  %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
