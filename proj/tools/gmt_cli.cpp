#include <gmt/generators.hpp>
#include <gmt/io.hpp>
#include <gmt/parallel.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>

namespace {

using namespace gmt;

constexpr int kInputError = 1;
constexpr int kBaselineFailure = 2;

using Params = std::vector<std::pair<std::string, double>>;

struct Options {
  std::string input;
  std::string output;
  double r_min = 0.0;  // 0: measure default
  int spo = 4;
  double a0 = 4.0;
  double c0 = 4.0;
  double c_db = 0.0;
  int max_depth = 16;
  bool strict = false;
  double a_stop = 4.0;
  double tau = 0.1;
  std::string kernel = "riesz";
  std::uint64_t seed = 1;
  int threads = 1;
  std::size_t samples = 200;
  std::size_t balls = 50;
  std::size_t max_trees = 8;
  std::string baseline;
  std::string write_baseline;
  double baseline_tol = 0.05;

  // generate
  std::string kind = "segment";
  std::size_t count = 1000;
  int generation = 4;
  double amp = 1.0;

  // analyze
  std::string profile;
  std::size_t profile_center = 0;
  // capacity
  double scale = 1.0;
};

Measure load(const Options& o) {
  if (o.input.empty()) throw Error("--input is required");
  std::optional<double> r;
  if (o.r_min > 0.0) r = o.r_min;
  return load_measure(o.input, r);
}

LatticeParams lattice_params(const Options& o) {
  LatticeParams p;
  p.a0 = o.a0;
  p.c0 = o.c0;
  p.doubling_constant = o.c_db;
  p.max_depth = o.max_depth;
  p.strict = o.strict;
  return p;
}

Json describe(const Options& o, const Measure& mu) {
  Json j;
  j["path"] = o.input;
  j["dim"] = mu.dim();
  j["n"] = mu.n();
  j["points"] = mu.size();
  j["total_mass"] = mu.total_mass();
  j["diameter"] = mu.diameter();
  j["r_min"] = mu.r_min();
  return j;
}

Json base_config(const Options& o) {
  // The thread count is left out on purpose: it must not change the report.
  Json j;
  j["scales_per_octave"] = o.spo;
  j["r_min_override"] = o.r_min > 0.0 ? Json(o.r_min) : Json(nullptr);
  j["seed"] = o.seed;
  return j;
}

void add_lattice_config(Json& j, const Options& o) {
  j["a0"] = o.a0;
  j["c0"] = o.c0;
  j["c_db"] = o.c_db;
  j["max_depth"] = o.max_depth;
  j["strict"] = o.strict;
}

void add_corona_config(Json& j, const Options& o) {
  j["a_stop"] = o.a_stop;
  j["tau"] = o.tau;
}

Json lattice_check_json(const Lattice& lat) {
  const LatticeCheck c = check_lattice(lat);
  return Json{{"ok", c.ok()},
              {"partition", c.partition},
              {"nesting", c.nesting},
              {"disjoint_5b", c.disjoint_5b},
              {"containment", c.containment},
              {"diam_upper", c.diam_upper},
              {"nonconforming", c.nonconforming},
              {"diam_lower_ratio", c.diam_lower_ratio},
              {"strict_regime", lat.strict_regime()}};
}

Json corona_check_json(const CoronaCheck& c) {
  return Json{{"ok", c.ok()},
              {"root_is_top", c.root_is_top},
              {"tree_partition", c.tree_partition},
              {"tree_density", c.tree_density},
              {"tree_density_ratio", c.tree_density_ratio},
              {"top_doubling", c.top_doubling},
              {"stop_stratification", c.stop_stratification},
              {"d_r_lipschitz", c.lipschitz},
              {"lipschitz_pairs", c.lipschitz_pairs},
              {"reg_disjoint", c.reg_disjoint},
              {"reg_in_stop", c.reg_in_stop},
              {"reg_lower", c.reg_lower},
              {"reg_upper", c.reg_upper},
              {"reg_samples", c.reg_samples},
              {"reg_min_ratio", c.reg_samples ? Json(c.reg_min_ratio) : Json(nullptr)},
              {"reg_max_ratio", c.reg_samples ? Json(c.reg_max_ratio) : Json(nullptr)},
              {"reg_neighbor", c.reg_neighbor},
              {"reg_neighbor_ratio", c.reg_neighbor_ratio},
              {"phi_stop", c.phi_stop},
              {"good_small", c.good_small},
              {"b0_comparable", c.b0_comparable},
              {"b0_ratio_min", c.b0_ratio_min},
              {"b0_ratio_max", c.b0_ratio_max},
              {"growth_c1", c.growth_c1}};
}

CheckRecord packing_record(const Corona& cor, int spo) {
  const PackingAudit p = packing_audit(cor, spo);
  CheckRecord r{"packing", p.lhs, p.rhs, p.ratio, cor.top().size(), {{"scales_per_octave", spo}}, {}};
  return r;
}

CheckRecord growth_record(const Measure& mu, const Options& o) {
  const GrowthTailResult g = growth_tail_check(mu, 1000, o.seed);
  CheckRecord r{"growth_tail", g.worst, g.bound, g.worst / g.bound, g.samples, {{"c0", g.c0}}, {}};
  r.notes.push_back("lhs = max annulus_tail(x,r) r / c0, rhs = 2^(n+1)");
  return r;
}

// Atoms of the cell, subsampled deterministically.
std::vector<Index> sample_atoms(std::span<const Index> atoms, std::size_t count, std::uint64_t seed) {
  if (atoms.size() <= count) return {atoms.begin(), atoms.end()};
  std::vector<Index> pool(atoms.begin(), atoms.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pool.size() - i)),
                                pool.size() - i - 1);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

void emit(const Options& o, const AnalysisReport& rep) {
  const std::string text = dump_json(report_json(rep));
  if (o.output.empty() || o.output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(o.output, std::ios::binary);
  if (!out) throw Error("cannot write '" + o.output + "'");
  out << text;
}

int finish(const Options& o, const AnalysisReport& rep) {
  emit(o, rep);
  if (!o.write_baseline.empty()) {
    std::ofstream out(o.write_baseline, std::ios::binary);
    if (!out) throw Error("cannot write '" + o.write_baseline + "'");
    out << dump_json(make_baseline(rep, o.baseline_tol));
  }
  if (o.baseline.empty()) return 0;
  std::ifstream in(o.baseline);
  if (!in) throw Error("cannot open baseline '" + o.baseline + "'");
  Json base;
  try {
    base = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("baseline: " + std::string(e.what()));
  }
  const BaselineOutcome res = compare_baseline(rep, base);
  for (const std::string& f : res.failures) std::cerr << "baseline mismatch: " << f << '\n';
  return res.ok ? 0 : kBaselineFailure;
}

int cmd_generate(const Options& o) {
  if (o.output.empty()) throw Error("--output is required");
  Measure mu = [&] {
    if (o.kind == "segment") return segment(o.count);
    if (o.kind == "lipschitz") return lipschitz_graph(o.count, o.amp, o.seed);
    if (o.kind == "cantor4") return cantor4(o.generation);
    if (o.kind == "square") return square_area(o.count);
    throw Error("unknown kind '" + o.kind + "' (segment, lipschitz, cantor4, square)");
  }();
  save_measure(mu, o.output);
  return 0;
}

int cmd_analyze(const Options& o) {
  const Measure mu = load(o);
  AnalysisReport rep;
  rep.command = "analyze";
  rep.input = describe(o, mu);
  rep.config = base_config(o);
  rep.checks.push_back(growth_record(mu, o));
  const double hi = std::max(mu.diameter(), mu.r_min());
  const ConditionResult cond = condition_check(mu, Ball(mu.point(0), hi), o.spo);
  rep.checks.push_back({"jones_condition", cond.ratio * cond.mass, cond.mass, cond.ratio, mu.size(),
                        {{"radius", hi}}, {"ball B(x_0, diam)"}});
  const std::vector<double> grid = geometric_grid(mu.r_min(), hi, o.spo);
  rep.data["growth_constant_grid"] = growth_constant(mu, grid);
  if (!o.profile.empty()) {
    if (o.profile_center >= mu.size()) throw Error("--center out of range");
    std::ofstream out(o.profile);
    if (!out) throw Error("cannot write '" + o.profile + "'");
    const JonesIntegrator jones(mu);
    const std::vector<BetaProfileRow> rows =
        mu.diameter() > mu.r_min() ? jones.profile(o.profile_center, mu.r_min(), mu.diameter(), o.spo)
                                   : std::vector<BetaProfileRow>{};
    write_beta_profile_csv(rows, out);
  }
  return finish(o, rep);
}

int cmd_lattice(const Options& o) {
  const Measure mu = load(o);
  const Lattice lat = build_lattice(mu, lattice_params(o));
  AnalysisReport rep;
  rep.command = "lattice";
  rep.input = describe(o, mu);
  rep.config = base_config(o);
  add_lattice_config(rep.config, o);
  rep.data["check"] = lattice_check_json(lat);
  Json boundary = Json::object();
  for (double lambda : {0.2, 0.1, 0.05, 0.02}) {
    double worst = 0.0;
    for (Index q = 0; q < lat.cell_count(); ++q) worst = std::max(worst, boundary_ratio(lat, q, lambda));
    boundary[std::to_string(lambda).substr(0, 4)] = worst;
    rep.checks.push_back({"boundary_lambda_" + std::to_string(lambda).substr(0, 4), worst, 1.0, worst,
                          lat.cell_count(), {{"lambda", lambda}}, {}});
  }
  rep.data["lattice"] = lattice_json(lat);
  return finish(o, rep);
}

int cmd_corona(const Options& o) {
  const Measure mu = load(o);
  const Lattice lat = build_lattice(mu, lattice_params(o));
  const Corona cor = build_corona(lat, CoronaParams{o.a_stop, o.tau});
  AnalysisReport rep;
  rep.command = "corona";
  rep.input = describe(o, mu);
  rep.config = base_config(o);
  add_lattice_config(rep.config, o);
  add_corona_config(rep.config, o);
  CoronaCheckOptions copt;
  copt.seed = o.seed;
  rep.checks.push_back(packing_record(cor, o.spo));
  rep.data["lattice_check"] = lattice_check_json(lat);
  rep.data["corona_check"] = corona_check_json(check_corona(cor, copt));
  rep.data["corona"] = corona_json(cor);
  return finish(o, rep);
}

int cmd_verify(const Options& o) {
  const Measure mu = load(o);
  const Kernel k = kernel_by_name(o.kernel, mu.dim(), mu.n());
  AnalysisReport rep;
  rep.command = "verify";
  rep.input = describe(o, mu);
  rep.config = base_config(o);
  add_lattice_config(rep.config, o);
  add_corona_config(rep.config, o);
  rep.config["kernel"] = o.kernel;
  rep.config["samples"] = o.samples;
  rep.config["balls"] = o.balls;
  rep.config["max_trees"] = o.max_trees;

  const std::vector<double> grid = default_eps_grid(mu, o.spo);
  const Params grid_params{{"eps_min", grid.front()}, {"eps_max", grid.back()}, {"eps_count", double(grid.size())}};
  const MainLemmaResult ml = main_lemma_check(mu, k, grid, o.spo);
  CheckRecord main{"main_lemma", ml.lhs, ml.rhs, ml.ratio, mu.size(), grid_params, {}};
  main.params.emplace_back("best_eps", ml.best_eps);
  main.params.emplace_back("jones", ml.jones);
  rep.checks.push_back(main);

  const std::vector<Ball> balls = random_balls(mu, o.balls, o.seed);
  const BallSampleResult t1 = t1_ball_check(mu, k, balls, grid, o.spo);
  rep.checks.push_back({"t1_balls", t1.worst, ml.ratio, safe_ratio(t1.worst, ml.ratio), balls.size(), grid_params,
                        {"lhs = worst ball ratio, rhs = global ratio"}});

  rep.checks.push_back(growth_record(mu, o));
  const SampledConstant smooth = smoothness_check(k, 1000, o.seed);
  rep.checks.push_back({"cz_smoothness", smooth.value, 1.0, smooth.value, smooth.samples,
                        {{"declared_constant", k.smoothness_constant()}}, {}});

  const Lattice lat = build_lattice(mu, lattice_params(o));
  const Corona cor = build_corona(lat, CoronaParams{o.a_stop, o.tau});
  rep.checks.push_back(packing_record(cor, o.spo));
  CoronaCheckOptions copt;
  copt.seed = o.seed;
  rep.data["lattice_check"] = lattice_check_json(lat);
  rep.data["corona_check"] = corona_check_json(check_corona(cor, copt));

  const TreeGeometry root_geo(cor, 0);
  const std::vector<double> phi = root_geo.phi_atoms();
  const SampledConstant supp = suppression_constant(k, mu, phi, 10000, o.seed);
  rep.checks.push_back({"suppressed_kernel_bound", supp.value, 1.0, supp.value, supp.samples, {}, {"Phi = Phi_R0"}});
  const TruncationConstants tc = truncation_constants(k, mu, phi, 1000, o.seed);
  rep.checks.push_back({"truncation_above", tc.above.value, 1.0, tc.above.value, tc.above.samples, {}, {}});
  rep.checks.push_back({"truncation_below", tc.below.value, 1.0, tc.below.value, tc.below.samples, {}, {}});

  const BumpFamily bump = lattice_bump(lat);
  CotlarResult cot_all;
  DominationResult dom_all;
  const std::size_t trees = std::min(o.max_trees, cor.tree_count());
  Json per_tree = Json::array();
  for (std::size_t t = 0; t < trees; ++t) {
    const TreeGeometry geo = t == 0 ? root_geo : TreeGeometry(cor, t);
    const std::vector<Index> in_b0 = mu.ball_indices(geo.b0());
    const std::vector<Index> cs = sample_atoms(in_b0, o.samples, o.seed + t);
    const CotlarResult cot = cotlar_check(geo, k, {}, cs);
    const std::vector<Index> ds = sample_atoms(lat.cell(geo.top()).members, o.samples, o.seed + t);
    const DominationResult dom = pointwise_domination_check(geo, k, bump, ds);
    per_tree.push_back(Json{{"top", geo.top()},
                            {"cotlar", cot.constant},
                            {"cotlar_flagged", cot.flagged},
                            {"domination", dom.constant},
                            {"theta_br", dom.theta_br}});
    if (cot.constant >= cot_all.constant) {
      cot_all.constant = cot.constant;
      cot_all.worst_lhs = cot.worst_lhs;
      cot_all.worst_rhs = cot.worst_rhs;
    }
    cot_all.samples += cot.samples;
    cot_all.flagged += cot.flagged;
    dom_all.constant = std::max(dom_all.constant, dom.constant);
    dom_all.samples += dom.samples;
  }
  CheckRecord cot{"cotlar", cot_all.worst_lhs, cot_all.worst_rhs, cot_all.constant, cot_all.samples, {}, {}};
  cot.params.emplace_back("flagged", double(cot_all.flagged));
  cot.notes.push_back("Cotlar form with sigma = chi_B0(R) mu and Phi = Phi_R");
  rep.checks.push_back(cot);
  rep.checks.push_back({"pointwise_domination", dom_all.constant, 1.0, dom_all.constant, dom_all.samples, {}, {}});
  rep.data["trees"] = std::move(per_tree);
  return finish(o, rep);
}

int cmd_capacity(const Options& o) {
  const Measure base = load(o);
  if (!(o.scale > 0.0)) throw Error("--scale must be positive");
  const Measure mu = o.scale == 1.0 ? base : base.scaled(o.scale);
  const CapacityResult c = capacity_lower_bound(mu, o.spo);
  AnalysisReport rep;
  rep.command = "capacity";
  rep.input = describe(o, mu);
  rep.config = base_config(o);
  rep.config["scale"] = o.scale;
  CheckRecord r{"capacity", c.bound, mu.total_mass(), c.t_star, mu.size(),
                {{"density", c.density}, {"jones", c.jones}, {"argmin", double(c.argmin)}}, {}};
  if (c.sub_resolution) r.notes.push_back("single atom: the bound only reflects r_min");
  rep.checks.push_back(r);
  rep.data["t_star"] = c.t_star;
  rep.data["bound"] = c.bound;
  rep.data["sub_resolution"] = c.sub_resolution;
  return finish(o, rep);
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Discrete geometric measure theory toolkit"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* sc) {
    sc->add_option("--input", o.input, "measure file (.csv or .json)");
    sc->add_option("--output", o.output, "report path (default: stdout)");
    sc->add_option("--r-min", o.r_min, "resolution override (default: half the minimal distance)");
    sc->add_option("--spo", o.spo, "scales per octave")->check(CLI::Range(1, 64));
    sc->add_option("--seed", o.seed, "random seed");
    sc->add_option("--threads", o.threads, "worker threads (0: all cores)")->check(CLI::Range(0, 1024));
    sc->add_option("--baseline", o.baseline, "compare ratios against a baseline file");
    sc->add_option("--write-baseline", o.write_baseline, "write the run's ratios as a baseline");
    sc->add_option("--baseline-tol", o.baseline_tol, "relative tolerance written by --write-baseline");
  };
  auto lattice_opts = [&](CLI::App* sc) {
    sc->add_option("--a0", o.a0, "scale ratio A0");
    sc->add_option("--c0", o.c0, "radius window C0");
    sc->add_option("--c-db", o.c_db, "doubling constant (0: 128^n)");
    sc->add_option("--max-depth", o.max_depth, "deepest lattice level");
    sc->add_flag("--strict", o.strict, "enforce A0 > 5000 C0");
  };
  auto corona_opts = [&](CLI::App* sc) {
    sc->add_option("--a-stop", o.a_stop, "density stop factor");
    sc->add_option("--tau", o.tau, "coherence stop threshold");
  };

  auto* gen = app.add_subcommand("generate", "write a generated measure");
  gen->add_option("--kind", o.kind, "segment, lipschitz, cantor4 or square");
  gen->add_option("-N,--count", o.count, "number of points (grid side for square)");
  gen->add_option("--generation", o.generation, "Cantor generation");
  gen->add_option("--amp", o.amp, "slope amplitude of the Lipschitz graph");
  gen->add_option("--seed", o.seed, "random seed");
  gen->add_option("--output", o.output, "measure path (.csv or .json)");

  auto* analyze = app.add_subcommand("analyze", "growth, tail and Jones condition diagnostics");
  common(analyze);
  analyze->add_option("--profile", o.profile, "write the beta profile CSV of one center");
  analyze->add_option("--center", o.profile_center, "atom index for --profile");

  auto* lattice = app.add_subcommand("lattice", "build and check the lattice");
  common(lattice);
  lattice_opts(lattice);

  auto* corona = app.add_subcommand("corona", "corona decomposition and packing audit");
  common(corona);
  lattice_opts(corona);
  corona_opts(corona);

  auto* verify = app.add_subcommand("verify", "run the inequality checks");
  common(verify);
  lattice_opts(verify);
  corona_opts(verify);
  verify->add_option("--kernel", o.kernel, "riesz, cauchy or zero");
  verify->add_option("--samples", o.samples, "evaluation points per tree");
  verify->add_option("--balls", o.balls, "random balls for the T1 check");
  verify->add_option("--max-trees", o.max_trees, "trees examined by the Cotlar and domination checks");

  auto* capacity = app.add_subcommand("capacity", "capacity lower bound");
  common(capacity);
  capacity->add_option("--scale", o.scale, "multiply all weights first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kInputError;
  }

  try {
    set_thread_count(o.threads);
    if (*gen) return cmd_generate(o);
    if (*analyze) return cmd_analyze(o);
    if (*lattice) return cmd_lattice(o);
    if (*corona) return cmd_corona(o);
    if (*verify) return cmd_verify(o);
    if (*capacity) return cmd_capacity(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
