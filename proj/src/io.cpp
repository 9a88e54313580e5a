#include <gmt/io.hpp>

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace gmt {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

Error line_error(std::size_t line, const std::string& what) {
  return Error("line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& s, std::size_t line, const char* what) {
  if (s.empty()) throw line_error(line, std::string("empty ") + what);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw line_error(line, std::string("malformed ") + what + " '" + s + "'");
  if (!std::isfinite(v)) throw line_error(line, std::string(what) + " is not finite");
  return v;
}

int parse_header_int(const std::string& field, const std::string& key, std::size_t line) {
  const auto eq = field.find('=');
  if (eq == std::string::npos || trim(field.substr(0, eq)) != key)
    throw line_error(line, "header must read 'dim=<d>,n=<n>'");
  const std::string v = trim(field.substr(eq + 1));
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || x < 1 || x > 64)
    throw line_error(line, "bad value for " + key + ": '" + v + "'");
  return static_cast<int>(x);
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

Measure make_measure(int dim, int n, std::vector<double> coords, std::vector<double> weights,
                     std::optional<double> r_min) {
  if (weights.empty()) throw Error("measure file contains no points");
  if (n >= dim) throw Error("need 1 <= n < dim");
  return Measure(dim, n, std::move(coords), std::move(weights), r_min);
}

}  // namespace

Measure read_measure_csv(std::istream& in, std::optional<double> r_min) {
  std::string raw;
  std::size_t line = 0;
  int dim = 0, n = 0;
  bool header = false;
  std::vector<double> coords, weights;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const std::vector<std::string> fields = split(s, ',');
    if (!header) {
      if (fields.size() != 2) throw line_error(line, "header must read 'dim=<d>,n=<n>'");
      dim = parse_header_int(fields[0], "dim", line);
      n = parse_header_int(fields[1], "n", line);
      if (n >= dim) throw line_error(line, "need 1 <= n < dim");
      header = true;
      continue;
    }
    if (fields.size() != static_cast<std::size_t>(dim) + 1)
      throw line_error(line, "expected " + std::to_string(dim + 1) + " fields, found " + std::to_string(fields.size()));
    for (int a = 0; a < dim; ++a) coords.push_back(parse_number(fields[static_cast<std::size_t>(a)], line, "coordinate"));
    const double w = parse_number(fields.back(), line, "weight");
    if (!(w > 0.0)) throw line_error(line, "weight must be positive");
    weights.push_back(w);
  }
  if (!header) throw Error("empty measure file");
  return make_measure(dim, n, std::move(coords), std::move(weights), r_min);
}

Measure read_measure_json(std::istream& in, std::optional<double> r_min) {
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("invalid JSON: ") + e.what());
  }
  try {
    const int dim = j.at("dim").get<int>();
    const int n = j.at("n").get<int>();
    if (dim < 2 || n < 1 || n >= dim) throw Error("need 1 <= n < dim");
    const auto& pts = j.at("points");
    const auto& ws = j.at("weights");
    if (!pts.is_array() || !ws.is_array()) throw Error("points and weights must be arrays");
    if (pts.size() != ws.size()) throw Error("points and weights differ in length");
    std::vector<double> coords, weights;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& p = pts[i];
      if (!p.is_array() || p.size() != static_cast<std::size_t>(dim))
        throw Error("point " + std::to_string(i) + ": expected " + std::to_string(dim) + " coordinates");
      for (const auto& c : p) {
        if (!c.is_number()) throw Error("point " + std::to_string(i) + ": coordinate is not a number");
        coords.push_back(c.get<double>());
      }
      if (!ws[i].is_number()) throw Error("weight " + std::to_string(i) + " is not a number");
      const double w = ws[i].get<double>();
      if (!(w > 0.0) || !std::isfinite(w)) throw Error("weight " + std::to_string(i) + " must be positive and finite");
      weights.push_back(w);
    }
    return make_measure(dim, n, std::move(coords), std::move(weights), r_min);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad measure JSON: ") + e.what());
  }
}

Measure load_measure(const std::string& path, std::optional<double> r_min) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  try {
    return json ? read_measure_json(in, r_min) : read_measure_csv(in, r_min);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_measure_csv(const Measure& mu, std::ostream& out) {
  out << "dim=" << mu.dim() << ",n=" << mu.n() << '\n';
  for (Index i = 0; i < mu.size(); ++i) {
    for (double c : mu.point(i)) out << format_double(c) << ',';
    out << format_double(mu.weight(i)) << '\n';
  }
}

void write_measure_json(const Measure& mu, std::ostream& out) {
  Json j;
  j["dim"] = mu.dim();
  j["n"] = mu.n();
  Json pts = Json::array();
  for (Index i = 0; i < mu.size(); ++i) {
    const PointView p = mu.point(i);
    pts.push_back(std::vector<double>(p.begin(), p.end()));
  }
  j["points"] = std::move(pts);
  j["weights"] = std::vector<double>(mu.weights().begin(), mu.weights().end());
  out << dump_json(j);
}

void save_measure(const Measure& mu, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  if (json) {
    write_measure_json(mu, out);
  } else {
    write_measure_csv(mu, out);
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

Json lattice_json(const Lattice& lattice) {
  Json j;
  j["a0"] = lattice.params().a0;
  j["c0"] = lattice.params().c0;
  j["doubling_constant"] = lattice.doubling_constant();
  j["strict"] = lattice.strict_regime();
  j["depth"] = lattice.depth();
  j["unit"] = lattice.unit();
  Json cells = Json::array();
  for (const Cell& c : lattice.cells()) {
    Json e;
    e["id"] = c.id;
    e["k"] = c.k;
    const PointView z = lattice.center(c.id);
    e["center"] = std::vector<double>(z.begin(), z.end());
    e["center_atom"] = c.center;
    e["r"] = c.r;
    e["ell"] = c.ell;
    e["point_count"] = c.members.size();
    e["doubling"] = c.doubling;
    e["conforming"] = c.conforming;
    e["parent"] = c.parent ? Json(*c.parent) : Json(nullptr);
    e["children"] = c.children;
    cells.push_back(std::move(e));
  }
  j["cells"] = std::move(cells);
  return j;
}

Json corona_json(const Corona& corona) {
  const Lattice& lat = corona.lattice();
  Json j;
  j["a_stop"] = corona.params().a_stop;
  j["tau"] = corona.params().tau;
  j["c_tree"] = corona.c_tree();
  j["fallbacks"] = corona.fallback_count();
  j["top"] = corona.top();
  Json trees = Json::array();
  for (const CoronaTree& t : corona.trees()) {
    Json e;
    const double th = corona.theta_big(t.top);
    e["top"] = t.top;
    e["stop"] = t.stop;
    e["tree_size"] = t.cells.size();
    e["good_count"] = t.good.size();
    e["good_mass"] = t.good_mass;
    e["theta_br"] = th;
    e["packing_term"] = th * th * lat.mass(t.top);
    trees.push_back(std::move(e));
  }
  j["trees"] = std::move(trees);
  return j;
}

void write_beta_profile_csv(std::span<const BetaProfileRow> rows, std::ostream& out) {
  out << "center_index,r,beta,theta,integrand\n";
  for (const BetaProfileRow& r : rows) {
    out << r.center << ',' << format_double(r.r) << ',' << format_double(r.beta) << ',' << format_double(r.theta)
        << ',' << format_double(r.integrand) << '\n';
  }
}

Json report_json(const AnalysisReport& report) {
  Json j;
  j["schema_version"] = AnalysisReport::kSchemaVersion;
  j["command"] = report.command;
  j["input"] = report.input;
  j["config"] = report.config;
  Json checks = Json::array();
  for (const CheckRecord& c : report.checks) {
    Json e;
    e["name"] = c.name;
    e["lhs"] = c.lhs;
    e["rhs"] = c.rhs;
    e["ratio"] = c.ratio;
    e["samples"] = c.samples;
    Json params = Json::object();
    for (const auto& [k, v] : c.params) params[k] = v;
    e["params"] = std::move(params);
    if (!c.notes.empty()) e["notes"] = c.notes;
    checks.push_back(std::move(e));
  }
  j["checks"] = std::move(checks);
  j["data"] = report.data;
  return j;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json make_baseline(const AnalysisReport& report, double rel_tol) {
  Json checks = Json::object();
  for (const CheckRecord& c : report.checks) {
    if (!std::isfinite(c.ratio)) continue;
    checks[c.name] = Json{{"ratio", c.ratio}, {"rel_tol", rel_tol}};
  }
  return Json{{"checks", checks}};
}

BaselineOutcome compare_baseline(const AnalysisReport& report, const Json& baseline) {
  BaselineOutcome out;
  if (!baseline.is_object() || !baseline.contains("checks") || !baseline["checks"].is_object())
    throw Error("baseline must be an object with a 'checks' object");
  for (const auto& [name, entry] : baseline["checks"].items()) {
    if (!entry.is_object() || !entry.contains("ratio") || !entry["ratio"].is_number())
      throw Error("baseline check '" + name + "' needs a numeric 'ratio'");
    const double want = entry["ratio"].get<double>();
    const double tol = entry.contains("rel_tol") ? entry["rel_tol"].get<double>() : 0.0;
    const CheckRecord* got = nullptr;
    for (const CheckRecord& c : report.checks) {
      if (c.name == name) got = &c;
    }
    std::ostringstream msg;
    msg << std::setprecision(17);
    if (!got) {
      out.ok = false;
      out.failures.push_back(name + ": missing from report");
      continue;
    }
    if (!(std::abs(got->ratio - want) <= tol * std::abs(want))) {
      out.ok = false;
      msg << name << ": ratio " << got->ratio << " vs baseline " << want << " (rel_tol " << tol << ")";
      out.failures.push_back(msg.str());
    }
  }
  return out;
}

}  // namespace gmt
