#pragma once

#include <gmt/beta.hpp>
#include <gmt/corona.hpp>
#include <gmt/lattice.hpp>
#include <gmt/verify.hpp>

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace gmt {

using Json = nlohmann::ordered_json;

/// CSV measure: header `dim=<d>,n=<n>`, then one `x_1,...,x_d,weight` row per
/// atom. Blank lines and lines starting with '#' are skipped. Errors carry
/// the line number.
Measure read_measure_csv(std::istream& in, std::optional<double> r_min = std::nullopt);
/// JSON measure: {"dim": d, "n": n, "points": [[...], ...], "weights": [...]}.
Measure read_measure_json(std::istream& in, std::optional<double> r_min = std::nullopt);
/// By extension: .json is JSON, anything else CSV.
Measure load_measure(const std::string& path, std::optional<double> r_min = std::nullopt);

/// 17 significant digits, so that reading back reproduces every coordinate.
void write_measure_csv(const Measure& mu, std::ostream& out);
void write_measure_json(const Measure& mu, std::ostream& out);
void save_measure(const Measure& mu, const std::string& path);

/// Per-cell {id, k, center, r, ell, point_count, doubling, conforming, parent,
/// children}.
Json lattice_json(const Lattice& lattice);
/// {top, trees: [{top, stop, tree_size, good_mass, packing_term}], ...}.
Json corona_json(const Corona& corona);

/// Rows `center_index,r,beta,theta,integrand`.
void write_beta_profile_csv(std::span<const BetaProfileRow> rows, std::ostream& out);

/// Serialized record of a pipeline run. No timestamps or host data, so equal
/// configurations give byte-identical files.
struct AnalysisReport {
  static constexpr int kSchemaVersion = 1;
  std::string command;
  Json input = Json::object();   // descriptor of the measure
  Json config = Json::object();  // every parameter of the run
  std::vector<CheckRecord> checks;
  Json data = Json::object();    // command-specific payload
};

Json report_json(const AnalysisReport& report);
std::string dump_json(const Json& j);

/// {"checks": {name: {"ratio": r, "rel_tol": t}}}.
Json make_baseline(const AnalysisReport& report, double rel_tol);

struct BaselineOutcome {
  bool ok = true;
  std::vector<std::string> failures;
};

/// Each baseline check must be present with |ratio - r| <= rel_tol |r|.
BaselineOutcome compare_baseline(const AnalysisReport& report, const Json& baseline);

}  // namespace gmt
