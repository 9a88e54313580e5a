#include <gmt/generators.hpp>

#include <random>

namespace gmt {

Measure segment(std::size_t count) {
  if (count < 2) throw Error("segment: need at least 2 points");
  std::vector<double> coords, weights(count, 1.0 / static_cast<double>(count));
  coords.reserve(2 * count);
  for (std::size_t i = 0; i < count; ++i) {
    coords.push_back(static_cast<double>(i) / static_cast<double>(count - 1));
    coords.push_back(0.0);
  }
  return Measure(2, 1, std::move(coords), std::move(weights));
}

Measure lipschitz_graph(std::size_t count, double amp, std::uint64_t seed, int pieces) {
  if (count < 2) throw Error("lipschitz_graph: need at least 2 points");
  if (!(amp >= 0.0) || !std::isfinite(amp)) throw Error("lipschitz_graph: slope amplitude must be finite and >= 0");
  if (pieces < 1) throw Error("lipschitz_graph: need at least one piece");
  std::mt19937_64 rng(seed);
  std::vector<double> slope(static_cast<std::size_t>(pieces));
  for (double& s : slope) s = amp * (2.0 * uniform01(rng) - 1.0);
  // heights at the breakpoints j / pieces
  std::vector<double> knot(slope.size() + 1, 0.0);
  for (std::size_t j = 0; j < slope.size(); ++j) knot[j + 1] = knot[j] + slope[j] / pieces;

  std::vector<double> coords, weights(count, 1.0 / static_cast<double>(count));
  coords.reserve(2 * count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(count - 1);
    const auto j = std::min(static_cast<std::size_t>(x * pieces), slope.size() - 1);
    coords.push_back(x);
    coords.push_back(knot[j] + slope[j] * (x - static_cast<double>(j) / pieces));
  }
  return Measure(2, 1, std::move(coords), std::move(weights));
}

Measure cantor4(int generation) {
  if (generation < 1 || generation > 10) throw Error("cantor4: generation must be in [1, 10]");
  const std::size_t count = std::size_t{1} << (2 * generation);
  std::vector<double> coords(2 * count, 0.0), weights(count, 1.0 / static_cast<double>(count));
  for (std::size_t idx = 0; idx < count; ++idx) {
    double scale = 0.75;
    for (int j = generation - 1; j >= 0; --j) {
      const std::size_t digit = (idx >> (2 * j)) & 3u;
      coords[2 * idx] += scale * static_cast<double>(digit >> 1);
      coords[2 * idx + 1] += scale * static_cast<double>(digit & 1u);
      scale /= 4.0;
    }
  }
  return Measure(2, 1, std::move(coords), std::move(weights));
}

Measure square_area(std::size_t count) {
  if (count < 2) throw Error("square_area: need N >= 2");
  const double w = 1.0 / static_cast<double>(count * count);
  std::vector<double> coords, weights(count * count, w);
  coords.reserve(2 * count * count);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      coords.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(count));
      coords.push_back((static_cast<double>(j) + 0.5) / static_cast<double>(count));
    }
  }
  return Measure(2, 1, std::move(coords), std::move(weights));
}

}  // namespace gmt
