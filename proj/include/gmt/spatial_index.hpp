#pragma once

#include <gmt/common.hpp>

#include <cstdint>
#include <vector>

namespace gmt {

// Static kd-tree over a row-major coordinate array. Queries are exact: a
// point is reported iff distance(center, point) <= radius, using the same
// distance routine as a naive scan. Box pruning is only an accelerator.
class KdTree {
 public:
  KdTree() = default;
  KdTree(std::span<const double> coords, int dim);

  /// Indices of points in the closed ball, sorted ascending.
  [[nodiscard]] std::vector<Index> query(PointView center, double radius) const;

  /// Calls fn(index) for each point in the closed ball (unspecified order).
  template <class Fn>
  void for_each_in_ball(PointView center, double radius, Fn&& fn) const {
    if (nodes_.empty()) return;
    visit(0, center, radius, fn);
  }

  [[nodiscard]] std::size_t size() const { return perm_.size(); }

 private:
  struct Node {
    std::vector<double> lo, hi;
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, int depth);
  [[nodiscard]] double box_distance_sq(const Node& node, PointView c) const;

  template <class Fn>
  void visit(std::int32_t id, PointView center, double radius, Fn& fn) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    // Slack keeps pruning conservative under rounding; exact test below.
    if (box_distance_sq(node, center) > radius * radius * (1.0 + 1e-9) + 1e-300) return;
    if (node.left < 0) {
      for (std::uint32_t k = node.begin; k < node.end; ++k) {
        const Index i = perm_[k];
        if (distance(center, point(i)) <= radius) fn(i);
      }
      return;
    }
    visit(node.left, center, radius, fn);
    visit(node.right, center, radius, fn);
  }

  [[nodiscard]] PointView point(Index i) const {
    return coords_.subspan(i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_));
  }

  std::span<const double> coords_;
  int dim_ = 0;
  std::vector<Index> perm_;
  std::vector<Node> nodes_;
};

}  // namespace gmt
