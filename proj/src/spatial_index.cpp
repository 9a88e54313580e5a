#include <gmt/spatial_index.hpp>

#include <algorithm>
#include <limits>
#include <numeric>

namespace gmt {

namespace {
constexpr std::uint32_t kLeafSize = 16;
}

KdTree::KdTree(std::span<const double> coords, int dim) : coords_(coords), dim_(dim) {
  if (dim <= 0) throw Error("kd-tree dimension must be positive");
  const std::size_t n = coords.size() / static_cast<std::size_t>(dim);
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), Index{0});
  if (n == 0) return;
  nodes_.reserve(2 * (n / kLeafSize + 1));
  build(0, static_cast<std::uint32_t>(n), 0);
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, int depth) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  {
    Node& node = nodes_.back();
    node.begin = begin;
    node.end = end;
    node.lo.assign(static_cast<std::size_t>(dim_), std::numeric_limits<double>::infinity());
    node.hi.assign(static_cast<std::size_t>(dim_), -std::numeric_limits<double>::infinity());
    for (std::uint32_t k = begin; k < end; ++k) {
      const PointView p = point(perm_[k]);
      for (int a = 0; a < dim_; ++a) {
        node.lo[a] = std::min(node.lo[a], p[a]);
        node.hi[a] = std::max(node.hi[a], p[a]);
      }
    }
  }
  if (end - begin <= kLeafSize) return id;

  // Split along the widest axis at the median.
  int axis = depth % dim_;
  double widest = -1.0;
  for (int a = 0; a < dim_; ++a) {
    const double w = nodes_[id].hi[a] - nodes_[id].lo[a];
    if (w > widest) {
      widest = w;
      axis = a;
    }
  }
  if (widest <= 0.0) return id;  // all coincident

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                   [&](Index a, Index b) {
                     const double pa = point(a)[axis], pb = point(b)[axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const std::int32_t left = build(begin, mid, depth + 1);
  const std::int32_t right = build(mid, end, depth + 1);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double KdTree::box_distance_sq(const Node& node, PointView c) const {
  double s = 0.0;
  for (int a = 0; a < dim_; ++a) {
    double t = 0.0;
    if (c[a] < node.lo[a]) t = node.lo[a] - c[a];
    else if (c[a] > node.hi[a]) t = c[a] - node.hi[a];
    s += t * t;
  }
  return s;
}

std::vector<Index> KdTree::query(PointView center, double radius) const {
  std::vector<Index> out;
  for_each_in_ball(center, radius, [&](Index i) { out.push_back(i); });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gmt
