#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "svio/se3.hpp"

namespace svio {

/// Static 3-d tree over a point set for exact nearest-neighbour queries.
/// Ties in distance resolve to the lowest point index.
class KdTree {
 public:
  struct Neighbor {
    std::uint32_t index;
    double squared_distance;
  };

  KdTree() = default;

  explicit KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!points_.empty()) {
      nodes_.reserve(2 * points_.size() / kLeafSize + 1);
      build(0, static_cast<std::uint32_t>(points_.size()));
    }
  }

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

  /// Nearest point with squared distance <= max_squared_distance.
  std::optional<Neighbor> nearest(
      const Vec3& q,
      double max_squared_distance = std::numeric_limits<double>::infinity()) const {
    if (nodes_.empty()) return std::nullopt;
    Neighbor best{std::numeric_limits<std::uint32_t>::max(), max_squared_distance};
    bool found = false;
    search(0, q, best, found);
    if (!found) return std::nullopt;
    return best;
  }

 private:
  static constexpr std::uint32_t kLeafSize = 8;

  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= kLeafSize) return id;

    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (std::uint32_t i = begin; i < end; ++i) {
      lo = lo.cwiseMin(points_[order_[i]]);
      hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return points_[a][axis] < points_[b][axis];
                     });
    const double split = points_[order_[mid]][axis];
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(std::int32_t id, const Vec3& q, Neighbor& best, bool& found) const {
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        const double d2 = (points_[idx] - q).squaredNorm();
        if (d2 < best.squared_distance ||
            (d2 == best.squared_distance && (!found || idx < best.index))) {
          best = Neighbor{idx, d2};
          found = true;
        }
      }
      return;
    }
    // Points equal to the split value can sit on either side, so the far
    // side is skipped only when strictly out of reach.
    const double diff = q[node.axis] - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    search(near, q, best, found);
    if (diff * diff <= best.squared_distance) search(far, q, best, found);
  }

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace svio
