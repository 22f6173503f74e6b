#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "svio/error.hpp"
#include "svio/icp.hpp"
#include "svio/se3.hpp"
#include "svio/stereo_geometry.hpp"

namespace svio {

/// Per-correspondence 3D flow, vector = prev point - cur point, anchored at
/// the frame t-1 point and its source pixel. `dynamic` entries come from
/// rejected or unsupported correspondences.
struct FlowField3D {
  std::vector<Vec3> vectors;
  std::vector<Vec3> anchors;
  std::vector<PixelCoord> pixels;
  std::vector<double> residuals;
  std::vector<std::uint8_t> dynamic;

  std::size_t size() const { return vectors.size(); }

  void push_back(const Vec3& v, const Vec3& anchor, PixelCoord px,
                 double residual, bool is_dynamic) {
    vectors.push_back(v);
    anchors.push_back(anchor);
    pixels.push_back(px);
    residuals.push_back(residual);
    dynamic.push_back(is_dynamic ? 1 : 0);
  }
};

/// Tri-state pixel label. Values double as the 8-bit sidecar mask encoding.
enum class FlowMask : std::uint8_t {
  kInvalid = 0,
  kDynamic = 128,
  kValid = 255,
};

/// Dense per-pixel 2D flow in pixels. Invalid and dynamic pixels carry (0,0).
struct FlowField2D {
  int width = 0;
  int height = 0;
  std::vector<Vec2> flow;
  std::vector<FlowMask> mask;

  FlowField2D() = default;
  FlowField2D(int w, int h)
      : width(w),
        height(h),
        flow(static_cast<std::size_t>(w) * h, Vec2::Zero()),
        mask(static_cast<std::size_t>(w) * h, FlowMask::kInvalid) {}

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  std::size_t count(FlowMask m) const {
    std::size_t n = 0;
    for (auto v : mask) n += v == m;
    return n;
  }
};

enum class View { kLeft, kRight };

/// kPaper: the projected-flow linearization K v / d_L applied literally.
/// kEndpoint: project(p_t) - project(p_{t-1}), the exact pixel displacement.
enum class FlowMode { kPaper, kEndpoint };

inline void check_correspondences(const PointCloud& prev, const PointCloud& cur,
                                  const CorrespondenceSet& corr) {
  for (const auto& c : corr) {
    if (c.index_prev >= prev.size() || c.index_cur >= cur.size()) {
      throw Error(ErrorKind::kInvalidArgument, "correspondence index out of range");
    }
  }
}

/// vector = c_{t-1} - c_t for every correspondence.
inline FlowField3D compute_3d_flow(const PointCloud& prev, const PointCloud& cur,
                                   const CorrespondenceSet& corr) {
  check_correspondences(prev, cur, corr);
  FlowField3D field;
  for (const auto& c : corr) {
    const Vec3& a = prev.points[c.index_prev];
    field.push_back(a - cur.points[c.index_cur], a, prev.source_pixel[c.index_prev],
                    c.residual, false);
  }
  return field;
}

/// Flow of a registration including its dynamic evidence: accepted pairs,
/// then rejected pairs and unsupported prev points flagged dynamic with zero
/// vectors.
inline FlowField3D compute_3d_flow(const PointCloud& prev, const PointCloud& cur,
                                   const IcpResult& reg) {
  FlowField3D field = compute_3d_flow(prev, cur, reg.correspondences);
  check_correspondences(prev, cur, reg.rejected);
  for (const auto& c : reg.rejected) {
    field.push_back(Vec3::Zero(), prev.points[c.index_prev],
                    prev.source_pixel[c.index_prev], c.residual, true);
  }
  for (auto i : reg.unsupported_prev) {
    if (i >= prev.size()) {
      throw Error(ErrorKind::kInvalidArgument, "unsupported index out of range");
    }
    field.push_back(Vec3::Zero(), prev.points[i], prev.source_pixel[i],
                    std::numeric_limits<double>::infinity(), true);
  }
  return field;
}

namespace detail {

inline std::optional<Vec2> project_view(const Vec3& p, const StereoRig& rig,
                                        View view) {
  if (view == View::kLeft) return project_point(p, rig.intrinsics);
  return project_point(rig.left_to_right() * p, rig.intrinsics);
}

}  // namespace detail

/// Sparse 2D flow at the anchor pixels of `field`, sized like `depth`.
/// Where several entries share a pixel, a non-dynamic entry beats a dynamic
/// one and otherwise the smallest residual wins.
inline FlowField2D project_flow(const FlowField3D& field, const DepthMap& depth,
                                const StereoRig& rig, View view, FlowMode mode) {
  rig.validate();
  const Mat3 k = rig.intrinsics.matrix();
  const RigidTransform to_right = rig.left_to_right();
  FlowField2D out(depth.width, depth.height);
  std::vector<double> best(out.flow.size(), std::numeric_limits<double>::infinity());

  for (std::size_t i = 0; i < field.size(); ++i) {
    const int x = static_cast<int>(field.pixels[i].u);
    const int y = static_cast<int>(field.pixels[i].v);
    if (!out.in_bounds(x, y) || !depth.is_valid(x, y)) continue;
    const std::size_t idx = out.index(x, y);
    const bool dyn = field.dynamic[i] != 0;
    const FlowMask current = out.mask[idx];
    if (current == FlowMask::kValid && dyn) continue;
    const bool same_kind =
        current == (dyn ? FlowMask::kDynamic : FlowMask::kValid);
    if (same_kind && !(field.residuals[i] < best[idx])) continue;

    Vec2 v = Vec2::Zero();
    if (!dyn) {
      if (mode == FlowMode::kPaper) {
        const double d = depth.at(x, y);
        const Vec3& v3 = field.vectors[i];
        const Vec3 moved = view == View::kLeft
                               ? Vec3(k * v3)
                               : Vec3(k * (to_right.rotation * v3 + to_right.translation));
        v = moved.head<2>() / d;
      } else {
        const auto from = detail::project_view(field.anchors[i], rig, view);
        const auto to =
            detail::project_view(field.anchors[i] - field.vectors[i], rig, view);
        if (!from || !to) continue;
        v = *to - *from;
      }
    }
    out.flow[idx] = v;
    out.mask[idx] = dyn ? FlowMask::kDynamic : FlowMask::kValid;
    best[idx] = field.residuals[i];
  }
  return out;
}

/// Per-pixel |endpoint + paper| where both fields are valid, NaN elsewhere.
/// Paper-mode flow projects prev - cur and so points backwards in time; it
/// is negated before comparing against the forward endpoint flow.
inline std::vector<double> flow_mode_discrepancy(const FlowField2D& paper,
                                                 const FlowField2D& endpoint) {
  if (paper.width != endpoint.width || paper.height != endpoint.height) {
    throw Error(ErrorKind::kInvalidArgument, "flow field dimension mismatch");
  }
  std::vector<double> out(paper.flow.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (paper.mask[i] == FlowMask::kValid && endpoint.mask[i] == FlowMask::kValid) {
      out[i] = (endpoint.flow[i] + paper.flow[i]).norm();
    }
  }
  return out;
}

/// Nearest-anchor fill radius, pixels.
inline constexpr int kFillRadius = 3;

/// Dense flow over every pixel that produced a point in `prev_cloud`: anchor
/// pixels keep their value, the rest copy the nearest anchor (valid or
/// dynamic) within `fill_radius` pixels, ties going to the lowest row-major
/// index. Pixels with no anchor in range stay invalid.
inline FlowField2D synthesize_dense_2d_flow(const FlowField2D& sparse,
                                            const PointCloud& prev_cloud,
                                            int fill_radius = kFillRadius) {
  FlowField2D dense(sparse.width, sparse.height);
  const int r2_max = fill_radius * fill_radius;
  for (const auto& px : prev_cloud.source_pixel) {
    const int x = static_cast<int>(px.u);
    const int y = static_cast<int>(px.v);
    if (!dense.in_bounds(x, y)) continue;
    const std::size_t idx = dense.index(x, y);
    if (sparse.mask[idx] != FlowMask::kInvalid) {
      dense.flow[idx] = sparse.flow[idx];
      dense.mask[idx] = sparse.mask[idx];
      continue;
    }
    int best_r2 = r2_max + 1;
    std::size_t best_idx = 0;
    for (int dy = -fill_radius; dy <= fill_radius; ++dy) {
      for (int dx = -fill_radius; dx <= fill_radius; ++dx) {
        const int r2 = dx * dx + dy * dy;
        if (r2 > r2_max || r2 > best_r2) continue;
        const int nx = x + dx;
        const int ny = y + dy;
        if (!sparse.in_bounds(nx, ny)) continue;
        const std::size_t n = sparse.index(nx, ny);
        if (sparse.mask[n] == FlowMask::kInvalid) continue;
        if (r2 < best_r2 || n < best_idx) {
          best_r2 = r2;
          best_idx = n;
        }
      }
    }
    if (best_r2 <= r2_max) {
      dense.flow[idx] = sparse.flow[best_idx];
      dense.mask[idx] = sparse.mask[best_idx];
    }
  }
  return dense;
}

struct EpeResult {
  double sum = 0.0;   ///< pixels
  double mean = 0.0;  ///< pixels; 0 when count == 0
  std::size_t count = 0;
};

/// Endpoint error over pixels that carry data (valid or dynamic) in both
/// fields. The sum is the flow loss.
inline EpeResult epe(const FlowField2D& a, const FlowField2D& b) {
  if (a.width != b.width || a.height != b.height) {
    throw Error(ErrorKind::kInvalidArgument,
                "epe dimension mismatch: " + std::to_string(a.width) + "x" +
                    std::to_string(a.height) + " vs " + std::to_string(b.width) +
                    "x" + std::to_string(b.height));
  }
  EpeResult r;
  for (std::size_t i = 0; i < a.flow.size(); ++i) {
    if (a.mask[i] == FlowMask::kInvalid || b.mask[i] == FlowMask::kInvalid) continue;
    r.sum += (a.flow[i] - b.flow[i]).norm();
    ++r.count;
  }
  if (r.count > 0) r.mean = r.sum / static_cast<double>(r.count);
  return r;
}

}  // namespace svio
