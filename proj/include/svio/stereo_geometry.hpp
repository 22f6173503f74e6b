#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "svio/error.hpp"
#include "svio/se3.hpp"

namespace svio {

/// Pinhole intrinsics. Pixel coordinates are 0-based with the pixel-center
/// convention: pixel (x, y) covers [x - 0.5, x + 0.5).
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(cx) || !std::isfinite(cy)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "camera intrinsics need fx, fy > 0 and finite cx, cy");
    }
  }

  Mat3 matrix() const {
    Mat3 k;
    k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return k;
  }
};

/// Rectified stereo pair. The right camera sits at +baseline along the left
/// camera's x axis. `cam_to_imu` maps left-camera coordinates into the IMU
/// (body) frame.
struct StereoRig {
  CameraIntrinsics intrinsics;
  double baseline = 0.0;
  RigidTransform cam_to_imu;
  int width = 0;
  int height = 0;

  void validate() const {
    intrinsics.validate();
    if (!(baseline > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "stereo baseline must be > 0");
    }
    if (width < 0 || height < 0) {
      throw Error(ErrorKind::kInvalidArgument, "negative image size");
    }
  }

  /// Transform from left-camera to right-camera coordinates.
  RigidTransform left_to_right() const {
    return RigidTransform::from_translation(Vec3(-baseline, 0.0, 0.0));
  }
};

/// Row-major per-pixel scalar with a validity mask. The tag makes disparity
/// and depth maps distinct types.
template <typename Tag>
struct MaskedMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  MaskedMap() = default;
  MaskedMap(int w, int h)
      : width(w),
        height(h),
        values(static_cast<std::size_t>(w) * h, 0.0),
        valid(static_cast<std::size_t>(w) * h, 0) {
    if (w < 0 || h < 0) {
      throw Error(ErrorKind::kInvalidArgument, "negative map size");
    }
  }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  double at(int x, int y) const { return values[index(x, y)]; }
  bool is_valid(int x, int y) const { return valid[index(x, y)] != 0; }

  void set(int x, int y, double v) {
    values[index(x, y)] = v;
    valid[index(x, y)] = 1;
  }

  void invalidate(int x, int y) {
    values[index(x, y)] = 0.0;
    valid[index(x, y)] = 0;
  }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto v : valid) n += v != 0;
    return n;
  }
};

using DisparityMap = MaskedMap<struct DisparityTag>;
using DepthMap = MaskedMap<struct DepthTag>;

struct PixelCoord {
  std::uint32_t u = 0;
  std::uint32_t v = 0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Points in the left-camera frame, each tagged with the pixel it came from.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<PixelCoord> source_pixel;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  void push_back(const Vec3& p, PixelCoord px) {
    points.push_back(p);
    source_pixel.push_back(px);
  }
};

/// Open depth interval (near, far) in meters.
struct DepthBand {
  double near = 1.0;
  double far = 80.0;

  void validate() const {
    if (!(near >= 0.0) || !(near < far)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "depth band requires 0 <= near < far");
    }
  }
};

/// Disparities at or below this (pixels) are treated as invalid.
inline constexpr double kMinDisparity = 1e-3;

/// depth = fx * baseline / disparity per valid pixel.
inline DepthMap disparity_to_depth(const DisparityMap& d, const StereoRig& rig,
                                   double min_disparity = kMinDisparity) {
  rig.validate();
  const double fb = rig.intrinsics.fx * rig.baseline;
  DepthMap out(d.width, d.height);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    const double disp = d.values[i];
    if (d.valid[i] && std::isfinite(disp) && disp > min_disparity) {
      out.values[i] = fb / disp;
      out.valid[i] = 1;
    }
  }
  return out;
}

/// Invalidates every pixel whose depth is not strictly inside the band.
inline DepthMap depth_band_filter(const DepthMap& d, const DepthBand& band) {
  band.validate();
  DepthMap out = d;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double z = out.values[i];
    if (out.valid[i] && !(z > band.near && z < band.far)) {
      out.values[i] = 0.0;
      out.valid[i] = 0;
    }
  }
  return out;
}

inline Vec3 unproject(double x, double y, double depth,
                      const CameraIntrinsics& k) {
  return Vec3((x - k.cx) / k.fx * depth, (y - k.cy) / k.fy * depth, depth);
}

/// One point per valid pixel, in row-major pixel order.
inline PointCloud depth_to_pointcloud(const DepthMap& d,
                                      const CameraIntrinsics& k) {
  k.validate();
  PointCloud cloud;
  cloud.points.reserve(d.valid_count());
  cloud.source_pixel.reserve(d.valid_count());
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      if (!d.is_valid(x, y)) continue;
      cloud.push_back(unproject(x, y, d.at(x, y), k),
                      PixelCoord{static_cast<std::uint32_t>(x),
                                 static_cast<std::uint32_t>(y)});
    }
  }
  return cloud;
}

/// Pinhole projection; empty when the point is not in front of the camera.
inline std::optional<Vec2> project_point(const Vec3& p,
                                         const CameraIntrinsics& k) {
  if (!(p.z() > 0.0) || !p.allFinite()) return std::nullopt;
  return Vec2(k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy);
}

/// Keeps the first point (in cloud order) of every occupied voxel, so the
/// surviving points and their pixel tags are unchanged members of the input.
inline PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
  if (!(leaf > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "voxel leaf must be > 0");
  }
  struct KeyHash {
    std::size_t operator()(const Eigen::Vector3i& k) const {
      std::size_t h = static_cast<std::size_t>(k.x()) * 73856093u;
      h ^= static_cast<std::size_t>(k.y()) * 19349663u;
      h ^= static_cast<std::size_t>(k.z()) * 83492791u;
      return h;
    }
  };
  struct KeyEq {
    bool operator()(const Eigen::Vector3i& a, const Eigen::Vector3i& b) const {
      return a == b;
    }
  };
  std::unordered_map<Eigen::Vector3i, std::size_t, KeyHash, KeyEq> seen;
  PointCloud out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 q = (cloud.points[i] / leaf).array().floor();
    const Eigen::Vector3i key = q.cast<int>();
    if (seen.emplace(key, i).second) {
      out.push_back(cloud.points[i], cloud.source_pixel[i]);
    }
  }
  return out;
}

}  // namespace svio
