#pragma once

// Seeded sensor degradations: extrinsic miscalibration, IMU time offset,
// IMU sample drops and camera frame drops. Every draw comes from a
// CounterRng stream addressed by element index.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "svio/dataset_io.hpp"
#include "svio/imu.hpp"
#include "svio/rng.hpp"
#include "svio/stereo_geometry.hpp"

namespace svio {

enum class DesyncMode { kConstant, kJitter };

struct DegradationSpec {
  double miscal_deg = 0.0;
  double desync_ms = 0.0;
  DesyncMode desync_mode = DesyncMode::kConstant;
  double imu_drop_rate = 0.0;
  double cam_drop_rate = 0.0;
  std::optional<std::uint64_t> seed;

  bool any() const {
    return miscal_deg != 0.0 || desync_ms != 0.0 || imu_drop_rate > 0.0 || cam_drop_rate > 0.0;
  }

  bool needs_seed() const {
    return miscal_deg != 0.0 || imu_drop_rate > 0.0 || cam_drop_rate > 0.0 ||
           (desync_mode == DesyncMode::kJitter && desync_ms != 0.0);
  }

  void validate() const {
    if (!(miscal_deg >= 0.0) || !std::isfinite(miscal_deg)) {
      throw Error(ErrorKind::kInvalidArgument, "miscalibration angle must be finite and >= 0");
    }
    if (!std::isfinite(desync_ms)) {
      throw Error(ErrorKind::kInvalidArgument, "desync offset must be finite");
    }
    if (desync_mode == DesyncMode::kJitter && desync_ms < 0.0) {
      throw Error(ErrorKind::kInvalidArgument, "jitter desync offset must be >= 0");
    }
    for (double r : {imu_drop_rate, cam_drop_rate}) {
      if (!(r >= 0.0 && r <= 1.0)) {
        throw Error(ErrorKind::kInvalidArgument, "drop rates must lie in [0, 1]");
      }
    }
    if (needs_seed() && !seed) {
      throw Error(ErrorKind::kInvalidArgument, "a seed is required for seeded degradations");
    }
  }
};

/// Unit axis drawn from the miscalibration stream.
inline Vec3 miscalibration_axis(std::uint64_t seed) {
  const CounterRng rng(seed, rng_stream::kMiscalibration);
  for (std::uint64_t k = 0;; k += 3) {
    const Vec3 a(rng.gaussian(k), rng.gaussian(k + 1), rng.gaussian(k + 2));
    if (a.norm() > 1e-6) return a.normalized();
  }
}

/// Left-multiplies the camera-to-IMU rotation by a rotation of exactly
/// angle_deg about a seeded axis. Translation unchanged.
inline StereoRig miscalibrate(const StereoRig& rig, double angle_deg, std::uint64_t seed) {
  if (!(angle_deg >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "miscalibration angle must be >= 0");
  }
  StereoRig out = rig;
  if (angle_deg == 0.0) return out;
  const Rotation d = so3_exp(deg2rad(angle_deg) * miscalibration_axis(seed));
  out.cam_to_imu.rotation = d * rig.cam_to_imu.rotation;
  return out;
}

inline std::int64_t ms_to_ns(double ms) { return std::llround(ms * 1e6); }

/// Constant mode shifts every timestamp by offset_ms. Jitter mode adds
/// u * offset_ms with u uniform in [0, 1) per sample, then re-sorts; equal
/// timestamps after sorting are separated by 1 ns.
inline std::vector<ImuSample> desync(std::span<const ImuSample> stream, double offset_ms,
                                     DesyncMode mode = DesyncMode::kConstant,
                                     std::uint64_t seed = 0) {
  std::vector<ImuSample> out(stream.begin(), stream.end());
  if (offset_ms == 0.0) return out;
  if (mode == DesyncMode::kConstant) {
    const std::int64_t d = ms_to_ns(offset_ms);
    for (auto& s : out) s.t_ns += d;
    return out;
  }
  const CounterRng rng(seed, rng_stream::kDesyncJitter);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].t_ns += std::llround(rng.uniform(k) * offset_ms * 1e6);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ImuSample& a, const ImuSample& b) { return a.t_ns < b.t_ns; });
  for (std::size_t k = 1; k < out.size(); ++k) {
    if (out[k].t_ns <= out[k - 1].t_ns) out[k].t_ns = out[k - 1].t_ns + 1;
  }
  return out;
}

/// Element k survives when uniform(k) >= rate.
inline std::vector<ImuSample> drop_imu(std::span<const ImuSample> stream, double rate,
                                       std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "drop rate must lie in [0, 1]");
  }
  const CounterRng rng(seed, rng_stream::kImuDrop);
  std::vector<ImuSample> out;
  for (std::size_t k = 0; k < stream.size(); ++k) {
    if (rng.uniform(k) >= rate) out.push_back(stream[k]);
  }
  return out;
}

/// Indices of frames kept; first and last always survive.
inline std::vector<std::size_t> surviving_frames(std::size_t n, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "drop rate must lie in [0, 1]");
  }
  const CounterRng rng(seed, rng_stream::kFrameDrop);
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || k + 1 == n || rng.uniform(k) >= rate) keep.push_back(k);
  }
  return keep;
}

inline SequenceManifest drop_frames(const SequenceManifest& m, double rate, std::uint64_t seed) {
  const auto keep = surviving_frames(m.size(), rate, seed);
  SequenceManifest out = m;
  out.frame_t_ns.clear();
  out.left_images.clear();
  out.right_images.clear();
  out.disparity.clear();
  out.gt_velocity.clear();
  if (out.ground_truth) out.ground_truth->entries.clear();
  for (auto k : keep) {
    out.frame_t_ns.push_back(m.frame_t_ns[k]);
    out.left_images.push_back(m.left_images[k]);
    out.right_images.push_back(m.right_images[k]);
    out.disparity.push_back(m.disparity[k]);
    if (!m.gt_velocity.empty()) out.gt_velocity.push_back(m.gt_velocity[k]);
    if (m.ground_truth) out.ground_truth->entries.push_back(m.ground_truth->entries[k]);
  }
  return out;
}

/// Fixed order: miscalibrate, desync, IMU drops, frame drops.
inline SequenceManifest apply_degradation(const SequenceManifest& m, const DegradationSpec& spec) {
  spec.validate();
  SequenceManifest out = m;
  const std::uint64_t seed = spec.seed.value_or(0);
  out.rig = miscalibrate(out.rig, spec.miscal_deg, seed);
  out.imu = desync(out.imu, spec.desync_ms, spec.desync_mode, seed);
  out.imu = drop_imu(out.imu, spec.imu_drop_rate, seed);
  return drop_frames(out, spec.cam_drop_rate, seed);
}

}  // namespace svio
