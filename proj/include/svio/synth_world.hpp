#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "svio/error.hpp"
#include "svio/imu.hpp"
#include "svio/parallel.hpp"
#include "svio/rng.hpp"
#include "svio/se3.hpp"
#include "svio/stereo_geometry.hpp"

namespace svio {

struct Sinusoid {
  double amplitude = 0.0;
  double omega = 0.0;  ///< rad/s
  double phase = 0.0;  ///< rad
};

/// Scalar signal offset + rate * t + sum of sinusoids, with exact
/// derivatives.
struct Channel {
  double offset = 0.0;
  double rate = 0.0;
  std::vector<Sinusoid> terms;

  double value(double t) const {
    double s = offset + rate * t;
    for (const auto& w : terms) s += w.amplitude * std::sin(w.omega * t + w.phase);
    return s;
  }
  double d1(double t) const {
    double s = rate;
    for (const auto& w : terms) s += w.amplitude * w.omega * std::cos(w.omega * t + w.phase);
    return s;
  }
  double d2(double t) const {
    double s = 0.0;
    for (const auto& w : terms) {
      s -= w.amplitude * w.omega * w.omega * std::sin(w.omega * t + w.phase);
    }
    return s;
  }
};

struct AnalyticState {
  double t = 0.0;
  RigidTransform pose;  ///< world from body
  Vec3 velocity = Vec3::Zero();      ///< world frame
  Vec3 acceleration = Vec3::Zero();  ///< world frame
  Vec3 body_rate = Vec3::Zero();     ///< rad/s, body frame
  Vec3 specific_force = Vec3::Zero();  ///< body frame, R^T (a - g)
};

/// Smooth analytic body trajectory: per-axis position channels and ZYX
/// (yaw, pitch, roll) attitude channels, valid on [0, duration].
struct AnalyticTrajectory {
  std::array<Channel, 3> position;
  Channel yaw;
  Channel pitch;
  Channel roll;
  double duration = 0.0;
  Vec3 gravity = kDefaultGravity;

  AnalyticState sample(double t) const {
    if (!(t >= 0.0 && t <= duration)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "trajectory time " + std::to_string(t) + " outside [0, " +
                      std::to_string(duration) + "]");
    }
    const double psi = yaw.value(t), th = pitch.value(t), ph = roll.value(t);
    const double dpsi = yaw.d1(t), dth = pitch.d1(t), dph = roll.d1(t);
    const double cps = std::cos(psi), sps = std::sin(psi);
    const double ct = std::cos(th), st = std::sin(th);
    const double cf = std::cos(ph), sf = std::sin(ph);
    Mat3 r;
    r << cps * ct, cps * st * sf - sps * cf, cps * st * cf + sps * sf,
        sps * ct, sps * st * sf + cps * cf, sps * st * cf - cps * sf,
        -st, ct * sf, ct * cf;

    AnalyticState s;
    s.t = t;
    s.pose.rotation = Rotation::from_matrix_or_nearest(r);
    for (int i = 0; i < 3; ++i) {
      s.pose.translation[i] = position[i].value(t);
      s.velocity[i] = position[i].d1(t);
      s.acceleration[i] = position[i].d2(t);
    }
    s.body_rate = Vec3(dph - dpsi * st, dth * cf + dpsi * ct * sf,
                       -dth * sf + dpsi * ct * cf);
    s.specific_force = r.transpose() * (s.acceleration - gravity);
    return s;
  }

  static AnalyticTrajectory straight_line(const Vec3& start, const Vec3& velocity,
                                  double duration, double heading = 0.0) {
    AnalyticTrajectory tr;
    for (int i = 0; i < 3; ++i) tr.position[i] = Channel{start[i], velocity[i], {}};
    tr.yaw.offset = heading;
    tr.duration = duration;
    return tr;
  }

  /// Horizontal circle of `radius` at angular speed `omega`, heading along
  /// the tangent, starting at the origin.
  static AnalyticTrajectory circle(double radius, double omega, double duration) {
    AnalyticTrajectory tr;
    tr.position[0] = Channel{0.0, 0.0, {{radius, omega, 0.0}}};
    tr.position[1] = Channel{radius, 0.0, {{radius, omega, -std::numbers::pi / 2}}};
    tr.yaw = Channel{0.0, omega, {}};
    tr.duration = duration;
    return tr;
  }

  /// Ground-vehicle-like drive: forward at `speed` along x with lateral
  /// weave, vertical bob and small attitude oscillations.
  static AnalyticTrajectory vehicle(double speed, double duration) {
    AnalyticTrajectory tr;
    const double wl = 2 * std::numbers::pi / 20.0;
    const double lateral = 3.0;
    tr.position[0] = Channel{0.0, speed, {{0.6, 2 * std::numbers::pi / 13.0, 0.3}}};
    tr.position[1] = Channel{0.0, 0.0, {{lateral, wl, 0.0}}};
    tr.position[2] = Channel{1.5, 0.0, {{0.08, 2 * std::numbers::pi / 3.0, 0.5}}};
    tr.yaw = Channel{0.0, 0.0, {{lateral * wl / speed, wl, std::numbers::pi / 2}}};
    tr.pitch = Channel{0.0, 0.0, {{0.01, 2 * std::numbers::pi / 2.5, 0.0}}};
    tr.roll = Channel{0.0, 0.0, {{0.015, 2 * std::numbers::pi / 4.0, 1.0}}};
    tr.duration = duration;
    return tr;
  }
};

/// Camera z forward maps to body x, camera x to body -y, camera y to body -z.
inline RigidTransform default_cam_to_imu() {
  Mat3 r;
  r << 0, 0, 1, -1, 0, 0, 0, -1, 0;
  return RigidTransform{Rotation::from_matrix(r), Vec3::Zero()};
}

inline StereoRig default_synthetic_rig() {
  StereoRig rig;
  rig.intrinsics = CameraIntrinsics{400.0, 400.0, 319.5, 239.5};
  rig.baseline = 0.54;
  rig.width = 640;
  rig.height = 480;
  rig.cam_to_imu = default_cam_to_imu();
  return rig;
}

struct SceneConfig {
  std::size_t landmarks = 20000;
  double shell_inner = 3.0;    ///< m, minimum distance from the path
  double shell_outer = 40.0;   ///< m
  double dynamic_fraction = 0.05;
  double dynamic_speed = 2.0;  ///< m/s, maximum
  double imu_rate = 200.0;     ///< Hz
  double cam_rate = 10.0;      ///< Hz
  std::uint64_t seed = 1;
};

struct SyntheticScene {
  AnalyticTrajectory trajectory;
  std::vector<Vec3> landmarks;           ///< world frame at t = 0
  std::vector<Vec3> landmark_velocity;   ///< zero for static landmarks
  StereoRig rig;
  double imu_rate = 200.0;
  double cam_rate = 10.0;
  ImuStatus true_bias;
  ImuNoiseModel noise = ImuNoiseModel::zero();
  std::uint64_t seed = 1;

  Vec3 landmark_at(std::size_t i, double t) const {
    return landmarks[i] + landmark_velocity[i] * t;
  }
  bool is_dynamic(std::size_t i) const {
    return landmark_velocity[i].squaredNorm() > 0.0;
  }

  /// World from left camera.
  RigidTransform camera_pose(double t) const {
    return trajectory.sample(t).pose * rig.cam_to_imu;
  }

  std::vector<double> frame_times() const {
    std::vector<double> ts;
    const auto n = static_cast<std::size_t>(std::floor(trajectory.duration * cam_rate + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) ts.push_back(static_cast<double>(k) / cam_rate);
    return ts;
  }
};

/// Landmarks scattered uniformly in a shell [inner, outer] around points
/// drawn uniformly along the trajectory; a seeded subset moves at constant
/// velocity.
inline SyntheticScene make_scene(const AnalyticTrajectory& trajectory, const StereoRig& rig,
                                 const SceneConfig& cfg) {
  rig.validate();
  if (!(cfg.imu_rate > 0.0) || !(cfg.cam_rate > 0.0) || !(trajectory.duration > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "rates and duration must be > 0");
  }
  if (!(cfg.shell_inner >= 0.0 && cfg.shell_outer > cfg.shell_inner)) {
    throw Error(ErrorKind::kInvalidArgument, "landmark shell requires 0 <= inner < outer");
  }
  SyntheticScene s;
  s.trajectory = trajectory;
  s.rig = rig;
  s.imu_rate = cfg.imu_rate;
  s.cam_rate = cfg.cam_rate;
  s.seed = cfg.seed;
  const CounterRng rng(cfg.seed, rng_stream::kLandmarks);
  const CounterRng dyn(cfg.seed, rng_stream::kDynamic);
  const double r3_in = std::pow(cfg.shell_inner, 3);
  const double r3_out = std::pow(cfg.shell_outer, 3);
  for (std::size_t i = 0; i < cfg.landmarks; ++i) {
    const std::uint64_t k = 8 * i;
    const double t = rng.uniform(k) * trajectory.duration;
    Vec3 dir(rng.gaussian(k + 1), rng.gaussian(k + 2), rng.gaussian(k + 3));
    if (dir.norm() < 1e-12) dir = Vec3::UnitZ();
    dir.normalize();
    const double r = std::cbrt(r3_in + rng.uniform(k + 4) * (r3_out - r3_in));
    s.landmarks.push_back(trajectory.sample(t).pose.translation + r * dir);
    Vec3 v = Vec3::Zero();
    if (dyn.uniform(4 * i) < cfg.dynamic_fraction) {
      Vec3 d(dyn.gaussian(4 * i + 1), dyn.gaussian(4 * i + 2), 0.0);
      if (d.norm() < 1e-12) d = Vec3::UnitX();
      v = (0.5 + 0.5 * dyn.uniform(4 * i + 3)) * cfg.dynamic_speed * d.normalized();
    }
    s.landmark_velocity.push_back(v);
  }
  return s;
}

struct RenderedFrame {
  DepthMap depth;
  DisparityMap disparity;
  /// Landmark rendered at each pixel, -1 where none.
  std::vector<std::int32_t> landmark;
};

/// Nearest-pixel splat of every landmark in front of the left camera,
/// z-buffered. Depth is the landmark's camera z; disparity = fx * b / depth.
inline RenderedFrame render_frame(const SyntheticScene& scene, double t) {
  const StereoRig& rig = scene.rig;
  rig.validate();
  const RigidTransform cam_from_world = scene.camera_pose(t).inverse();
  RenderedFrame f;
  f.depth = DepthMap(rig.width, rig.height);
  f.disparity = DisparityMap(rig.width, rig.height);
  f.landmark.assign(static_cast<std::size_t>(rig.width) * rig.height, -1);
  for (std::size_t i = 0; i < scene.landmarks.size(); ++i) {
    const Vec3 c = cam_from_world * scene.landmark_at(i, t);
    const auto px = project_point(c, rig.intrinsics);
    if (!px) continue;
    const double xr = std::round(px->x());
    const double yr = std::round(px->y());
    if (xr < 0 || yr < 0 || xr >= rig.width || yr >= rig.height) continue;
    const int x = static_cast<int>(xr);
    const int y = static_cast<int>(yr);
    const std::size_t idx = f.depth.index(x, y);
    if (f.depth.valid[idx] && f.depth.values[idx] <= c.z()) continue;
    f.depth.set(x, y, c.z());
    f.disparity.set(x, y, rig.intrinsics.fx * rig.baseline / c.z());
    f.landmark[idx] = static_cast<std::int32_t>(i);
  }
  return f;
}

/// IMU stream at imu_rate over the trajectory span: true body rate and
/// specific force plus the scene's bias and seeded white noise
/// (density * sqrt(rate) per sample).
inline std::vector<ImuSample> synthesize_imu(const SyntheticScene& scene) {
  const CounterRng gn(scene.seed, rng_stream::kGyroNoise);
  const CounterRng an(scene.seed, rng_stream::kAccelNoise);
  const double sg = scene.noise.gyro_noise * std::sqrt(scene.imu_rate);
  const double sa = scene.noise.accel_noise * std::sqrt(scene.imu_rate);
  const auto n = static_cast<std::int64_t>(
      std::floor(scene.trajectory.duration * scene.imu_rate + 1e-9));
  std::vector<ImuSample> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (std::int64_t k = 0; k <= n; ++k) {
    const std::int64_t t_ns = seconds_to_ns(static_cast<double>(k) / scene.imu_rate);
    const AnalyticState st =
        scene.trajectory.sample(std::min(ns_to_seconds(t_ns), scene.trajectory.duration));
    ImuSample s;
    s.t_ns = t_ns;
    s.gyro = st.body_rate + scene.true_bias.bg;
    s.accel = st.specific_force + scene.true_bias.ba;
    if (sg > 0.0 || sa > 0.0) {
      const auto u = static_cast<std::uint64_t>(3 * k);
      s.gyro += sg * Vec3(gn.gaussian(u), gn.gaussian(u + 1), gn.gaussian(u + 2));
      s.accel += sa * Vec3(an.gaussian(u), an.gaussian(u + 1), an.gaussian(u + 2));
    }
    out.push_back(s);
  }
  return out;
}

/// Exact relative pose of the body between two times, in the body frame at t0.
inline RigidTransform true_relative_pose(const AnalyticTrajectory& tr, double t0, double t1) {
  return between(tr.sample(t0).pose, tr.sample(t1).pose);
}

/// Exact motion of the left camera between frames (maps frame-t1 camera
/// points into the frame-t0 camera).
inline RigidTransform true_camera_motion(const SyntheticScene& s, double t0, double t1) {
  return between(s.camera_pose(t0), s.camera_pose(t1));
}

}  // namespace svio
