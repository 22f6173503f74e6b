#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "svio/error.hpp"
#include "svio/se3.hpp"

namespace svio {

using Mat9 = Eigen::Matrix<double, 9, 9>;

/// One IMU reading. Timestamps are integer nanoseconds so that dataset
/// clocks (EuRoC uses ~1e18 ns) survive without rounding.
struct ImuSample {
  std::int64_t t_ns = 0;
  Vec3 gyro = Vec3::Zero();   ///< rad/s, body frame
  Vec3 accel = Vec3::Zero();  ///< specific force m/s^2, body frame

  double seconds() const { return static_cast<double>(t_ns) * 1e-9; }
};

inline double ns_to_seconds(std::int64_t dt_ns) {
  return static_cast<double>(dt_ns) / 1e9;
}

inline std::int64_t seconds_to_ns(double s) {
  return static_cast<std::int64_t>(std::llround(s * 1e9));
}

/// Throws on an empty stream, non-finite values or timestamps that do not
/// strictly increase.
inline void validate_stream(std::span<const ImuSample> samples) {
  if (samples.empty()) {
    throw Error(ErrorKind::kEmptyInput, "empty imu stream");
  }
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (!samples[k].gyro.allFinite() || !samples[k].accel.allFinite()) {
      throw Error(ErrorKind::kMalformedStream,
                  "non-finite imu sample at index " + std::to_string(k));
    }
    if (k > 0 && samples[k].t_ns <= samples[k - 1].t_ns) {
      throw Error(ErrorKind::kMalformedStream,
                  "imu timestamps not strictly increasing at index " +
                      std::to_string(k) + " (" + std::to_string(samples[k - 1].t_ns) +
                      " -> " + std::to_string(samples[k].t_ns) + " ns)");
    }
  }
}

/// Bias state: accelerometer ba (m/s^2) and gyroscope bg (rad/s).
struct ImuStatus {
  Vec3 ba = Vec3::Zero();
  Vec3 bg = Vec3::Zero();

  static constexpr double kMaxAccelBias = 2.0;
  static constexpr double kMaxGyroBias = 1.0;

  void validate(double max_ba = kMaxAccelBias, double max_bg = kMaxGyroBias) const {
    if (!ba.allFinite() || !bg.allFinite()) {
      throw Error(ErrorKind::kNumeric, "non-finite imu bias");
    }
    if (ba.norm() > max_ba || bg.norm() > max_bg) {
      throw Error(ErrorKind::kNumeric, "imu bias beyond sanity bound");
    }
  }
};

/// Continuous-time white-noise densities and bias random walks.
struct ImuNoiseModel {
  double gyro_noise = 1.7e-4;        ///< rad/s/sqrt(Hz)
  double accel_noise = 2.0e-3;       ///< m/s^2/sqrt(Hz)
  double gyro_random_walk = 1.9e-5;  ///< rad/s^2/sqrt(Hz)
  double accel_random_walk = 3.0e-3; ///< m/s^3/sqrt(Hz)

  static ImuNoiseModel zero() { return {0.0, 0.0, 0.0, 0.0}; }

  void validate() const {
    if (!(gyro_noise >= 0.0) || !(accel_noise >= 0.0) ||
        !(gyro_random_walk >= 0.0) || !(accel_random_walk >= 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "imu noise densities must be >= 0");
    }
  }
};

/// Relative motion accumulated between two IMU timestamps, expressed in the
/// body frame at the first one, with gravity not yet applied.
struct PreintegratedDelta {
  Rotation delta_r;
  Vec3 delta_v = Vec3::Zero();
  Vec3 delta_p = Vec3::Zero();
  double dt_total = 0.0;
  std::int64_t t0_ns = 0;
  std::int64_t t1_ns = 0;
  /// Error state order [dtheta, dv, dp]; rotation error is right-multiplied.
  Mat9 covariance = Mat9::Zero();
  Mat3 dr_dbg = Mat3::Zero();
  Mat3 dv_dbg = Mat3::Zero();
  Mat3 dv_dba = Mat3::Zero();
  Mat3 dp_dbg = Mat3::Zero();
  Mat3 dp_dba = Mat3::Zero();
  ImuStatus bias_used;

  /// Inverse of the (rotation, position) marginal covariance. Identity when
  /// that marginal is not positive definite (zero noise model or no
  /// integration interval).
  Mat6 information() const {
    Mat6 m;
    m.block<3, 3>(0, 0) = covariance.block<3, 3>(0, 0);
    m.block<3, 3>(0, 3) = covariance.block<3, 3>(0, 6);
    m.block<3, 3>(3, 0) = covariance.block<3, 3>(6, 0);
    m.block<3, 3>(3, 3) = covariance.block<3, 3>(6, 6);
    m = 0.5 * (m + m.transpose());
    const Eigen::LLT<Mat6> llt(m);
    if (llt.info() != Eigen::Success) return Mat6::Identity();
    const Eigen::SelfAdjointEigenSolver<Mat6> eig(m);
    const double lo = eig.eigenvalues()(0);
    const double hi = eig.eigenvalues()(5);
    if (!(lo > 1e-14 * hi) || !(hi > 0.0)) return Mat6::Identity();
    Mat6 info = llt.solve(Mat6::Identity());
    return 0.5 * (info + info.transpose());
  }
};

/// Midpoint-rule preintegration of bias-corrected measurements. Each step
/// rotates by the averaged rate and integrates the average of the two
/// rotated accelerations. Bias Jacobians are the exact derivatives of this
/// discrete scheme; covariance follows its first-order error propagation.
inline PreintegratedDelta preintegrate(std::span<const ImuSample> samples,
                                       const ImuStatus& status,
                                       const ImuNoiseModel& noise) {
  validate_stream(samples);
  noise.validate();
  PreintegratedDelta d;
  d.bias_used = status;
  d.t0_ns = samples.front().t_ns;
  d.t1_ns = samples.back().t_ns;

  Mat3 r = Mat3::Identity();
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const ImuSample& s0 = samples[k];
    const ImuSample& s1 = samples[k + 1];
    const double dt = ns_to_seconds(s1.t_ns - s0.t_ns);
    const Vec3 w = 0.5 * (s0.gyro + s1.gyro) - status.bg;
    const Vec3 phi = w * dt;
    const Rotation e = so3_exp(phi);
    const Mat3 em = e.matrix();
    const Mat3 jr = so3_right_jacobian(phi);

    const Rotation r1_rot = d.delta_r * e;
    const Mat3 r1 = r1_rot.matrix();
    const Vec3 a0 = s0.accel - status.ba;
    const Vec3 a1 = s1.accel - status.ba;
    const Vec3 a_mid = 0.5 * (r * a0 + r1 * a1);

    const Mat3 dr_dbg_next = em.transpose() * d.dr_dbg - jr * dt;
    const Mat3 da_dbg = -0.5 * (r * skew(a0) * d.dr_dbg + r1 * skew(a1) * dr_dbg_next);
    const Mat3 da_dba = -0.5 * (r + r1);

    // Error propagation over [dtheta, dv, dp] with gyro and accel noise.
    Mat9 a = Mat9::Identity();
    const Mat3 da_dth = -0.5 * (r * skew(a0) + r1 * skew(a1) * em.transpose());
    a.block<3, 3>(0, 0) = em.transpose();
    a.block<3, 3>(3, 0) = da_dth * dt;
    a.block<3, 3>(6, 0) = 0.5 * da_dth * dt * dt;
    a.block<3, 3>(6, 3) = Mat3::Identity() * dt;
    Eigen::Matrix<double, 9, 6> b = Eigen::Matrix<double, 9, 6>::Zero();
    const Mat3 dg = -0.5 * r1 * skew(a1) * jr * dt;
    const Mat3 ma = 0.5 * (r + r1);
    b.block<3, 3>(0, 0) = jr * dt;
    b.block<3, 3>(3, 0) = dg * dt;
    b.block<3, 3>(3, 3) = ma * dt;
    b.block<3, 3>(6, 0) = 0.5 * dg * dt * dt;
    b.block<3, 3>(6, 3) = 0.5 * ma * dt * dt;
    Eigen::Matrix<double, 6, 1> q;
    const double qg = noise.gyro_noise * noise.gyro_noise / dt;
    const double qa = noise.accel_noise * noise.accel_noise / dt;
    q << qg, qg, qg, qa, qa, qa;
    d.covariance = a * d.covariance * a.transpose() + b * q.asDiagonal() * b.transpose();
    d.covariance = 0.5 * (d.covariance + d.covariance.transpose());

    d.delta_p += d.delta_v * dt + 0.5 * a_mid * dt * dt;
    d.delta_v += a_mid * dt;
    d.dp_dbg += d.dv_dbg * dt + 0.5 * da_dbg * dt * dt;
    d.dp_dba += d.dv_dba * dt + 0.5 * da_dba * dt * dt;
    d.dv_dbg += da_dbg * dt;
    d.dv_dba += da_dba * dt;
    d.dr_dbg = dr_dbg_next;
    d.delta_r = r1_rot;
    r = d.delta_r.matrix();
    d.dt_total += dt;
  }
  return d;
}

/// Default bound on a first-order bias correction, per component vector.
inline constexpr double kBiasTrustRegion = 0.1;

/// First-order bias update of an existing delta. Corrections larger than
/// `trust_region` throw kTrustRegion; the caller must re-preintegrate.
inline PreintegratedDelta apply_bias_correction(const PreintegratedDelta& delta,
                                                const Vec3& d_bg, const Vec3& d_ba,
                                                double trust_region = kBiasTrustRegion) {
  if (!d_bg.allFinite() || !d_ba.allFinite()) {
    throw Error(ErrorKind::kNumeric, "non-finite bias correction");
  }
  if (d_bg.norm() > trust_region || d_ba.norm() > trust_region) {
    throw Error(ErrorKind::kTrustRegion,
                "bias correction exceeds trust region " + std::to_string(trust_region) +
                    "; re-preintegrate");
  }
  PreintegratedDelta out = delta;
  out.delta_r = delta.delta_r * so3_exp(delta.dr_dbg * d_bg);
  out.delta_v += delta.dv_dbg * d_bg + delta.dv_dba * d_ba;
  out.delta_p += delta.dp_dbg * d_bg + delta.dp_dba * d_ba;
  out.bias_used.bg += d_bg;
  out.bias_used.ba += d_ba;
  return out;
}

/// Chains two consecutive deltas computed with the same bias (the second
/// starting where the first ends), including covariance and Jacobians.
inline PreintegratedDelta compose(const PreintegratedDelta& d1,
                                  const PreintegratedDelta& d2) {
  if (d1.t1_ns != d2.t0_ns) {
    throw Error(ErrorKind::kInvalidArgument, "deltas are not contiguous");
  }
  const Mat3 r1 = d1.delta_r.matrix();
  const Mat3 r2t = d2.delta_r.matrix().transpose();
  const double dt2 = d2.dt_total;
  PreintegratedDelta out;
  out.bias_used = d1.bias_used;
  out.t0_ns = d1.t0_ns;
  out.t1_ns = d2.t1_ns;
  out.dt_total = d1.dt_total + d2.dt_total;
  out.delta_r = d1.delta_r * d2.delta_r;
  out.delta_v = d1.delta_v + r1 * d2.delta_v;
  out.delta_p = d1.delta_p + d1.delta_v * dt2 + r1 * d2.delta_p;

  out.dr_dbg = r2t * d1.dr_dbg + d2.dr_dbg;
  out.dv_dbg = d1.dv_dbg - r1 * skew(d2.delta_v) * d1.dr_dbg + r1 * d2.dv_dbg;
  out.dv_dba = d1.dv_dba + r1 * d2.dv_dba;
  out.dp_dbg = d1.dp_dbg + d1.dv_dbg * dt2 - r1 * skew(d2.delta_p) * d1.dr_dbg +
               r1 * d2.dp_dbg;
  out.dp_dba = d1.dp_dba + d1.dv_dba * dt2 + r1 * d2.dp_dba;

  Mat9 a1 = Mat9::Identity();
  a1.block<3, 3>(0, 0) = r2t;
  a1.block<3, 3>(3, 0) = -r1 * skew(d2.delta_v);
  a1.block<3, 3>(6, 0) = -r1 * skew(d2.delta_p);
  a1.block<3, 3>(6, 3) = Mat3::Identity() * dt2;
  Mat9 a2 = Mat9::Zero();
  a2.block<3, 3>(0, 0) = Mat3::Identity();
  a2.block<3, 3>(3, 3) = r1;
  a2.block<3, 3>(6, 6) = r1;
  out.covariance = a1 * d1.covariance * a1.transpose() + a2 * d2.covariance * a2.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

inline const Vec3 kDefaultGravity(0.0, 0.0, -9.81);

/// Relative pose of the body between the delta's endpoints, in the body
/// frame at the first one. `v0` is the world-frame velocity at t0,
/// `frame0_rotation` the world-from-body rotation at t0.
inline RigidTransform delta_to_relative_pose(const PreintegratedDelta& delta,
                                             const Vec3& v0, const Vec3& gravity,
                                             const Rotation& frame0_rotation) {
  const double dt = delta.dt_total;
  const Mat3 r0t = frame0_rotation.matrix().transpose();
  const Vec3 p = delta.delta_p + r0t * (v0 * dt + 0.5 * gravity * dt * dt);
  return RigidTransform{delta.delta_r, p};
}

inline Se3Tangent delta_to_relative_se3(const PreintegratedDelta& delta,
                                        const Vec3& v0, const Vec3& gravity,
                                        const Rotation& frame0_rotation) {
  return se3_log(delta_to_relative_pose(delta, v0, gravity, frame0_rotation));
}

/// Samples covering [t0_ns, t1_ns]: the interior samples plus boundary
/// samples linearly interpolated at t0 and t1.
inline std::vector<ImuSample> slice_interval(std::span<const ImuSample> stream,
                                             std::int64_t t0_ns, std::int64_t t1_ns) {
  if (stream.empty()) throw Error(ErrorKind::kEmptyInput, "empty imu stream");
  if (!(t0_ns < t1_ns) || t0_ns < stream.front().t_ns || t1_ns > stream.back().t_ns) {
    throw Error(ErrorKind::kInvalidArgument,
                "interval [" + std::to_string(t0_ns) + ", " + std::to_string(t1_ns) +
                    "] ns not covered by imu stream [" +
                    std::to_string(stream.front().t_ns) + ", " +
                    std::to_string(stream.back().t_ns) + "]");
  }
  auto at = [&](std::int64_t t) {
    const auto it = std::lower_bound(
        stream.begin(), stream.end(), t,
        [](const ImuSample& s, std::int64_t v) { return s.t_ns < v; });
    if (it->t_ns == t) return *it;
    const ImuSample& hi = *it;
    const ImuSample& lo = *(it - 1);
    const double a = static_cast<double>(t - lo.t_ns) / static_cast<double>(hi.t_ns - lo.t_ns);
    return ImuSample{t, (1 - a) * lo.gyro + a * hi.gyro, (1 - a) * lo.accel + a * hi.accel};
  };
  std::vector<ImuSample> out{at(t0_ns)};
  for (const auto& s : stream) {
    if (s.t_ns > t0_ns && s.t_ns < t1_ns) out.push_back(s);
  }
  out.push_back(at(t1_ns));
  return out;
}

}  // namespace svio
