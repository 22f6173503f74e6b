#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "svio/error.hpp"
#include "svio/imu.hpp"
#include "svio/se3.hpp"

namespace svio {

/// Body state at the start of an interval, needed to turn a preintegrated
/// delta into a relative pose.
struct KinematicContext {
  Vec3 v0 = Vec3::Zero();  ///< world frame
  Vec3 gravity = kDefaultGravity;
  Rotation r0;             ///< world from body
};

struct StatusUpdateParams {
  double huber_delta = 1.345;
  int max_iterations = 50;
  double step_tol = 1e-12;
  double damping_init = 1e-4;

  void validate() const {
    if (!(huber_delta > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "huber_delta must be > 0");
    }
    if (max_iterations < 1 || !(step_tol > 0.0) || !(damping_init >= 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "invalid status update iteration settings");
    }
  }
};

/// Huber loss on a squared norm s: s inside delta^2, 2 delta sqrt(s) - delta^2 beyond.
inline double huber(double s, double delta) {
  const double d2 = delta * delta;
  return s <= d2 ? s : 2.0 * delta * std::sqrt(s) - d2;
}

/// d huber / d s.
inline double huber_weight(double s, double delta) {
  return s <= delta * delta ? 1.0 : delta / std::sqrt(s);
}

struct PoseResidual {
  Vec3 e_r = Vec3::Zero();  ///< rad
  Vec3 e_p = Vec3::Zero();  ///< m
  double mahalanobis = 0.0;
  double weighted_cost = 0.0;

  Vec6 stacked() const {
    Vec6 v;
    v << e_r, e_p;
    return v;
  }
};

/// e_r = Log(dR^T R_ref), e_p = p_ref - p_imu, cost = huber(e^T info e).
inline PoseResidual pose_residual(const PreintegratedDelta& delta,
                                  const Se3Tangent& reference,
                                  const KinematicContext& ctx, const Mat6& information,
                                  double huber_delta) {
  const RigidTransform ref = se3_exp(reference);
  const RigidTransform imu = delta_to_relative_pose(delta, ctx.v0, ctx.gravity, ctx.r0);
  PoseResidual r;
  r.e_r = so3_log(imu.rotation.inverse() * ref.rotation);
  r.e_p = ref.translation - imu.translation;
  const Vec6 e = r.stacked();
  r.mahalanobis = e.dot(information * e);
  r.weighted_cost = huber(r.mahalanobis, huber_delta);
  return r;
}

inline PoseResidual pose_residual(const PreintegratedDelta& delta,
                                  const Se3Tangent& reference,
                                  const KinematicContext& ctx, double huber_delta = 1.345) {
  return pose_residual(delta, reference, ctx, delta.information(), huber_delta);
}

/// One (IMU interval, reference relative pose) pair.
struct StatusInterval {
  std::vector<ImuSample> samples;
  Se3Tangent reference;
  KinematicContext context;
};

/// Bias parameter vector order used by the solver: (bg, ba).
inline Vec6 status_vector(const ImuStatus& s) {
  Vec6 v;
  v << s.bg, s.ba;
  return v;
}

inline ImuStatus status_from_vector(const Vec6& v) {
  return ImuStatus{v.tail<3>(), v.head<3>()};
}

/// Information matrices of each interval, evaluated once at `status` and
/// held fixed during the update.
inline std::vector<Mat6> interval_information(std::span<const StatusInterval> intervals,
                                              const ImuStatus& status,
                                              const ImuNoiseModel& noise) {
  std::vector<Mat6> out;
  out.reserve(intervals.size());
  for (const auto& iv : intervals) {
    out.push_back(preintegrate(iv.samples, status, noise).information());
  }
  return out;
}

/// Sum over intervals of huber(e^T info e) at the given bias.
inline double status_objective(std::span<const StatusInterval> intervals,
                               const ImuStatus& status, std::span<const Mat6> information,
                               const ImuNoiseModel& noise, double huber_delta) {
  double f = 0.0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const PreintegratedDelta d = preintegrate(intervals[i].samples, status, noise);
    f += pose_residual(d, intervals[i].reference, intervals[i].context, information[i],
                       huber_delta)
             .weighted_cost;
  }
  return f;
}

namespace detail {

struct NormalEquations {
  Mat6 h = Mat6::Zero();
  Vec6 g = Vec6::Zero();  ///< gradient of the objective
  double f = 0.0;
};

/// IRLS-weighted Gauss-Newton system at `status`. Residual Jacobians:
/// de_r/dbg = -Jl^-1(e_r) dR/dbg, de_p/d(bg, ba) = -dp/d(bg, ba).
inline NormalEquations build_normal_equations(std::span<const StatusInterval> intervals,
                                              const ImuStatus& status,
                                              std::span<const Mat6> information,
                                              const ImuNoiseModel& noise, double delta) {
  NormalEquations ne;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const StatusInterval& iv = intervals[i];
    const PreintegratedDelta d = preintegrate(iv.samples, status, noise);
    const PoseResidual r = pose_residual(d, iv.reference, iv.context, information[i], delta);
    Mat6 j = Mat6::Zero();
    j.block<3, 3>(0, 0) = -so3_left_jacobian_inverse(r.e_r) * d.dr_dbg;
    j.block<3, 3>(3, 0) = -d.dp_dbg;
    j.block<3, 3>(3, 3) = -d.dp_dba;
    const double w = huber_weight(r.mahalanobis, delta);
    const Vec6 e = r.stacked();
    ne.h += 2.0 * w * j.transpose() * information[i] * j;
    ne.g += 2.0 * w * j.transpose() * information[i] * e;
    ne.f += r.weighted_cost;
  }
  return ne;
}

}  // namespace detail

/// Analytic gradient of status_objective with respect to (bg, ba).
inline Vec6 status_gradient(std::span<const StatusInterval> intervals,
                            const ImuStatus& status, std::span<const Mat6> information,
                            const ImuNoiseModel& noise, double huber_delta) {
  return detail::build_normal_equations(intervals, status, information, noise, huber_delta).g;
}

struct StatusUpdateResult {
  ImuStatus status;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  /// Objective at the prior, then after every accepted step.
  std::vector<double> objective_history;
};

/// Robust bias estimate minimizing the summed Huber pose discrepancy over
/// the intervals. Levenberg-damped IRLS Gauss-Newton; every candidate is
/// re-preintegrated so accepted steps are judged on the exact objective.
/// Returns the best bias found; `converged` is false when the iteration
/// budget ran out first.
inline StatusUpdateResult update_status(std::span<const StatusInterval> intervals,
                                        const ImuStatus& prior, const ImuNoiseModel& noise,
                                        const StatusUpdateParams& params = {}) {
  params.validate();
  if (intervals.empty()) {
    throw Error(ErrorKind::kEmptyInput, "status update needs at least one interval");
  }
  const std::vector<Mat6> info = interval_information(intervals, prior, noise);
  StatusUpdateResult res;
  res.status = prior;
  Vec6 b = status_vector(prior);
  double lambda = params.damping_init;

  detail::NormalEquations ne =
      detail::build_normal_equations(intervals, prior, info, noise, params.huber_delta);
  res.objective = ne.f;
  res.objective_history.push_back(ne.f);

  for (int it = 1; it <= params.max_iterations; ++it) {
    res.iterations = it;
    if (ne.f == 0.0) {
      res.converged = true;
      break;
    }
    if (!ne.h.allFinite() || ne.h.cwiseAbs().maxCoeff() == 0.0) {
      throw Error(ErrorKind::kRankDeficient, "status update normal equations are singular");
    }
    if (ne.g.norm() == 0.0) {
      res.converged = true;
      break;
    }
    const double floor = 1e-12 * ne.h.diagonal().cwiseAbs().maxCoeff();
    bool accepted = false;
    bool tiny_step = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Mat6 a = ne.h;
      for (int k = 0; k < 6; ++k) a(k, k) += lambda * std::max(ne.h(k, k), floor) + floor;
      const Eigen::LDLT<Mat6> ldlt(a);
      const Vec6 step = ldlt.solve(-ne.g);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        lambda = std::max(lambda * 10.0, 1e-6);
        continue;
      }
      if (step.norm() <= params.step_tol * (1.0 + b.norm())) {
        tiny_step = true;
        break;
      }
      const Vec6 cand = b + step;
      const double fc = status_objective(intervals, status_from_vector(cand), info, noise,
                                         params.huber_delta);
      if (std::isfinite(fc) && fc <= ne.f) {
        b = cand;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        break;
      }
      lambda = std::max(lambda * 10.0, 1e-6);
    }
    if (!accepted) {
      res.converged = tiny_step;
      break;
    }
    res.status = status_from_vector(b);
    ne = detail::build_normal_equations(intervals, res.status, info, noise, params.huber_delta);
    res.objective = ne.f;
    res.objective_history.push_back(ne.f);
    const double prev = res.objective_history[res.objective_history.size() - 2];
    if (prev - ne.f <= 1e-15 * std::max(prev, 1e-300)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

/// Single-interval form: one IMU stream against one reference pose.
inline StatusUpdateResult update_status(std::span<const ImuSample> samples,
                                        const ImuStatus& prior, const Se3Tangent& reference,
                                        const KinematicContext& ctx, const ImuNoiseModel& noise,
                                        const StatusUpdateParams& params = {}) {
  const StatusInterval iv{std::vector<ImuSample>(samples.begin(), samples.end()), reference,
                          ctx};
  return update_status(std::span<const StatusInterval>(&iv, 1), prior, noise, params);
}

}  // namespace svio
