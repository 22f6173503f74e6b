#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "svio/error.hpp"
#include "svio/icp.hpp"
#include "svio/se3.hpp"

namespace svio {

struct TrajectoryEntry {
  double t = 0.0;  ///< seconds
  RigidTransform pose;  ///< world from body
};

/// Timestamped absolute poses with strictly increasing time.
struct Trajectory {
  std::vector<TrajectoryEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  void validate() const {
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (!(entries[i].t > entries[i - 1].t)) {
        throw Error(ErrorKind::kInvalidArgument,
                    "trajectory timestamps not strictly increasing at entry " +
                        std::to_string(i));
      }
    }
  }
};

/// Relative motion ending at time t.
struct TimedTangent {
  double t = 0.0;
  Se3Tangent xi;
};

/// pose_k = pose_{k-1} * exp(xi_k), starting from `origin` at time t0.
inline Trajectory integrate_se3_chain(std::span<const TimedTangent> relatives,
                                      const RigidTransform& origin, double t0 = 0.0) {
  Trajectory tr;
  tr.entries.push_back({t0, origin});
  for (const auto& r : relatives) {
    if (!(r.t > tr.entries.back().t)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "relative motion timestamps must increase (" + std::to_string(r.t) +
                      " after " + std::to_string(tr.entries.back().t) + ")");
    }
    tr.entries.push_back({r.t, tr.entries.back().pose * se3_exp(r.xi)});
  }
  return tr;
}

/// Consecutive relative motions of a trajectory, the inverse of
/// integrate_se3_chain.
inline std::vector<TimedTangent> relative_tangents(const Trajectory& tr) {
  std::vector<TimedTangent> out;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    out.push_back({tr.entries[i].t,
                   se3_log(between(tr.entries[i - 1].pose, tr.entries[i].pose))});
  }
  return out;
}

/// Angle of a^T b from |b - a|_F = 2 sqrt(2) sin(angle / 2). Exactly zero
/// for identical inputs and well conditioned at small angles.
inline double rotation_distance(const Rotation& a, const Rotation& b) {
  const double f = (b.matrix() - a.matrix()).norm() / (2.0 * std::numbers::sqrt2);
  return 2.0 * std::asin(std::min(1.0, f));
}

inline const std::vector<double> kKittiLengths = {100, 200, 300, 400, 500, 600, 700, 800};

struct LengthError {
  double length = 0.0;    ///< m
  std::size_t windows = 0;
  double t_rel = 0.0;     ///< percent
  double r_rel = 0.0;     ///< deg / 100 m
};

struct RelativeErrorReport {
  double t_rel = 0.0;  ///< percent, mean over all windows
  double r_rel = 0.0;  ///< deg / 100 m, mean over all windows
  std::size_t windows = 0;
  std::vector<LengthError> per_length;
};

/// KITTI odometry relative errors. For every start frame (every `stride`
/// frames) and every length L, the window ends at the first frame whose gt
/// path length from the start is >= L. Windows that run past the end are
/// skipped.
inline RelativeErrorReport kitti_relative_errors(const Trajectory& est, const Trajectory& gt,
                                                 std::span<const double> lengths,
                                                 std::size_t stride = 10) {
  if (est.size() != gt.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "trajectory sizes differ: " + std::to_string(est.size()) + " vs " +
                    std::to_string(gt.size()));
  }
  if (stride == 0) throw Error(ErrorKind::kInvalidArgument, "stride must be >= 1");
  std::vector<double> dist(gt.size(), 0.0);
  for (std::size_t i = 1; i < gt.size(); ++i) {
    dist[i] = dist[i - 1] +
              (gt.entries[i].pose.translation - gt.entries[i - 1].pose.translation).norm();
  }
  RelativeErrorReport rep;
  double t_sum = 0.0, r_sum = 0.0;
  for (double len : lengths) {
    LengthError le;
    le.length = len;
    double lt = 0.0, lr = 0.0;
    for (std::size_t first = 0; first < gt.size(); first += stride) {
      std::size_t last = first;
      while (last < gt.size() && dist[last] - dist[first] < len) ++last;
      if (last >= gt.size()) break;
      const RigidTransform dg = between(gt.entries[first].pose, gt.entries[last].pose);
      const RigidTransform de = between(est.entries[first].pose, est.entries[last].pose);
      lt += (dg.rotation.inverse() * (de.translation - dg.translation)).norm() / len;
      lr += rotation_distance(dg.rotation, de.rotation) / len;
      ++le.windows;
    }
    if (le.windows > 0) {
      le.t_rel = 100.0 * lt / static_cast<double>(le.windows);
      le.r_rel = rad2deg(lr / static_cast<double>(le.windows)) * 100.0;
    }
    t_sum += lt;
    r_sum += lr;
    rep.windows += le.windows;
    rep.per_length.push_back(le);
  }
  if (rep.windows > 0) {
    rep.t_rel = 100.0 * t_sum / static_cast<double>(rep.windows);
    rep.r_rel = rad2deg(r_sum / static_cast<double>(rep.windows)) * 100.0;
  }
  return rep;
}

inline RelativeErrorReport kitti_relative_errors(const Trajectory& est, const Trajectory& gt,
                                                 std::size_t stride = 10) {
  return kitti_relative_errors(est, gt, kKittiLengths, stride);
}

struct LossConfig {
  double beta = 1.0;
  double beta_prime = 1.0;

  void validate() const {
    if (!(beta > 0.0) || !(beta_prime > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "loss betas must be > 0");
    }
  }
};

/// |omega - omega_hat| + beta |upsilon - upsilon_hat|.
inline double loss_imu(const Se3Tangent& pred, const Se3Tangent& target,
                       const LossConfig& cfg = {}) {
  return (pred.omega - target.omega).norm() + cfg.beta * (pred.upsilon - target.upsilon).norm();
}

inline double loss_vio(const Se3Tangent& pred, const Se3Tangent& target,
                       const LossConfig& cfg = {}) {
  return (pred.omega - target.omega).norm() +
         cfg.beta_prime * (pred.upsilon - target.upsilon).norm();
}

inline double total_loss(double l_flow, double l_imu, double l_vio) {
  return l_flow + l_imu + l_vio;
}

/// Rigid transform taking est positions onto gt positions. Collinear or
/// too-short position sets fall back to aligning centroids only.
inline RigidTransform align_positions(const Trajectory& est, const Trajectory& gt) {
  if (est.size() != gt.size() || est.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "alignment needs equal, non-empty trajectories");
  }
  std::vector<PointPair> pairs;
  Vec3 ce = Vec3::Zero(), cg = Vec3::Zero();
  for (std::size_t i = 0; i < est.size(); ++i) {
    pairs.push_back({gt.entries[i].pose.translation, est.entries[i].pose.translation});
    ce += est.entries[i].pose.translation;
    cg += gt.entries[i].pose.translation;
  }
  try {
    return estimate_rigid_transform(pairs);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kRankDeficient) throw;
    return RigidTransform::from_translation((cg - ce) / static_cast<double>(est.size()));
  }
}

/// Absolute trajectory RMSE of positions after rigid alignment.
inline double ate_rmse(const Trajectory& est, const Trajectory& gt) {
  const RigidTransform a = align_positions(est, gt);
  double sum = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    sum += (gt.entries[i].pose.translation - a * est.entries[i].pose.translation).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(est.size()));
}

}  // namespace svio
