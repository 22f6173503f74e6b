#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "svio/error.hpp"
#include "svio/kdtree.hpp"
#include "svio/parallel.hpp"
#include "svio/se3.hpp"
#include "svio/stereo_geometry.hpp"

namespace svio {

struct Correspondence {
  std::uint32_t index_prev = 0;
  std::uint32_t index_cur = 0;
  double residual = 0.0;  ///< meters, after alignment

  friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

/// Matched point indices between frame t-1 (prev) and frame t (cur). At most
/// one pair per cur point; pairs are sorted by index_cur.
using CorrespondenceSet = std::vector<Correspondence>;

struct PointPair {
  Vec3 prev;
  Vec3 cur;
};

struct IcpParams {
  int max_iterations = 50;
  double convergence_tol = 1e-8;     ///< norm of the se(3) step
  double max_pair_distance = 1.0;    ///< meters
  double trim_fraction = 0.2;        ///< worst fraction dropped per iteration
  double residual_reject_sigma = 3.0;
  double reject_floor = 0.01;        ///< meters; lower bound of the reject threshold
  double voxel_leaf = 0.1;           ///< meters
  std::size_t voxel_threshold = 200000;
  int workers = 1;

  void validate() const {
    if (max_iterations < 1) {
      throw Error(ErrorKind::kInvalidArgument, "icp max_iterations must be >= 1");
    }
    if (!(trim_fraction >= 0.0 && trim_fraction < 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "icp trim_fraction must be in [0, 1)");
    }
    if (!(max_pair_distance > 0.0) || !(convergence_tol > 0.0) ||
        !(residual_reject_sigma > 0.0) || !(reject_floor >= 0.0) ||
        !(voxel_leaf > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "icp distances and tolerances must be > 0");
    }
  }
};

struct IcpResult {
  RigidTransform transform;  ///< maps frame-t points into frame t-1
  CorrespondenceSet correspondences;
  CorrespondenceSet rejected;  ///< pairs above the reject threshold
  /// prev points with no aligned cur point within the reject threshold
  /// (moving objects, and points that left the view or became occluded).
  std::vector<std::uint32_t> unsupported_prev;
  double mean_residual = 0.0;
  double reject_threshold = 0.0;
  double last_step = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  ///< trimmed mean residual per iteration
};

namespace detail {

inline CorrespondenceSet match_against(const KdTree& tree_prev,
                                       std::span<const Vec3> cur,
                                       const RigidTransform& cur_to_prev,
                                       double max_dist, int workers) {
  std::vector<Correspondence> slots(cur.size());
  std::vector<std::uint8_t> hit(cur.size(), 0);
  const double max_d2 = max_dist * max_dist;
  parallel_for(cur.size(), workers, [&](std::size_t j) {
    const auto nn = tree_prev.nearest(cur_to_prev * cur[j], max_d2);
    if (nn) {
      slots[j] = Correspondence{nn->index, static_cast<std::uint32_t>(j),
                                std::sqrt(nn->squared_distance)};
      hit[j] = 1;
    }
  });
  CorrespondenceSet out;
  for (std::size_t j = 0; j < cur.size(); ++j) {
    if (hit[j]) out.push_back(slots[j]);
  }
  return out;
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  }
  return m;
}

}  // namespace detail

/// For every point of `b`, the nearest point of `a` within max_dist.
inline CorrespondenceSet nearest_correspondences(const PointCloud& a,
                                                 const PointCloud& b,
                                                 double max_dist,
                                                 int workers = 1) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorKind::kEmptyInput, "nearest_correspondences on an empty cloud");
  }
  const KdTree tree(a.points);
  return detail::match_against(tree, b.points, RigidTransform::identity(),
                               max_dist, workers);
}

/// Closed-form least-squares alignment: the transform minimizing
/// sum |prev - (R cur + t)|^2, via SVD of the cross-covariance with the
/// reflection correction that keeps det(R) = +1.
inline RigidTransform estimate_rigid_transform(std::span<const PointPair> pairs) {
  if (pairs.size() < 3) {
    throw Error(ErrorKind::kRankDeficient, "need at least 3 point pairs");
  }
  Vec3 mean_prev = Vec3::Zero();
  Vec3 mean_cur = Vec3::Zero();
  for (const auto& p : pairs) {
    mean_prev += p.prev;
    mean_cur += p.cur;
  }
  const double n = static_cast<double>(pairs.size());
  mean_prev /= n;
  mean_cur /= n;

  Mat3 h = Mat3::Zero();
  Mat3 scatter_cur = Mat3::Zero();
  for (const auto& p : pairs) {
    const Vec3 c = p.cur - mean_cur;
    h += c * (p.prev - mean_prev).transpose();
    scatter_cur += c * c.transpose();
  }
  // Collinear or coincident sets leave a rotation about the line free.
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter_cur);
  const double largest = eig.eigenvalues()(2);
  if (!(largest > 0.0) || eig.eigenvalues()(1) <= 1e-12 * largest) {
    throw Error(ErrorKind::kRankDeficient,
                "point pairs are collinear or coincident");
  }

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Rotation r = Rotation::nearest(v * d * u.transpose());
  return RigidTransform{r, mean_prev - r * mean_cur};
}

/// Trimmed point-to-point ICP. The returned transform maps `cur` into the
/// frame of `prev`. Iterates matching and closed-form alignment until the
/// se(3) step falls below convergence_tol, then classifies the final pairs
/// against a robust threshold median + sigma * 1.4826 * MAD (floored at
/// reject_floor).
inline IcpResult icp(const PointCloud& prev, const PointCloud& cur,
                     const IcpParams& params,
                     const RigidTransform& seed = RigidTransform::identity()) {
  params.validate();
  if (prev.size() < 3 || cur.size() < 3) {
    throw Error(ErrorKind::kRegistrationFailure,
                "icp needs at least 3 points per cloud (prev=" +
                    std::to_string(prev.size()) +
                    ", cur=" + std::to_string(cur.size()) + ")");
  }

  IcpResult result;
  result.transform = seed;
  std::vector<PointPair> pairs;

  // Runs up to `budget` iterations of match / trim / align on the given
  // clouds, continuing from result.transform.
  auto iterate = [&](const PointCloud& p_reg, const PointCloud& c_reg,
                     const KdTree& tree, int budget) {
    result.converged = false;
    for (int iter = 1; iter <= budget; ++iter) {
      CorrespondenceSet corr = detail::match_against(
          tree, c_reg.points, result.transform, params.max_pair_distance,
          params.workers);
      std::stable_sort(corr.begin(), corr.end(),
                       [](const Correspondence& a, const Correspondence& b) {
                         return a.residual < b.residual;
                       });
      const auto keep = static_cast<std::size_t>(std::ceil(
          (1.0 - params.trim_fraction) * static_cast<double>(corr.size())));
      corr.resize(std::min(corr.size(), keep));
      if (corr.size() < 3) {
        throw Error(ErrorKind::kRegistrationFailure,
                    "icp found " + std::to_string(corr.size()) +
                        " correspondences at iteration " +
                        std::to_string(result.iterations + 1) +
                        " (max_pair_distance=" +
                        std::to_string(params.max_pair_distance) + ")");
      }
      double sum = 0.0;
      pairs.clear();
      for (const auto& c : corr) {
        sum += c.residual;
        pairs.push_back({p_reg.points[c.index_prev], c_reg.points[c.index_cur]});
      }
      result.residual_history.push_back(sum / static_cast<double>(corr.size()));

      const RigidTransform next = estimate_rigid_transform(pairs);
      result.last_step =
          se3_log(next * result.transform.inverse()).vector().norm();
      result.transform = next;
      ++result.iterations;
      if (result.last_step < params.convergence_tol) {
        result.converged = true;
        return;
      }
    }
  };

  const KdTree tree_prev(prev.points);
  const bool downsample = prev.size() > params.voxel_threshold ||
                          cur.size() > params.voxel_threshold;
  int budget = params.max_iterations;
  if (downsample) {
    // Coarse stage on voxel-thinned clouds, then refinement at full
    // resolution with the remaining iteration budget.
    const PointCloud prev_coarse = voxel_downsample(prev, params.voxel_leaf);
    const PointCloud cur_coarse = voxel_downsample(cur, params.voxel_leaf);
    if (prev_coarse.size() >= 3 && cur_coarse.size() >= 3) {
      const KdTree tree_coarse(prev_coarse.points);
      iterate(prev_coarse, cur_coarse, tree_coarse, budget);
      budget = std::max(1, budget - result.iterations);
    }
  }
  iterate(prev, cur, tree_prev, budget);

  CorrespondenceSet all = detail::match_against(
      tree_prev, cur.points, result.transform, params.max_pair_distance,
      params.workers);

  std::vector<double> residuals;
  residuals.reserve(all.size());
  for (const auto& c : all) residuals.push_back(c.residual);
  const double median = detail::median_of(residuals);
  for (auto& r : residuals) r = std::abs(r - median);
  const double mad = detail::median_of(residuals);
  result.reject_threshold = std::max(
      params.reject_floor, median + params.residual_reject_sigma * 1.4826 * mad);

  double sum = 0.0;
  for (const auto& c : all) {
    if (c.residual > result.reject_threshold) {
      result.rejected.push_back(c);
    } else {
      result.correspondences.push_back(c);
      sum += c.residual;
    }
  }
  result.mean_residual =
      result.correspondences.empty()
          ? 0.0
          : sum / static_cast<double>(result.correspondences.size());

  std::vector<Vec3> cur_in_prev(cur.size());
  for (std::size_t j = 0; j < cur.size(); ++j) {
    cur_in_prev[j] = result.transform * cur.points[j];
  }
  const KdTree tree_cur(std::move(cur_in_prev));
  const double thr2 = result.reject_threshold * result.reject_threshold;
  std::vector<std::uint8_t> unsupported(prev.size(), 0);
  parallel_for(prev.size(), params.workers, [&](std::size_t i) {
    unsupported[i] = !tree_cur.nearest(prev.points[i], thr2).has_value();
  });
  for (std::size_t i = 0; i < prev.size(); ++i) {
    if (unsupported[i]) {
      result.unsupported_prev.push_back(static_cast<std::uint32_t>(i));
    }
  }
  return result;
}

/// The se(3) log of a converged registration.
inline Se3Tangent stereo_se3(const IcpResult& result) {
  if (!result.converged) {
    throw Error(ErrorKind::kNotConverged,
                "icp result did not converge (last step " +
                    std::to_string(result.last_step) + ")");
  }
  return se3_log(result.transform);
}

}  // namespace svio
