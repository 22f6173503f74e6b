#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "svio/fusion_eval.hpp"
#include "svio/synth_world.hpp"
#include "test_util.hpp"

namespace svio {
namespace {

Trajectory chain_of(std::size_t n, const RigidTransform& step) {
  std::vector<TimedTangent> rel;
  for (std::size_t i = 1; i <= n; ++i) rel.push_back({0.1 * i, se3_log(step)});
  return integrate_se3_chain(rel, RigidTransform::identity());
}

Trajectory straight_gt(std::size_t n) {
  Trajectory t;
  for (std::size_t i = 0; i <= n; ++i) {
    t.entries.push_back({0.1 * i, RigidTransform::from_translation(Vec3(double(i), 0, 0))});
  }
  return t;
}

TEST(Chain, EmptyIsOrigin) {
  const RigidTransform o = RigidTransform::from_translation(Vec3(1, 2, 3));
  const Trajectory t = integrate_se3_chain({}, o, 5.0);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.entries[0].t, 5.0);
  EXPECT_EQ(t.entries[0].pose.translation, o.translation);
}

TEST(Chain, UnitZSteps) {
  const Trajectory t = chain_of(7, RigidTransform::from_translation(Vec3(0, 0, 1)));
  ASSERT_EQ(t.size(), 8u);
  EXPECT_NEAR(t.entries.back().pose.translation.z(), 7.0, 1e-12);
}

TEST(Chain, NonMonotoneRejected) {
  std::vector<TimedTangent> rel{{0.2, Se3Tangent{}}, {0.2, Se3Tangent{}}};
  EXPECT_THROW(integrate_se3_chain(rel, RigidTransform::identity()), Error);
  std::vector<TimedTangent> back{{-1.0, Se3Tangent{}}};
  EXPECT_THROW(integrate_se3_chain(back, RigidTransform::identity()), Error);
}

TEST(Chain, ReproducesSyntheticTruth) {
  const AnalyticTrajectory tr = AnalyticTrajectory::vehicle(8.0, 30.0);
  Trajectory gt;
  for (int k = 0; k <= 300; ++k) gt.entries.push_back({k * 0.1, tr.sample(k * 0.1).pose});
  const auto rel = relative_tangents(gt);
  const Trajectory est = integrate_se3_chain(rel, gt.entries[0].pose, 0.0);
  ASSERT_EQ(est.size(), gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    EXPECT_LT(test::max_abs_diff(est.entries[i].pose.matrix(), gt.entries[i].pose.matrix()),
              1e-8);
  }
}

TEST(RelativeErrors, SelfIsExactlyZero) {
  const AnalyticTrajectory tr = AnalyticTrajectory::vehicle(10.0, 100.0);
  Trajectory gt;
  for (int k = 0; k <= 1000; ++k) gt.entries.push_back({k * 0.1, tr.sample(k * 0.1).pose});
  const RelativeErrorReport r = kitti_relative_errors(gt, gt, 1);
  EXPECT_GT(r.windows, 0u);
  EXPECT_EQ(r.t_rel, 0.0);
  EXPECT_EQ(r.r_rel, 0.0);
  for (const auto& le : r.per_length) {
    EXPECT_EQ(le.t_rel, 0.0);
    EXPECT_EQ(le.r_rel, 0.0);
  }
}

TEST(RelativeErrors, ScaledStraightLineIsOnePercent) {
  const Trajectory gt = straight_gt(1000);
  const Trajectory est = chain_of(1000, RigidTransform::from_translation(Vec3(1.01, 0, 0)));
  for (std::size_t stride : {std::size_t{1}, std::size_t{10}}) {
    const RelativeErrorReport r = kitti_relative_errors(est, gt, stride);
    ASSERT_EQ(r.per_length.size(), 8u);
    for (const auto& le : r.per_length) {
      EXPECT_GT(le.windows, 0u) << le.length;
      EXPECT_NEAR(le.t_rel, 1.0, 1e-9) << le.length;
      EXPECT_EQ(le.r_rel, 0.0);
    }
    EXPECT_NEAR(r.t_rel, 1.0, 1e-9);
  }
}

TEST(RelativeErrors, YawDriftMatchesClosedForm) {
  const double drift = 0.01;
  const Trajectory gt = straight_gt(1000);
  const Trajectory est = chain_of(
      1000, RigidTransform{so3_exp(Vec3(0, 0, drift)), Vec3(1, 0, 0)});
  const RelativeErrorReport r = kitti_relative_errors(est, gt, 1);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& le : r.per_length) {
    const double L = le.length;
    // L frames of drift accumulate to a yaw of drift * L; the angle is its
    // principal value.
    const double angle = std::acos(std::cos(drift * L));
    const double expected = angle / L * 180.0 / std::numbers::pi * 100.0;
    EXPECT_NEAR(le.r_rel, expected, 1e-3 * expected) << L;
    EXPECT_EQ(le.windows, 1000 - static_cast<std::size_t>(L) + 1);
    sum += angle / L * le.windows;
    count += le.windows;
  }
  EXPECT_NEAR(r.r_rel, sum / count * 180.0 / std::numbers::pi * 100.0, 1e-9);
}

TEST(RelativeErrors, ShortTrajectoryGivesEmptyLengths) {
  const Trajectory gt = straight_gt(250);
  const RelativeErrorReport r = kitti_relative_errors(gt, gt, 1);
  ASSERT_EQ(r.per_length.size(), 8u);
  EXPECT_GT(r.per_length[0].windows, 0u);
  EXPECT_GT(r.per_length[1].windows, 0u);
  for (std::size_t i = 2; i < 8; ++i) EXPECT_EQ(r.per_length[i].windows, 0u);
}

TEST(RelativeErrors, InvariantToGlobalRigidTransform) {
  std::mt19937_64 rng(7);
  const AnalyticTrajectory tr = AnalyticTrajectory::vehicle(10.0, 60.0);
  Trajectory gt, est;
  for (int k = 0; k <= 600; ++k) {
    gt.entries.push_back({k * 0.1, tr.sample(k * 0.1).pose});
  }
  auto rel = relative_tangents(gt);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& r : rel) {
    r.xi.omega += 1e-3 * Vec3(n(rng), n(rng), n(rng));
    r.xi.upsilon += 1e-2 * Vec3(n(rng), n(rng), n(rng));
  }
  est = integrate_se3_chain(rel, gt.entries[0].pose, 0.0);
  const RelativeErrorReport a = kitti_relative_errors(est, gt, 1);
  const RigidTransform g = test::random_transform(rng, 50.0);
  Trajectory gt2 = gt, est2 = est;
  for (auto& e : gt2.entries) e.pose = g * e.pose;
  for (auto& e : est2.entries) e.pose = g * e.pose;
  const RelativeErrorReport b = kitti_relative_errors(est2, gt2, 1);
  EXPECT_GT(a.t_rel, 0.0);
  EXPECT_NEAR(a.t_rel, b.t_rel, 1e-9 * a.t_rel);
  EXPECT_NEAR(a.r_rel, b.r_rel, 1e-9 * a.r_rel);
  EXPECT_EQ(a.windows, b.windows);
}

TEST(RelativeErrors, SizeMismatchThrows) {
  EXPECT_THROW(kitti_relative_errors(straight_gt(10), straight_gt(11)), Error);
  EXPECT_THROW(kitti_relative_errors(straight_gt(10), straight_gt(10), 0), Error);
}

TEST(Loss, Arithmetic) {
  Se3Tangent a, b;
  EXPECT_EQ(loss_imu(a, a), 0.0);
  a.omega = Vec3(3, 4, 0);
  a.upsilon = Vec3(0, 0, 2);
  LossConfig cfg{10.0, 10.0};
  EXPECT_DOUBLE_EQ(loss_imu(a, b, cfg), 25.0);
  EXPECT_DOUBLE_EQ(loss_vio(a, b, cfg), 25.0);
  cfg.beta_prime = 0.5;
  EXPECT_DOUBLE_EQ(loss_vio(a, b, cfg), 6.0);
  EXPECT_EQ(loss_imu(a, b, cfg), loss_imu(b, a, cfg));
  EXPECT_EQ(total_loss(0, 0, 0), 0.0);
  EXPECT_EQ(total_loss(1, 2, 3), 6.0);
  EXPECT_THROW((LossConfig{0.0, 1.0}.validate()), Error);
}

TEST(Ate, ZeroAndOffset) {
  const AnalyticTrajectory tr = AnalyticTrajectory::vehicle(10.0, 20.0);
  Trajectory gt;
  for (int k = 0; k <= 200; ++k) gt.entries.push_back({k * 0.1, tr.sample(k * 0.1).pose});
  EXPECT_LT(ate_rmse(gt, gt), 1e-9);
  Trajectory shifted = gt;
  for (auto& e : shifted.entries) e.pose.translation += Vec3(1, 1, 1) / std::sqrt(3.0);
  EXPECT_LT(ate_rmse(shifted, gt), 1e-9);
}

TEST(Ate, CollinearFallsBackToCentroid) {
  const Trajectory gt = straight_gt(50);
  Trajectory est = gt;
  for (auto& e : est.entries) e.pose.translation += Vec3(0, 2, 0);
  EXPECT_LT(ate_rmse(est, gt), 1e-12);
}

TEST(Ate, MatchesNaiveTwoPass) {
  std::mt19937_64 rng(11);
  const AnalyticTrajectory tr = AnalyticTrajectory::vehicle(10.0, 20.0);
  Trajectory gt, est;
  std::normal_distribution<double> n(0.0, 0.3);
  const RigidTransform g = test::random_transform(rng, 5.0);
  for (int k = 0; k <= 200; ++k) {
    const RigidTransform p = tr.sample(k * 0.1).pose;
    gt.entries.push_back({k * 0.1, p});
    RigidTransform q = g * p;
    q.translation += Vec3(n(rng), n(rng), n(rng));
    est.entries.push_back({k * 0.1, q});
  }
  // Pass 1: centroids and cross-covariance; pass 2: residuals.
  const std::size_t m = gt.size();
  Vec3 ce = Vec3::Zero(), cg = Vec3::Zero();
  for (std::size_t i = 0; i < m; ++i) {
    ce += est.entries[i].pose.translation;
    cg += gt.entries[i].pose.translation;
  }
  ce /= double(m);
  cg /= double(m);
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < m; ++i) {
    h += (est.entries[i].pose.translation - ce) *
         (gt.entries[i].pose.translation - cg).transpose();
  }
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0) d(2, 2) = -1;
  const Mat3 r = svd.matrixV() * d * svd.matrixU().transpose();
  const Vec3 t = cg - r * ce;
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sum += (gt.entries[i].pose.translation - (r * est.entries[i].pose.translation + t))
               .squaredNorm();
  }
  const double naive = std::sqrt(sum / double(m));
  EXPECT_NEAR(ate_rmse(est, gt), naive, 1e-9);
  EXPECT_GT(naive, 0.1);
}

TEST(TrajectoryType, ValidateRejectsNonIncreasing) {
  Trajectory t = straight_gt(3);
  EXPECT_NO_THROW(t.validate());
  t.entries[2].t = t.entries[1].t;
  EXPECT_THROW(t.validate(), Error);
}

}  // namespace
}  // namespace svio
