#include <gtest/gtest.h>

#include <cstring>

#include "svio/icp.hpp"
#include "svio/synth_emit.hpp"
#include "test_util.hpp"

namespace svio {
namespace {

SyntheticScene small_scene(double duration, std::size_t landmarks, double dynamic = 0.0) {
  SceneConfig sc;
  sc.landmarks = landmarks;
  sc.dynamic_fraction = dynamic;
  sc.seed = 11;
  return make_scene(AnalyticTrajectory::vehicle(10.0, duration), default_synthetic_rig(), sc);
}

double trans_err(const RigidTransform& a, const RigidTransform& b) {
  return (a.translation - b.translation).norm();
}

double rot_err(const RigidTransform& a, const RigidTransform& b) {
  return rotation_angle(a.rotation.inverse() * b.rotation);
}

TEST(Trajectory, StraightLineKinematics) {
  const auto tr = AnalyticTrajectory::straight_line(Vec3(1, 2, 3), Vec3(4, -1, 0.5), 10.0, 0.7);
  for (double t : {0.0, 3.3, 10.0}) {
    const AnalyticState s = tr.sample(t);
    EXPECT_EQ(s.body_rate, Vec3::Zero());
    EXPECT_LT((s.specific_force + s.pose.rotation.matrix().transpose() * tr.gravity).norm(), 1e-12);
    EXPECT_LT((s.pose.translation - (Vec3(1, 2, 3) + t * Vec3(4, -1, 0.5))).norm(), 1e-12);
  }
  EXPECT_THROW(tr.sample(-1e-3), Error);
  EXPECT_THROW(tr.sample(10.001), Error);
}

TEST(Trajectory, CircleCentripetalForce) {
  const double r = 25.0, w = 0.4;
  const auto tr = AnalyticTrajectory::circle(r, w, 20.0);
  for (double t : {0.0, 1.7, 9.1, 20.0}) {
    const AnalyticState s = tr.sample(t);
    // Remove the gravity part; what remains lies in the horizontal plane.
    const Vec3 world_f = s.pose.rotation * s.specific_force + tr.gravity;
    EXPECT_NEAR(world_f.norm(), w * w * r, 1e-12);
    EXPECT_NEAR(world_f.dot(tr.gravity.normalized()), 0.0, 1e-12);
    EXPECT_NEAR(s.velocity.norm(), w * r, 1e-12);
    EXPECT_NEAR(s.body_rate.z(), w, 1e-15);
  }
}

TEST(Trajectory, FiniteDifferencesMatchAnalyticDerivatives) {
  const auto tr = AnalyticTrajectory::vehicle(10.0, 30.0);
  const double h = 1e-5;
  for (double t = 0.5; t < 29.5; t += 1.37) {
    const AnalyticState s = tr.sample(t);
    const Vec3 v = (tr.sample(t + h).pose.translation - tr.sample(t - h).pose.translation) / (2 * h);
    EXPECT_LT((v - s.velocity).norm(), 1e-6) << t;
    const Vec3 a = (tr.sample(t + h).velocity - tr.sample(t - h).velocity) / (2 * h);
    EXPECT_LT((a - s.acceleration).norm(), 1e-6) << t;
    // Body rate from R(t)^T R(t + h) ~ exp(h w).
    const Vec3 w = so3_log(tr.sample(t - h).pose.rotation.inverse() * tr.sample(t + h).pose.rotation) /
                   (2 * h);
    EXPECT_LT((w - s.body_rate).norm(), 1e-6) << t;
  }
}

TEST(Render, PrincipalRayLandmark) {
  SyntheticScene s = small_scene(1.0, 0);
  const RigidTransform cam = s.camera_pose(0.0);
  s.landmarks.push_back(cam * Vec3(0, 0, 5));
  s.landmark_velocity.push_back(Vec3::Zero());
  const RenderedFrame f = render_frame(s, 0.0);
  // cx, cy = 319.5, 239.5 round to pixel (320, 240).
  const int x = static_cast<int>(std::round(s.rig.intrinsics.cx));
  const int y = static_cast<int>(std::round(s.rig.intrinsics.cy));
  ASSERT_TRUE(f.depth.is_valid(x, y));
  EXPECT_NEAR(f.depth.at(x, y), 5.0, 1e-12);
  EXPECT_EQ(f.depth.valid_count(), 1u);
  EXPECT_EQ(f.landmark[f.depth.index(x, y)], 0);
  EXPECT_NEAR(f.disparity.at(x, y), 400.0 * 0.54 / 5.0, 1e-12);
}

TEST(Render, ZBufferKeepsNearest) {
  SyntheticScene s = small_scene(1.0, 0);
  const RigidTransform cam = s.camera_pose(0.0);
  for (double z : {9.0, 4.0, 7.0}) {
    s.landmarks.push_back(cam * Vec3(0, 0, z));
    s.landmark_velocity.push_back(Vec3::Zero());
  }
  const RenderedFrame f = render_frame(s, 0.0);
  EXPECT_EQ(f.depth.valid_count(), 1u);
  EXPECT_NEAR(f.depth.at(320, 240), 4.0, 1e-12);
  EXPECT_EQ(f.landmark[f.depth.index(320, 240)], 1);
}

TEST(Render, DisparityInvertsToDepth) {
  const SyntheticScene s = small_scene(2.0, 3000);
  const RenderedFrame f = render_frame(s, 1.0);
  ASSERT_GT(f.depth.valid_count(), 200u);
  const DepthMap d = disparity_to_depth(f.disparity, s.rig);
  EXPECT_EQ(d.valid, f.depth.valid);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (!d.valid[i]) continue;
    EXPECT_NEAR(d.values[i], f.depth.values[i], 1e-9 * f.depth.values[i]);
    // Depth is the landmark's camera z.
    const Vec3 c = s.camera_pose(1.0).inverse() * s.landmark_at(f.landmark[i], 1.0);
    EXPECT_NEAR(f.depth.values[i], c.z(), 1e-12 * c.z());
  }
}

/// Camera-frame coordinates of each rendered landmark, in pixel order.
PointCloud exact_cloud(const SyntheticScene& s, const RenderedFrame& f, double t) {
  PointCloud c;
  const RigidTransform cam_from_world = s.camera_pose(t).inverse();
  for (int y = 0; y < f.depth.height; ++y) {
    for (int x = 0; x < f.depth.width; ++x) {
      const auto id = f.landmark[f.depth.index(x, y)];
      if (id < 0) continue;
      c.push_back(cam_from_world * s.landmark_at(id, t),
                  PixelCoord{static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)});
    }
  }
  return c;
}

TEST(Render, IcpOnRenderedLandmarksRecoversMotion) {
  const SyntheticScene s = small_scene(3.0, 6000);
  const double t0 = 1.0, t1 = 1.1;
  const RenderedFrame f0 = render_frame(s, t0), f1 = render_frame(s, t1);
  const IcpResult r = icp(exact_cloud(s, f0, t0), exact_cloud(s, f1, t1), IcpParams{});
  const RigidTransform truth = true_camera_motion(s, t0, t1);
  ASSERT_TRUE(r.converged);
  EXPECT_LT(trans_err(r.transform, truth), 1e-6);
  EXPECT_LT(rot_err(r.transform, truth), 1e-6);
}

TEST(Render, IcpOnUnprojectedPixelsWithinQuantizationBound) {
  // Unprojecting pixel centers moves each point laterally by at most
  // sqrt(2)/2 px * z / fx; the recovered motion is bounded by that.
  const SyntheticScene s = small_scene(3.0, 6000);
  const double t0 = 1.0, t1 = 1.1;
  const RenderedFrame f0 = render_frame(s, t0), f1 = render_frame(s, t1);
  const IcpResult r = icp(depth_to_pointcloud(f0.depth, s.rig.intrinsics),
                          depth_to_pointcloud(f1.depth, s.rig.intrinsics), IcpParams{});
  const RigidTransform truth = true_camera_motion(s, t0, t1);
  const double z_max = 40.0 + 10.0;
  const double lateral = std::sqrt(0.5) * z_max / s.rig.intrinsics.fx;
  ASSERT_TRUE(r.converged);
  EXPECT_LT(trans_err(r.transform, truth), lateral);
  EXPECT_LT(rot_err(r.transform, truth), lateral / 3.0);  // over the 3 m inner shell
  EXPECT_LT(trans_err(r.transform, truth), 0.02);
  EXPECT_LT(rot_err(r.transform, truth), deg2rad(0.1));
}

TEST(Imu, StationaryZeroNoise) {
  auto tr = AnalyticTrajectory::straight_line(Vec3(0, 0, 1), Vec3::Zero(), 2.0, 0.3);
  tr.pitch.offset = 0.1;
  tr.roll.offset = -0.2;
  SceneConfig sc;
  sc.landmarks = 10;
  const SyntheticScene s = make_scene(tr, default_synthetic_rig(), sc);
  const auto imu = synthesize_imu(s);
  ASSERT_EQ(imu.size(), 401u);
  const Vec3 f = -(tr.sample(0.0).pose.rotation.matrix().transpose() * tr.gravity);
  for (const auto& x : imu) {
    EXPECT_EQ(x.gyro, Vec3::Zero());
    EXPECT_EQ(x.accel, f);
  }
  EXPECT_EQ(imu.back().t_ns, 2'000'000'000);
  EXPECT_NO_THROW(validate_stream(imu));
}

TEST(Imu, BiasAddedAndSeededNoiseReplays) {
  SyntheticScene s = small_scene(1.0, 0);
  const auto clean = synthesize_imu(s);
  s.true_bias = ImuStatus{Vec3(0.1, 0, 0), Vec3(0.02, 0, 0)};
  const auto biased = synthesize_imu(s);
  for (std::size_t k = 0; k < clean.size(); ++k) {
    EXPECT_NEAR((biased[k].gyro - clean[k].gyro - Vec3(0.02, 0, 0)).norm(), 0.0, 1e-15);
    EXPECT_NEAR((biased[k].accel - clean[k].accel - Vec3(0.1, 0, 0)).norm(), 0.0, 1e-14);
  }
  s.noise = ImuNoiseModel{};
  const auto a = synthesize_imu(s);
  const auto b = synthesize_imu(s);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].gyro, b[k].gyro);
    EXPECT_EQ(a[k].accel, b[k].accel);
  }
  s.seed = 12;
  EXPECT_NE(synthesize_imu(s)[5].gyro, a[5].gyro);
  // Sample spread matches density * sqrt(rate).
  double ss = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) ss += (a[k].gyro - biased[k].gyro).squaredNorm();
  const double sigma = std::sqrt(ss / (3.0 * a.size()));
  EXPECT_NEAR(sigma, s.noise.gyro_noise * std::sqrt(200.0), 0.15 * sigma);
}

TEST(Scene, LandmarksInShellAndDynamicSubset) {
  const SyntheticScene s = small_scene(10.0, 4000, 0.1);
  std::size_t dynamic = 0;
  for (std::size_t i = 0; i < s.landmarks.size(); ++i) {
    if (s.is_dynamic(i)) {
      ++dynamic;
      EXPECT_EQ(s.landmark_velocity[i].z(), 0.0);
      EXPECT_LE(s.landmark_velocity[i].norm(), 2.0 + 1e-12);
      EXPECT_GE(s.landmark_velocity[i].norm(), 1.0 - 1e-12);
    }
  }
  EXPECT_GT(dynamic, 320u);
  EXPECT_LT(dynamic, 480u);
  const SyntheticScene t = small_scene(10.0, 4000, 0.1);
  EXPECT_EQ(s.landmarks, t.landmarks);
  EXPECT_EQ(s.landmark_velocity, t.landmark_velocity);
}

TEST(Emit, EurocRoundTrip) {
  SyntheticScene s = small_scene(1.5, 1500);
  s.true_bias = ImuStatus{Vec3(0.1, 0, 0), Vec3(0.02, 0, 0)};
  s.noise = ImuNoiseModel{};
  s.cam_rate = 20.0;
  const auto dir = test::scratch_dir("emit_euroc");
  const EmitSummary sum = emit_dataset(s, Layout::kEuroc, dir);
  RunConfig cfg;
  const SequenceManifest m = load_dataset(dir, Layout::kEuroc, cfg);
  const auto imu = synthesize_imu(s);
  ASSERT_EQ(m.imu.size(), imu.size());
  EXPECT_EQ(sum.imu_samples, imu.size());
  for (std::size_t k = 0; k < imu.size(); ++k) {
    EXPECT_EQ(m.imu[k].t_ns, imu[k].t_ns);
    EXPECT_EQ(m.imu[k].gyro, imu[k].gyro);
    EXPECT_EQ(m.imu[k].accel, imu[k].accel);
  }
  ASSERT_EQ(m.size(), 31u);
  ASSERT_TRUE(m.ground_truth.has_value());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double t = s.frame_times()[i];
    EXPECT_EQ(m.frame_t_ns[i], seconds_to_ns(t));
    const AnalyticState st = s.trajectory.sample(t);
    EXPECT_LT(trans_err(m.ground_truth->entries[i].pose, st.pose), 1e-12);
    EXPECT_LT(rot_err(m.ground_truth->entries[i].pose, st.pose), 1e-12);
    EXPECT_LT((m.gt_velocity[i] - st.velocity).norm(), 1e-12);
    // 16-bit disparity keeps 1/256 px.
    const DisparityMap d = read_disparity(m.disparity[i]);
    const RenderedFrame f = render_frame(s, t);
    EXPECT_EQ(d.valid, f.disparity.valid);
    for (std::size_t p = 0; p < d.values.size(); ++p) {
      if (d.valid[p]) {
        EXPECT_LE(std::abs(d.values[p] - f.disparity.values[p]), 0.5 / 256.0 + 1e-12);
      }
    }
  }
}

TEST(Emit, KittiRoundTripWithinTextPrecision) {
  const SyntheticScene s = small_scene(2.0, 1500);
  const auto dir = test::scratch_dir("emit_kitti");
  EmitOptions opt;
  opt.disparity_ext = ".pfm";
  const EmitSummary sum = emit_dataset(s, Layout::kKitti, dir, opt);
  RunConfig cfg;
  const SequenceManifest m = load_dataset(dir, Layout::kKitti, cfg);
  ASSERT_EQ(m.size(), 21u);
  EXPECT_EQ(sum.frames, 21u);
  EXPECT_NEAR(m.rig.baseline, s.rig.baseline, 1e-12);
  EXPECT_EQ(m.rig.intrinsics.fx, s.rig.intrinsics.fx);
  EXPECT_EQ(m.rig.width, s.rig.width);
  ASSERT_TRUE(m.ground_truth.has_value());
  std::size_t pixels = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double t = s.frame_times()[i];
    EXPECT_EQ(m.frame_t_ns[i], seconds_to_ns(t));
    const RigidTransform truth = s.trajectory.sample(t).pose;
    EXPECT_LT(trans_err(m.ground_truth->entries[i].pose, truth), 1e-12);
    EXPECT_LT(rot_err(m.ground_truth->entries[i].pose, truth), 1e-12);
    // PFM stores float32.
    const DisparityMap d = read_disparity(m.disparity[i]);
    const RenderedFrame f = render_frame(s, t);
    EXPECT_EQ(d.valid, f.disparity.valid);
    for (std::size_t p = 0; p < d.values.size(); ++p) {
      if (d.valid[p]) {
        EXPECT_EQ(d.values[p], static_cast<double>(static_cast<float>(f.disparity.values[p])));
      }
    }
    pixels += d.valid_count();
  }
  EXPECT_EQ(pixels, sum.rendered_pixels);
  const auto imu = synthesize_imu(s);
  ASSERT_EQ(m.imu.size(), imu.size());
  for (std::size_t k = 0; k < imu.size(); ++k) {
    EXPECT_EQ(m.imu[k].t_ns, imu[k].t_ns);
    EXPECT_LT((m.imu[k].gyro - imu[k].gyro).norm(), 1e-12);
    EXPECT_LT((m.imu[k].accel - imu[k].accel).norm(), 1e-12);
  }
}

TEST(Emit, EmptyLandmarkSceneGivesEmptyDepth) {
  const SyntheticScene s = small_scene(0.5, 0);
  for (Layout layout : {Layout::kKitti, Layout::kEuroc}) {
    const auto dir = test::scratch_dir(layout == Layout::kKitti ? "emit_empty_k" : "emit_empty_e");
    const EmitSummary sum = emit_dataset(s, layout, dir);
    EXPECT_EQ(sum.rendered_pixels, 0u);
    const SequenceManifest m = load_dataset(dir, layout, RunConfig{});
    EXPECT_NO_THROW(m.validate());
    ASSERT_EQ(m.size(), 6u);
    for (const auto& p : m.disparity) {
      const DepthMap d = disparity_to_depth(read_disparity(p), m.rig);
      EXPECT_EQ(d.valid_count(), 0u);
      EXPECT_EQ(d.width, 640);
    }
  }
}

TEST(Emit, ByteIdenticalAcrossWorkerCounts) {
  const SyntheticScene s = small_scene(1.0, 2000);
  const auto a = test::scratch_dir("emit_w1");
  const auto b = test::scratch_dir("emit_w4");
  emit_dataset(s, Layout::kKitti, a, EmitOptions{"00", ".png", 1});
  emit_dataset(s, Layout::kKitti, b, EmitOptions{"00", ".png", 4});
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    ASSERT_TRUE(fs::exists(b / rel)) << rel;
    EXPECT_EQ(detail::read_file(e.path()), detail::read_file(b / rel)) << rel;
    ++files;
  }
  EXPECT_GT(files, 10u);
}

TEST(Emit, RejectsUnknownDisparityExtension) {
  EmitOptions opt;
  opt.disparity_ext = ".jpg";
  EXPECT_THROW(emit_dataset(small_scene(0.2, 0), Layout::kKitti, test::scratch_dir("emit_bad"), opt),
               Error);
  EXPECT_THROW(parse_layout("tum"), Error);
}

}  // namespace
}  // namespace svio
