#include <gtest/gtest.h>

#include <cstring>

#include "svio/degradation.hpp"
#include "svio/synth_world.hpp"
#include "test_util.hpp"

namespace svio {
namespace {

std::vector<ImuSample> ramp_stream(std::size_t n) {
  std::vector<ImuSample> s;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = static_cast<double>(k);
    s.push_back({static_cast<std::int64_t>(k) * 5'000'000, Vec3(x, -x, 0.5 * x),
                 Vec3(0.1 * x, 9.81, -x)});
  }
  return s;
}

std::string bytes_of(std::span<const ImuSample> s) {
  std::string out;
  for (const auto& x : s) {
    out.append(reinterpret_cast<const char*>(&x.t_ns), sizeof x.t_ns);
    out.append(reinterpret_cast<const char*>(x.gyro.data()), 3 * sizeof(double));
    out.append(reinterpret_cast<const char*>(x.accel.data()), 3 * sizeof(double));
  }
  return out;
}

SequenceManifest toy_manifest(std::size_t n) {
  SequenceManifest m;
  m.rig = default_synthetic_rig();
  Trajectory gt;
  for (std::size_t i = 0; i < n; ++i) {
    m.frame_t_ns.push_back(static_cast<std::int64_t>(i) * 100'000'000);
    m.left_images.push_back("l" + std::to_string(i));
    m.right_images.push_back("r" + std::to_string(i));
    m.disparity.push_back("d" + std::to_string(i));
    m.gt_velocity.push_back(Vec3(double(i), 0, 0));
    gt.entries.push_back({0.1 * i, RigidTransform::from_translation(Vec3(double(i), 0, 0))});
  }
  m.ground_truth = gt;
  m.imu = ramp_stream(10 * n);
  return m;
}

TEST(Miscalibrate, ZeroAngleIsIdentity) {
  const StereoRig r = default_synthetic_rig();
  const StereoRig s = miscalibrate(r, 0.0, 99);
  EXPECT_EQ(s.cam_to_imu.matrix(), r.cam_to_imu.matrix());
}

TEST(Miscalibrate, ExactAngleAndTranslationKept) {
  StereoRig r = default_synthetic_rig();
  r.cam_to_imu.translation = Vec3(0.1, -0.2, 0.3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (double deg : {1.0, 10.0, 45.0, 179.0}) {
      const StereoRig s = miscalibrate(r, deg, seed);
      const double angle =
          rotation_angle(r.cam_to_imu.rotation.inverse() * s.cam_to_imu.rotation);
      EXPECT_NEAR(rad2deg(angle), deg, 1e-9) << seed << " " << deg;
      EXPECT_EQ(s.cam_to_imu.translation, r.cam_to_imu.translation);
    }
  }
}

TEST(Miscalibrate, SeedReplay) {
  const StereoRig r = default_synthetic_rig();
  EXPECT_EQ(miscalibrate(r, 10, 7).cam_to_imu.matrix(), miscalibrate(r, 10, 7).cam_to_imu.matrix());
  EXPECT_NE(miscalibration_axis(7), miscalibration_axis(8));
  EXPECT_NEAR(miscalibration_axis(7).norm(), 1.0, 1e-15);
}

TEST(Desync, ZeroAndConstant) {
  const auto s = ramp_stream(50);
  EXPECT_EQ(bytes_of(desync(s, 0.0)), bytes_of(s));
  const auto d = desync(s, 20.0);
  ASSERT_EQ(d.size(), s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    EXPECT_EQ(d[k].t_ns - s[k].t_ns, 20'000'000);
    EXPECT_EQ(d[k].gyro, s[k].gyro);
  }
}

TEST(Desync, JitterReplayAndOrder) {
  const auto s = ramp_stream(400);
  const auto a = desync(s, 20.0, DesyncMode::kJitter, 5);
  const auto b = desync(s, 20.0, DesyncMode::kJitter, 5);
  EXPECT_EQ(bytes_of(a), bytes_of(b));
  EXPECT_NE(bytes_of(a), bytes_of(desync(s, 20.0, DesyncMode::kJitter, 6)));
  EXPECT_NO_THROW(validate_stream(a));
  ASSERT_EQ(a.size(), s.size());
  // Samples stay within [t, t + offset] of some original.
  std::size_t reordered = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto src = static_cast<std::int64_t>(a[k].gyro.x()) * 5'000'000;
    EXPECT_GE(a[k].t_ns, src);
    EXPECT_LE(a[k].t_ns, src + 20'000'000 + 1);
    if (k > 0 && a[k].gyro.x() < a[k - 1].gyro.x()) ++reordered;
  }
  EXPECT_GT(reordered, 0u);
}

TEST(DropImu, RatesAndGoldenCount) {
  const auto s = ramp_stream(1000);
  EXPECT_EQ(bytes_of(drop_imu(s, 0.0, 3)), bytes_of(s));
  EXPECT_TRUE(drop_imu(s, 1.0, 3).empty());
  const auto d = drop_imu(s, 0.9, 2024);
  EXPECT_EQ(d.size(), 98u);  // golden; matches an independent SplitMix64 script
  EXPECT_EQ(bytes_of(d), bytes_of(drop_imu(s, 0.9, 2024)));
  for (std::size_t k = 1; k < d.size(); ++k) EXPECT_LT(d[k - 1].t_ns, d[k].t_ns);
}

TEST(DropFrames, EndpointsKeptAndListsParallel) {
  const SequenceManifest m = toy_manifest(200);
  const SequenceManifest all = drop_frames(m, 1.0, 4);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all.frame_t_ns.front(), m.frame_t_ns.front());
  EXPECT_EQ(all.frame_t_ns.back(), m.frame_t_ns.back());
  const SequenceManifest half = drop_frames(m, 0.5, 4);
  EXPECT_NO_THROW(half.validate());
  EXPECT_EQ(half.size(), 109u);  // golden; matches an independent SplitMix64 script
  for (std::size_t i = 0; i < half.size(); ++i) {
    const auto k = static_cast<std::size_t>(half.frame_t_ns[i] / 100'000'000);
    EXPECT_EQ(half.disparity[i], m.disparity[k]);
    EXPECT_EQ(half.gt_velocity[i].x(), double(k));
    EXPECT_EQ(half.ground_truth->entries[i].t, m.ground_truth->entries[k].t);
  }
  EXPECT_EQ(drop_frames(m, 0.0, 4).frame_t_ns, m.frame_t_ns);
}

TEST(DegradationSpec, Validation) {
  DegradationSpec s;
  EXPECT_NO_THROW(s.validate());
  s.imu_drop_rate = 0.9;
  EXPECT_THROW(s.validate(), Error);
  s.seed = 1;
  EXPECT_NO_THROW(s.validate());
  s.cam_drop_rate = 1.5;
  EXPECT_THROW(s.validate(), Error);
  DegradationSpec c;
  c.desync_ms = 20;  // constant mode needs no seed
  EXPECT_NO_THROW(c.validate());
  c.desync_mode = DesyncMode::kJitter;
  EXPECT_THROW(c.validate(), Error);
}

TEST(ApplyDegradation, TableConditionsReplayByteExact) {
  const SequenceManifest m = toy_manifest(100);
  DegradationSpec spec;
  spec.miscal_deg = 10;
  spec.desync_ms = 20;
  spec.imu_drop_rate = 0.9;
  spec.cam_drop_rate = 0.5;
  spec.seed = 77;
  const SequenceManifest a = apply_degradation(m, spec);
  const SequenceManifest b = apply_degradation(m, spec);
  EXPECT_EQ(bytes_of(a.imu), bytes_of(b.imu));
  EXPECT_EQ(a.frame_t_ns, b.frame_t_ns);
  EXPECT_EQ(a.rig.cam_to_imu.matrix(), b.rig.cam_to_imu.matrix());
  EXPECT_NEAR(rad2deg(rotation_angle(m.rig.cam_to_imu.rotation.inverse() * a.rig.cam_to_imu.rotation)),
              10.0, 1e-9);
  // Order: drops act on the desynced stream, so every survivor is shifted.
  for (const auto& x : a.imu) {
    EXPECT_EQ(x.t_ns - static_cast<std::int64_t>(x.gyro.x()) * 5'000'000, 20'000'000);
  }
  EXPECT_LT(a.imu.size(), m.imu.size() / 5);
  EXPECT_LT(a.size(), m.size());
  DegradationSpec none;
  const SequenceManifest c = apply_degradation(m, none);
  EXPECT_EQ(bytes_of(c.imu), bytes_of(m.imu));
  EXPECT_EQ(c.frame_t_ns, m.frame_t_ns);
}

}  // namespace
}  // namespace svio
