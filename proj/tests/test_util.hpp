#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "svio/se3.hpp"
#include "svio/stereo_geometry.hpp"

namespace svio::test {

inline Vec3 random_vec(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

/// Rotation vector with angle uniform in [0, max_angle).
inline Vec3 random_rotation_vector(std::mt19937_64& rng, double max_angle) {
  std::uniform_real_distribution<double> u(0.0, max_angle);
  return u(rng) * random_unit(rng);
}

inline Rotation random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return Rotation::from_quaternion(q);
}

inline RigidTransform random_transform(std::mt19937_64& rng, double scale) {
  return RigidTransform{random_rotation(rng), random_vec(rng, scale)};
}

inline double max_abs_diff(const Mat4& a, const Mat4& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("svio_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path data_dir() {
  const char* env = std::getenv("SVIO_TEST_DATA");
  return env ? std::filesystem::path(env) : std::filesystem::path("tests/data");
}

}  // namespace svio::test

namespace svio::test {

/// Asymmetric surface-sampled scene (floor, two walls, a sphere and a box)
/// roughly 6 m across, with points tagged by a fake pixel index.
inline PointCloud structured_cloud(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud c;
  c.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = u(rng);
    Vec3 p;
    if (pick < 0.35) {
      p = Vec3(-3 + 6 * u(rng), -3 + 6 * u(rng), 0.0);
    } else if (pick < 0.55) {
      p = Vec3(3.0, -3 + 6 * u(rng), 2.5 * u(rng));
    } else if (pick < 0.7) {
      p = Vec3(-3 + 4 * u(rng), 3.0, 1.8 * u(rng));
    } else if (pick < 0.85) {
      p = Vec3(-0.5, 0.3, 0.8) + 0.7 * random_unit(rng);
    } else {
      const int face = static_cast<int>(u(rng) * 3);
      Vec3 q(u(rng), u(rng), u(rng));
      q[face] = 1.0;
      p = Vec3(1.0, -1.5, 0.0) + q.cwiseProduct(Vec3(0.8, 1.2, 0.6));
    }
    c.push_back(p, PixelCoord{static_cast<std::uint32_t>(i % 4096),
                              static_cast<std::uint32_t>(i / 4096)});
  }
  return c;
}

inline PointCloud transformed(const PointCloud& c, const RigidTransform& t) {
  PointCloud out = c;
  for (auto& p : out.points) p = t * p;
  return out;
}

}  // namespace svio::test
