#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "svio/se3.hpp"
#include "test_util.hpp"

namespace svio {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(So3, ExpOfZeroIsIdentity) {
  EXPECT_TRUE(so3_exp(Vec3::Zero()).matrix().isIdentity(0.0));
}

TEST(So3, QuarterTurnAboutZ) {
  const Rotation r = so3_exp(Vec3(0, 0, kPi / 2));
  EXPECT_LT((r * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm(), 1e-15);
}

TEST(So3, LogOfIdentityIsZero) {
  EXPECT_EQ(so3_log(Rotation::identity()), Vec3::Zero());
}

TEST(So3, HalfTurnAboutXUsesCanonicalSign) {
  Mat3 m = Vec3(1, -1, -1).asDiagonal();
  const Vec3 w = so3_log(Rotation::from_matrix(m));
  EXPECT_NEAR(w.x(), kPi, 1e-15);
  EXPECT_EQ(w.y(), 0.0);
  EXPECT_EQ(w.z(), 0.0);
}

TEST(So3, HalfTurnIsDeterministicForAllAxes) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vec3 axis = test::random_unit(rng);
    const Rotation r = so3_exp(kPi * axis);
    const Vec3 w = so3_log(r);
    EXPECT_NEAR(w.norm(), kPi, 1e-12);
    EXPECT_LT((so3_exp(w).matrix() - r.matrix()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_EQ(w, so3_log(r));
  }
}

TEST(So3, LogExpRoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 w = test::random_rotation_vector(rng, kPi - 1e-6);
    EXPECT_LT((so3_log(so3_exp(w)) - w).norm(), 1e-10) << w.transpose();
  }
}

TEST(So3, ExpLogRoundTrip) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 2000; ++i) {
    const Rotation r = test::random_rotation(rng);
    const Mat3 back = so3_exp(so3_log(r)).matrix();
    EXPECT_LT((back - r.matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(So3, AngleOfExpEqualsNorm) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 w = test::random_rotation_vector(rng, kPi - 1e-6);
    EXPECT_NEAR(rotation_angle(so3_exp(w)), w.norm(), 1e-10);
  }
}

TEST(So3, SmallAngleBranchIsContinuous) {
  for (double theta : {1e-12, 1e-9, 9.9e-7, 1.01e-6, 1e-5, 1e-3}) {
    const Vec3 w = theta * Vec3(0.3, -0.5, 0.81).normalized();
    EXPECT_LT((so3_log(so3_exp(w)) - w).norm(), 1e-15 + 1e-10 * theta);
    const Mat3 v = so3_left_jacobian(w);
    const Mat3 vi = so3_left_jacobian_inverse(w);
    EXPECT_LT((v * vi - Mat3::Identity()).norm(), 1e-14);
  }
}

TEST(So3, FromMatrixRejectsNonRotation) {
  Mat3 m = Mat3::Identity();
  m(0, 0) = 1.001;
  EXPECT_THROW(Rotation::from_matrix(m), Error);
  EXPECT_THROW(Rotation::from_matrix(-Mat3::Identity()), Error);
  EXPECT_NO_THROW(Rotation::nearest(m));
}

TEST(So3, LeftJacobianMatchesFiniteDifferences) {
  // exp(w + dw) ≈ exp(J_l(w) dw) exp(w)
  std::mt19937_64 rng(14);
  for (int i = 0; i < 50; ++i) {
    const Vec3 w = test::random_rotation_vector(rng, 3.0);
    const Mat3 jl = so3_left_jacobian(w);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      const Vec3 dw = h * Vec3::Unit(k);
      const Vec3 plus = so3_log(so3_exp(w + dw) * so3_exp(w).inverse());
      const Vec3 minus = so3_log(so3_exp(w - dw) * so3_exp(w).inverse());
      EXPECT_LT(((plus - minus) / (2 * h) - jl.col(k)).norm(), 1e-7);
    }
  }
}

TEST(Se3, IdentityLogIsZero) {
  EXPECT_EQ(se3_log(RigidTransform::identity()).vector(), Vec6::Zero());
}

TEST(Se3, PureTranslationLog) {
  const Se3Tangent xi = se3_log(RigidTransform::from_translation(Vec3(1, 2, 3)));
  EXPECT_EQ(xi.omega, Vec3::Zero());
  EXPECT_EQ(xi.upsilon, Vec3(1, 2, 3));
}

TEST(Se3, ExpOfUnitUpsilonIsPureTranslation) {
  const RigidTransform t = se3_exp(Se3Tangent{Vec3::Zero(), Vec3(1, 0, 0)});
  EXPECT_TRUE(t.rotation.matrix().isIdentity(0.0));
  EXPECT_EQ(t.translation, Vec3(1, 0, 0));
  EXPECT_TRUE(se3_exp(Se3Tangent{}).matrix().isIdentity(0.0));
}

TEST(Se3, RoundTrips) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 2000; ++i) {
    const RigidTransform t = test::random_transform(rng, 10.0);
    const RigidTransform back = se3_exp(se3_log(t));
    EXPECT_LT((back.matrix() - t.matrix()).cwiseAbs().maxCoeff(), 1e-9);

    Se3Tangent xi{test::random_rotation_vector(rng, kPi - 1e-6),
                  test::random_vec(rng, 5.0)};
    EXPECT_LT((se3_log(se3_exp(xi)).vector() - xi.vector()).norm(), 1e-9);
  }
}

TEST(Se3, GroupAxioms) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 500; ++i) {
    const RigidTransform a = test::random_transform(rng, 5.0);
    const RigidTransform b = test::random_transform(rng, 5.0);
    const Vec3 p = test::random_vec(rng, 20.0);
    EXPECT_LT((compose(a, inverse(a)).matrix() - Mat4::Identity()).norm(), 1e-12);
    EXPECT_EQ(transform_point(RigidTransform::identity(), p), p);
    EXPECT_LT((compose(a, b) * p - a * (b * p)).norm(), 1e-10);
  }
}

TEST(Se3, CompositionStaysOrthonormal) {
  std::mt19937_64 rng(23);
  Rotation r;
  for (int i = 0; i < 100000; ++i) r = r * test::random_rotation(rng);
  EXPECT_LE(orthonormality_error(r.matrix()), kDriftTol);
  EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-9);
}

TEST(Se3, ScaleMotionInterpolatesGeodesic) {
  const RigidTransform t = se3_exp(Se3Tangent{Vec3(0, 0, 0.2), Vec3(1, 0, 0)});
  const RigidTransform half = scale_motion(t, 0.5);
  EXPECT_LT(((half * half).matrix() - t.matrix()).norm(), 1e-12);
}

}  // namespace
}  // namespace svio
