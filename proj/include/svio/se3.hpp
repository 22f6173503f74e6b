#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "svio/error.hpp"

namespace svio {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat34 = Eigen::Matrix<double, 3, 4>;

/// Below this angle the exp/log/Jacobian maps switch to Taylor series.
inline constexpr double kSmallAngle = 1e-6;
/// Orthonormality tolerance accepted by `Rotation::from_matrix`.
inline constexpr double kOrthonormalTol = 1e-9;
/// Composition re-projects onto SO(3) once drift exceeds this.
inline constexpr double kDriftTol = 1e-7;

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

inline double orthonormality_error(const Mat3& m) {
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
}

/// Element of SO(3), stored as a matrix. Every instance satisfies
/// |RᵀR - I| <= 1e-9 elementwise and det(R) = +1.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  static Rotation identity() { return Rotation(); }

  /// Accepts `m` unchanged if it is a rotation within 1e-9, throws otherwise.
  static Rotation from_matrix(const Mat3& m) {
    if (!m.allFinite() || orthonormality_error(m) > kOrthonormalTol ||
        std::abs(m.determinant() - 1.0) > kOrthonormalTol) {
      throw Error(ErrorKind::kInvalidArgument, "matrix is not a rotation");
    }
    return Rotation(m);
  }

  /// Closest rotation in the Frobenius sense (polar decomposition).
  static Rotation nearest(const Mat3& m) {
    if (!m.allFinite()) {
      throw Error(ErrorKind::kInvalidArgument, "non-finite rotation matrix");
    }
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 d = Mat3::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
      d(2, 2) = -1.0;
    }
    return Rotation(svd.matrixU() * d * svd.matrixV().transpose());
  }

  /// Keeps `m` as-is when already orthonormal to 1e-9, projects otherwise.
  /// Used at parser boundaries where files carry a few significant digits.
  static Rotation from_matrix_or_nearest(const Mat3& m) {
    if (m.allFinite() && orthonormality_error(m) <= kOrthonormalTol &&
        std::abs(m.determinant() - 1.0) <= kOrthonormalTol) {
      return Rotation(m);
    }
    return nearest(m);
  }

  static Rotation from_quaternion(const Eigen::Quaterniond& q) {
    if (q.norm() < 1e-12 || !q.coeffs().allFinite()) {
      throw Error(ErrorKind::kInvalidArgument, "degenerate quaternion");
    }
    return nearest(q.normalized().toRotationMatrix());
  }

  Eigen::Quaterniond quaternion() const { return Eigen::Quaterniond(m_); }

  const Mat3& matrix() const { return m_; }

  Rotation inverse() const { return Rotation(m_.transpose()); }

  Rotation operator*(const Rotation& other) const {
    Mat3 m = m_ * other.m_;
    if (orthonormality_error(m) > kDriftTol) return nearest(m);
    return Rotation(m);
  }

  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}

  friend Rotation so3_exp(const Vec3& omega);

  Mat3 m_;
};

/// Rodrigues' formula.
inline Rotation so3_exp(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a;
  double b;
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    const double s = std::sin(0.5 * theta);
    b = 2.0 * s * s / theta2;
  }
  const Mat3 w = skew(omega);
  Mat3 m = Mat3::Identity() + a * w + b * w * w;
  if (orthonormality_error(m) > kDriftTol) return Rotation::nearest(m);
  return Rotation(m);
}

/// Logarithm onto the canonical range |omega| <= pi.
///
/// The angle comes from atan2(|vee(R - Rᵀ)|/2, (tr R - 1)/2), which stays
/// accurate at both ends of the range. Once cos(theta) < -0.99 the axis is
/// taken from the column of (R + Rᵀ)/2 - cos(theta) I with the largest
/// diagonal, and its sign from the skew part. At exactly pi the skew part
/// vanishes and the sign is chosen so the largest-magnitude component of the
/// axis is positive.
inline Vec3 so3_log(const Rotation& r) {
  const Mat3& m = r.matrix();
  const Vec3 s(0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)),
               0.5 * (m(1, 0) - m(0, 1)));
  const double sin_theta = s.norm();
  const double cos_theta = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(sin_theta, cos_theta);

  if (cos_theta > -0.99) {
    if (theta < kSmallAngle) {
      return (1.0 + theta * theta / 6.0) * s;
    }
    return (theta / sin_theta) * s;
  }

  const Mat3 b = 0.5 * (m + m.transpose()) - cos_theta * Mat3::Identity();
  int k = 0;
  b.diagonal().maxCoeff(&k);
  Vec3 axis = b.col(k).normalized();
  const double dot = axis.dot(s);
  if (std::abs(dot) > 1e-12) {
    if (dot < 0.0) axis = -axis;
  } else {
    int j = 0;
    axis.cwiseAbs().maxCoeff(&j);
    if (axis[j] < 0.0) axis = -axis;
  }
  return theta * axis;
}

inline double rotation_angle(const Rotation& r) { return so3_log(r).norm(); }

/// Left Jacobian of SO(3); also the V matrix of the SE(3) exponential.
inline Mat3 so3_left_jacobian(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 w = skew(omega);
  double b;
  double c;
  if (theta < kSmallAngle) {
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    const double s = std::sin(0.5 * theta);
    b = 2.0 * s * s / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  return Mat3::Identity() + b * w + c * w * w;
}

inline Mat3 so3_left_jacobian_inverse(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 w = skew(omega);
  double c;
  if (theta < kSmallAngle) {
    c = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    // 1 - theta sin(theta) / (2 (1 - cos theta)) = 1 - (theta/2) cot(theta/2)
    const double half = 0.5 * theta;
    c = (1.0 - half * std::cos(half) / std::sin(half)) / theta2;
  }
  return Mat3::Identity() - 0.5 * w + c * w * w;
}

inline Mat3 so3_right_jacobian(const Vec3& omega) {
  return so3_left_jacobian(-omega);
}

inline Mat3 so3_right_jacobian_inverse(const Vec3& omega) {
  return so3_left_jacobian_inverse(-omega);
}

/// se(3) tangent vector. Serialized everywhere as (omega, upsilon).
struct Se3Tangent {
  Vec3 omega = Vec3::Zero();
  Vec3 upsilon = Vec3::Zero();

  Vec6 vector() const {
    Vec6 v;
    v << omega, upsilon;
    return v;
  }

  static Se3Tangent from_vector(const Vec6& v) {
    return Se3Tangent{v.head<3>(), v.tail<3>()};
  }

  bool all_finite() const { return omega.allFinite() && upsilon.allFinite(); }
};

/// Rigid motion x -> R x + t.
struct RigidTransform {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return RigidTransform(); }

  static RigidTransform from_translation(const Vec3& t) {
    return RigidTransform{Rotation::identity(), t};
  }

  RigidTransform inverse() const {
    const Rotation rt = rotation.inverse();
    return RigidTransform{rt, -(rt * translation)};
  }

  RigidTransform operator*(const RigidTransform& b) const {
    return RigidTransform{rotation * b.rotation,
                          rotation * b.translation + translation};
  }

  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }

  Mat34 matrix34() const {
    Mat34 m;
    m.leftCols<3>() = rotation.matrix();
    m.col(3) = translation;
    return m;
  }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topRows<3>() = matrix34();
    return m;
  }
};

inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return a * b;
}

inline RigidTransform inverse(const RigidTransform& t) { return t.inverse(); }

inline Vec3 transform_point(const RigidTransform& t, const Vec3& p) {
  return t * p;
}

inline RigidTransform se3_exp(const Se3Tangent& xi) {
  return RigidTransform{so3_exp(xi.omega),
                        so3_left_jacobian(xi.omega) * xi.upsilon};
}

inline Se3Tangent se3_log(const RigidTransform& t) {
  const Vec3 omega = so3_log(t.rotation);
  return Se3Tangent{omega, so3_left_jacobian_inverse(omega) * t.translation};
}

/// Relative pose a⁻¹ b.
inline RigidTransform between(const RigidTransform& a, const RigidTransform& b) {
  return a.inverse() * b;
}

/// Rigid transform scaled along its geodesic: exp(s · log(T)).
inline RigidTransform scale_motion(const RigidTransform& t, double s) {
  const Se3Tangent xi = se3_log(t);
  return se3_exp(Se3Tangent{s * xi.omega, s * xi.upsilon});
}

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace svio
