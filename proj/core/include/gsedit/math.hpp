#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>

namespace gsedit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

// Quaternions are stored as (w, x, y, z).

/// Scales q to unit norm. Throws std::invalid_argument on zero-norm input.
Vec4 quat_normalize(const Vec4& q);

/// Hamilton product a*b, renormalized. Rotating by the result applies b first, then a.
Vec4 quat_mul(const Vec4& a, const Vec4& b);

Vec4 quat_conjugate(const Vec4& q);

Vec4 quat_identity();

/// Unit quaternion for a rotation of `angle` radians about `axis` (need not be unit).
Vec4 quat_from_axis_angle(const Vec3& axis, double angle);

/// Rotation matrix of q/|q|.
Mat3 quat_to_rotmat(const Vec4& q);

/// d R(q/|q|) / d q_k for k in {w,x,y,z}, including the normalization Jacobian.
std::array<Mat3, 4> quat_to_rotmat_jacobian(const Vec4& q);

/// 4x4 matrix L(a) such that a*b = L(a)*b (raw Hamilton product, no renormalization).
Mat4 quat_left_matrix(const Vec4& a);

/// 4x4 matrix R(b) such that a*b = R(b)*a.
Mat4 quat_right_matrix(const Vec4& b);

/// Jacobian of v -> v/|v| evaluated at v.
Mat4 normalize_jacobian(const Vec4& v);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double sigmoid_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 - s);
}
inline double inv_sigmoid(double y) { return std::log(y / (1.0 - y)); }

/// Smallest x (up to a few ulps) with sigmoid(x) >= y. Used by the mask reset so
/// the clamp is exact under round-tripping through sigmoid.
double inv_sigmoid_at_least(double y);

inline Vec3 sigmoid3(const Vec3& v) { return {sigmoid(v.x()), sigmoid(v.y()), sigmoid(v.z())}; }
inline Vec3 sigmoid_grad3(const Vec3& v) {
  return {sigmoid_grad(v.x()), sigmoid_grad(v.y()), sigmoid_grad(v.z())};
}

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 max = Vec3::Constant(std::numeric_limits<double>::lowest());

  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  bool valid() const { return (max.array() >= min.array()).all(); }
};

}  // namespace gsedit
