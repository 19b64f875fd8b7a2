#include "gsedit/math.hpp"

#include <stdexcept>

namespace gsedit {

Vec4 quat_normalize(const Vec4& q) {
  const double n = q.norm();
  if (!(n > 0.0)) {
    throw std::invalid_argument("degenerate quaternion");
  }
  return q / n;
}

Vec4 quat_mul(const Vec4& a, const Vec4& b) {
  return quat_normalize(quat_left_matrix(a) * b);
}

Vec4 quat_conjugate(const Vec4& q) { return {q[0], -q[1], -q[2], -q[3]}; }

Vec4 quat_identity() { return {1.0, 0.0, 0.0, 0.0}; }

Vec4 quat_from_axis_angle(const Vec3& axis, double angle) {
  const Vec3 u = axis.normalized();
  const double h = 0.5 * angle;
  const double s = std::sin(h);
  return {std::cos(h), s * u.x(), s * u.y(), s * u.z()};
}

Mat3 quat_to_rotmat(const Vec4& q) {
  const Vec4 u = quat_normalize(q);
  const double w = u[0], x = u[1], y = u[2], z = u[3];
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

namespace {

// dR/du_k for the quadratic form above, at a unit quaternion u.
std::array<Mat3, 4> rotmat_jacobian_unit(const Vec4& u) {
  const double w = u[0], x = u[1], y = u[2], z = u[3];
  std::array<Mat3, 4> d;
  d[0] << 0, -z, y, z, 0, -x, -y, x, 0;
  d[1] << 0, y, z, y, -2 * x, -w, z, w, -2 * x;
  d[2] << -2 * y, x, w, x, 0, z, -w, z, -2 * y;
  d[3] << -2 * z, -w, x, w, -2 * z, y, x, y, 0;
  for (auto& m : d) m *= 2.0;
  return d;
}

}  // namespace

std::array<Mat3, 4> quat_to_rotmat_jacobian(const Vec4& q) {
  const double n = q.norm();
  if (!(n > 0.0)) {
    throw std::invalid_argument("degenerate quaternion");
  }
  const Vec4 u = q / n;
  const auto d_unit = rotmat_jacobian_unit(u);
  // Chain through u = q/|q|: du_l/dq_k = (delta_lk - u_l u_k) / n.
  std::array<Mat3, 4> d;
  for (int k = 0; k < 4; ++k) {
    Mat3 m = Mat3::Zero();
    for (int l = 0; l < 4; ++l) {
      const double j = ((l == k ? 1.0 : 0.0) - u[l] * u[k]) / n;
      m += d_unit[l] * j;
    }
    d[k] = m;
  }
  return d;
}

Mat4 quat_left_matrix(const Vec4& a) {
  const double w = a[0], x = a[1], y = a[2], z = a[3];
  Mat4 m;
  m << w, -x, -y, -z,
      x, w, -z, y,
      y, z, w, -x,
      z, -y, x, w;
  return m;
}

Mat4 quat_right_matrix(const Vec4& b) {
  const double w = b[0], x = b[1], y = b[2], z = b[3];
  Mat4 m;
  m << w, -x, -y, -z,
      x, w, z, -y,
      y, -z, w, x,
      z, y, -x, w;
  return m;
}

Mat4 normalize_jacobian(const Vec4& v) {
  const double n = v.norm();
  if (!(n > 0.0)) {
    throw std::invalid_argument("degenerate quaternion");
  }
  const Vec4 u = v / n;
  return (Mat4::Identity() - u * u.transpose()) / n;
}

double inv_sigmoid_at_least(double y) {
  double x = inv_sigmoid(y);
  while (sigmoid(x) < y) {
    x = std::nextafter(x, std::numeric_limits<double>::infinity());
  }
  return x;
}

}  // namespace gsedit
