#pragma once

#include "gsedit/math.hpp"

#include <filesystem>
#include <vector>

namespace gsedit {

/// One anisotropic 3D Gaussian. The *_init fields are the immutable snapshot taken
/// when an edit session starts; regularizers compare current values against them.
/// Scales live in log domain, opacity and color in logit domain.
struct Gaussian3D {
  Vec3 mu_init = Vec3::Zero();
  Vec3 mu = Vec3::Zero();
  Vec4 q_init = quat_identity();
  Vec4 q = quat_identity();
  Vec3 log_scale_init = Vec3::Zero();
  Vec3 log_scale = Vec3::Zero();
  double opacity_logit = 0.0;
  Vec3 color_init = Vec3::Zero();  // RGB logits
  Vec3 color = Vec3::Zero();       // RGB logits

  double opacity() const { return sigmoid(opacity_logit); }
  Vec3 rgb() const { return sigmoid3(color); }
  Vec3 scale() const { return log_scale.array().exp(); }
  Mat3 covariance() const;
};

/// Sigma = R * diag(exp(log_scale))^2 * R^T, always SPD.
Mat3 build_covariance(const Vec4& q, const Vec3& log_scale);

struct GaussianScene {
  std::vector<Gaussian3D> gaussians;
  Vec3 background = Vec3::Ones();  // RGB in [0,1]
  Aabb bbox;

  std::size_t size() const { return gaussians.size(); }

  /// Recomputes bbox from the mu_init of every Gaussian.
  void recompute_bbox();

  /// Copies all current values into the *_init snapshot (new edit session).
  void snapshot_init();

  /// Resets current values from the *_init snapshot.
  void reset_to_init();
};

/// Pinhole camera. world_to_cam is a rigid transform; its rotation block is the
/// view matrix W used when splatting covariances.
struct Camera {
  int width = 0;
  int height = 0;
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  Mat4 world_to_cam = Mat4::Identity();
  double near = 0.01;

  Mat3 rotation() const { return world_to_cam.block<3, 3>(0, 0); }
  Vec3 translation() const { return world_to_cam.block<3, 1>(0, 3); }
  double diagonal_px() const { return std::sqrt(double(width) * width + double(height) * height); }

  /// Throws std::invalid_argument if intrinsics are out of range or the rotation
  /// block is not orthonormal within 1e-6.
  void validate() const;

  /// Simple constructor for a camera at `eye` looking at `target` (up = +y).
  static Camera look_at(const Vec3& eye, const Vec3& target, int width, int height,
                        double focal_px, const Vec3& up = {0, 1, 0});
};

Camera load_camera(const std::filesystem::path& path);
void save_camera(const Camera& cam, const std::filesystem::path& path);

}  // namespace gsedit
