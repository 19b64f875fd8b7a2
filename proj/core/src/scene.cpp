#include "gsedit/scene.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>

namespace gsedit {

Mat3 build_covariance(const Vec4& q, const Vec3& log_scale) {
  const Mat3 r = quat_to_rotmat(q);
  const Vec3 s2 = (2.0 * log_scale).array().exp();
  return r * s2.asDiagonal() * r.transpose();
}

Mat3 Gaussian3D::covariance() const { return build_covariance(q, log_scale); }

void GaussianScene::recompute_bbox() {
  bbox = Aabb{};
  for (const auto& g : gaussians) bbox.expand(g.mu_init);
}

void GaussianScene::snapshot_init() {
  for (auto& g : gaussians) {
    g.mu_init = g.mu;
    g.q_init = g.q;
    g.log_scale_init = g.log_scale;
    g.color_init = g.color;
  }
  recompute_bbox();
}

void GaussianScene::reset_to_init() {
  for (auto& g : gaussians) {
    g.mu = g.mu_init;
    g.q = g.q_init;
    g.log_scale = g.log_scale_init;
    g.color = g.color_init;
  }
}

void Camera::validate() const {
  if (width < 16 || height < 16) throw std::invalid_argument("camera: width/height must be >= 16");
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("camera: fx and fy must be > 0");
  if (!(near > 0.0)) throw std::invalid_argument("camera: near must be > 0");
  const Mat3 r = rotation();
  if ((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
    throw std::invalid_argument("camera: world_to_cam rotation block is not orthonormal");
  }
  const Eigen::RowVector4d bottom = world_to_cam.row(3);
  if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("camera: world_to_cam bottom row must be (0,0,0,1)");
  }
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, int width, int height,
                       double focal_px, const Vec3& up) {
  // Camera frame: +z forward (into the scene), +x right, +y down.
  const Vec3 fwd = (target - eye).normalized();
  Vec3 right = fwd.cross(-up);
  if (right.norm() < 1e-12) right = fwd.cross(Vec3(1, 0, 0));
  right.normalize();
  const Vec3 down = fwd.cross(right).normalized();

  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = fwd.transpose();

  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = focal_px;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.world_to_cam = Mat4::Identity();
  cam.world_to_cam.block<3, 3>(0, 0) = r;
  cam.world_to_cam.block<3, 1>(0, 3) = -r * eye;
  return cam;
}

Camera load_camera(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open camera file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("camera json parse error in " + path.string() + ": " + e.what());
  }
  Camera cam;
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  cam.near = j.value("near", 0.01);
  const auto& m = j.at("world_to_cam");
  if (!m.is_array() || m.size() != 16) {
    throw std::runtime_error("camera json: world_to_cam must be a flat 16-element row-major array");
  }
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) cam.world_to_cam(r, c) = m[4 * r + c].get<double>();
  cam.validate();
  return cam;
}

void save_camera(const Camera& cam, const std::filesystem::path& path) {
  nlohmann::json j;
  j["width"] = cam.width;
  j["height"] = cam.height;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  j["near"] = cam.near;
  std::vector<double> m(16);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m[4 * r + c] = cam.world_to_cam(r, c);
  j["world_to_cam"] = m;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write camera file: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace gsedit
