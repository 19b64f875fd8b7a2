#pragma once

#include "gsedit/image.hpp"
#include "gsedit/scene.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gsedit {

struct RenderSettings {
  double alpha_min = 1.0 / 255.0;   // fragments below this alpha are skipped
  double transmittance_min = 1e-4;  // front-to-back blending stops below this
  double extent_sigmas = 3.0;       // splat raster radius in sigmas of the major axis; 0 = full image
  double dilation = 0.3;            // px^2 added to the 2D covariance diagonal
  int threads = 0;                  // 0 = hardware concurrency; results are thread-count invariant
};

/// A 3D Gaussian projected to the image plane.
struct Splat2D {
  int gaussian_index = -1;
  Vec2 mu2d = Vec2::Zero();     // pixels
  Mat2 cov2d = Mat2::Identity();  // pixels^2, dilation included
  double depth = 0.0;             // camera-space z
  double alpha_base = 0.0;        // sigmoid(opacity_logit)
};

/// One compositing contribution: blend_weight = alpha_i * prod_{j<i} (1 - alpha_j).
struct Fragment {
  std::uint32_t splat = 0;  // index into RenderOutput::splats
  double blend_weight = 0.0;
};

struct RenderOutput {
  Image image;
  std::vector<double> alpha_map;           // H*W coverage, 1 - final transmittance
  std::vector<Splat2D> splats;             // visible splats sorted by (depth, gaussian_index)
  std::vector<std::uint32_t> frag_offset;  // H*W+1, CSR offsets into fragments
  std::vector<Fragment> fragments;         // per pixel, front-to-back

  std::span<const Fragment> fragments_at(int y, int x) const {
    const std::size_t p = static_cast<std::size_t>(y) * image.width + x;
    return {fragments.data() + frag_offset[p], fragments.data() + frag_offset[p + 1]};
  }
};

/// Per-Gaussian parameter gradients, one entry per scene Gaussian.
struct SceneGrads {
  std::vector<Vec3> mu;
  std::vector<Vec4> q;
  std::vector<Vec3> log_scale;
  std::vector<double> opacity_logit;
  std::vector<Vec3> color;

  explicit SceneGrads(std::size_t n = 0) { resize(n); }
  void resize(std::size_t n);
  void set_zero();
  void add(const SceneGrads& other);
  std::size_t size() const { return mu.size(); }
};

/// EWA projection of one Gaussian; nullopt when culled (depth <= cam.near).
std::optional<Splat2D> project_gaussian(const Gaussian3D& g, const Camera& cam,
                                        const RenderSettings& settings = {});

/// Pulls 2D-space gradients (w.r.t. mu2d and dilated cov2d) back to the 3D
/// parameters mu, q and log_scale of one Gaussian.
void project_gaussian_backward(const Gaussian3D& g, const Camera& cam, const Vec2& dL_dmu2d,
                               const Mat2& dL_dcov2d, Vec3& dL_dmu, Vec4& dL_dq,
                               Vec3& dL_dlog_scale);

RenderOutput render_forward(const GaussianScene& scene, const Camera& cam,
                            const RenderSettings& settings = {});

/// Analytic gradient of sum(dL_dimage .* image) w.r.t. all Gaussian parameters.
/// `out` must come from render_forward on the same scene state.
SceneGrads render_backward_color(const GaussianScene& scene, const Camera& cam,
                                 const RenderOutput& out, const Image& dL_dimage,
                                 const RenderSettings& settings = {});

}  // namespace gsedit
