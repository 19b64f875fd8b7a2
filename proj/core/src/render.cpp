#include "gsedit/render.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gsedit {

namespace {

constexpr int kBands = 16;

struct SplatExtent {
  int x0, x1, y0, y1;  // half-open pixel ranges
  Mat2 inv_cov;
};

SplatExtent splat_extent(const Splat2D& s, int width, int height, double extent_sigmas) {
  SplatExtent e;
  e.inv_cov = s.cov2d.inverse();
  if (extent_sigmas <= 0.0) {
    e.x0 = 0;
    e.x1 = width;
    e.y0 = 0;
    e.y1 = height;
    return e;
  }
  // Major-axis extent; eigenvalues of a symmetric 2x2.
  const double mid = 0.5 * (s.cov2d(0, 0) + s.cov2d(1, 1));
  const double det = s.cov2d(0, 0) * s.cov2d(1, 1) - s.cov2d(0, 1) * s.cov2d(1, 0);
  const double lambda_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
  const double r = extent_sigmas * std::sqrt(std::max(0.0, lambda_max));
  e.x0 = std::max(0, static_cast<int>(std::floor(s.mu2d.x() - r)));
  e.x1 = std::min(width, static_cast<int>(std::ceil(s.mu2d.x() + r)) + 1);
  e.y0 = std::max(0, static_cast<int>(std::floor(s.mu2d.y() - r)));
  e.y1 = std::min(height, static_cast<int>(std::ceil(s.mu2d.y() + r)) + 1);
  e.x0 = std::min(e.x0, width);
  e.y0 = std::min(e.y0, height);
  e.x1 = std::max(e.x1, e.x0);
  e.y1 = std::max(e.y1, e.y0);
  return e;
}

}  // namespace

void SceneGrads::resize(std::size_t n) {
  mu.assign(n, Vec3::Zero());
  q.assign(n, Vec4::Zero());
  log_scale.assign(n, Vec3::Zero());
  opacity_logit.assign(n, 0.0);
  color.assign(n, Vec3::Zero());
}

void SceneGrads::set_zero() { resize(size()); }

void SceneGrads::add(const SceneGrads& other) {
  for (std::size_t i = 0; i < size(); ++i) {
    mu[i] += other.mu[i];
    q[i] += other.q[i];
    log_scale[i] += other.log_scale[i];
    opacity_logit[i] += other.opacity_logit[i];
    color[i] += other.color[i];
  }
}

std::optional<Splat2D> project_gaussian(const Gaussian3D& g, const Camera& cam,
                                        const RenderSettings& settings) {
  const Mat3 r_wc = cam.rotation();
  const Vec3 t = r_wc * g.mu + cam.translation();
  if (t.z() <= cam.near) return std::nullopt;

  const double invz = 1.0 / t.z();
  Splat2D s;
  s.gaussian_index = -1;
  s.depth = t.z();
  s.alpha_base = g.opacity();
  s.mu2d = {cam.fx * t.x() * invz + cam.cx, cam.fy * t.y() * invz + cam.cy};

  Mat23 jac;
  jac << cam.fx * invz, 0.0, -cam.fx * t.x() * invz * invz,
      0.0, cam.fy * invz, -cam.fy * t.y() * invz * invz;

  const Mat3 cov_cam = r_wc * g.covariance() * r_wc.transpose();
  s.cov2d = jac * cov_cam * jac.transpose();
  s.cov2d(0, 0) += settings.dilation;
  s.cov2d(1, 1) += settings.dilation;
  return s;
}

void project_gaussian_backward(const Gaussian3D& g, const Camera& cam, const Vec2& dL_dmu2d,
                               const Mat2& dL_dcov2d, Vec3& dL_dmu, Vec4& dL_dq,
                               Vec3& dL_dlog_scale) {
  const Mat3 r_wc = cam.rotation();
  const Vec3 t = r_wc * g.mu + cam.translation();
  const double invz = 1.0 / t.z();
  const double invz2 = invz * invz;

  Mat23 jac;
  jac << cam.fx * invz, 0.0, -cam.fx * t.x() * invz2,
      0.0, cam.fy * invz, -cam.fy * t.y() * invz2;

  const Mat3 rot = quat_to_rotmat(g.q);
  const Vec3 s2 = (2.0 * g.log_scale).array().exp();
  const Mat3 sigma3 = rot * s2.asDiagonal() * rot.transpose();
  const Mat3 cov_cam = r_wc * sigma3 * r_wc.transpose();

  const Mat2 g_cov = 0.5 * (dL_dcov2d + dL_dcov2d.transpose());

  // mu2d path: dmu2d/dt is exactly the EWA Jacobian.
  Vec3 g_t = jac.transpose() * dL_dmu2d;

  // cov2d path through J(t).
  const Mat23 g_jac = 2.0 * g_cov * jac * cov_cam;
  g_t.x() += g_jac(0, 2) * (-cam.fx * invz2);
  g_t.y() += g_jac(1, 2) * (-cam.fy * invz2);
  g_t.z() += g_jac(0, 0) * (-cam.fx * invz2) + g_jac(1, 1) * (-cam.fy * invz2) +
             g_jac(0, 2) * (2.0 * cam.fx * t.x() * invz2 * invz) +
             g_jac(1, 2) * (2.0 * cam.fy * t.y() * invz2 * invz);

  dL_dmu += r_wc.transpose() * g_t;

  // cov2d path through the 3D covariance.
  const Mat3 g_cov_cam = jac.transpose() * g_cov * jac;
  const Mat3 g_sigma3 = r_wc.transpose() * g_cov_cam * r_wc;

  const Mat3 g_rot = 2.0 * g_sigma3 * rot * s2.asDiagonal();
  const auto drot = quat_to_rotmat_jacobian(g.q);
  for (int k = 0; k < 4; ++k) dL_dq[k] += g_rot.cwiseProduct(drot[k]).sum();

  const Mat3 rt_g_r = rot.transpose() * g_sigma3 * rot;
  for (int k = 0; k < 3; ++k) dL_dlog_scale[k] += 2.0 * s2[k] * rt_g_r(k, k);
}

RenderOutput render_forward(const GaussianScene& scene, const Camera& cam,
                            const RenderSettings& settings) {
  cam.validate();
  const int w = cam.width;
  const int h = cam.height;

  RenderOutput out;
  out.image = Image(w, h);
  out.alpha_map.assign(static_cast<std::size_t>(w) * h, 0.0);

  out.splats.reserve(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    auto s = project_gaussian(scene.gaussians[i], cam, settings);
    if (!s) continue;
    s->gaussian_index = static_cast<int>(i);
    out.splats.push_back(*s);
  }
  std::sort(out.splats.begin(), out.splats.end(), [](const Splat2D& a, const Splat2D& b) {
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.gaussian_index < b.gaussian_index;
  });

  std::vector<SplatExtent> extents(out.splats.size());
  for (std::size_t i = 0; i < out.splats.size(); ++i) {
    extents[i] = splat_extent(out.splats[i], w, h, settings.extent_sigmas);
  }

  // Depth-ordered splat lists per row band keep per-pixel compositing front-to-back.
  const int n_bands = detail::clamp_bands(h, kBands);
  std::vector<std::vector<std::uint32_t>> band_splats(n_bands);
  for (int b = 0; b < n_bands; ++b) {
    int y0, y1;
    detail::band_bounds(h, n_bands, b, y0, y1);
    for (std::size_t i = 0; i < out.splats.size(); ++i) {
      const SplatExtent& e = extents[i];
      if (e.x0 >= e.x1 || e.y0 >= e.y1) continue;
      if (e.y0 < y1 && e.y1 > y0) band_splats[b].push_back(static_cast<std::uint32_t>(i));
    }
  }

  struct BandResult {
    std::vector<Fragment> fragments;
    std::vector<std::uint32_t> counts;  // per pixel in band
  };
  std::vector<BandResult> bands(n_bands);

  detail::parallel_bands(h, n_bands, settings.threads, [&](int band, int y0, int y1) {
    BandResult& res = bands[band];
    res.counts.assign(static_cast<std::size_t>(y1 - y0) * w, 0);
    const auto& candidates = band_splats[band];
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        const Vec2 p(x + 0.5, y + 0.5);
        double transmittance = 1.0;
        Vec3 color_acc = Vec3::Zero();
        std::uint32_t count = 0;
        for (const std::uint32_t si : candidates) {
          const SplatExtent& e = extents[si];
          if (x < e.x0 || x >= e.x1 || y < e.y0 || y >= e.y1) continue;
          const Splat2D& s = out.splats[si];
          const Vec2 d = p - s.mu2d;
          const double power = -0.5 * d.dot(e.inv_cov * d);
          if (power > 0.0) continue;
          const double alpha = s.alpha_base * std::exp(power);
          if (alpha < settings.alpha_min) continue;
          const double weight = alpha * transmittance;
          color_acc += weight * scene.gaussians[s.gaussian_index].rgb();
          res.fragments.push_back({si, weight});
          ++count;
          transmittance *= 1.0 - alpha;
          if (transmittance < settings.transmittance_min) break;
        }
        color_acc += transmittance * scene.background;
        out.image.set_pixel(y, x, color_acc);
        const std::size_t pix = static_cast<std::size_t>(y) * w + x;
        out.alpha_map[pix] = 1.0 - transmittance;
        res.counts[static_cast<std::size_t>(y - y0) * w + x] = count;
      }
    }
  });

  // Merge band fragments into one CSR layout.
  std::size_t total = 0;
  for (const auto& b : bands) total += b.fragments.size();
  out.fragments.reserve(total);
  out.frag_offset.assign(static_cast<std::size_t>(w) * h + 1, 0);
  std::size_t pix = 0;
  for (const auto& b : bands) {
    for (const std::uint32_t c : b.counts) {
      out.frag_offset[pix + 1] = out.frag_offset[pix] + c;
      ++pix;
    }
    out.fragments.insert(out.fragments.end(), b.fragments.begin(), b.fragments.end());
  }
  return out;
}

SceneGrads render_backward_color(const GaussianScene& scene, const Camera& cam,
                                 const RenderOutput& out, const Image& dL_dimage,
                                 const RenderSettings& settings) {
  const int w = cam.width;
  const int h = cam.height;
  if (dL_dimage.width != w || dL_dimage.height != h) {
    throw std::invalid_argument("render_backward_color: image dimension mismatch");
  }

  const std::size_t n_splats = out.splats.size();
  struct SplatGrad {
    Vec2 mu2d = Vec2::Zero();
    Mat2 cov2d = Mat2::Zero();
    double opacity = 0.0;  // w.r.t. displayed opacity
    Vec3 color = Vec3::Zero();  // w.r.t. displayed rgb
  };

  std::vector<std::vector<SplatGrad>> band_grads(kBands);
  std::vector<Mat2> inv_cov(n_splats);
  for (std::size_t i = 0; i < n_splats; ++i) inv_cov[i] = out.splats[i].cov2d.inverse();

  detail::parallel_bands(h, kBands, settings.threads, [&](int band, int y0, int y1) {
    auto& grads = band_grads[band];
    grads.assign(n_splats, SplatGrad{});
    std::vector<double> alphas, trans;
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto frags = out.fragments_at(y, x);
        if (frags.empty()) continue;
        const Vec3 g_pix = dL_dimage.pixel(y, x);
        if (g_pix.isZero(0.0)) continue;

        // Recover alphas and transmittances from the stored blend weights.
        alphas.resize(frags.size());
        trans.resize(frags.size() + 1);
        trans[0] = 1.0;
        for (std::size_t k = 0; k < frags.size(); ++k) {
          alphas[k] = frags[k].blend_weight / trans[k];
          trans[k + 1] = trans[k] * (1.0 - alphas[k]);
        }

        const Vec2 p(x + 0.5, y + 0.5);
        // Suffix color: everything composited behind fragment k, including background.
        Vec3 suffix = trans[frags.size()] * scene.background;
        for (std::size_t kk = frags.size(); kk-- > 0;) {
          const Fragment& f = frags[kk];
          const Splat2D& s = out.splats[f.splat];
          const Vec3 rgb = scene.gaussians[s.gaussian_index].rgb();
          const double dL_dalpha =
              g_pix.dot(trans[kk] * rgb - suffix / (1.0 - alphas[kk]));
          suffix += f.blend_weight * rgb;

          SplatGrad& sg = grads[f.splat];
          sg.color += f.blend_weight * g_pix;

          const double gp = alphas[kk] / s.alpha_base;  // G'(p)
          sg.opacity += gp * dL_dalpha;
          const double dL_dgp = s.alpha_base * dL_dalpha;
          const Vec2 ad = inv_cov[f.splat] * (p - s.mu2d);
          sg.mu2d += dL_dgp * gp * ad;
          sg.cov2d += 0.5 * dL_dgp * gp * (ad * ad.transpose());
        }
      }
    }
  });

  SceneGrads result(scene.size());
  for (std::size_t si = 0; si < n_splats; ++si) {
    SplatGrad total;
    for (const auto& band : band_grads) {
      total.mu2d += band[si].mu2d;
      total.cov2d += band[si].cov2d;
      total.opacity += band[si].opacity;
      total.color += band[si].color;
    }
    const Splat2D& s = out.splats[si];
    const Gaussian3D& g = scene.gaussians[s.gaussian_index];
    const int gi = s.gaussian_index;
    project_gaussian_backward(g, cam, total.mu2d, total.cov2d, result.mu[gi], result.q[gi],
                              result.log_scale[gi]);
    result.opacity_logit[gi] += total.opacity * sigmoid_grad(g.opacity_logit);
    result.color[gi] += total.color.cwiseProduct(sigmoid_grad3(g.color));
  }
  return result;
}

}  // namespace gsedit
