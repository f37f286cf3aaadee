// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "sphsynth/renderer.hpp"

#include <cmath>
#include <stdexcept>

namespace sphsynth {

void SplatConfig::validate() const {
  if (!(d_max > 0.0)) throw std::invalid_argument("SplatConfig: d_max must be positive");
  if (!(epsilon_norm > 0.0) || !(epsilon_norm <= epsilon_mask)) {
    throw std::invalid_argument("SplatConfig: need 0 < epsilon_norm <= epsilon_mask");
  }
}

namespace {

void require_color(const Image& img, const char* what) {
  if (img.channels() != kColorChannels) {
    throw std::invalid_argument(std::string(what) + ": expected a 3-channel image");
  }
}

SplatFootprint make_footprint(int u, int v, double depth, const Baseline& baseline,
                              const ErpGrid& grid, double d_max) {
  const Spherical at{(u + 0.5) * grid.lon_step(), (v + 0.5) * grid.lat_step()};
  const Disparity d = disparity(depth, at, baseline);
  const DisplacedPixel dp = displace_pixel(u, v, d, grid);

  // disparity ~ 1/depth, so the target moves by +d/depth per meter
  const double du = d.lon / depth / grid.lon_step();
  const double dv = dp.lat_clamped ? 0.0 : d.lat / depth / grid.lat_step();

  const double fu0 = std::floor(dp.target.u);
  const double fv0 = std::floor(dp.target.v);
  const double fu = dp.target.u - fu0;
  const double fv = dp.target.v - fv0;
  const int u0 = grid.wrap_col(static_cast<int>(fu0));
  const int u1 = grid.wrap_col(static_cast<int>(fu0) + 1);
  const int v0 = grid.clamp_row(static_cast<int>(fv0));
  const int v1 = grid.clamp_row(static_cast<int>(fv0) + 1);
  const auto w = static_cast<std::uint32_t>(grid.width());

  SplatFootprint f;
  f.target = {v0 * w + u0, v0 * w + u1, v1 * w + u0, v1 * w + u1};
  f.beta = {(1 - fu) * (1 - fv), fu * (1 - fv), (1 - fu) * fv, fu * fv};
  f.dbeta = {-(1 - fv) * du - (1 - fu) * dv, (1 - fv) * du - fu * dv,
             -fv * du + (1 - fu) * dv, fv * du + fu * dv};
  f.alpha = std::exp(-depth / d_max);
  f.dalpha = -f.alpha / d_max;
  return f;
}

}  // namespace

SplatTape splat_forward(const Image& src_color, const DepthMap& src_depth,
                        const Baseline& baseline, const SplatConfig& cfg) {
  cfg.validate();
  require_color(src_color, "splat_render");
  require_same_grid(src_color, src_depth, "splat_render");
  require_positive_depth(src_depth, "splat_render");

  const ErpGrid& grid = src_depth.grid();
  const int w = grid.width();
  const int h = grid.height();
  SplatTape tape{{make_image(grid), ScalarMap(grid), Mask(grid)},
                 std::vector<SplatFootprint>(grid.pixels()),
                 cfg.epsilon_norm};

#pragma omp parallel for schedule(static)
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      tape.footprints[static_cast<std::size_t>(v) * w + u] =
          make_footprint(u, v, src_depth(u, v), baseline, grid, cfg.d_max);
    }
  }

  // Serial scatter in source order: the reduction order never depends on
  // the worker count.
  SplatResult& out = tape.result;
  auto color = out.color.data();
  auto weights = out.weights.data();
  auto src = src_color.data();
  for (std::size_t s = 0; s < tape.footprints.size(); ++s) {
    const SplatFootprint& f = tape.footprints[s];
    for (int k = 0; k < 4; ++k) {
      const double wk = f.alpha * f.beta[k];
      const std::size_t t = f.target[k];
      weights[t] += wk;
      for (int c = 0; c < kColorChannels; ++c) {
        color[t * kColorChannels + c] += wk * src[s * kColorChannels + c];
      }
    }
  }

  for (std::size_t t = 0; t < grid.pixels(); ++t) {
    const bool empty = weights[t] < cfg.epsilon_mask;
    out.mask[t] = empty ? 1 : 0;
    const double denom = weights[t] + cfg.epsilon_norm;
    for (int c = 0; c < kColorChannels; ++c) {
      double& px = color[t * kColorChannels + c];
      px = empty ? 0.0 : px / denom;
    }
  }
  return tape;
}

ScalarMap splat_backward(const SplatTape& tape, const Image& src_color, const Image& upstream) {
  const SplatResult& res = tape.result;
  require_color(upstream, "splat_backward");
  require_same_grid(res.color, upstream, "splat_backward");
  require_same_grid(res.color, src_color, "splat_backward");

  const ErpGrid& grid = res.color.grid();
  ScalarMap grad(grid);
  const auto n = static_cast<std::int64_t>(tape.footprints.size());
  auto src = src_color.data();
  auto up = upstream.data();
  auto synth = res.color.data();
  auto weights = res.weights.data();

#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < n; ++s) {
    const SplatFootprint& f = tape.footprints[s];
    double g = 0.0;
    for (int k = 0; k < 4; ++k) {
      const std::size_t t = f.target[k];
      if (res.mask[t]) continue;
      // d(synth_c) / d(w) = (src_c - synth_c) / (W + eps)
      double gw = 0.0;
      for (int c = 0; c < kColorChannels; ++c) {
        gw += up[t * kColorChannels + c] *
              (src[s * kColorChannels + c] - synth[t * kColorChannels + c]);
      }
      gw /= weights[t] + tape.epsilon_norm;
      g += gw * (f.dalpha * f.beta[k] + f.alpha * f.dbeta[k]);
    }
    grad[s] = g;
  }
  return grad;
}

SplatResult splat_render(const Image& src_color, const DepthMap& src_depth,
                         const Baseline& baseline, const SplatConfig& cfg) {
  return splat_forward(src_color, src_depth, baseline, cfg).result;
}

SplatGradient splat_render_with_grad(const Image& src_color, const DepthMap& src_depth,
                                     const Baseline& baseline, const SplatConfig& cfg,
                                     const Image& upstream) {
  SplatTape tape = splat_forward(src_color, src_depth, baseline, cfg);
  ScalarMap grad = splat_backward(tape, src_color, upstream);
  return {std::move(tape.result), std::move(grad)};
}

void sample_bilinear(const Image& img, PixelCoord p, std::span<double> out) {
  const ErpGrid& grid = img.grid();
  const double fu0 = std::floor(p.u);
  const double fv0 = std::floor(p.v);
  const double fu = p.u - fu0;
  const double fv = p.v - fv0;
  const int u0 = grid.wrap_col(static_cast<int>(fu0));
  const int u1 = grid.wrap_col(static_cast<int>(fu0) + 1);
  const int v0 = grid.clamp_row(static_cast<int>(fv0));
  const int v1 = grid.clamp_row(static_cast<int>(fv0) + 1);
  for (int c = 0; c < img.channels(); ++c) {
    out[c] = (1 - fu) * (1 - fv) * img(u0, v0, c) + fu * (1 - fv) * img(u1, v0, c) +
             (1 - fu) * fv * img(u0, v1, c) + fu * fv * img(u1, v1, c);
  }
}

Image inverse_warp(const Image& tgt_color, const DepthMap& src_depth, const Baseline& baseline) {
  require_color(tgt_color, "inverse_warp");
  require_same_grid(tgt_color, src_depth, "inverse_warp");
  require_positive_depth(src_depth, "inverse_warp");
  const ErpGrid& grid = src_depth.grid();
  Image out = make_image(grid);
#pragma omp parallel for schedule(static)
  for (int v = 0; v < grid.height(); ++v) {
    for (int u = 0; u < grid.width(); ++u) {
      const Spherical at{(u + 0.5) * grid.lon_step(), (v + 0.5) * grid.lat_step()};
      const Disparity d = disparity(src_depth(u, v), at, baseline);
      const DisplacedPixel dp = displace_pixel(u, v, d, grid);
      sample_bilinear(tgt_color, dp.target,
                      out.data().subspan(out.index(u, v), kColorChannels));
    }
  }
  return out;
}

}  // namespace sphsynth
