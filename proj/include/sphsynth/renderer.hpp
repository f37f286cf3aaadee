// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0
//
// Depth-image-based rendering on the sphere.
//
// Every source pixel is displaced by its disparity and splatted onto the 2x2
// target neighbourhood of its landing position with bilinear weights, scaled
// by the depth attenuation exp(-depth / d_max). Colors and weights are
// accumulated on separate canvases and the color canvas is normalized by the
// weight canvas. Target pixels that received (almost) no weight are masked.
//
// Accumulation always runs in source-pixel order, so canvases are bitwise
// identical for any worker count.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sphsynth/disparity.hpp"
#include "sphsynth/raster.hpp"

namespace sphsynth {

struct SplatConfig {
  double d_max = 10.0;          ///< depth attenuation scale, meters
  double epsilon_norm = 1e-8;   ///< added to the weight canvas before dividing
  double epsilon_mask = 1e-3;   ///< weight below which a target pixel is empty

  /// Throws std::invalid_argument unless d_max > 0 and
  /// 0 < epsilon_norm <= epsilon_mask.
  void validate() const;
};

struct SplatResult {
  Image color;        ///< normalized rendering, 0 on masked pixels
  ScalarMap weights;  ///< accumulated splat weights
  Mask mask;          ///< 1 where the canvas is empty (weight < epsilon_mask)
};

/// Where one source pixel lands and how its weight depends on its depth.
struct SplatFootprint {
  std::array<std::uint32_t, 4> target{};  ///< linear target pixel indices
  std::array<double, 4> beta{};           ///< bilinear weights, sum to 1
  std::array<double, 4> dbeta{};          ///< d(beta) / d(depth)
  double alpha = 0.0;                     ///< depth attenuation
  double dalpha = 0.0;                    ///< d(alpha) / d(depth)
};

/// Forward pass plus everything the backward pass needs.
struct SplatTape {
  SplatResult result;
  std::vector<SplatFootprint> footprints;  ///< one per source pixel
  double epsilon_norm = 0.0;
};

SplatTape splat_forward(const Image& src_color, const DepthMap& src_depth,
                        const Baseline& baseline, const SplatConfig& cfg);

/// Gradient of <upstream, result.color> with respect to the source depth.
/// Floor/ceil switches of the splat neighbourhood, the latitude clamp and the
/// mask threshold are treated as locally constant.
ScalarMap splat_backward(const SplatTape& tape, const Image& src_color, const Image& upstream);

SplatResult splat_render(const Image& src_color, const DepthMap& src_depth,
                         const Baseline& baseline, const SplatConfig& cfg = {});

struct SplatGradient {
  SplatResult result;
  ScalarMap depth_grad;
};

SplatGradient splat_render_with_grad(const Image& src_color, const DepthMap& src_depth,
                                     const Baseline& baseline, const SplatConfig& cfg,
                                     const Image& upstream);

/// Gather-style baseline: reconstructs the source view by bilinearly sampling
/// the target view at each source pixel's displaced position. No occlusion
/// handling; every pixel receives a value.
Image inverse_warp(const Image& tgt_color, const DepthMap& src_depth, const Baseline& baseline);

/// Bilinear lookup with longitude wrap and latitude clamp.
void sample_bilinear(const Image& img, PixelCoord p, std::span<double> out);

}  // namespace sphsynth
