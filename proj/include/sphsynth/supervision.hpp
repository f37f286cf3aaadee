// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training objectives for view-synthesis supervision: photometric
// reconstruction under spherical attention, a Cartesian smoothness prior,
// their weighted total, the trinocular blend and the supervised BerHu loss.
//
// Every scalar reduction runs serially in row-major order so results are
// reproducible bit for bit.

#pragma once

#include <iosfwd>
#include <string>

#include "sphsynth/raster.hpp"
#include "sphsynth/renderer.hpp"
#include "sphsynth/sphere.hpp"

namespace sphsynth {

/// Sign of the exponent in the smoothness color guidance exp(+-|grad I|).
enum class EdgeSign {
  edge_aware,     ///< exp(-|grad I|): relax smoothing across color edges
  edge_boosting,  ///< exp(+|grad I|)
};

struct LossConfig {
  double lambda_recon = 0.95;
  double lambda_smooth = 0.05;
  double eta = 0.85;  ///< DSSIM share of the photometric error
  int ssim_kernel = 5;
  double lambda_ratio = 0.6;  ///< trinocular weight of the up-down loss
  EdgeSign edge_sign = EdgeSign::edge_aware;
  bool attention = true;  ///< false replaces A by 1 in the reconstruction term

  void validate() const;
};

inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// A scalar loss plus a flag raised when the value is degenerate (no valid
/// pixels contributed).
struct LossValue {
  double value = 0.0;
  bool warning = false;
};

/// Per-pixel structural dissimilarity (1 - SSIM) / 2, averaged over channels.
/// Local statistics use a kernel x kernel box filter; longitude wraps and
/// latitude replicates the border rows.
ScalarMap dssim(const Image& a, const Image& b, int kernel);

/// Gradient of sum_p upstream(p) * dssim(a, b)(p) with respect to b.
Image dssim_backward(const Image& a, const Image& b, int kernel, const ScalarMap& upstream);

/// Binary validity (1 = use) from a splat mask (1 = empty canvas).
Mask valid_from_empty(const Mask& empty);

/// eta * dssim + (1 - eta) * mean_c |tgt - synth|, both images multiplied by
/// the validity mask first.
ScalarMap photometric(const Image& tgt, const Image& synth, const Mask& valid, double eta,
                      int kernel = 5);

/// sum_p A M photo / sum_p M. Returns 0 with a warning when nothing is valid.
LossValue reconstruction_loss(const ScalarMap& photo, const Mask& valid,
                              const AttentionMask& attention);

struct ReconstructionTerm {
  LossValue loss;
  Image grad_synth;  ///< d loss / d synth
};

/// Photometric reconstruction loss and its gradient w.r.t. the synthesized
/// image, honoring cfg.eta, cfg.ssim_kernel and cfg.attention.
ReconstructionTerm reconstruction_term(const Image& tgt, const Image& synth, const Mask& valid,
                                       const AttentionMask& attention, const LossConfig& cfg);

/// Weighted total variation of the deprojected point cloud:
/// mean_p (1 - A) g(p) sqrt(|d_u v|^2 + |d_v v|^2), v = depth * direction,
/// central differences, g the color guidance for `edge_sign`.
double smoothness_loss(const DepthMap& depth, const Image& color, const AttentionMask& attention,
                       EdgeSign edge_sign = EdgeSign::edge_aware);

struct SmoothnessTerm {
  double loss = 0.0;
  ScalarMap grad_depth;
};

SmoothnessTerm smoothness_term(const DepthMap& depth, const Image& color,
                               const AttentionMask& attention, EdgeSign edge_sign);

double total_loss(double recon, double smooth, const LossConfig& cfg);

/// lambda_ratio * ud + (1 - lambda_ratio) * lr.
double trinocular_blend(double ud, double lr, double lambda_ratio);

/// Reverse Huber over valid pixels with threshold c = 0.2 * max |pred - gt|.
LossValue berhu(const DepthMap& pred, const DepthMap& gt, const Mask& valid);

/// Loss and renderer hyperparameters as read from a key-value file.
struct Hyperparameters {
  LossConfig loss;
  SplatConfig splat;
};

/// Parses `key value` or `key = value` lines; '#' starts a comment. Recognized
/// keys: lambda_recon lambda_smooth eta ssim_kernel lambda_ratio d_max
/// epsilon_norm epsilon_mask edge_sign attention. Unknown keys and malformed
/// values throw std::invalid_argument naming the line.
Hyperparameters parse_hyperparameters(std::istream& in, Hyperparameters base = {});
Hyperparameters load_hyperparameters(const std::string& path, Hyperparameters base = {});

}  // namespace sphsynth
