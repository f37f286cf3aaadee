// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-pixel depth recovery for the center view of a stereo rig by gradient
// descent on the self-supervised view-synthesis loss.

#pragma once

#include <string>
#include <vector>

#include "sphsynth/raster.hpp"
#include "sphsynth/renderer.hpp"
#include "sphsynth/scene.hpp"
#include "sphsynth/supervision.hpp"

namespace sphsynth {

/// ud: center -> up view with vertical attention. lr: center -> right view
/// with horizontal attention. tc: lambda_ratio * ud + (1 - lambda_ratio) * lr.
enum class Mode { ud, lr, tc };

enum class Parameterization { depth, log_depth };

const char* mode_name(Mode mode);
/// Accepts "ud", "lr", "tc"; throws std::invalid_argument otherwise.
Mode parse_mode(const std::string& name);

struct OptimConfig {
  int steps = 300;
  double step_size = 0.05;  ///< initial max per-pixel update in parameter units
  double init_depth = 2.0;
  Parameterization parameterization = Parameterization::log_depth;
  LossConfig loss;
  SplatConfig splat;
  Mode mode = Mode::ud;

  void validate() const;
};

struct LossGradient {
  double loss = 0.0;
  ScalarMap grad;        ///< d loss / d depth
  bool warning = false;  ///< some active branch had no valid pixel
};

/// Total loss of `depth` as the center-view depth and its analytic gradient.
/// The validity mask and splat neighbourhoods are held fixed.
LossGradient loss_gradient(const DepthMap& depth, const StereoRig& rig, const LossConfig& cfg,
                           const SplatConfig& splat, Mode mode);

/// Scalar loss only; same value as loss_gradient(...).loss.
double loss_value(const DepthMap& depth, const StereoRig& rig, const LossConfig& cfg,
                  const SplatConfig& splat, Mode mode);

/// Central differences of loss_value with step `step * depth(p)` per pixel.
ScalarMap fd_gradient(const DepthMap& depth, const StereoRig& rig, const LossConfig& cfg,
                      const SplatConfig& splat, Mode mode, double step);

struct TraceRow {
  int step = 0;
  double loss = 0.0;
  double abs_rel = 0.0;  ///< against rig.center.depth
};

struct OptimResult {
  DepthMap depth;
  std::vector<TraceRow> trace;  ///< row 0 is the initial state
  bool diverged = false;
};

/// Backtracking gradient descent from a constant depth. Each accepted update
/// never raises the loss, so the trace is non-increasing. A non-finite loss
/// stops the run with diverged = true and the trace so far.
OptimResult optimize_depth(const StereoRig& rig, const OptimConfig& cfg);
/// Same, starting from an arbitrary positive depth map; cfg.init_depth is
/// ignored.
OptimResult optimize_depth(const StereoRig& rig, const OptimConfig& cfg, const DepthMap& init);

}  // namespace sphsynth
