// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0
//
// Depth evaluation that accounts for equirectangular distortion. Error
// metrics weight each pixel by sin(lat), the solid angle it covers; the
// threshold accuracies are computed on a near-uniform spiral point set on
// the sphere instead of on the raster.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sphsynth/raster.hpp"
#include "sphsynth/sphere.hpp"

namespace sphsynth {

struct SpiralSet {
  std::vector<Cartesian> points;  ///< unit directions, first at lat = pi

  std::size_t size() const { return points.size(); }
};

/// Generalized spiral: h_k = -1 + 2(k-1)/(N-1), lat_k = acos(h_k),
/// lon_1 = lon_N = 0, lon_k = lon_{k-1} + 3.6 / sqrt(N (1 - h_k^2)) mod 2pi.
/// Throws std::invalid_argument for n < 2.
SpiralSet spiral_points(std::size_t n);

/// round(0.25 * w * h).
std::size_t spiral_count(const ErpGrid& grid);

struct WeightedErrors {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmsle = 0.0;
  std::size_t n_valid = 0;
};

/// sin(lat)-weighted means over pixels with valid != 0 and gt > 0:
/// sum A term / sum A. Throws std::invalid_argument when nothing is valid.
WeightedErrors weighted_errors(const DepthMap& pred, const DepthMap& gt, const Mask& valid);

struct DeltaAccuracies {
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  std::size_t n_used = 0;
};

/// Fraction of spiral points with max(pred/gt, gt/pred) < 1.25^i, sampling
/// both maps at the pixel containing each point. Points on invalid gt are
/// skipped; throws std::invalid_argument if every point is skipped.
DeltaAccuracies delta_accuracies(const DepthMap& pred, const DepthMap& gt,
                                 const SpiralSet& spiral, const Mask* valid = nullptr);

/// Pixel containing the direction `p`.
std::pair<int, int> nearest_pixel(const Cartesian& p, const ErpGrid& grid);

struct MetricsReport {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmsle = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  std::size_t n_valid = 0;
  std::size_t n_spiral = 0;
};

/// Full report; gt <= 0 (or non-finite) marks a pixel invalid.
MetricsReport evaluate_depth(const DepthMap& pred, const DepthMap& gt);

/// Mask of pixels with finite gt > 0.
Mask valid_depth(const DepthMap& gt);

/// "abs_rel,sq_rel,rmse,rmsle,d1,d2,d3,n_valid,n_spiral"
std::string metrics_csv_header();
/// One line, same field order as the header, no trailing newline.
std::string metrics_csv_row(const MetricsReport& r);
void print_metrics_table(std::ostream& os, const MetricsReport& r);

}  // namespace sphsynth
