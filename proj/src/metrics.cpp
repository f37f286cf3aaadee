// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "sphsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace sphsynth {

SpiralSet spiral_points(std::size_t n) {
  if (n < 2) throw std::invalid_argument("spiral_points: need at least 2 points");
  SpiralSet set;
  set.points.reserve(n);
  const double nd = static_cast<double>(n);
  const double step = 3.6 / std::sqrt(nd);
  double lon = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double hk = -1.0 + 2.0 * static_cast<double>(k - 1) / (nd - 1.0);
    if (k == 1 || k == n) {
      lon = 0.0;
    } else {
      lon = wrap_lon(lon + step / std::sqrt(1.0 - hk * hk));
    }
    const double lat = std::acos(std::clamp(hk, -1.0, 1.0));
    const double st = std::sin(lat);
    set.points.push_back({std::sin(lon) * st, std::cos(lat), std::cos(lon) * st});
  }
  return set;
}

std::size_t spiral_count(const ErpGrid& grid) {
  return static_cast<std::size_t>(std::llround(0.25 * grid.width() * grid.height()));
}

Mask valid_depth(const DepthMap& gt) {
  Mask m(gt.grid());
  for (std::size_t i = 0; i < gt.size(); ++i) m[i] = (gt[i] > 0.0 && std::isfinite(gt[i])) ? 1 : 0;
  return m;
}

WeightedErrors weighted_errors(const DepthMap& pred, const DepthMap& gt, const Mask& valid) {
  require_same_grid(pred, gt, "weighted_errors");
  require_same_grid(pred, valid, "weighted_errors");
  const ErpGrid& g = gt.grid();
  double wsum = 0.0, abs_rel = 0.0, sq_rel = 0.0, sq = 0.0, sq_log = 0.0;
  WeightedErrors out;
  for (int v = 0; v < g.height(); ++v) {
    const double a = std::sin((v + 0.5) * g.lat_step());
    for (int u = 0; u < g.width(); ++u) {
      const std::size_t i = gt.index(u, v);
      const double d = gt[i];
      if (!valid[i] || !(d > 0.0) || !std::isfinite(d)) continue;
      const double e = pred[i] - d;
      wsum += a;
      abs_rel += a * std::abs(e) / d;
      sq_rel += a * e * e / d;
      sq += a * e * e;
      const double le = std::log(d) - std::log(pred[i]);
      sq_log += a * le * le;
      ++out.n_valid;
    }
  }
  if (out.n_valid == 0) throw std::invalid_argument("weighted_errors: no valid pixels");
  out.abs_rel = abs_rel / wsum;
  out.sq_rel = sq_rel / wsum;
  out.rmse = std::sqrt(sq / wsum);
  out.rmsle = std::sqrt(sq_log / wsum);
  return out;
}

std::pair<int, int> nearest_pixel(const Cartesian& p, const ErpGrid& grid) {
  const Spherical s = cart_to_sph(p);
  const int u = grid.wrap_col(static_cast<int>(std::floor(s.lon / grid.lon_step())));
  const int v = grid.clamp_row(static_cast<int>(std::floor(s.lat / grid.lat_step())));
  return {u, v};
}

DeltaAccuracies delta_accuracies(const DepthMap& pred, const DepthMap& gt,
                                 const SpiralSet& spiral, const Mask* valid) {
  require_same_grid(pred, gt, "delta_accuracies");
  if (valid) require_same_grid(pred, *valid, "delta_accuracies");
  const ErpGrid& g = gt.grid();
  std::size_t hits[3] = {0, 0, 0};
  DeltaAccuracies out;
  for (const Cartesian& p : spiral.points) {
    const auto [u, v] = nearest_pixel(p, g);
    const std::size_t i = gt.index(u, v);
    const double d = gt[i];
    if ((valid && !(*valid)[i]) || !(d > 0.0) || !std::isfinite(d)) continue;
    const double e = pred[i];
    const double ratio = e > 0.0 ? std::max(e / d, d / e) : std::numeric_limits<double>::infinity();
    double threshold = 1.25;
    for (int k = 0; k < 3; ++k, threshold *= 1.25) {
      if (ratio < threshold) ++hits[k];
    }
    ++out.n_used;
  }
  if (out.n_used == 0) throw std::invalid_argument("delta_accuracies: every spiral point is invalid");
  const double n = static_cast<double>(out.n_used);
  out.d1 = hits[0] / n;
  out.d2 = hits[1] / n;
  out.d3 = hits[2] / n;
  return out;
}

MetricsReport evaluate_depth(const DepthMap& pred, const DepthMap& gt) {
  const Mask valid = valid_depth(gt);
  const WeightedErrors e = weighted_errors(pred, gt, valid);
  const std::size_t n = spiral_count(gt.grid());
  const DeltaAccuracies d = delta_accuracies(pred, gt, spiral_points(n), &valid);
  return {e.abs_rel, e.sq_rel, e.rmse, e.rmsle, d.d1, d.d2, d.d3, e.n_valid, n};
}

std::string metrics_csv_header() { return "abs_rel,sq_rel,rmse,rmsle,d1,d2,d3,n_valid,n_spiral"; }

std::string metrics_csv_row(const MetricsReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%zu,%zu", r.abs_rel, r.sq_rel,
                r.rmse, r.rmsle, r.d1, r.d2, r.d3, r.n_valid, r.n_spiral);
  return buf;
}

void print_metrics_table(std::ostream& os, const MetricsReport& r) {
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "+---------+---------+---------+---------+---------+---------+---------+\n"
                "| AbsRel  | SqRel   | RMSE    | RMSLE   | d1      | d2      | d3      |\n"
                "+---------+---------+---------+---------+---------+---------+---------+\n"
                "| %7.4f | %7.4f | %7.4f | %7.4f | %6.2f%% | %6.2f%% | %6.2f%% |\n"
                "+---------+---------+---------+---------+---------+---------+---------+\n"
                "valid pixels: %zu, spiral points: %zu\n",
                r.abs_rel, r.sq_rel, r.rmse, r.rmsle, 100 * r.d1, 100 * r.d2, 100 * r.d3, r.n_valid,
                r.n_spiral);
  os << buf;
}

}  // namespace sphsynth
