// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "sphsynth/disparity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sphsynth {

Jacobian spherical_jacobian(const Spherical& at, double r, double lat_min) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::domain_error("spherical_jacobian: depth must be positive and finite");
  }
  const double st = std::sin(at.lat);
  if (!(at.lat >= lat_min && at.lat <= std::numbers::pi - lat_min) || !(st > 0.0)) {
    throw std::domain_error("spherical_jacobian: latitude " + std::to_string(at.lat) +
                            " outside the clamp range");
  }
  const double sp = std::sin(at.lon);
  const double cp = std::cos(at.lon);
  const double ct = std::cos(at.lat);
  Jacobian j{};
  j[0] = {sp * st, ct, cp * st};
  j[1] = {cp / (r * st), 0.0, -sp / (r * st)};
  j[2] = {sp * ct / r, -st / r, cp * ct / r};
  return j;
}

Disparity disparity(double r, const Spherical& at, const Baseline& baseline) {
  const Jacobian j = spherical_jacobian(at, r);
  const int col = baseline.axis == Axis::horizontal_x ? 0 : 1;
  return {baseline.length * j[1][col], baseline.length * j[2][col]};
}

Spherical displace(const Spherical& source, const Disparity& d, const ErpGrid& grid) {
  Spherical t = source;
  t.lon = wrap_lon(source.lon - d.lon);
  t.lat = std::clamp(source.lat - d.lat, grid.lat_min(), grid.lat_max());
  return t;
}

DisplacedPixel displace_pixel(int u, int v, const Disparity& d, const ErpGrid& grid) {
  const double w = grid.width();
  double tu = std::fmod(u - d.lon / grid.lon_step(), w);
  if (tu < 0.0) tu += w;
  if (tu >= w) tu = 0.0;
  // lat_min = lat_step / 4 sits a quarter pixel above row 0's center
  const double v_lo = -0.25;
  const double v_hi = grid.height() - 0.75;
  double tv = v - d.lat / grid.lat_step();
  DisplacedPixel out;
  if (tv < v_lo) {
    tv = v_lo;
    out.lat_clamped = true;
  } else if (tv > v_hi) {
    tv = v_hi;
    out.lat_clamped = true;
  }
  out.target = {tu, tv};
  return out;
}

void require_positive_depth(const DepthMap& depth, const char* what) {
  std::ostringstream bad;
  int count = 0;
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const double d = depth(u, v);
      if (!(d > 0.0) || !std::isfinite(d)) {
        if (count < 8) bad << " (" << u << "," << v << ")=" << d;
        ++count;
      }
    }
  }
  if (count > 0) {
    std::ostringstream msg;
    msg << what << ": " << count << " non-positive depth pixel(s):" << bad.str();
    if (count > 8) msg << " ...";
    throw std::invalid_argument(msg.str());
  }
}

DisparityField disparity_field(const DepthMap& depth, const Baseline& baseline) {
  require_positive_depth(depth, "disparity_field");
  const ErpGrid& grid = depth.grid();
  DisparityField field{ScalarMap(grid), ScalarMap(grid)};
#pragma omp parallel for schedule(static)
  for (int v = 0; v < grid.height(); ++v) {
    for (int u = 0; u < grid.width(); ++u) {
      const Spherical at{(u + 0.5) * grid.lon_step(), (v + 0.5) * grid.lat_step()};
      const Disparity d = disparity(depth(u, v), at, baseline);
      field.lon(u, v) = d.lon;
      field.lat(u, v) = d.lat;
    }
  }
  return field;
}

}  // namespace sphsynth
