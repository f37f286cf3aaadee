// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "sphsynth/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sphsynth {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double wrap_lon(double lon) {
  double r = std::fmod(lon, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // -tiny + 2pi rounds to 2pi
  if (r >= kTwoPi) r = 0.0;
  return r;
}

Spherical pix_to_sph(PixelCoord p, const ErpGrid& grid) {
  if (!std::isfinite(p.u) || !std::isfinite(p.v)) {
    throw std::invalid_argument("pix_to_sph: non-finite pixel coordinate");
  }
  if (p.v < 0.0 || p.v >= grid.height()) {
    throw std::out_of_range("pix_to_sph: row " + std::to_string(p.v) + " outside [0, " +
                            std::to_string(grid.height()) + ")");
  }
  Spherical s;
  s.lon = wrap_lon((p.u + 0.5) * grid.lon_step());
  s.lat = std::clamp((p.v + 0.5) * grid.lat_step(), grid.lat_min(), grid.lat_max());
  return s;
}

PixelCoord sph_to_pix(const Spherical& s, const ErpGrid& grid) {
  double u = wrap_lon(s.lon) / grid.lon_step() - 0.5;
  if (u < 0.0) u += grid.width();
  return {u, s.lat / grid.lat_step() - 0.5};
}

Cartesian sph_to_cart(const Spherical& s) {
  if (!std::isfinite(s.lon) || !std::isfinite(s.lat) || !std::isfinite(s.radius)) {
    throw std::invalid_argument("sph_to_cart: non-finite input");
  }
  if (s.radius <= 0.0) throw std::invalid_argument("sph_to_cart: radius must be positive");
  const double st = std::sin(s.lat);
  return {s.radius * std::sin(s.lon) * st, s.radius * std::cos(s.lat),
          s.radius * std::cos(s.lon) * st};
}

Spherical cart_to_sph(const Cartesian& c) {
  if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.z)) {
    throw std::invalid_argument("cart_to_sph: non-finite input");
  }
  const double r = std::sqrt(c.x * c.x + c.y * c.y + c.z * c.z);
  if (r == 0.0) throw std::invalid_argument("cart_to_sph: zero vector has no direction");
  Spherical s;
  s.radius = r;
  s.lon = wrap_lon(std::atan2(c.x, c.z));
  s.lat = std::acos(std::clamp(c.y / r, -1.0, 1.0));
  return s;
}

Cartesian pixel_direction(int u, int v, const ErpGrid& grid) {
  const double lon = (u + 0.5) * grid.lon_step();
  const double lat = (v + 0.5) * grid.lat_step();
  const double st = std::sin(lat);
  return {std::sin(lon) * st, std::cos(lat), std::cos(lon) * st};
}

CoordMaps coord_feature_maps(const ErpGrid& grid) {
  CoordMaps maps{ScalarMap(grid), ScalarMap(grid)};
  const int w = grid.width();
  const int h = grid.height();
  for (int v = 0; v < h; ++v) {
    const double cv = -1.0 + 2.0 * v / (h - 1);
    for (int u = 0; u < w; ++u) {
      maps.u(u, v) = -1.0 + 2.0 * u / (w - 1);
      maps.v(u, v) = cv;
    }
  }
  return maps;
}

ScalarMap AttentionMask::complement() const {
  ScalarMap out(values.grid());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = 1.0 - values[i];
  return out;
}

AttentionMask attention_mask(const ErpGrid& grid, Placement placement) {
  AttentionMask mask{placement, ScalarMap(grid)};
  for (int v = 0; v < grid.height(); ++v) {
    const double lat_term = std::abs(std::sin((v + 0.5) * grid.lat_step()));
    for (int u = 0; u < grid.width(); ++u) {
      double a = lat_term;
      if (placement == Placement::horizontal) {
        a *= std::abs(std::sin((u + 0.5) * grid.lon_step()));
      }
      mask.values(u, v) = a;
    }
  }
  return mask;
}

AttentionMask uniform_attention(const ErpGrid& grid, Placement placement) {
  return {placement, ScalarMap(grid, 1, 1.0)};
}

}  // namespace sphsynth
