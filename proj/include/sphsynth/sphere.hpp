// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0
//
// Spherical geometry on the equirectangular grid.
//
// Axis convention: y is up, latitude (polar angle) is measured from +y, and
// longitude 0 looks down +z with +x at longitude pi/2:
//
//   x = r sin(lon) sin(lat),  y = r cos(lat),  z = r cos(lon) sin(lat)
//
// Pixel (u, v) has its center at lon = (u + 0.5) * lon_step and
// lat = (v + 0.5) * lat_step, so no sample lies on a pole.

#pragma once

#include "sphsynth/raster.hpp"

namespace sphsynth {

struct Spherical {
  double lon = 0.0;  ///< [0, 2pi)
  double lat = 0.0;  ///< polar angle from +y
  double radius = 1.0;
};

struct Cartesian {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Fractional pixel position; (0, 0) is the top-left pixel.
struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

/// Reduces an angle into [0, 2pi).
double wrap_lon(double lon);

/// Pixel to angles. u wraps modulo the width; v outside [0, h) throws
/// std::out_of_range. Latitude is clamped to [lat_min, lat_max].
Spherical pix_to_sph(PixelCoord p, const ErpGrid& grid);

/// Angles to fractional pixel position, u in [0, w).
PixelCoord sph_to_pix(const Spherical& s, const ErpGrid& grid);

/// Throws std::invalid_argument on non-finite input or radius <= 0.
Cartesian sph_to_cart(const Spherical& s);

/// Longitude at the poles is 0 by convention. Throws on the zero vector.
Spherical cart_to_sph(const Cartesian& c);

/// Unit viewing direction of the center of pixel (u, v).
Cartesian pixel_direction(int u, int v, const ErpGrid& grid);

/// Normalized grid coordinates in [-1, 1], one map per image axis.
struct CoordMaps {
  ScalarMap u;
  ScalarMap v;
};

CoordMaps coord_feature_maps(const ErpGrid& grid);

/// Stereo placement a mask is built for.
enum class Placement { vertical, horizontal };

/// Per-pixel spherical attention: |sin(lat)| for vertical rigs,
/// |sin(lon)| |sin(lat)| for horizontal ones.
struct AttentionMask {
  Placement placement;
  ScalarMap values;

  const ErpGrid& grid() const { return values.grid(); }
  /// 1 - A, the weight used by the smoothness prior.
  ScalarMap complement() const;
};

AttentionMask attention_mask(const ErpGrid& grid, Placement placement);

/// Mask with A == 1 everywhere; used to ablate the attention weighting.
AttentionMask uniform_attention(const ErpGrid& grid, Placement placement);

}  // namespace sphsynth
