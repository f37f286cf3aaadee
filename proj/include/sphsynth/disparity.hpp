// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0
//
// First-order spherical disparity model.
//
// The Jacobian of (r, lon, lat) with respect to (x, y, z) maps a small
// Cartesian camera offset to angular displacements on the sphere. A baseline
// along x yields both longitudinal and latitudinal disparity; a baseline
// along y yields latitudinal disparity only.

#pragma once

#include <array>

#include "sphsynth/raster.hpp"
#include "sphsynth/sphere.hpp"

namespace sphsynth {

enum class Axis { horizontal_x, vertical_y };

/// Stereo offset between two unrotated viewpoints.
///
/// `length` is the signed offset of the target viewpoint from the source
/// viewpoint along `axis`, in meters: a view rendered 0.26 m above the source
/// has {vertical_y, +0.26}. With this sign the displacement function maps a
/// source pixel to where the same scene point appears in the target view.
struct Baseline {
  Axis axis = Axis::vertical_y;
  double length = 0.0;
};

/// Angular disparity (radians).
struct Disparity {
  double lon = 0.0;
  double lat = 0.0;
};

/// Rows are d(r), d(lon), d(lat); columns are d(x), d(y), d(z).
using Jacobian = std::array<std::array<double, 3>, 3>;

/// Partial derivatives of spherical w.r.t. Cartesian coordinates at
/// direction `at` and depth `r`. Throws std::domain_error when r <= 0 or the
/// latitude lies outside [lat_min, pi - lat_min] (with lat_min = 0 the open
/// interval (0, pi) is required).
Jacobian spherical_jacobian(const Spherical& at, double r, double lat_min = 0.0);

/// Disparity of a point at depth r seen along `at` for the given baseline:
/// horizontal  b * (cos(lon) / (r sin(lat)), sin(lon) cos(lat) / r)
/// vertical    b * (0, -sin(lat) / r)
Disparity disparity(double r, const Spherical& at, const Baseline& baseline);

/// Displacement function: target = source - disparity, with longitude
/// wrapped modulo 2pi and latitude clamped to the grid's [lat_min, lat_max].
Spherical displace(const Spherical& source, const Disparity& d, const ErpGrid& grid);

/// The same displacement expressed in fractional pixel units for the pixel
/// center (u, v). u is wrapped into [0, w); v is clamped to the rows
/// corresponding to [lat_min, lat_max]. `lat_clamped` reports whether the
/// clamp was active.
struct DisplacedPixel {
  PixelCoord target;
  bool lat_clamped = false;
};

DisplacedPixel displace_pixel(int u, int v, const Disparity& d, const ErpGrid& grid);

struct DisparityField {
  ScalarMap lon;
  ScalarMap lat;

  const ErpGrid& grid() const { return lon.grid(); }
};

/// Per-pixel disparity at pixel-center angles. Throws std::invalid_argument
/// naming the offending pixels if any depth is not a positive finite value.
DisparityField disparity_field(const DepthMap& depth, const Baseline& baseline);

/// Throws std::invalid_argument listing (up to a handful of) pixels whose
/// depth is not a positive finite number.
void require_positive_depth(const DepthMap& depth, const char* what);

}  // namespace sphsynth
