// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0
//
// Analytic equirectangular raycaster for synthetic stereo rigs.
//
// Scenes are built from axis-aligned boxes (a room shell is simply a box
// containing the camera), spheres and finite axis-aligned rectangles. Each
// primitive carries a flat albedo modulated by a procedural texture; there
// is no lighting, so every surface is perfectly photo-consistent across
// viewpoints.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sphsynth/raster.hpp"
#include "sphsynth/sphere.hpp"

namespace sphsynth {

enum class TextureKind { flat, checker, noise };

struct Texture {
  TextureKind kind = TextureKind::noise;
  double scale = 0.5;     ///< checker period or noise lattice spacing, meters
  int octaves = 3;        ///< noise only
  std::uint64_t seed = 1; ///< mixed with the scene seed
  double contrast = 0.8;  ///< color = albedo * (1 - contrast + contrast * t)
};

struct Material {
  std::array<double, 3> albedo{0.8, 0.8, 0.8};
  Texture texture;
};

struct BoxPrimitive {
  Cartesian center;
  Cartesian half;
  Material material;
};

struct SpherePrimitive {
  Cartesian center;
  double radius = 1.0;
  Material material;
};

/// Finite rectangle with an axis-aligned normal (0 = x, 1 = y, 2 = z).
/// half_extent holds the half sizes along the two remaining axes in x, y, z
/// order.
struct RectPrimitive {
  Cartesian center;
  int normal_axis = 2;
  std::array<double, 2> half_extent{0.5, 0.5};
  Material material;
};

struct Scene {
  std::vector<BoxPrimitive> boxes;
  std::vector<SpherePrimitive> spheres;
  std::vector<RectPrimitive> rects;
  std::uint64_t seed = 0;
};

struct Hit {
  double distance = 0.0;
  Cartesian point;
  std::array<double, 3> color{};
  /// Signed implicit surface function of the hit primitive evaluated at
  /// `point`; ~0 for an exact intersection.
  double surface_residual = 0.0;
};

/// Nearest intersection along a unit ray, if any.
std::optional<Hit> trace_ray(const Scene& scene, const Cartesian& origin, const Cartesian& dir);

/// Implicit surface value of the primitive nearest to zero at `p`; used by
/// tests to validate hit distances. 0 on any primitive surface.
double surface_function(const Scene& scene, const Cartesian& p);

/// Procedural texture value in [0, 1] at point p. `face_axis` selects the
/// coordinate dropped by 2D checkerboards (-1 for fully 3D evaluation).
double texture_value(const Texture& tex, std::uint64_t scene_seed, const Cartesian& p,
                     int face_axis);

struct View {
  Image color;
  DepthMap depth;
};

/// Renders color and Euclidean depth for every pixel center. Throws
/// std::runtime_error naming the first pixel whose ray escapes the scene.
View render_scene(const Scene& scene, const Cartesian& origin, const ErpGrid& grid);

/// Center, up (+y) and right (+x) views at a common baseline.
struct StereoRig {
  View center;
  View up;
  View right;
  double baseline = 0.0;
  Cartesian origin;

  const ErpGrid& grid() const { return center.color.grid(); }
};

StereoRig make_rig(const Scene& scene, const Cartesian& center, double baseline,
                   const ErpGrid& grid);

/// Textured room with furniture around the origin, including objects close
/// to the +-x directions.
Scene default_scene(std::uint64_t seed = 0);

/// The default geometry with every texture replaced by a flat albedo.
Scene untextured(Scene scene);

/// Parses the plain-text scene description. One primitive per line:
///
///   seed 7
///   box    center x y z half hx hy hz [material]
///   sphere center x y z radius r      [material]
///   rect   center x y z normal x|y|z half a b [material]
///
/// where [material] is any of
///   albedo r g b
///   texture flat | checker period p | noise scale s octaves n
///   seed k   contrast c
///
/// '#' starts a comment. Errors throw std::invalid_argument with the line
/// number.
Scene parse_scene(std::istream& in);
Scene load_scene(const std::string& path);

}  // namespace sphsynth
