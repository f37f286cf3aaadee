// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sphsynth/scene.hpp"

using namespace sphsynth;

namespace {

Scene shell(double radius) {
  Scene s;
  s.spheres.push_back({{0, 0, 0}, radius, {}});
  return s;
}

Scene room(Cartesian half) {
  Scene s;
  s.boxes.push_back({{0, 0, 0}, half, {}});
  return s;
}

}  // namespace

TEST_CASE("sphere shell renders constant depth") {
  const ErpGrid g(64, 32);
  const View v = render_scene(shell(3.0), {0, 0, 0}, g);
  for (std::size_t i = 0; i < v.depth.size(); ++i) CHECK(v.depth[i] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("box room axis depths") {
  const Scene s = room({1.0, 0.8, 1.5});
  const auto front = trace_ray(s, {0, 0, 0}, {0, 0, 1});
  REQUIRE(front);
  CHECK(front->distance == doctest::Approx(1.5).epsilon(1e-12));
  const auto up = trace_ray(s, {0, 0, 0}, {0, 1, 0});
  REQUIRE(up);
  CHECK(up->distance == doctest::Approx(0.8).epsilon(1e-12));

  // on the raster the pixel next to (lon 0, lat pi/2) sees the +z wall
  const ErpGrid g(512, 256);
  const View v = render_scene(s, {0, 0, 0}, g);
  const Cartesian d = pixel_direction(0, 127, g);
  CHECK(v.depth(0, 127) == doctest::Approx(1.5 / d.z).epsilon(1e-12));
  CHECK(v.depth(0, 127) == doctest::Approx(1.5).epsilon(1e-4));
}

TEST_CASE("escaping rays are reported") {
  Scene s;
  s.spheres.push_back({{0, 0, 5}, 1.0, {}});
  try {
    render_scene(s, {0, 0, 0}, ErpGrid(16, 8));
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("escapes") != std::string::npos);
  }
}

TEST_CASE("raycaster agrees with a brute-force ray marcher") {
  const Scene s = default_scene(3);
  const oracle::RayMarcher marcher(s);
  const ErpGrid g(512, 256);
  std::mt19937_64 rng(17);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const int u = static_cast<int>(rng() % g.width());
    const int v = static_cast<int>(rng() % g.height());
    const Cartesian d = pixel_direction(u, v, g);
    const auto hit = trace_ray(s, {0, 0, 0}, d);
    REQUIRE(hit);
    const double t = marcher.march({0, 0, 0}, d, 1e-4);
    worst = std::max(worst, std::abs(t - hit->distance));
  }
  MESSAGE("worst raycast vs march difference " << worst);
  CHECK(worst < 1e-3);
}

TEST_CASE("depths are exact Euclidean distances") {
  const Scene s = default_scene(1);
  const ErpGrid g(128, 64);
  const Cartesian origin{0.1, -0.05, 0.2};
  const View v = render_scene(s, origin, g);
  double worst = 0.0;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      const Cartesian d = pixel_direction(x, y, g);
      const double r = v.depth(x, y);
      const Cartesian p{origin.x + r * d.x, origin.y + r * d.y, origin.z + r * d.z};
      worst = std::max(worst, std::abs(surface_function(s, p)));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("rig geometry") {
  const ErpGrid g(64, 32);
  const Scene s = default_scene(2);
  const StereoRig same = make_rig(s, {0, 0, 0}, 0.0, g);
  CHECK(same.center.color == same.up.color);
  CHECK(same.center.color == same.right.color);
  CHECK(same.center.depth == same.up.depth);

  // up view of a shell: law of cosines from the displaced origin
  const double radius = 3.0, b = 0.26;
  const StereoRig rig = make_rig(shell(radius), {0, 0, 0}, b, g);
  CHECK(rig.baseline == b);
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      const Cartesian d = pixel_direction(x, y, g);
      const double up = -b * d.y + std::sqrt(b * b * d.y * d.y - b * b + radius * radius);
      const double right = -b * d.x + std::sqrt(b * b * d.x * d.x - b * b + radius * radius);
      CHECK(rig.up.depth(x, y) == doctest::Approx(up).epsilon(1e-12));
      CHECK(rig.right.depth(x, y) == doctest::Approx(right).epsilon(1e-12));
    }
  }
}

TEST_CASE("rendering is deterministic and seed dependent") {
  const ErpGrid g(64, 32);
  const View a = render_scene(default_scene(5), {0, 0, 0}, g);
  const View b = render_scene(default_scene(5), {0, 0, 0}, g);
  const View c = render_scene(default_scene(6), {0, 0, 0}, g);
  CHECK(a.color == b.color);
  CHECK(a.depth == b.depth);
  CHECK_FALSE(a.color == c.color);
  CHECK(a.depth == c.depth);
}

TEST_CASE("textures") {
  Texture t;
  t.kind = TextureKind::noise;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double x = texture_value(t, 9, {uni(rng), uni(rng), uni(rng)}, -1);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo >= 0.0);
  CHECK(hi <= 1.0);
  CHECK(hi - lo > 0.3);

  Texture c;
  c.kind = TextureKind::checker;
  c.scale = 1.0;
  CHECK(texture_value(c, 0, {0.5, 0.5, 0.0}, 2) != texture_value(c, 0, {1.5, 0.5, 0.0}, 2));
  CHECK(texture_value(c, 0, {0.5, 0.5, 0.0}, 2) == texture_value(c, 0, {1.5, 1.5, 0.0}, 2));
  // the dropped axis does not matter
  CHECK(texture_value(c, 0, {0.5, 0.5, 0.0}, 2) == texture_value(c, 0, {0.5, 0.5, 7.3}, 2));

  Texture f;
  f.kind = TextureKind::flat;
  CHECK(texture_value(f, 0, {0.1, 0.2, 0.3}, -1) == texture_value(f, 0, {3.1, -2.2, 0.3}, -1));
}

TEST_CASE("untextured scene is piecewise constant in color") {
  const ErpGrid g(64, 32);
  const Scene s = untextured(default_scene(0));
  for (const auto& b : s.boxes) CHECK(b.material.texture.kind == TextureKind::flat);
  for (const auto& b : s.spheres) CHECK(b.material.texture.kind == TextureKind::flat);
  for (const auto& b : s.rects) CHECK(b.material.texture.kind == TextureKind::flat);
  const View v = render_scene(s, {0, 0, 0}, g);
  // the room wall in front of the camera has one color
  CHECK(v.color(62, 16, 0) == v.color(63, 16, 0));
}

TEST_CASE("default scene has content near the horizontal epipoles") {
  const Scene s = default_scene(0);
  bool near_px = false, near_nx = false;
  for (const auto& sp : s.spheres) {
    near_px = near_px || (sp.center.x > 1.0 && std::abs(sp.center.z) < sp.center.x);
    near_nx = near_nx || (sp.center.x < -1.0 && std::abs(sp.center.z) < -sp.center.x);
  }
  CHECK(near_px);
  CHECK(near_nx);
}

TEST_CASE("scene description parsing") {
  std::istringstream in(
      "# a room\n"
      "seed 7\n"
      "box center 0 0 0 half 3 2 4 albedo 0.5 0.6 0.7 texture checker period 0.5 seed 3\n"
      "sphere center 1 0 1 radius 0.5 texture noise scale 0.3 octaves 2 contrast 0.5\n"
      "rect center 0 0 2 normal z half 0.4 0.3 texture flat\n");
  const Scene s = parse_scene(in);
  CHECK(s.seed == 7);
  REQUIRE(s.boxes.size() == 1);
  REQUIRE(s.spheres.size() == 1);
  REQUIRE(s.rects.size() == 1);
  CHECK(s.boxes[0].half.z == 4.0);
  CHECK(s.boxes[0].material.albedo[2] == 0.7);
  CHECK(s.boxes[0].material.texture.kind == TextureKind::checker);
  CHECK(s.boxes[0].material.texture.scale == 0.5);
  CHECK(s.boxes[0].material.texture.seed == 3);
  CHECK(s.spheres[0].radius == 0.5);
  CHECK(s.spheres[0].material.texture.octaves == 2);
  CHECK(s.spheres[0].material.texture.contrast == 0.5);
  CHECK(s.rects[0].normal_axis == 2);
  CHECK(s.rects[0].half_extent[1] == 0.3);
  CHECK(s.rects[0].material.texture.kind == TextureKind::flat);

  std::istringstream bad("box center 0 0 0 half 1 1 1\nsphere center 0 0 radius 1\n");
  try {
    parse_scene(bad);
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream axis("rect center 0 0 2 normal w half 1 1\n");
  CHECK_THROWS_AS(parse_scene(axis), std::invalid_argument);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(parse_scene(empty), std::invalid_argument);
  CHECK_THROWS(load_scene("/nonexistent/scene.txt"));
}
