// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sphsynth/parallel.hpp"
#include "sphsynth/renderer.hpp"
#include "sphsynth/scene.hpp"

using namespace sphsynth;
using oracle::kPi;

namespace {

Image noise_image(const ErpGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Image img = make_image(g);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = uni(rng);
  return img;
}

DepthMap random_depth(const ErpGrid& g, unsigned seed, double lo = 0.8, double hi = 4.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(lo, hi);
  DepthMap d(g);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = uni(rng);
  return d;
}

double inner(const Image& a, const Image& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Scene textured_shell(double radius) {
  Scene s;
  Material m;
  m.texture = {TextureKind::noise, 0.4, 3, 1, 0.85};
  s.spheres.push_back({{0, 0, 0}, radius, m});
  return s;
}

}  // namespace

TEST_CASE("splat config validation") {
  SplatConfig c;
  CHECK_NOTHROW(c.validate());
  c.d_max = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.epsilon_norm = 1e-2;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.epsilon_norm = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("zero baseline is the identity") {
  const ErpGrid g(32, 16);
  const Image src = noise_image(g, 1);
  const DepthMap depth = random_depth(g, 2);
  for (Axis axis : {Axis::horizontal_x, Axis::vertical_y}) {
    const SplatResult r = splat_render(src, depth, {axis, 0.0});
    for (std::size_t p = 0; p < g.pixels(); ++p) {
      CHECK(r.mask[p] == 0);
      for (int c = 0; c < 3; ++c) CHECK(std::abs(r.color[3 * p + c] - src[3 * p + c]) < 1e-7);
    }
    const Image inv = inverse_warp(src, depth, {axis, 0.0});
    for (std::size_t i = 0; i < inv.size(); ++i) CHECK(inv[i] == src[i]);
  }
}

TEST_CASE("soft z-buffer favours the nearer of two colliding pixels") {
  const ErpGrid g(16, 8);
  const double b = 0.26;
  const double ls = g.lat_step();
  // everything else is so far away that its attenuation underflows
  DepthMap depth(g, 1, 1e4);
  const double far = b * std::sin(4.5 * ls) / ls;        // row 4 moves one row down
  const double near = b * std::sin(3.5 * ls) / (2 * ls); // row 3 moves two rows down
  depth(3, 4) = far;
  depth(3, 3) = near;
  Image src = make_image(g);
  src(3, 4, 0) = 1.0;  // far pixel red
  src(3, 3, 2) = 1.0;  // near pixel blue
  const SplatConfig cfg;
  const SplatTape tape = splat_forward(src, depth, {Axis::vertical_y, b}, cfg);
  const std::size_t t = depth.index(3, 5);
  for (std::size_t s : {depth.index(3, 4), depth.index(3, 3)}) {
    double on_t = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (tape.footprints[s].target[k] == t) on_t += tape.footprints[s].beta[k];
    }
    CHECK(on_t == doctest::Approx(1.0).epsilon(1e-9));
  }
  const SplatResult& r = tape.result;
  CHECK(r.mask(3, 5) == 0);
  CHECK(r.color(3, 5, 1) == 0.0);
  const double ratio = r.color(3, 5, 2) / r.color(3, 5, 0);
  CHECK(ratio == doctest::Approx(std::exp((far - near) / cfg.d_max)).epsilon(1e-8));
  CHECK(ratio > 1.0);
}

TEST_CASE("splat weights are conserved") {
  const ErpGrid g(32, 16);
  const Image src = noise_image(g, 3);
  const DepthMap depth = random_depth(g, 4);
  const SplatConfig cfg;
  for (Axis axis : {Axis::horizontal_x, Axis::vertical_y}) {
    const SplatResult r = splat_render(src, depth, {axis, 0.26}, cfg);
    double total = 0.0, alpha = 0.0;
    for (std::size_t p = 0; p < g.pixels(); ++p) {
      total += r.weights[p];
      alpha += std::exp(-depth[p] / cfg.d_max);
    }
    CHECK(std::abs(total - alpha) <= 1e-6 * alpha);
  }
}

TEST_CASE("mask soundness and canvas invariants") {
  const ErpGrid g(32, 16);
  const Image src = noise_image(g, 5);
  const DepthMap depth = random_depth(g, 6, 0.3, 1.0);
  const SplatConfig cfg;
  for (Axis axis : {Axis::horizontal_x, Axis::vertical_y}) {
    const SplatTape tape = splat_forward(src, depth, {axis, 0.26}, cfg);
    std::vector<int> hits(g.pixels(), 0);
    for (const SplatFootprint& f : tape.footprints) {
      for (int k = 0; k < 4; ++k) {
        if (f.beta[k] > 0.0) ++hits[f.target[k]];
      }
    }
    std::size_t masked = 0;
    for (std::size_t p = 0; p < g.pixels(); ++p) {
      const bool empty = tape.result.mask[p] != 0;
      masked += empty;
      CHECK(empty == (tape.result.weights[p] < cfg.epsilon_mask));
      if (!empty) CHECK(hits[p] > 0);
      if (hits[p] == 0) CHECK(empty);
      for (int c = 0; c < 3; ++c) {
        const double x = tape.result.color[3 * p + c];
        if (empty) {
          CHECK(x == 0.0);
        } else {
          CHECK(x >= 0.0);
          CHECK(x <= 1.0 + 1e-9);
        }
      }
    }
    MESSAGE("masked pixels " << masked);
  }
}

TEST_CASE("splat output does not depend on the worker count") {
  const ErpGrid g(64, 32);
  const Image src = noise_image(g, 7);
  const DepthMap depth = random_depth(g, 8);
  const int before = thread_count();
  set_thread_count(1);
  const SplatResult one = splat_render(src, depth, {Axis::horizontal_x, 0.26});
  const Image inv_one = inverse_warp(src, depth, {Axis::horizontal_x, 0.26});
  set_thread_count(4);
  const SplatResult four = splat_render(src, depth, {Axis::horizontal_x, 0.26});
  const Image inv_four = inverse_warp(src, depth, {Axis::horizontal_x, 0.26});
  set_thread_count(before);
  CHECK(one.color == four.color);
  CHECK(one.weights == four.weights);
  CHECK(one.mask == four.mask);
  CHECK(inv_one == inv_four);
}

TEST_CASE("depth gradient matches finite differences") {
  const ErpGrid g(16, 8);
  std::mt19937_64 rng(99);
  const SplatConfig cfg;
  double worst = 0.0;
  int instances = 0;
  for (int n = 0; n < 100; ++n) {
    const Image src = noise_image(g, 1000 + n);
    const DepthMap depth = random_depth(g, 2000 + n, 0.6, 3.0);
    const Image up = noise_image(g, 3000 + n);
    const Baseline b{n % 2 ? Axis::horizontal_x : Axis::vertical_y, 0.26};
    const SplatGradient sg = splat_render_with_grad(src, depth, b, cfg, up);
    ScalarMap fd(g);
    DepthMap probe = depth;
    for (std::size_t i = 0; i < depth.size(); ++i) {
      const double h = 1e-4 * depth[i];
      probe[i] = depth[i] + h;
      const double fp = inner(up, splat_render(src, probe, b, cfg).color);
      probe[i] = depth[i] - h;
      const double fm = inner(up, splat_render(src, probe, b, cfg).color);
      probe[i] = depth[i];
      fd[i] = (fp - fm) / (2 * h);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
      num += (fd[i] - sg.depth_grad[i]) * (fd[i] - sg.depth_grad[i]);
      den += fd[i] * fd[i];
    }
    const double rel = std::sqrt(num / den);
    worst = std::max(worst, rel);
    instances += rel < 1e-3;
  }
  MESSAGE("worst relative gradient error " << worst);
  CHECK(instances == 100);
}

TEST_CASE("uniform color gives a vanishing depth gradient") {
  const ErpGrid g(16, 8);
  const Image src = make_image(g, 0.6);
  const DepthMap depth = random_depth(g, 9);
  const Image up = make_image(g, 1.0);
  const SplatGradient sg = splat_render_with_grad(src, depth, {Axis::horizontal_x, 0.26}, {}, up);
  for (std::size_t i = 0; i < sg.depth_grad.size(); ++i) CHECK(std::abs(sg.depth_grad[i]) < 1e-6);
}

TEST_CASE("vertical splat gradient is local to the column") {
  const ErpGrid g(16, 8);
  const Image src = noise_image(g, 10);
  const DepthMap depth = random_depth(g, 11);
  const Image up = noise_image(g, 12);
  const Baseline b{Axis::vertical_y, 0.26};
  const SplatGradient a = splat_render_with_grad(src, depth, b, {}, up);
  DepthMap other = depth;
  for (int v = 0; v < g.height(); ++v) other(9, v) *= 1.7;
  const SplatGradient c = splat_render_with_grad(src, other, b, {}, up);
  for (int v = 0; v < g.height(); ++v) {
    for (int u = 0; u < g.width(); ++u) {
      if (u != 9) CHECK(a.depth_grad(u, v) == c.depth_grad(u, v));
    }
  }
}

TEST_CASE("splat and inverse warp reproduce a raycast shell view") {
  const ErpGrid g(256, 128);
  const StereoRig rig = make_rig(textured_shell(2.0), {0, 0, 0}, 0.26, g);
  const Baseline b{Axis::vertical_y, 0.26};
  const SplatResult s = splat_render(rig.center.color, rig.center.depth, b);
  const double splat_psnr = oracle::psnr(s.color, rig.up.color, &s.mask);
  // the inverse warp rebuilds the center view from the up view
  const Image inv = inverse_warp(rig.up.color, rig.center.depth, b);
  const double inv_psnr = oracle::psnr(inv, rig.center.color);
  MESSAGE("shell splat psnr " << splat_psnr << " inverse psnr " << inv_psnr);
  CHECK(splat_psnr > 30.0);
  CHECK(inv_psnr > 30.0);
}

TEST_CASE("inverse warp ghosts at an occluding edge where splatting masks") {
  // a panel hanging in front of a far wall
  Scene scene;
  Material wall;
  wall.texture = {TextureKind::checker, 0.3, 1, 1, 0.9};
  Material panel;
  panel.albedo = {0.9, 0.2, 0.2};
  panel.texture = {TextureKind::flat, 1.0, 1, 1, 0.0};
  scene.boxes.push_back({{0, 0, 0}, {4, 4, 4}, wall});
  scene.rects.push_back({{0, 0.0, 1.0}, 2, {1.5, 0.3}, panel});
  const ErpGrid g(256, 128);
  const StereoRig rig = make_rig(scene, {0, 0, 0}, 0.26, g);
  const Baseline b{Axis::vertical_y, 0.26};
  const SplatResult s = splat_render(rig.center.color, rig.center.depth, b);
  const Image inv = inverse_warp(rig.up.color, rig.center.depth, b);

  std::size_t masked_front = 0;
  for (int v = 0; v < g.height(); ++v) {
    for (int u = 0; u < g.width(); ++u) {
      const Cartesian d = pixel_direction(u, v, g);
      if (d.z > 0.8) masked_front += s.mask(u, v);
    }
  }
  MESSAGE("disoccluded pixels masked by the splat " << masked_front);
  CHECK(masked_front > 0);

  // pixels of the far wall just below the panel pick up the panel's red in
  // the inverse warp
  int ghosts = 0;
  for (int v = 0; v < g.height(); ++v) {
    for (int u = 0; u < g.width(); ++u) {
      const bool wall_px = rig.center.depth(u, v) > 2.0;
      const bool red = inv(u, v, 0) > 0.8 && inv(u, v, 1) < 0.3 && inv(u, v, 2) < 0.3;
      ghosts += wall_px && red;
    }
  }
  MESSAGE("ghost pixels in the inverse warp " << ghosts);
  CHECK(ghosts > 0);
}

TEST_CASE("renderer input validation") {
  const ErpGrid g(16, 8);
  const Image src = noise_image(g, 1);
  DepthMap depth(g, 1, 1.0);
  CHECK_THROWS_AS(splat_render(src, DepthMap(ErpGrid(8, 4), 1, 1.0), {Axis::vertical_y, 0.26}),
                  std::invalid_argument);
  depth(2, 2) = 0.0;
  CHECK_THROWS_AS(splat_render(src, depth, {Axis::vertical_y, 0.26}), std::invalid_argument);
  CHECK_THROWS_AS(inverse_warp(src, DepthMap(ErpGrid(8, 4), 1, 1.0), {Axis::vertical_y, 0.26}),
                  std::invalid_argument);
}

TEST_CASE("bilinear sampling wraps in longitude and clamps in latitude") {
  const ErpGrid g(8, 4);
  Image img = make_image(g);
  for (int v = 0; v < 4; ++v) {
    for (int u = 0; u < 8; ++u) img(u, v, 0) = u + 10 * v;
  }
  double out[3];
  sample_bilinear(img, {7.5, 1.0}, out);
  CHECK(out[0] == doctest::Approx(0.5 * (7 + 10) + 0.5 * (0 + 10)));
  sample_bilinear(img, {2.0, -0.25}, out);
  CHECK(out[0] == doctest::Approx(2.0));
  sample_bilinear(img, {2.25, 2.5}, out);
  CHECK(out[0] == doctest::Approx(2.25 + 25.0));
}
