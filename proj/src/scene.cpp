// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "sphsynth/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sphsynth {

namespace {

constexpr double kHitEpsilon = 1e-9;

double coord(const Cartesian& p, int axis) { return axis == 0 ? p.x : (axis == 1 ? p.y : p.z); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice(std::int64_t i, std::int64_t j, std::int64_t k, std::uint64_t seed) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(i));
  h = splitmix64(h ^ static_cast<std::uint64_t>(j));
  h = splitmix64(h ^ static_cast<std::uint64_t>(k));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(double x, double y, double z, std::uint64_t seed) {
  const double fx = std::floor(x), fy = std::floor(y), fz = std::floor(z);
  const auto i = static_cast<std::int64_t>(fx);
  const auto j = static_cast<std::int64_t>(fy);
  const auto k = static_cast<std::int64_t>(fz);
  const double tx = smooth(x - fx), ty = smooth(y - fy), tz = smooth(z - fz);
  double c[2][2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int d = 0; d < 2; ++d) c[a][b][d] = lattice(i + a, j + b, k + d, seed);
  auto lerp = [](double p, double q, double t) { return p + (q - p) * t; };
  const double x00 = lerp(c[0][0][0], c[1][0][0], tx);
  const double x10 = lerp(c[0][1][0], c[1][1][0], tx);
  const double x01 = lerp(c[0][0][1], c[1][0][1], tx);
  const double x11 = lerp(c[0][1][1], c[1][1][1], tx);
  return lerp(lerp(x00, x10, ty), lerp(x01, x11, ty), tz);
}

std::array<double, 3> shade(const Material& m, std::uint64_t scene_seed, const Cartesian& p,
                            int face_axis) {
  const double t = texture_value(m.texture, scene_seed, p, face_axis);
  const double k = 1.0 - m.texture.contrast + m.texture.contrast * t;
  return {m.albedo[0] * k, m.albedo[1] * k, m.albedo[2] * k};
}

struct Candidate {
  double t = std::numeric_limits<double>::infinity();
  const Material* material = nullptr;
  int face_axis = -1;
  double residual = 0.0;
};

double box_residual(const BoxPrimitive& b, const Cartesian& p) {
  return std::max({std::abs(p.x - b.center.x) - b.half.x, std::abs(p.y - b.center.y) - b.half.y,
                   std::abs(p.z - b.center.z) - b.half.z});
}

double sphere_residual(const SpherePrimitive& s, const Cartesian& p) {
  const double dx = p.x - s.center.x, dy = p.y - s.center.y, dz = p.z - s.center.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz) - s.radius;
}

double rect_residual(const RectPrimitive& r, const Cartesian& p) {
  return coord(p, r.normal_axis) - coord(r.center, r.normal_axis);
}

// Slab test; returns the first surface crossing ahead of the origin whether
// the origin is inside (room shell) or outside (solid box).
void intersect(const BoxPrimitive& b, const Cartesian& o, const Cartesian& d, Candidate& best) {
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  int axis_min = -1, axis_max = -1;
  for (int a = 0; a < 3; ++a) {
    const double oa = coord(o, a), da = coord(d, a);
    const double lo = coord(b.center, a) - coord(b.half, a);
    const double hi = coord(b.center, a) + coord(b.half, a);
    if (da == 0.0) {
      if (oa < lo || oa > hi) return;
      continue;
    }
    double t0 = (lo - oa) / da, t1 = (hi - oa) / da;
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > tmin) { tmin = t0; axis_min = a; }
    if (t1 < tmax) { tmax = t1; axis_max = a; }
  }
  if (tmax < tmin) return;
  double t = tmin > kHitEpsilon ? tmin : tmax;
  int axis = tmin > kHitEpsilon ? axis_min : axis_max;
  if (!(t > kHitEpsilon) || t >= best.t) return;
  best = {t, &b.material, axis, 0.0};
  const Cartesian p{o.x + t * d.x, o.y + t * d.y, o.z + t * d.z};
  best.residual = box_residual(b, p);
}

void intersect(const SpherePrimitive& s, const Cartesian& o, const Cartesian& d, Candidate& best) {
  const Cartesian oc{o.x - s.center.x, o.y - s.center.y, o.z - s.center.z};
  const double b = oc.x * d.x + oc.y * d.y + oc.z * d.z;
  const double c = oc.x * oc.x + oc.y * oc.y + oc.z * oc.z - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return;
  const double root = std::sqrt(disc);
  // stable pair of roots
  const double q = b > 0.0 ? -(b + root) : -(b - root);
  double t0 = q, t1 = q != 0.0 ? c / q : 0.0;
  if (t0 > t1) std::swap(t0, t1);
  const double t = t0 > kHitEpsilon ? t0 : t1;
  if (!(t > kHitEpsilon) || t >= best.t) return;
  best = {t, &s.material, -1, 0.0};
  const Cartesian p{o.x + t * d.x, o.y + t * d.y, o.z + t * d.z};
  best.residual = sphere_residual(s, p);
}

void intersect(const RectPrimitive& r, const Cartesian& o, const Cartesian& d, Candidate& best) {
  const int n = r.normal_axis;
  const double dn = coord(d, n);
  if (dn == 0.0) return;
  const double t = (coord(r.center, n) - coord(o, n)) / dn;
  if (!(t > kHitEpsilon) || t >= best.t) return;
  const Cartesian p{o.x + t * d.x, o.y + t * d.y, o.z + t * d.z};
  int k = 0;
  for (int a = 0; a < 3; ++a) {
    if (a == n) continue;
    if (std::abs(coord(p, a) - coord(r.center, a)) > r.half_extent[k++]) return;
  }
  best = {t, &r.material, n, rect_residual(r, p)};
}

}  // namespace

double texture_value(const Texture& tex, std::uint64_t scene_seed, const Cartesian& p,
                     int face_axis) {
  switch (tex.kind) {
    case TextureKind::flat:
      return 1.0;
    case TextureKind::checker: {
      std::int64_t parity = 0;
      for (int a = 0; a < 3; ++a) {
        if (a == face_axis) continue;
        parity += static_cast<std::int64_t>(std::floor(coord(p, a) / tex.scale));
      }
      return (parity & 1) ? 1.0 : 0.0;
    }
    case TextureKind::noise: {
      const std::uint64_t seed = splitmix64(scene_seed ^ splitmix64(tex.seed));
      double sum = 0.0, amp = 1.0, norm = 0.0, freq = 1.0 / tex.scale;
      for (int o = 0; o < std::max(1, tex.octaves); ++o) {
        sum += amp * value_noise(p.x * freq, p.y * freq, p.z * freq, seed + o);
        norm += amp;
        amp *= 0.5;
        freq *= 2.0;
      }
      return sum / norm;
    }
  }
  return 1.0;
}

std::optional<Hit> trace_ray(const Scene& scene, const Cartesian& origin, const Cartesian& dir) {
  Candidate best;
  for (const auto& b : scene.boxes) intersect(b, origin, dir, best);
  for (const auto& s : scene.spheres) intersect(s, origin, dir, best);
  for (const auto& r : scene.rects) intersect(r, origin, dir, best);
  if (!best.material) return std::nullopt;
  Hit hit;
  hit.distance = best.t;
  hit.point = {origin.x + best.t * dir.x, origin.y + best.t * dir.y, origin.z + best.t * dir.z};
  hit.color = shade(*best.material, scene.seed, hit.point, best.face_axis);
  hit.surface_residual = best.residual;
  return hit;
}

double surface_function(const Scene& scene, const Cartesian& p) {
  double best = std::numeric_limits<double>::infinity();
  auto keep = [&](double f) {
    if (std::abs(f) < std::abs(best)) best = f;
  };
  for (const auto& b : scene.boxes) keep(box_residual(b, p));
  for (const auto& s : scene.spheres) keep(sphere_residual(s, p));
  for (const auto& r : scene.rects) keep(rect_residual(r, p));
  return best;
}

View render_scene(const Scene& scene, const Cartesian& origin, const ErpGrid& grid) {
  View view{make_image(grid), DepthMap(grid)};
  int escaped_u = -1, escaped_v = -1;
#pragma omp parallel for schedule(static)
  for (int v = 0; v < grid.height(); ++v) {
    for (int u = 0; u < grid.width(); ++u) {
      const Cartesian dir = pixel_direction(u, v, grid);
      const auto hit = trace_ray(scene, origin, dir);
      if (!hit) {
#pragma omp critical
        if (escaped_v < 0 || v < escaped_v || (v == escaped_v && u < escaped_u)) {
          escaped_u = u;
          escaped_v = v;
        }
        continue;
      }
      view.depth(u, v) = hit->distance;
      for (int c = 0; c < kColorChannels; ++c) view.color(u, v, c) = hit->color[c];
    }
  }
  if (escaped_v >= 0) {
    throw std::runtime_error("render_scene: ray through pixel (" + std::to_string(escaped_u) +
                             "," + std::to_string(escaped_v) +
                             ") escapes the scene; the camera must be enclosed");
  }
  return view;
}

StereoRig make_rig(const Scene& scene, const Cartesian& center, double baseline,
                   const ErpGrid& grid) {
  return {render_scene(scene, center, grid),
          render_scene(scene, {center.x, center.y + baseline, center.z}, grid),
          render_scene(scene, {center.x + baseline, center.y, center.z}, grid), baseline, center};
}

Scene default_scene(std::uint64_t seed) {
  Scene s;
  s.seed = seed;
  auto noise = [](double scale, std::uint64_t k) {
    return Texture{TextureKind::noise, scale, 3, k, 0.85};
  };
  // room shell: x in [-2.8, 3.2], y in [-1.3, 1.7], z in [-3.7, 4.3]
  s.boxes.push_back({{0.2, 0.2, 0.3}, {3.0, 1.5, 4.0}, {{0.85, 0.75, 0.6}, noise(0.9, 1)}});
  // cabinet behind the camera
  s.boxes.push_back({{1.3, -0.85, -2.4}, {0.6, 0.45, 0.5}, {{0.4, 0.6, 0.85}, noise(0.5, 2)}});
  // objects close to the +x and -x directions
  s.spheres.push_back({{1.7, -0.2, 0.3}, 0.55, {{0.9, 0.45, 0.35}, noise(0.4, 3)}});
  s.spheres.push_back({{-1.6, 0.3, -0.5}, 0.45, {{0.45, 0.85, 0.45}, noise(0.4, 4)}});
  // free-standing panel in front, occludes part of the far wall
  s.rects.push_back({{-0.4, 0.1, 2.2}, 2, {0.7, 0.5}, {{0.95, 0.9, 0.5}, noise(0.35, 5)}});
  return s;
}

Scene untextured(Scene scene) {
  auto flatten = [](Material& m) { m.texture.kind = TextureKind::flat; };
  for (auto& b : scene.boxes) flatten(b.material);
  for (auto& s : scene.spheres) flatten(s.material);
  for (auto& r : scene.rects) flatten(r.material);
  return scene;
}

namespace {

class LineParser {
 public:
  LineParser(std::istringstream& in, int line) : in_(in), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("scene line " + std::to_string(line_) + ": " + msg);
  }

  bool next(std::string& tok) { return static_cast<bool>(in_ >> tok); }

  std::string word(const char* what) {
    std::string tok;
    if (!next(tok)) fail(std::string("missing ") + what);
    return tok;
  }

  double number(const char* what) {
    const std::string tok = word(what);
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || !std::isfinite(x)) {
      fail(std::string("expected a number for ") + what + ", got '" + tok + "'");
    }
    return x;
  }

  Cartesian vec3(const char* what) { return {number(what), number(what), number(what)}; }

  bool material_key(const std::string& key, Material& m) {
    if (key == "albedo") {
      for (double& a : m.albedo) a = number("albedo");
    } else if (key == "texture") {
      const std::string kind = word("texture kind");
      if (kind == "flat") {
        m.texture.kind = TextureKind::flat;
      } else if (kind == "checker") {
        m.texture.kind = TextureKind::checker;
        if (word("'period'") != "period") fail("checker texture expects 'period p'");
        m.texture.scale = number("period");
      } else if (kind == "noise") {
        m.texture.kind = TextureKind::noise;
        if (word("'scale'") != "scale") fail("noise texture expects 'scale s octaves n'");
        m.texture.scale = number("scale");
        if (word("'octaves'") != "octaves") fail("noise texture expects 'scale s octaves n'");
        m.texture.octaves = static_cast<int>(number("octaves"));
      } else {
        fail("unknown texture '" + kind + "'");
      }
      if (!(m.texture.scale > 0.0)) fail("texture scale must be positive");
    } else if (key == "seed") {
      m.texture.seed = static_cast<std::uint64_t>(number("seed"));
    } else if (key == "contrast") {
      m.texture.contrast = number("contrast");
    } else {
      return false;
    }
    return true;
  }

 private:
  std::istringstream& in_;
  int line_;
};

int parse_axis(LineParser& p) {
  const std::string a = p.word("normal axis");
  if (a == "x") return 0;
  if (a == "y") return 1;
  if (a == "z") return 2;
  p.fail("normal must be x, y or z");
}

}  // namespace

Scene parse_scene(std::istream& in) {
  Scene scene;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ss(raw);
    LineParser p(ss, line);
    std::string kind;
    if (!p.next(kind)) continue;
    std::string key;
    if (kind == "seed") {
      scene.seed = static_cast<std::uint64_t>(p.number("seed"));
      if (p.next(key)) p.fail("unexpected token '" + key + "'");
    } else if (kind == "box") {
      BoxPrimitive b{{}, {-1, -1, -1}, {}};
      bool has_center = false;
      while (p.next(key)) {
        if (key == "center") {
          b.center = p.vec3("center");
          has_center = true;
        } else if (key == "half") {
          b.half = p.vec3("half");
        } else if (!p.material_key(key, b.material)) {
          p.fail("unknown box attribute '" + key + "'");
        }
      }
      if (!has_center || !(b.half.x > 0 && b.half.y > 0 && b.half.z > 0)) {
        p.fail("box needs center and positive half extents");
      }
      scene.boxes.push_back(b);
    } else if (kind == "sphere") {
      SpherePrimitive s{{}, -1.0, {}};
      bool has_center = false;
      while (p.next(key)) {
        if (key == "center") {
          s.center = p.vec3("center");
          has_center = true;
        } else if (key == "radius") {
          s.radius = p.number("radius");
        } else if (!p.material_key(key, s.material)) {
          p.fail("unknown sphere attribute '" + key + "'");
        }
      }
      if (!has_center || !(s.radius > 0)) p.fail("sphere needs center and positive radius");
      scene.spheres.push_back(s);
    } else if (kind == "rect") {
      RectPrimitive r{{}, -1, {-1, -1}, {}};
      bool has_center = false;
      while (p.next(key)) {
        if (key == "center") {
          r.center = p.vec3("center");
          has_center = true;
        } else if (key == "normal") {
          r.normal_axis = parse_axis(p);
        } else if (key == "half") {
          r.half_extent = {p.number("half"), p.number("half")};
        } else if (!p.material_key(key, r.material)) {
          p.fail("unknown rect attribute '" + key + "'");
        }
      }
      if (!has_center || r.normal_axis < 0 || !(r.half_extent[0] > 0 && r.half_extent[1] > 0)) {
        p.fail("rect needs center, normal and positive half extents");
      }
      scene.rects.push_back(r);
    } else {
      p.fail("unknown primitive '" + kind + "'");
    }
  }
  if (scene.boxes.empty() && scene.spheres.empty() && scene.rects.empty()) {
    throw std::invalid_argument("scene: no primitives");
  }
  return scene;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file '" + path + "'");
  return parse_scene(in);
}

}  // namespace sphsynth
