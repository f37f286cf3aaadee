// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "sphsynth/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "sphsynth/io.hpp"
#include "sphsynth/metrics.hpp"
#include "sphsynth/optim.hpp"
#include "sphsynth/parallel.hpp"
#include "sphsynth/renderer.hpp"
#include "sphsynth/scene.hpp"
#include "sphsynth/supervision.hpp"

namespace sphsynth {

namespace {

namespace fs = std::filesystem;

constexpr const char* kManifest = "manifest.txt";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ErpGrid parse_grid(const std::string& s) {
  int w = 0, h = 0;
  char x = 0, extra = 0;
  if (std::sscanf(s.c_str(), "%d%c%d%c", &w, &x, &h, &extra) != 3 || (x != 'x' && x != 'X')) {
    throw UsageError("--grid expects WxH, got '" + s + "'");
  }
  try {
    return ErpGrid(w, h);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw IoError("bad " + what + " '" + s + "'");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir + "'");
}

std::string join(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

void write_view(const std::string& dir, const char* name, const View& view) {
  save_ppm(join(dir, (std::string(name) + "_color.ppm").c_str()), view.color);
  save_pfm(join(dir, (std::string(name) + "_depth.pfm").c_str()), view.depth);
}

View read_view(const std::string& dir, const char* name) {
  View v{load_ppm(join(dir, (std::string(name) + "_color.ppm").c_str())),
         load_pfm(join(dir, (std::string(name) + "_depth.pfm").c_str()))};
  require_same_grid(v.color, v.depth, name);
  return v;
}

double psnr(const Image& a, const Image& b, const Mask* empty) {
  double se = 0.0;
  std::size_t n = 0;
  const int ch = a.channels();
  for (std::size_t p = 0; p < a.grid().pixels(); ++p) {
    if (empty && (*empty)[p]) continue;
    for (int c = 0; c < ch; ++c) {
      const double d = a[p * ch + c] - b[p * ch + c];
      se += d * d;
    }
    n += ch;
  }
  if (n == 0) throw NumericError("psnr: no unmasked pixels");
  const double mse = se / static_cast<double>(n);
  return mse == 0.0 ? INFINITY : 10.0 * std::log10(1.0 / mse);
}

// ---------------------------------------------------------------- render

struct RenderArgs {
  std::string scene = "default";
  std::string grid = "512x256";
  double baseline = 0.26;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<double> origin{0.0, 0.0, 0.0};
};

int cmd_render(const RenderArgs& a, std::ostream& out) {
  const ErpGrid grid = parse_grid(a.grid);
  if (!(a.baseline >= 0.0) || !std::isfinite(a.baseline)) {
    throw UsageError("--baseline must be a non-negative number");
  }
  Scene scene;
  std::string name = a.scene;
  if (a.scene == "default") {
    scene = default_scene(a.seed);
  } else {
    scene = load_scene(a.scene);
    if (a.seed_set) scene.seed = a.seed;
    name = fs::path(a.scene).filename().string();
  }
  const Cartesian origin{a.origin[0], a.origin[1], a.origin[2]};
  const StereoRig rig = make_rig(scene, origin, a.baseline, grid);
  ensure_dir(a.out);
  write_view(a.out, "center", rig.center);
  write_view(a.out, "up", rig.up);
  write_view(a.out, "right", rig.right);
  save_manifest(join(a.out, kManifest),
                {{"tool_version", kToolVersion},
                 {"width", std::to_string(grid.width())},
                 {"height", std::to_string(grid.height())},
                 {"baseline", fmt(a.baseline)},
                 {"seed", std::to_string(scene.seed)},
                 {"scene", name},
                 {"origin", fmt(origin.x) + " " + fmt(origin.y) + " " + fmt(origin.z)}});
  out << "rendered " << grid.width() << "x" << grid.height() << " rig to " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- synthesize

struct SynthArgs {
  std::string color;
  std::string depth;
  double baseline = 0.26;
  std::string axis = "y";
  std::string method = "splat";
  std::string out;
  std::string reference;
  std::string config;
};

Axis parse_axis(const std::string& s) {
  if (s == "y" || s == "vertical") return Axis::vertical_y;
  if (s == "x" || s == "horizontal") return Axis::horizontal_x;
  throw UsageError("--axis expects x or y, got '" + s + "'");
}

int cmd_synthesize(const SynthArgs& a, std::ostream& out) {
  const Axis axis = parse_axis(a.axis);
  const Image color = load_ppm(a.color);
  const DepthMap depth = load_pfm(a.depth);
  require_same_grid(color, depth, "synthesize");
  require_positive_depth(depth, "synthesize");
  const Baseline baseline{axis, a.baseline};
  Hyperparameters hp;
  if (!a.config.empty()) hp = load_hyperparameters(a.config);

  Image synth = make_image(color.grid());
  Mask empty(color.grid());
  if (a.method == "splat") {
    SplatResult r = splat_render(color, depth, baseline, hp.splat);
    synth = std::move(r.color);
    empty = std::move(r.mask);
  } else if (a.method == "inverse") {
    synth = inverse_warp(color, depth, baseline);
  } else {
    throw UsageError("--method expects splat or inverse, got '" + a.method + "'");
  }
  ensure_dir(a.out);
  save_ppm(join(a.out, "synth.ppm"), synth);
  save_pgm(join(a.out, "mask.pgm"), empty);

  std::size_t n_empty = 0;
  for (std::size_t i = 0; i < empty.size(); ++i) n_empty += empty[i];
  out << "method " << a.method << ", empty pixels " << n_empty << "\n";
  if (!a.reference.empty()) {
    const Image ref = load_ppm(a.reference);
    require_same_grid(ref, synth, "synthesize --reference");
    // compare at the file's 8-bit precision
    Image q = synth;
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = quantize8(q[i]) / 255.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", psnr(ref, q, &empty));
    out << "psnr_db " << buf << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string out;
  double scale = 1.0;
  bool force = false;
};

void check_manifests(const std::string& pred, const std::string& gt, bool force) {
  const fs::path mp = fs::path(pred).parent_path() / kManifest;
  const fs::path mg = fs::path(gt).parent_path() / kManifest;
  if (!fs::exists(mp) || !fs::exists(mg)) return;
  const Manifest a = load_manifest(mp.string());
  const Manifest b = load_manifest(mg.string());
  for (const char* key : {"width", "height", "baseline", "seed", "scene"}) {
    const auto ia = a.find(key);
    const auto ib = b.find(key);
    if (ia == a.end() || ib == b.end() || ia->second == ib->second) continue;
    if (force) continue;
    throw IoError(std::string("manifest mismatch on '") + key + "': " + ia->second + " vs " +
                  ib->second + " (use --force to override)");
  }
}

int cmd_evaluate(const EvalArgs& a, std::ostream& out) {
  if (!(a.scale > 0.0) || !std::isfinite(a.scale)) throw UsageError("--scale must be positive");
  check_manifests(a.pred, a.gt, a.force);
  DepthMap pred = load_pfm(a.pred);
  const DepthMap gt = load_pfm(a.gt);
  require_same_grid(pred, gt, "evaluate");
  if (a.scale != 1.0) {
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] *= a.scale;
  }
  const MetricsReport r = evaluate_depth(pred, gt);
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    if (!f) throw IoError("cannot write '" + a.out + "'");
    f << metrics_csv_header() << "\n" << metrics_csv_row(r) << "\n";
    if (!f) throw IoError("write failed for '" + a.out + "'");
  }
  print_metrics_table(out, r);
  return kExitOk;
}

// ---------------------------------------------------------------- optimize

struct OptimArgs {
  std::string rig;
  std::string mode = "ud";
  double ratio = -1.0;
  int steps = 300;
  std::string out;
  std::string config;
  bool no_attention = false;
  double step_size = 0.0;
  double init_depth = 0.0;
  std::string param = "log";
};

StereoRig load_rig(const std::string& dir, Manifest& manifest) {
  const std::string mpath = join(dir, kManifest);
  manifest = load_manifest(mpath);
  StereoRig rig{read_view(dir, "center"), read_view(dir, "up"), read_view(dir, "right"),
                parse_double(manifest_get(manifest, "baseline", mpath), "baseline"), {}};
  require_same_grid(rig.center.color, rig.up.color, "rig");
  require_same_grid(rig.center.color, rig.right.color, "rig");
  const int w = std::stoi(manifest_get(manifest, "width", mpath));
  const int h = std::stoi(manifest_get(manifest, "height", mpath));
  if (w != rig.grid().width() || h != rig.grid().height()) {
    throw IoError("rig rasters do not match the manifest grid in '" + dir + "'");
  }
  return rig;
}

int cmd_optimize(const OptimArgs& a, std::ostream& out, std::ostream& err) {
  OptimConfig cfg;
  try {
    cfg.mode = parse_mode(a.mode);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!a.config.empty()) {
    const Hyperparameters hp = load_hyperparameters(a.config);
    cfg.loss = hp.loss;
    cfg.splat = hp.splat;
  }
  if (a.ratio >= 0.0) cfg.loss.lambda_ratio = a.ratio;
  if (a.no_attention) cfg.loss.attention = false;
  cfg.steps = a.steps;
  if (a.step_size > 0.0) cfg.step_size = a.step_size;
  if (a.init_depth > 0.0) cfg.init_depth = a.init_depth;
  if (a.param == "log") {
    cfg.parameterization = Parameterization::log_depth;
  } else if (a.param == "depth") {
    cfg.parameterization = Parameterization::depth;
  } else {
    throw UsageError("--param expects log or depth");
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  Manifest manifest;
  const StereoRig rig = load_rig(a.rig, manifest);
  const OptimResult res = optimize_depth(rig, cfg);

  ensure_dir(a.out);
  {
    std::ofstream f(join(a.out, "trace.csv"));
    if (!f) throw IoError("cannot write trace in '" + a.out + "'");
    f << "step,loss,abs_rel_vs_gt\n";
    char buf[128];
    for (const TraceRow& row : res.trace) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", row.step, row.loss, row.abs_rel);
      f << buf;
    }
  }
  if (res.diverged) {
    err << "optimize: loss became non-finite at step " << res.trace.back().step << "\n";
    return kExitNumeric;
  }
  save_pfm(join(a.out, "depth.pfm"), res.depth);
  const MetricsReport r = evaluate_depth(res.depth, rig.center.depth);
  {
    std::ofstream f(join(a.out, "report.csv"));
    if (!f) throw IoError("cannot write report in '" + a.out + "'");
    f << metrics_csv_header() << "\n" << metrics_csv_row(r) << "\n";
  }
  Manifest m = manifest;
  m["tool_version"] = kToolVersion;
  m["mode"] = mode_name(cfg.mode);
  m["ratio"] = fmt(cfg.loss.lambda_ratio);
  m["steps"] = std::to_string(cfg.steps);
  m["attention"] = cfg.loss.attention ? "on" : "off";
  m["init_depth"] = fmt(cfg.init_depth);
  save_manifest(join(a.out, kManifest), m);

  char buf[160];
  std::snprintf(buf, sizeof buf, "mode %s: loss %.6g -> %.6g, abs_rel %.4f -> %.4f\n",
                mode_name(cfg.mode), res.trace.front().loss, res.trace.back().loss,
                res.trace.front().abs_rel, res.trace.back().abs_rel);
  out << buf;
  print_metrics_table(out, r);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  configure_threads_from_env();

  CLI::App app{"Spherical view synthesis, depth evaluation and self-supervised depth recovery",
               "sphsynth"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Raycast a center/up/right stereo rig");
  render->add_option("scene", ra.scene, "Scene description file, or 'default'")->required();
  render->add_option("--grid", ra.grid, "Raster size WxH")->capture_default_str();
  render->add_option("--baseline", ra.baseline, "Rig baseline in meters")->capture_default_str();
  render->add_option("--out", ra.out, "Output directory")->required();
  render->add_option("--seed", ra.seed, "Texture seed")->each([&](const std::string&) {
    ra.seed_set = true;
  });
  render->add_option("--origin", ra.origin, "Center camera position x y z")->expected(3);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synthesize", "Render a displaced view from color + depth");
  synth->add_option("center-color", sa.color, "Source color (PPM)")->required();
  synth->add_option("center-depth", sa.depth, "Source depth (PFM)")->required();
  synth->add_option("--baseline", sa.baseline, "Target minus source position, meters")
      ->capture_default_str();
  synth->add_option("--axis", sa.axis, "Baseline axis: x or y")->capture_default_str();
  synth->add_option("--method", sa.method, "splat or inverse")->capture_default_str();
  synth->add_option("--out", sa.out, "Output directory")->required();
  synth->add_option("--reference", sa.reference, "Target view to report PSNR against");
  synth->add_option("--config", sa.config, "Hyperparameter file");

  EvalArgs ea;
  auto* eval = app.add_subcommand("evaluate", "Distortion-aware depth metrics");
  eval->add_option("pred-depth", ea.pred, "Predicted depth (PFM)")->required();
  eval->add_option("gt-depth", ea.gt, "Ground-truth depth (PFM)")->required();
  eval->add_option("--out", ea.out, "CSV report path");
  eval->add_option("--scale", ea.scale, "Multiply the prediction before evaluating");
  eval->add_flag("--force", ea.force, "Ignore manifest mismatches");

  OptimArgs oa;
  auto* opt = app.add_subcommand("optimize", "Recover center depth from a rig by self-supervision");
  opt->add_option("rig-dir", oa.rig, "Directory written by 'render'")->required();
  opt->add_option("--mode", oa.mode, "ud, lr or tc")->capture_default_str();
  opt->add_option("--ratio", oa.ratio, "Trinocular weight of the ud loss");
  opt->add_option("--steps", oa.steps, "Gradient steps")->capture_default_str();
  opt->add_option("--out", oa.out, "Output directory")->required();
  opt->add_option("--config", oa.config, "Hyperparameter file");
  opt->add_flag("--no-attention", oa.no_attention, "Drop the attention weighting");
  opt->add_option("--step-size", oa.step_size, "Initial step in parameter units");
  opt->add_option("--init-depth", oa.init_depth, "Constant initial depth, meters");
  opt->add_option("--param", oa.param, "log or depth")->capture_default_str();

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "sphsynth: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*render) return cmd_render(ra, out);
    if (*synth) return cmd_synthesize(sa, out);
    if (*eval) return cmd_evaluate(ea, out);
    if (*opt) return cmd_optimize(oa, out, err);
  } catch (const UsageError& e) {
    err << "sphsynth: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "sphsynth: numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "sphsynth: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace sphsynth
