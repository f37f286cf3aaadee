// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "sphsynth/supervision.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace sphsynth {

void LossConfig::validate() const {
  if (std::abs(lambda_recon + lambda_smooth - 1.0) > 1e-12) {
    throw std::invalid_argument("LossConfig: lambda_recon + lambda_smooth must equal 1");
  }
  if (lambda_recon < 0.0 || lambda_smooth < 0.0) {
    throw std::invalid_argument("LossConfig: loss weights must be non-negative");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("LossConfig: eta outside [0, 1]");
  if (ssim_kernel < 1 || ssim_kernel % 2 == 0) {
    throw std::invalid_argument("LossConfig: ssim_kernel must be a positive odd number");
  }
  if (!(lambda_ratio >= 0.0 && lambda_ratio <= 1.0)) {
    throw std::invalid_argument("LossConfig: lambda_ratio outside [0, 1]");
  }
}

namespace {

void require_kernel(int kernel) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw std::invalid_argument("dssim: kernel must be a positive odd number");
  }
}

// Box filters on one channel. Horizontal wraps and is self-adjoint; vertical
// replicates border rows, so its adjoint scatters.
ScalarMap box_h(const ScalarMap& in, int kernel) {
  const ErpGrid& g = in.grid();
  const int r = kernel / 2;
  ScalarMap out(g);
#pragma omp parallel for schedule(static)
  for (int v = 0; v < g.height(); ++v) {
    for (int u = 0; u < g.width(); ++u) {
      double s = 0.0;
      for (int du = -r; du <= r; ++du) s += in(g.wrap_col(u + du), v);
      out(u, v) = s / kernel;
    }
  }
  return out;
}

ScalarMap box_v(const ScalarMap& in, int kernel) {
  const ErpGrid& g = in.grid();
  const int r = kernel / 2;
  ScalarMap out(g);
#pragma omp parallel for schedule(static)
  for (int v = 0; v < g.height(); ++v) {
    for (int u = 0; u < g.width(); ++u) {
      double s = 0.0;
      for (int dv = -r; dv <= r; ++dv) s += in(u, g.clamp_row(v + dv));
      out(u, v) = s / kernel;
    }
  }
  return out;
}

ScalarMap box_v_adjoint(const ScalarMap& in, int kernel) {
  const ErpGrid& g = in.grid();
  const int r = kernel / 2;
  ScalarMap out(g);
#pragma omp parallel for schedule(static)
  for (int u = 0; u < g.width(); ++u) {
    for (int v = 0; v < g.height(); ++v) {
      const double x = in(u, v) / kernel;
      for (int dv = -r; dv <= r; ++dv) out(u, g.clamp_row(v + dv)) += x;
    }
  }
  return out;
}

ScalarMap box(const ScalarMap& in, int kernel) { return box_v(box_h(in, kernel), kernel); }

ScalarMap box_adjoint(const ScalarMap& in, int kernel) {
  return box_h(box_v_adjoint(in, kernel), kernel);
}

ScalarMap channel(const Image& img, int c) {
  ScalarMap out(img.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = img[i * img.channels() + c];
  return out;
}

struct WindowStats {
  ScalarMap mu_a, mu_b, var_a, var_b, cov;
};

WindowStats window_stats(const ScalarMap& a, const ScalarMap& b, int kernel) {
  ScalarMap aa(a.grid()), bb(a.grid()), ab(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  WindowStats s{box(a, kernel), box(b, kernel), box(aa, kernel), box(bb, kernel),
                box(ab, kernel)};
  for (std::size_t i = 0; i < a.size(); ++i) {
    s.var_a[i] -= s.mu_a[i] * s.mu_a[i];
    s.var_b[i] -= s.mu_b[i] * s.mu_b[i];
    s.cov[i] -= s.mu_a[i] * s.mu_b[i];
  }
  return s;
}

void require_inputs(const Image& a, const Image& b, const char* what) {
  require_same_grid(a, b, what);
  if (a.channels() != b.channels()) {
    throw std::invalid_argument(std::string(what) + ": channel count mismatch");
  }
}

Image masked(const Image& img, const Mask& valid) {
  Image out = img;
  const int ch = img.channels();
  for (std::size_t p = 0; p < valid.size(); ++p) {
    if (!valid[p]) {
      for (int c = 0; c < ch; ++c) out[p * ch + c] = 0.0;
    }
  }
  return out;
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

ScalarMap dssim(const Image& a, const Image& b, int kernel) {
  require_inputs(a, b, "dssim");
  require_kernel(kernel);
  const int ch = a.channels();
  ScalarMap out(a.grid());
  for (int c = 0; c < ch; ++c) {
    const WindowStats s = window_stats(channel(a, c), channel(b, c), kernel);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double n1 = 2.0 * s.mu_a[i] * s.mu_b[i] + kSsimC1;
      const double n2 = 2.0 * s.cov[i] + kSsimC2;
      const double d1 = s.mu_a[i] * s.mu_a[i] + s.mu_b[i] * s.mu_b[i] + kSsimC1;
      const double d2 = s.var_a[i] + s.var_b[i] + kSsimC2;
      out[i] += (1.0 - n1 * n2 / (d1 * d2)) / 2.0;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= ch;
  return out;
}

Image dssim_backward(const Image& a, const Image& b, int kernel, const ScalarMap& upstream) {
  require_inputs(a, b, "dssim_backward");
  require_same_grid(a, upstream, "dssim_backward");
  require_kernel(kernel);
  const int ch = a.channels();
  Image grad(a.grid(), ch);
  for (int c = 0; c < ch; ++c) {
    const ScalarMap ac = channel(a, c);
    const ScalarMap bc = channel(b, c);
    const WindowStats s = window_stats(ac, bc, kernel);
    // Gradients w.r.t. the raw window moments E[b], E[b^2], E[ab].
    ScalarMap g_mu(a.grid()), g_bb(a.grid()), g_ab(a.grid());
    for (std::size_t i = 0; i < ac.size(); ++i) {
      const double ma = s.mu_a[i];
      const double mb = s.mu_b[i];
      const double n1 = 2.0 * ma * mb + kSsimC1;
      const double n2 = 2.0 * s.cov[i] + kSsimC2;
      const double d1 = ma * ma + mb * mb + kSsimC1;
      const double d2 = s.var_a[i] + s.var_b[i] + kSsimC2;
      const double ssim = n1 * n2 / (d1 * d2);
      // cov = E[ab] - ma mb and var_b = E[b^2] - mb^2 both depend on mb
      const double ds_dmu =
          (2.0 * ma * n2 - 2.0 * ma * n1) / (d1 * d2) - ssim * (2.0 * mb / d1 - 2.0 * mb / d2);
      const double ds_dbb = -ssim / d2;
      const double ds_dab = 2.0 * n1 / (d1 * d2);
      const double up = -upstream[i] / (2.0 * ch);
      g_mu[i] = up * ds_dmu;
      g_bb[i] = up * ds_dbb;
      g_ab[i] = up * ds_dab;
    }
    const ScalarMap t_mu = box_adjoint(g_mu, kernel);
    const ScalarMap t_bb = box_adjoint(g_bb, kernel);
    const ScalarMap t_ab = box_adjoint(g_ab, kernel);
    for (std::size_t i = 0; i < ac.size(); ++i) {
      grad[i * ch + c] = t_mu[i] + 2.0 * bc[i] * t_bb[i] + ac[i] * t_ab[i];
    }
  }
  return grad;
}

Mask valid_from_empty(const Mask& empty) {
  Mask valid(empty.grid());
  for (std::size_t i = 0; i < empty.size(); ++i) valid[i] = empty[i] ? 0 : 1;
  return valid;
}

ScalarMap photometric(const Image& tgt, const Image& synth, const Mask& valid, double eta,
                      int kernel) {
  require_inputs(tgt, synth, "photometric");
  require_same_grid(tgt, valid, "photometric");
  const Image tm = masked(tgt, valid);
  const Image sm = masked(synth, valid);
  ScalarMap out = dssim(tm, sm, kernel);
  const int ch = tgt.channels();
  for (std::size_t p = 0; p < out.size(); ++p) {
    double l1 = 0.0;
    for (int c = 0; c < ch; ++c) l1 += std::abs(tm[p * ch + c] - sm[p * ch + c]);
    out[p] = eta * out[p] + (1.0 - eta) * l1 / ch;
  }
  return out;
}

LossValue reconstruction_loss(const ScalarMap& photo, const Mask& valid,
                              const AttentionMask& attention) {
  require_same_grid(photo, valid, "reconstruction_loss");
  require_same_grid(photo, attention.values, "reconstruction_loss");
  double num = 0.0;
  double count = 0.0;
  for (std::size_t p = 0; p < photo.size(); ++p) {
    if (!valid[p]) continue;
    num += attention.values[p] * photo[p];
    count += 1.0;
  }
  if (count == 0.0) return {0.0, true};
  return {num / count, false};
}

ReconstructionTerm reconstruction_term(const Image& tgt, const Image& synth, const Mask& valid,
                                       const AttentionMask& attention, const LossConfig& cfg) {
  require_inputs(tgt, synth, "reconstruction_term");
  const ErpGrid& grid = tgt.grid();
  const AttentionMask ones = uniform_attention(grid, attention.placement);
  const AttentionMask& attn = cfg.attention ? attention : ones;

  const ScalarMap photo = photometric(tgt, synth, valid, cfg.eta, cfg.ssim_kernel);
  ReconstructionTerm term{reconstruction_loss(photo, valid, attn), Image(grid, tgt.channels())};
  if (term.loss.warning) return term;

  double count = 0.0;
  for (std::size_t p = 0; p < valid.size(); ++p) count += valid[p] ? 1.0 : 0.0;

  // d loss / d photo(p) = A(p) M(p) / sum M
  ScalarMap up(grid);
  for (std::size_t p = 0; p < up.size(); ++p) {
    up[p] = valid[p] ? attn.values[p] / count : 0.0;
  }
  ScalarMap up_dssim = up;
  for (std::size_t p = 0; p < up.size(); ++p) up_dssim[p] *= cfg.eta;

  const Image tm = masked(tgt, valid);
  const Image sm = masked(synth, valid);
  term.grad_synth = dssim_backward(tm, sm, cfg.ssim_kernel, up_dssim);
  const int ch = tgt.channels();
  for (std::size_t p = 0; p < up.size(); ++p) {
    for (int c = 0; c < ch; ++c) {
      const std::size_t i = p * ch + c;
      double g = term.grad_synth[i] + (1.0 - cfg.eta) * up[p] / ch * sign(sm[i] - tm[i]);
      term.grad_synth[i] = valid[p] ? g : 0.0;
    }
  }
  return term;
}

namespace {

// exp(-+|grad I|) with central differences, longitude wrapped.
ScalarMap color_guidance(const Image& color, EdgeSign edge_sign) {
  const ErpGrid& g = color.grid();
  const int ch = color.channels();
  ScalarMap out(g);
  const double s = edge_sign == EdgeSign::edge_aware ? -1.0 : 1.0;
  for (int v = 0; v < g.height(); ++v) {
    const int vn = g.clamp_row(v - 1);
    const int vs = g.clamp_row(v + 1);
    for (int u = 0; u < g.width(); ++u) {
      const int ue = g.wrap_col(u + 1);
      const int uw = g.wrap_col(u - 1);
      double sq = 0.0;
      for (int c = 0; c < ch; ++c) {
        const double gu = (color(ue, v, c) - color(uw, v, c)) / 2.0;
        const double gv = (color(u, vs, c) - color(u, vn, c)) / 2.0;
        sq += gu * gu + gv * gv;
      }
      out(u, v) = std::exp(s * std::sqrt(sq));
    }
  }
  return out;
}

}  // namespace

SmoothnessTerm smoothness_term(const DepthMap& depth, const Image& color,
                               const AttentionMask& attention, EdgeSign edge_sign) {
  require_same_grid(depth, color, "smoothness_loss");
  require_same_grid(depth, attention.values, "smoothness_loss");
  require_positive_depth(depth, "smoothness_loss");
  const ErpGrid& g = depth.grid();
  const int w = g.width();
  const int h = g.height();
  const double n = static_cast<double>(g.pixels());

  std::vector<Cartesian> dir(g.pixels());
  std::vector<Cartesian> pts(g.pixels());
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const std::size_t i = depth.index(u, v);
      dir[i] = pixel_direction(u, v, g);
      pts[i] = {depth[i] * dir[i].x, depth[i] * dir[i].y, depth[i] * dir[i].z};
    }
  }
  const ScalarMap guide = color_guidance(color, edge_sign);
  const ScalarMap comp = attention.complement();

  SmoothnessTerm term{0.0, ScalarMap(g)};
  auto diff = [&](std::size_t a, std::size_t b) {
    return Cartesian{(pts[a].x - pts[b].x) / 2.0, (pts[a].y - pts[b].y) / 2.0,
                     (pts[a].z - pts[b].z) / 2.0};
  };
  auto dot = [](const Cartesian& a, const Cartesian& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
  };
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const std::size_t p = depth.index(u, v);
      const std::size_t e = depth.index(g.wrap_col(u + 1), v);
      const std::size_t west = depth.index(g.wrap_col(u - 1), v);
      const std::size_t s = depth.index(u, g.clamp_row(v + 1));
      const std::size_t nn = depth.index(u, g.clamp_row(v - 1));
      const Cartesian du = diff(e, west);
      const Cartesian dv = diff(s, nn);
      const double norm = std::sqrt(dot(du, du) + dot(dv, dv));
      const double weight = comp[p] * guide[p] / n;
      term.loss += weight * norm;
      if (norm == 0.0 || weight == 0.0) continue;
      const double k = weight / norm / 2.0;
      term.grad_depth[e] += k * dot(du, dir[e]);
      term.grad_depth[west] -= k * dot(du, dir[west]);
      term.grad_depth[s] += k * dot(dv, dir[s]);
      term.grad_depth[nn] -= k * dot(dv, dir[nn]);
    }
  }
  return term;
}

double smoothness_loss(const DepthMap& depth, const Image& color, const AttentionMask& attention,
                       EdgeSign edge_sign) {
  return smoothness_term(depth, color, attention, edge_sign).loss;
}

double total_loss(double recon, double smooth, const LossConfig& cfg) {
  return cfg.lambda_recon * recon + cfg.lambda_smooth * smooth;
}

double trinocular_blend(double ud, double lr, double lambda_ratio) {
  if (!(lambda_ratio >= 0.0 && lambda_ratio <= 1.0)) {
    throw std::invalid_argument("trinocular_blend: lambda_ratio outside [0, 1]");
  }
  return lambda_ratio * ud + (1.0 - lambda_ratio) * lr;
}

LossValue berhu(const DepthMap& pred, const DepthMap& gt, const Mask& valid) {
  require_same_grid(pred, gt, "berhu");
  require_same_grid(pred, valid, "berhu");
  double max_err = 0.0;
  double count = 0.0;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    if (!valid[p]) continue;
    max_err = std::max(max_err, std::abs(pred[p] - gt[p]));
    count += 1.0;
  }
  if (count == 0.0) return {0.0, true};
  if (max_err == 0.0) return {0.0, false};
  const double c = 0.2 * max_err;
  double sum = 0.0;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    if (!valid[p]) continue;
    const double e = std::abs(pred[p] - gt[p]);
    sum += e <= c ? e : (e * e + c * c) / (2.0 * c);
  }
  return {sum / count, false};
}

namespace {

double parse_number(const std::string& text, int line) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(x)) {
    throw std::invalid_argument("hyperparameters line " + std::to_string(line) +
                                ": expected a number, got '" + text + "'");
  }
  return x;
}

bool parse_bool(const std::string& text, int line) {
  if (text == "on" || text == "true" || text == "1") return true;
  if (text == "off" || text == "false" || text == "0") return false;
  throw std::invalid_argument("hyperparameters line " + std::to_string(line) +
                              ": expected on/off, got '" + text + "'");
}

}  // namespace

Hyperparameters parse_hyperparameters(std::istream& in, Hyperparameters hp) {
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::replace(raw.begin(), raw.end(), '=', ' ');
    std::istringstream ss(raw);
    std::string key, value, extra;
    if (!(ss >> key)) continue;
    if (!(ss >> value) || (ss >> extra)) {
      throw std::invalid_argument("hyperparameters line " + std::to_string(line) +
                                  ": expected 'key value'");
    }
    if (key == "lambda_recon") {
      hp.loss.lambda_recon = parse_number(value, line);
    } else if (key == "lambda_smooth") {
      hp.loss.lambda_smooth = parse_number(value, line);
    } else if (key == "eta") {
      hp.loss.eta = parse_number(value, line);
    } else if (key == "ssim_kernel") {
      const double k = parse_number(value, line);
      if (k != std::floor(k)) {
        throw std::invalid_argument("hyperparameters line " + std::to_string(line) +
                                    ": ssim_kernel must be an integer");
      }
      hp.loss.ssim_kernel = static_cast<int>(k);
    } else if (key == "lambda_ratio") {
      hp.loss.lambda_ratio = parse_number(value, line);
    } else if (key == "d_max") {
      hp.splat.d_max = parse_number(value, line);
    } else if (key == "epsilon_norm") {
      hp.splat.epsilon_norm = parse_number(value, line);
    } else if (key == "epsilon_mask") {
      hp.splat.epsilon_mask = parse_number(value, line);
    } else if (key == "edge_sign") {
      if (value == "edge_aware") {
        hp.loss.edge_sign = EdgeSign::edge_aware;
      } else if (value == "edge_boosting") {
        hp.loss.edge_sign = EdgeSign::edge_boosting;
      } else {
        throw std::invalid_argument("hyperparameters line " + std::to_string(line) +
                                    ": edge_sign must be edge_aware or edge_boosting");
      }
    } else if (key == "attention") {
      hp.loss.attention = parse_bool(value, line);
    } else {
      throw std::invalid_argument("hyperparameters line " + std::to_string(line) +
                                  ": unknown key '" + key + "'");
    }
  }
  hp.loss.validate();
  hp.splat.validate();
  return hp;
}

Hyperparameters load_hyperparameters(const std::string& path, Hyperparameters base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open hyperparameter file '" + path + "'");
  return parse_hyperparameters(in, base);
}

}  // namespace sphsynth
