// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "sphsynth/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sphsynth/metrics.hpp"

namespace sphsynth {

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::ud: return "ud";
    case Mode::lr: return "lr";
    case Mode::tc: return "tc";
  }
  return "?";
}

Mode parse_mode(const std::string& name) {
  if (name == "ud") return Mode::ud;
  if (name == "lr") return Mode::lr;
  if (name == "tc") return Mode::tc;
  throw std::invalid_argument("unknown mode '" + name + "' (expected ud, lr or tc)");
}

void OptimConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("OptimConfig: steps must be >= 1");
  if (!(init_depth > 0.0) || !std::isfinite(init_depth)) {
    throw std::invalid_argument("OptimConfig: init_depth must be positive");
  }
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw std::invalid_argument("OptimConfig: step_size must be positive");
  }
  loss.validate();
  splat.validate();
}

namespace {

struct Branch {
  const View* target;
  Baseline baseline;
  Placement placement;
  double weight;
};

std::vector<Branch> branches(const StereoRig& rig, const LossConfig& cfg, Mode mode) {
  const Branch ud{&rig.up, {Axis::vertical_y, rig.baseline}, Placement::vertical, 1.0};
  const Branch lr{&rig.right, {Axis::horizontal_x, rig.baseline}, Placement::horizontal, 1.0};
  switch (mode) {
    case Mode::ud: return {ud};
    case Mode::lr: return {lr};
    case Mode::tc: {
      const double k = cfg.lambda_ratio;
      if (!(k >= 0.0 && k <= 1.0)) throw std::invalid_argument("tc mode: ratio outside [0, 1]");
      // a branch with zero weight is skipped so that the endpoints reduce
      // exactly to the single-view modes
      if (k == 1.0) return {ud};
      if (k == 0.0) return {lr};
      Branch a = ud, b = lr;
      a.weight = k;
      b.weight = 1.0 - k;
      return {a, b};
    }
  }
  return {};
}

// Splat coverage of one evaluation, used to locate mask flips.
struct Coverage {
  std::vector<Mask> empty;
  std::vector<std::vector<SplatFootprint>> footprints;
};

LossGradient evaluate(const DepthMap& depth, const StereoRig& rig, const LossConfig& cfg,
                      const SplatConfig& splat, Mode mode, bool with_grad,
                      Coverage* coverage = nullptr) {
  require_same_grid(depth, rig.center.depth, "loss_gradient");
  require_positive_depth(depth, "loss_gradient");
  const ErpGrid& grid = depth.grid();
  LossGradient out{0.0, ScalarMap(grid), false};
  for (const Branch& br : branches(rig, cfg, mode)) {
    const AttentionMask attn = attention_mask(grid, br.placement);
    const SplatTape tape = splat_forward(rig.center.color, depth, br.baseline, splat);
    const Mask valid = valid_from_empty(tape.result.mask);
    const ReconstructionTerm rec =
        reconstruction_term(br.target->color, tape.result.color, valid, attn, cfg);
    const SmoothnessTerm sm = smoothness_term(depth, rig.center.color, attn, cfg.edge_sign);
    out.loss += br.weight * total_loss(rec.loss.value, sm.loss, cfg);
    out.warning = out.warning || rec.loss.warning;
    if (coverage) {
      coverage->empty.push_back(tape.result.mask);
      coverage->footprints.push_back(tape.footprints);
    }
    if (!with_grad) continue;
    const double kr = br.weight * cfg.lambda_recon;
    const double ks = br.weight * cfg.lambda_smooth;
    if (!rec.loss.warning) {
      const ScalarMap gr = splat_backward(tape, rig.center.color, rec.grad_synth);
      for (std::size_t i = 0; i < gr.size(); ++i) out.grad[i] += kr * gr[i];
    }
    for (std::size_t i = 0; i < sm.grad_depth.size(); ++i) out.grad[i] += ks * sm.grad_depth[i];
  }
  return out;
}

}  // namespace

LossGradient loss_gradient(const DepthMap& depth, const StereoRig& rig, const LossConfig& cfg,
                           const SplatConfig& splat, Mode mode) {
  return evaluate(depth, rig, cfg, splat, mode, true);
}

double loss_value(const DepthMap& depth, const StereoRig& rig, const LossConfig& cfg,
                  const SplatConfig& splat, Mode mode) {
  return evaluate(depth, rig, cfg, splat, mode, false).loss;
}

ScalarMap fd_gradient(const DepthMap& depth, const StereoRig& rig, const LossConfig& cfg,
                      const SplatConfig& splat, Mode mode, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  ScalarMap grad(depth.grid());
  DepthMap probe = depth;
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const double h = step * depth[i];
    probe[i] = depth[i] + h;
    const double fp = loss_value(probe, rig, cfg, splat, mode);
    probe[i] = depth[i] - h;
    const double fm = loss_value(probe, rig, cfg, splat, mode);
    probe[i] = depth[i];
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

namespace {

double abs_rel_vs(const DepthMap& depth, const DepthMap& gt) {
  return weighted_errors(depth, gt, valid_depth(gt)).abs_rel;
}

DepthMap to_depth(const ScalarMap& x, Parameterization p) {
  if (p == Parameterization::depth) return x;
  DepthMap d(x.grid());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = std::exp(x[i]);
  return d;
}

bool all_positive_finite(const DepthMap& d) {
  return std::all_of(d.data().begin(), d.data().end(),
                     [](double x) { return x > 0.0 && std::isfinite(x); });
}

struct Trial {
  explicit Trial(const ErpGrid& g) : x(g), depth(g), lg{0.0, ScalarMap(g), false} {}
  ScalarMap x;
  DepthMap depth;
  LossGradient lg;
  Coverage cov;
  bool ok = false;  ///< false when the step left the positive depth range
};

// Marks source pixels whose splat touches a target pixel that changes
// between empty and covered from `a` to `b`.
std::size_t freeze_flips(const Coverage& a, const Coverage& b, std::vector<std::uint8_t>& frozen) {
  std::size_t added = 0;
  for (std::size_t k = 0; k < a.empty.size() && k < b.empty.size(); ++k) {
    const Mask& ea = a.empty[k];
    const Mask& eb = b.empty[k];
    for (const auto* fps : {&a.footprints[k], &b.footprints[k]}) {
      for (std::size_t s = 0; s < fps->size(); ++s) {
        if (frozen[s]) continue;
        for (std::uint32_t t : (*fps)[s].target) {
          if (ea[t] != eb[t]) {
            frozen[s] = 1;
            ++added;
            break;
          }
        }
      }
    }
  }
  return added;
}

}  // namespace

OptimResult optimize_depth(const StereoRig& rig, const OptimConfig& cfg) {
  return optimize_depth(rig, cfg, DepthMap(rig.grid(), 1, cfg.init_depth));
}

OptimResult optimize_depth(const StereoRig& rig, const OptimConfig& cfg, const DepthMap& init) {
  cfg.validate();
  const ErpGrid& grid = rig.grid();
  require_same_grid(init, rig.center.depth, "optimize_depth");
  require_positive_depth(init, "optimize_depth");
  const bool log_p = cfg.parameterization == Parameterization::log_depth;
  ScalarMap x = init;
  if (log_p) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::log(init[i]);
  }

  auto eval = [&](const DepthMap& d, Coverage* cov) {
    return evaluate(d, rig, cfg.loss, cfg.splat, cfg.mode, true, cov);
  };

  OptimResult res{to_depth(x, cfg.parameterization), {}, false};
  Coverage cur_cov;
  LossGradient cur = eval(res.depth, &cur_cov);
  res.trace.push_back({0, cur.loss, abs_rel_vs(res.depth, rig.center.depth)});
  if (!std::isfinite(cur.loss)) {
    res.diverged = true;
    return res;
  }

  const double min_step = cfg.step_size / 4096.0;
  constexpr int kMaxFreezeRounds = 4;
  constexpr double kDecay = 0.9;
  const double max_step = 4.0 * cfg.step_size;
  double step = cfg.step_size;
  ScalarMap dir(grid);
  ScalarMap ms(grid);
  std::vector<std::uint8_t> frozen(grid.pixels());

  for (int it = 1; it <= cfg.steps; ++it) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double g = log_p ? cur.grad[i] * res.depth[i] : cur.grad[i];
      ms[i] = it == 1 ? g * g : kDecay * ms[i] + (1.0 - kDecay) * g * g;
      dir[i] = g;
    }
    double rms_max = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) rms_max = std::max(rms_max, std::sqrt(ms[i]));
    // RMS-preconditioned descent direction
    for (std::size_t i = 0; i < x.size(); ++i) dir[i] /= std::sqrt(ms[i]) + 1e-3 * rms_max + 1e-300;
    std::fill(frozen.begin(), frozen.end(), 0);

    auto make_trial = [&](double t, double dmax) {
      Trial tr(grid);
      tr.x = x;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!frozen[i]) tr.x[i] -= t * dir[i] / dmax;
      }
      tr.depth = to_depth(tr.x, cfg.parameterization);
      if (!all_positive_finite(tr.depth)) return tr;
      tr.lg = eval(tr.depth, &tr.cov);
      tr.ok = true;
      return tr;
    };

    bool accepted = false;
    for (int round = 0; round <= kMaxFreezeRounds && !accepted; ++round) {
      double dmax = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!frozen[i]) dmax = std::max(dmax, std::abs(dir[i]));
      }
      if (!(dmax > 0.0) || !std::isfinite(dmax)) break;
      Trial last_fail(grid);
      while (!accepted && step >= min_step) {
        Trial tr = make_trial(step, dmax);
        if (tr.ok && !std::isfinite(tr.lg.loss)) {
          res.depth = std::move(tr.depth);
          res.trace.push_back({it, tr.lg.loss, abs_rel_vs(res.depth, rig.center.depth)});
          res.diverged = true;
          return res;
        }
        if (tr.ok && tr.lg.loss <= cur.loss) {
          x = std::move(tr.x);
          res.depth = std::move(tr.depth);
          cur = std::move(tr.lg);
          cur_cov = std::move(tr.cov);
          accepted = true;
          step = std::min(step * 1.5, max_step);
        } else {
          if (tr.ok) last_fail = std::move(tr);
          step *= 0.5;
        }
      }
      if (accepted || !last_fail.ok) break;
      // Even short steps fail: the loss jumps where a target pixel switches
      // between empty and covered. Hold the pixels feeding such switches.
      if (freeze_flips(cur_cov, last_fail.cov, frozen) == 0) break;
      step = cfg.step_size;
    }
    if (!accepted) step = cfg.step_size;
    res.trace.push_back({it, cur.loss, abs_rel_vs(res.depth, rig.center.depth)});
  }
  return res;
}

}  // namespace sphsynth
