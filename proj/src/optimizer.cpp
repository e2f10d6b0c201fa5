#include "stelab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stelab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kMonotoneSlack = 1e-12;
}  // namespace

ModelParams step(const ModelParams& p, const TeacherParams& t, const DescentConfig& cfg) {
  if (is_zero(p.w)) throw std::domain_error("step: w must be nonzero");
  const GradientPair g = expected_coarse_grad(cfg.kind, p, t);
  Vec v = p.v;
  Vec w = p.w;
  axpy(-cfg.eta, g.grad_v, v);
  axpy(-cfg.eta, g.grad_w, w);
  return ModelParams(std::move(v), std::move(w));
}

RunOutcome run(ModelParams p0, const TeacherParams& t, const DescentConfig& cfg,
               double classify_tol) {
  if (!(cfg.eta > 0.0) || !(cfg.grad_tol > 0.0) || cfg.max_iters < 1)
    throw std::invalid_argument("run: invalid config");

  RunOutcome out(std::move(p0));
  out.min_w_norm = norm(out.final_params.w);
  double prev_loss = population_loss(out.final_params, t);

  const auto record = [&](std::size_t iter, double loss, const GradientPair& g) {
    TrajectoryRecord rec;
    rec.iter = iter;
    rec.loss = loss;
    rec.grad_v_norm = norm(g.grad_v);
    rec.coarse_grad_w_norm = norm(g.grad_w);
    rec.theta = angle_between(out.final_params.w, t.w_star).radians;
    rec.w_norm = norm(out.final_params.w);
    if (cfg.snapshot_v) rec.v = out.final_params.v;
    out.trajectory.push_back(std::move(rec));
  };

  for (std::size_t iter = 0;; ++iter) {
    if (is_zero(out.final_params.w)) {
      out.degenerate = true;
      out.classification = PointClass::Undefined;
      out.iterations = iter;
      return out;
    }

    const GradientPair g = expected_coarse_grad(cfg.kind, out.final_params, t);
    const double loss = population_loss(out.final_params, t);
    const double resid = std::max(norm(g.grad_v), norm(g.grad_w));

    if (loss > prev_loss + kMonotoneSlack) out.monotone = false;
    prev_loss = loss;
    const double w_norm = norm(out.final_params.w);
    out.min_w_norm = std::min(out.min_w_norm, w_norm);
    if (w_norm < cfg.w_norm_floor) out.w_norm_violated = true;

    const bool stop = resid <= cfg.grad_tol || iter >= cfg.max_iters;
    if (iter % cfg.record_every == 0 || stop) record(iter, loss, g);
    if (stop) {
      out.converged = resid <= cfg.grad_tol;
      out.iterations = iter;
      out.classification = classify_point(out.final_params, t, classify_tol);
      return out;
    }

    Vec v = out.final_params.v;
    Vec w = out.final_params.w;
    axpy(-cfg.eta, g.grad_v, v);
    axpy(-cfg.eta, g.grad_w, w);
    out.final_params = ModelParams(std::move(v), std::move(w));
  }
}

bool check_global_region(const ModelParams& p, const TeacherParams& t) {
  if (is_zero(p.w)) throw std::domain_error("check_global_region: w must be nonzero");
  if (dot(p.v, t.v_star) <= 0.0) return false;
  if (angle_between(p.w, t.w_star).radians >= 0.5 * kPi) return false;
  const double s_star = sum(t.v_star);
  return s_star * sum(p.v) <= s_star * s_star;
}

double auto_halve_eta(const ModelParams& p0, const TeacherParams& t, DescentConfig cfg,
                      std::size_t probe_steps) {
  for (int halvings = 0; halvings < 60; ++halvings) {
    ModelParams p = p0;
    double prev = population_loss(p, t);
    bool ok = true;
    for (std::size_t i = 0; i < probe_steps && ok; ++i) {
      if (is_zero(p.w)) break;
      p = step(p, t, cfg);
      const double loss = population_loss(p, t);
      if (loss > prev + kMonotoneSlack) ok = false;
      prev = loss;
    }
    if (ok) return cfg.eta;
    cfg.eta *= 0.5;
  }
  return cfg.eta;
}

}  // namespace stelab
