#include "stelab/ste.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stelab/gaussian.hpp"

namespace stelab {

namespace {
constexpr double kPi = std::numbers::pi;
const double kSqrt2Pi = std::sqrt(2.0 * kPi);
}  // namespace

const char* ste_name(SteKind kind) {
  switch (kind) {
    case SteKind::Identity: return "identity";
    case SteKind::Relu: return "relu";
    case SteKind::CappedRelu: return "crelu";
  }
  return "?";
}

std::optional<SteKind> ste_from_name(const std::string& name) {
  if (name == "identity") return SteKind::Identity;
  if (name == "relu") return SteKind::Relu;
  if (name == "crelu") return SteKind::CappedRelu;
  return std::nullopt;
}

double h_value(const Vec& v, const Vec& v_star) {
  if (v.size() != v_star.size()) throw std::invalid_argument("h_value: length mismatch");
  const double sv = sum(v);
  return dot(v, v) + sv * sv - sv * sum(v_star) + dot(v, v_star);
}

GradientPair expected_coarse_grad(SteKind kind, const ModelParams& p, const TeacherParams& t) {
  if (p.m() != t.m() || p.n() != t.n())
    throw std::invalid_argument("expected_coarse_grad: dimension mismatch");
  if (is_zero(p.w)) throw std::domain_error("expected_coarse_grad: w must be nonzero");

  const double theta = angle_between(p.w, t.w_star).radians;
  const double vv = dot(p.v, t.v_star);
  const Vec w_hat = unit(p.w);

  GradientPair g;
  g.grad_v = population_grad(p, t).grad_v;

  // The w parts are assembled in the orthonormal frame (w_hat, e_hat), where
  // e_hat is the unit component of w_star orthogonal to w. Every surrogate's
  // closed form has bounded coefficients in this frame and the terms along
  // e_hat carry a factor that vanishes at theta in {0, pi}, reproducing the
  // zero-vector convention at theta = pi without a special case.
  const Vec perp = reject(t.w_star, p.w);
  const double nperp = norm(perp);

  switch (kind) {
    case SteKind::Relu: {
      const double radial = h_value(p.v, t.v_star) / (2.0 * kSqrt2Pi) -
                            vv * (1.0 + std::cos(theta)) / (2.0 * kSqrt2Pi);
      g.grad_w = scaled(w_hat, radial);
      if (nperp > 1e-12)
        axpy(-vv * std::sin(theta) / (2.0 * kSqrt2Pi * nperp), perp, g.grad_w);
      break;
    }
    case SteKind::CappedRelu: {
      const double w_norm = norm(p.w);
      const PqValue v = pq(theta, w_norm);
      const double p0 = pq(0.0, w_norm).p;
      g.grad_w = scaled(w_hat, 0.5 * p0 * h_value(p.v, t.v_star) - vv * v.p);
      if (nperp > 1e-12) axpy(-vv * v.q / nperp, perp, g.grad_w);
      break;
    }
    case SteKind::Identity: {
      g.grad_w = scaled(w_hat, dot(p.v, p.v) / kSqrt2Pi);
      axpy(-vv / kSqrt2Pi, t.w_star, g.grad_w);
      break;
    }
  }
  return g;
}

std::optional<double> correlation(SteKind kind, const ModelParams& p, const TeacherParams& t) {
  const TrueGradient f = population_grad(p, t);
  if (!f.grad_w) return std::nullopt;
  return dot(expected_coarse_grad(kind, p, t).grad_w, *f.grad_w);
}

DescentRatio descent_ratio(SteKind kind, const ModelParams& p, const TeacherParams& t) {
  const TrueGradient f = population_grad(p, t);
  if (!f.grad_w) return DescentRatio{DescentRatio::Status::UndefinedAngle, 0.0};

  const GradientPair g = expected_coarse_grad(kind, p, t);
  const double gv2 = dot(f.grad_v, f.grad_v);
  const double denom = gv2 + dot(g.grad_w, *f.grad_w);
  if (denom <= 0.0) return DescentRatio{DescentRatio::Status::Unbounded, 0.0};
  return DescentRatio{DescentRatio::Status::Finite, dot(g.grad_w, g.grad_w) / denom};
}

}  // namespace stelab
