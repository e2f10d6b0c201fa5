#include "stelab/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stelab {

namespace {
constexpr double kPi = std::numbers::pi;
}

CriticalPointReport critical_points(const TeacherParams& t) {
  const double m = static_cast<double>(t.m());
  const double s = sum(t.v_star);
  const double v2 = dot(t.v_star, t.v_star);

  CriticalPointReport r;
  r.global_v = t.v_star;
  r.global_theta = 0.0;

  // v at theta = pi: (I+11')^{-1}(11' - I) v*.
  Vec ones_minus(t.m(), s);
  for (std::size_t i = 0; i < t.m(); ++i) ones_minus[i] -= t.v_star[i];
  r.spurious_v = apply_i_plus_ones_inverse(ones_minus);
  r.spurious_theta = kPi;

  // Strict inequality; the boundary case pushes the saddle angle to pi,
  // which the interior stationarity conditions exclude.
  const double denom = (m + 1.0) * v2 - s * s;
  r.has_saddle = s * s < 0.5 * (m + 1.0) * v2;
  if (r.has_saddle) {
    Vec inner(t.m(), s);
    for (std::size_t i = 0; i < t.m(); ++i) inner[i] += -(s * s) / denom * t.v_star[i];
    r.saddle_v = apply_i_plus_ones_inverse(inner);
    r.saddle_theta = 0.5 * kPi * (m + 1.0) * v2 / denom;
  }
  return r;
}

const char* point_class_name(PointClass c) {
  switch (c) {
    case PointClass::GlobalMin: return "global_min";
    case PointClass::SpuriousLocalMin: return "spurious_local_min";
    case PointClass::Saddle: return "saddle";
    case PointClass::NonCritical: return "non_critical";
    case PointClass::Undefined: return "undefined";
  }
  return "?";
}

PointClass classify_point(const ModelParams& p, const TeacherParams& t, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("classify_point: tol must be positive");
  if (is_zero(p.w)) return PointClass::Undefined;

  const double theta = angle_between(p.w, t.w_star).radians;
  const CriticalPointReport r = critical_points(t);

  if (norm(sub(p.v, r.global_v)) <= tol && theta <= tol) return PointClass::GlobalMin;
  if (norm(sub(p.v, r.spurious_v)) <= tol && theta >= kPi - tol)
    return PointClass::SpuriousLocalMin;
  if (r.has_saddle && norm(sub(p.v, r.saddle_v)) <= tol &&
      std::abs(theta - r.saddle_theta) <= tol)
    return PointClass::Saddle;
  return PointClass::NonCritical;
}

double stationarity_residual(const ModelParams& p, const TeacherParams& t, SteKind kind) {
  if (is_zero(p.w)) throw std::domain_error("stationarity_residual: w must be nonzero");
  const GradientPair g = expected_coarse_grad(kind, p, t);
  return std::max(norm(g.grad_v), norm(g.grad_w));
}

std::vector<double> reduced_hessian(const TeacherParams& t) {
  const std::size_t m = t.m();
  const std::size_t n = m + 1;
  std::vector<double> h(n * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) h[i * n + j] = 2.0;
    h[i * n + i] += 2.0;
    h[i * n + m] = 4.0 / kPi * t.v_star[i];
    h[m * n + i] = 4.0 / kPi * t.v_star[i];
  }
  h[m * n + m] = 0.0;
  return h;
}

}  // namespace stelab
