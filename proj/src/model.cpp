#include "stelab/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stelab {

namespace {
constexpr double kPi = std::numbers::pi;
}

ModelParams::ModelParams(Vec v_in, Vec w_in) : v(std::move(v_in)), w(std::move(w_in)) {
  if (v.empty()) throw std::invalid_argument("ModelParams: v must have length >= 1");
  if (w.size() < 2) throw std::invalid_argument("ModelParams: w must have length >= 2");
  if (!all_finite(v) || !all_finite(w))
    throw std::invalid_argument("ModelParams: entries must be finite");
}

TeacherParams::TeacherParams(Vec v_star_in, Vec w_star_in)
    : v_star(std::move(v_star_in)), w_star(std::move(w_star_in)) {
  if (v_star.empty()) throw std::invalid_argument("TeacherParams: v_star must have length >= 1");
  if (w_star.size() < 2)
    throw std::invalid_argument("TeacherParams: w_star must have length >= 2");
  if (!all_finite(v_star) || !all_finite(w_star))
    throw std::invalid_argument("TeacherParams: entries must be finite");
  if (is_zero(v_star)) throw std::invalid_argument("TeacherParams: v_star must be nonzero");
  if (std::abs(norm(w_star) - 1.0) > 1e-12)
    throw std::invalid_argument("TeacherParams: w_star must be unit-norm");
}

TeacherParams TeacherParams::normalized(Vec v_star_in, Vec w_star_in) {
  const double n = norm(w_star_in);
  if (n == 0.0) throw std::invalid_argument("TeacherParams: w_star must be nonzero");
  return TeacherParams(std::move(v_star_in), scaled(w_star_in, 1.0 / n));
}

Angle angle_between(const Vec& w, const Vec& w_ref) {
  const double nw = norm(w);
  const double nr = norm(w_ref);
  if (nw == 0.0 || nr == 0.0) throw std::domain_error("angle_between: zero vector");
  double c = dot(w, w_ref) / (nw * nr);
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  // acos(c) alone cannot resolve angles below ~sqrt(eps); pairing the clamped
  // cosine with the rejection norm (= sin theta) keeps full precision at both
  // endpoints, where the descent tests watch loss changes of order 1e-12.
  const double s = norm(reject(w_ref, w)) / nr;
  return Angle{std::atan2(s, c)};
}

Vec apply_i_plus_ones(const Vec& x) {
  const double s = sum(x);
  Vec r = x;
  for (double& e : r) e += s;
  return r;
}

Vec apply_i_plus_ones_inverse(const Vec& x) {
  // (I + 11')^{-1} = I - 11'/(m+1)
  const double s = sum(x) / (static_cast<double>(x.size()) + 1.0);
  Vec r = x;
  for (double& e : r) e -= s;
  return r;
}

static void check_dims(const ModelParams& p, const TeacherParams& t) {
  if (p.m() != t.m() || p.n() != t.n())
    throw std::invalid_argument("model/teacher dimension mismatch");
}

double population_loss(const ModelParams& p, const TeacherParams& t) {
  check_dims(p, t);
  const double quad_star = dot(t.v_star, t.v_star) + sum(t.v_star) * sum(t.v_star);
  if (is_zero(p.w)) return 0.125 * quad_star;

  const double theta = angle_between(p.w, t.w_star).radians;
  const double quad_v = dot(p.v, p.v) + sum(p.v) * sum(p.v);
  const double cross =
      (1.0 - 2.0 * theta / kPi) * dot(p.v, t.v_star) + sum(p.v) * sum(t.v_star);
  return 0.125 * (quad_v - 2.0 * cross + quad_star);
}

TrueGradient population_grad(const ModelParams& p, const TeacherParams& t) {
  check_dims(p, t);
  if (is_zero(p.w)) throw std::domain_error("population_grad: w must be nonzero");

  const double theta = angle_between(p.w, t.w_star).radians;

  TrueGradient g;
  g.grad_v = scaled(apply_i_plus_ones(p.v), 0.25);
  const double sv = sum(t.v_star);
  const double a = 1.0 - 2.0 * theta / kPi;
  for (std::size_t i = 0; i < g.grad_v.size(); ++i)
    g.grad_v[i] -= 0.25 * (a * t.v_star[i] + sv);

  // w part exists only where theta is interior; the projection of w_star onto
  // the complement of w vanishes exactly at theta in {0, pi}.
  const Vec perp = reject(t.w_star, p.w);
  const double nperp = norm(perp);
  if (theta <= 0.0 || theta >= kPi || nperp < 1e-14) return g;

  g.grad_w = scaled(perp, -dot(p.v, t.v_star) / (2.0 * kPi * norm(p.w) * nperp));
  return g;
}

}  // namespace stelab
