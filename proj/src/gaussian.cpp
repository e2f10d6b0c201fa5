#include "stelab/gaussian.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stelab/model.hpp"

namespace stelab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrtHalfPi = 1.2533141373155002512;  // sqrt(pi/2)

// Fixed-order Gauss-Legendre rule on [-1, 1]. Nodes and weights are computed
// once by Newton iteration on the Legendre recurrence.
constexpr int kGlOrder = 64;

struct GlRule {
  std::array<double, kGlOrder> node{};
  std::array<double, kGlOrder> weight{};
};

GlRule make_gl_rule() {
  GlRule r;
  const int n = kGlOrder;
  for (int k = 0; k < n; ++k) {
    double x = std::cos(kPi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.node[k] = x;
    r.weight[k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

const GlRule& gl_rule() {
  static const GlRule rule = make_gl_rule();
  return rule;
}

// sec(phi) grows without bound near +-pi/2, but xi saturates; xi(50) equals
// xi(inf) to machine precision, so the argument is capped there.
double xi_of_sec(double phi, double inv_w_norm) {
  const double c = std::cos(phi);
  if (c <= 0.0) return kSqrtHalfPi;
  const double arg = inv_w_norm / c;
  return xi(arg > 50.0 ? 50.0 : arg);
}

}  // namespace

double xi(double x) {
  if (std::isnan(x) || x < 0.0) throw std::domain_error("xi: x must be >= 0");
  if (std::isinf(x)) return kSqrtHalfPi;
  return -x * std::exp(-0.5 * x * x) + kSqrtHalfPi * std::erf(x / std::numbers::sqrt2);
}

PqValue pq(double theta, double w_norm) {
  if (!(w_norm > 0.0)) throw std::domain_error("pq: w_norm must be positive");
  if (std::isnan(theta) || theta < -1e-12 || theta > kPi + 1e-12)
    throw std::domain_error("pq: theta must lie in [0, pi]");
  if (theta < 0.0) theta = 0.0;
  if (theta > kPi) theta = kPi;

  const double lo = theta - 0.5 * kPi;
  const double hi = 0.5 * kPi;
  const double inv_w_norm = 1.0 / w_norm;
  const GlRule& rule = gl_rule();

  // Fixed panel count keeps the rule deterministic while holding the
  // endpoint-flattened integrand to well below the 1e-9 contract.
  constexpr int kPanels = 4;
  double p = 0.0, q = 0.0;
  const double step = (hi - lo) / kPanels;
  for (int panel = 0; panel < kPanels; ++panel) {
    const double a = lo + panel * step;
    const double mid = a + 0.5 * step;
    const double half = 0.5 * step;
    for (int i = 0; i < kGlOrder; ++i) {
      const double phi = mid + half * rule.node[i];
      const double f = xi_of_sec(phi, inv_w_norm);
      const double wq = rule.weight[i] * half;
      p += wq * std::cos(phi) * f;
      q += wq * std::sin(phi) * f;
    }
  }
  return PqValue{p / (2.0 * kPi), q / (2.0 * kPi), theta, w_norm};
}

IndicatorMoments gauss_indicator_moments(const Vec& w, const Vec& w_tilde) {
  if (is_zero(w) || is_zero(w_tilde))
    throw std::domain_error("gauss_indicator_moments: zero vector");
  const double theta = angle_between(w, w_tilde).radians;
  const Vec w_hat = unit(w);

  IndicatorMoments m;
  m.prob_single = 0.5;
  m.prob_joint = (kPi - theta) / (2.0 * kPi);
  m.vec_single = scaled(w_hat, 1.0 / std::sqrt(2.0 * kPi));

  // In the orthonormal frame (w_hat, e_hat) with e_hat the unit component of
  // w_tilde orthogonal to w, the joint moment is
  //   (1/sqrt(2 pi)) [ (1+cos theta)/2 * w_hat + (sin theta)/2 * e_hat ],
  // which equals cos(theta/2)/sqrt(2 pi) * unit(w_hat + unit(w_tilde)) and
  // degrades to the zero vector at theta = pi.
  const double ct = std::cos(theta);
  m.vec_joint = scaled(w_hat, (1.0 + ct) * 0.5 / std::sqrt(2.0 * kPi));
  const Vec perp = reject(unit(w_tilde), w);
  const double nperp = norm(perp);
  if (nperp > 1e-12)
    axpy(0.5 * std::sin(theta) / (std::sqrt(2.0 * kPi) * nperp), perp, m.vec_joint);
  return m;
}

CappedMoments gauss_capped_moments(const Vec& w, const Vec& w_tilde) {
  if (is_zero(w) || is_zero(w_tilde))
    throw std::domain_error("gauss_capped_moments: zero vector");
  const double w_norm = norm(w);
  const double theta = angle_between(w, w_tilde).radians;
  const Vec w_hat = scaled(w, 1.0 / w_norm);

  CappedMoments m;
  m.vec_band = scaled(w_hat, pq(0.0, w_norm).p);

  // Same frame as above: p(theta,w) along w_hat plus q(theta,w) along e_hat.
  // Both coefficients vanish at theta in {0, pi}, so no special branch is
  // needed where e_hat is undefined.
  const PqValue v = pq(theta, w_norm);
  m.vec_band_joint = scaled(w_hat, v.p);
  const Vec perp = reject(unit(w_tilde), w);
  const double nperp = norm(perp);
  if (nperp > 1e-12) axpy(v.q / nperp, perp, m.vec_band_joint);
  return m;
}

}  // namespace stelab
