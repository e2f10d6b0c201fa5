#pragma once

#include "stelab/linalg.hpp"

namespace stelab {

/// Truncated Gaussian radial integral: integral of r^2 exp(-r^2/2) over [0, x],
/// evaluated by its erf closed form. Saturates at sqrt(pi/2) as x -> +inf.
/// Throws std::domain_error for negative x; x = +inf is accepted.
double xi(double x);

/// Angular cosine/sine-weighted integrals of xi(sec(phi)/w_norm) over
/// [theta - pi/2, pi/2], scaled by 1/(2*pi).
struct PqValue {
  double p = 0.0;
  double q = 0.0;
  double theta = 0.0;
  double w_norm = 0.0;
};

PqValue pq(double theta, double w_norm);

/// Half-space indicator moments of a standard Gaussian vector z:
/// P(z'w > 0), P(z'w > 0 and z'w_tilde > 0), E[z 1_{z'w>0}] and the joint
/// first moment (defined as the zero vector when the angle is pi).
struct IndicatorMoments {
  double prob_single = 0.0;
  double prob_joint = 0.0;
  Vec vec_single;
  Vec vec_joint;
};

IndicatorMoments gauss_indicator_moments(const Vec& w, const Vec& w_tilde);

/// Band moments E[z 1_{0 < z'w < 1}] and E[z 1_{0 < z'w < 1, z'w_tilde > 0}].
struct CappedMoments {
  Vec vec_band;
  Vec vec_band_joint;
};

CappedMoments gauss_capped_moments(const Vec& w, const Vec& w_tilde);

}  // namespace stelab
