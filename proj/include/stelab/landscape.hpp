#pragma once

#include "stelab/model.hpp"
#include "stelab/ste.hpp"

namespace stelab {

/// The critical points of the population loss determined by the teacher:
/// the global minimizer (v*, theta = 0), the candidate point at theta = pi,
/// and, when (1'v*)^2 < (m+1)/2 |v*|^2 holds strictly, an interior saddle.
struct CriticalPointReport {
  bool has_saddle = false;
  Vec saddle_v;                // present iff has_saddle
  double saddle_theta = 0.0;   // present iff has_saddle
  Vec spurious_v;
  double spurious_theta = 0.0;  // always pi
  Vec global_v;
  double global_theta = 0.0;  // always 0
};

CriticalPointReport critical_points(const TeacherParams& t);

enum class PointClass { GlobalMin, SpuriousLocalMin, Saddle, NonCritical, Undefined };

const char* point_class_name(PointClass c);

/// Proximity-based classification against the report's points. Undefined for
/// w = 0, where the angle does not exist.
PointClass classify_point(const ModelParams& p, const TeacherParams& t, double tol);

/// max(|df/dv|, |expected coarse w-gradient|): zero exactly at the points
/// where the ReLU-family coarse gradients vanish, and provably nonzero at
/// the theta = pi point for the identity surrogate when 1'v* != 0, m > 1.
double stationarity_residual(const ModelParams& p, const TeacherParams& t, SteKind kind);

/// Hessian of the reduced objective
///   f~(v, theta) = v'(I+11')v - 2 v'((1-2 theta/pi) I + 11') v*
/// as an (m+1) x (m+1) row-major matrix in the variables (v, theta).
std::vector<double> reduced_hessian(const TeacherParams& t);

}  // namespace stelab
