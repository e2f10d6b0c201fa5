#pragma once

#include <optional>

#include "stelab/linalg.hpp"

namespace stelab {

/// Trainable parameters: second-layer weights v (length m) and the shared
/// first-layer filter w (length n). Requires m >= 1, n >= 2, finite entries.
struct ModelParams {
  Vec v;
  Vec w;

  ModelParams(Vec v_in, Vec w_in);
  std::size_t m() const { return v.size(); }
  std::size_t n() const { return w.size(); }
};

/// Ground-truth parameters defining labels and the loss landscape.
/// v_star must be nonzero and w_star unit-norm (within 1e-12).
struct TeacherParams {
  Vec v_star;
  Vec w_star;

  TeacherParams(Vec v_star_in, Vec w_star_in);

  /// Builds a teacher from an arbitrary nonzero w direction by normalizing it.
  static TeacherParams normalized(Vec v_star_in, Vec w_star_in);

  std::size_t m() const { return v_star.size(); }
  std::size_t n() const { return w_star.size(); }
};

struct Angle {
  double radians = 0.0;
};

/// A (v-part, w-part) gradient pair; used for the expected coarse gradients,
/// which are defined for every w != 0.
struct GradientPair {
  Vec grad_v;
  Vec grad_w;
};

/// True population gradient. The w part does not exist at the
/// non-differentiable angles theta in {0, pi} and is reported as absent.
struct TrueGradient {
  Vec grad_v;
  std::optional<Vec> grad_w;
};

/// Angle between two nonzero vectors, in [0, pi]. The cosine is clamped to
/// [-1, 1] before acos so ulp-level overshoot cannot produce NaN.
Angle angle_between(const Vec& w, const Vec& w_ref);

Vec apply_i_plus_ones(const Vec& x);          // (I + 11') x
Vec apply_i_plus_ones_inverse(const Vec& x);  // (I + 11')^{-1} x

double population_loss(const ModelParams& p, const TeacherParams& t);
TrueGradient population_grad(const ModelParams& p, const TeacherParams& t);

}  // namespace stelab
