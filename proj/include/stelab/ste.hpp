#pragma once

#include <optional>
#include <string>

#include "stelab/model.hpp"

namespace stelab {

/// Surrogate derivative used in the backward pass through the binary
/// activation: identity (mu' = 1), vanilla ReLU (mu' = 1_{x>0}) or the
/// clipped ReLU with band (0, 1) (mu' = 1_{0<x<1}).
enum class SteKind { Identity, Relu, CappedRelu };

const char* ste_name(SteKind kind);
std::optional<SteKind> ste_from_name(const std::string& name);

/// h(v, v*) = |v|^2 + (1'v)^2 - (1'v)(1'v*) + v'v*.
double h_value(const Vec& v, const Vec& v_star);

/// Closed-form expectation of the coarse gradient over the Gaussian data.
/// The v part coincides with the true population v-gradient; the w part
/// depends on the surrogate. Defined for every w != 0, including the angles
/// where the true w-gradient does not exist.
GradientPair expected_coarse_grad(SteKind kind, const ModelParams& p, const TeacherParams& t);

/// Inner product between the expected coarse w-gradient and the true
/// population w-gradient. Absent at theta in {0, pi} where the latter is
/// undefined.
std::optional<double> correlation(SteKind kind, const ModelParams& p, const TeacherParams& t);

/// |E[g]|^2 / (|df/dv|^2 + <E[g], df/dw>), the quantity that stays bounded
/// for the ReLU-family surrogates and diverges for the identity near the
/// spurious minimizer.
struct DescentRatio {
  enum class Status { Finite, Unbounded, UndefinedAngle };
  Status status = Status::Finite;
  double value = 0.0;
};

DescentRatio descent_ratio(SteKind kind, const ModelParams& p, const TeacherParams& t);

}  // namespace stelab
