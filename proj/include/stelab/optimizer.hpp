#pragma once

#include <optional>

#include "stelab/landscape.hpp"
#include "stelab/model.hpp"
#include "stelab/ste.hpp"

namespace stelab {

struct DescentConfig {
  SteKind kind = SteKind::Relu;
  double eta = 0.1;
  std::size_t max_iters = 100000;
  double grad_tol = 1e-7;
  double w_norm_floor = 1e-3;  // monitored, never enforced
  std::size_t record_every = 1;
  bool snapshot_v = false;
};

struct TrajectoryRecord {
  std::size_t iter = 0;
  double loss = 0.0;
  double grad_v_norm = 0.0;
  double coarse_grad_w_norm = 0.0;
  double theta = 0.0;
  double w_norm = 0.0;
  std::optional<Vec> v;
};

struct RunOutcome {
  explicit RunOutcome(ModelParams params) : final_params(std::move(params)) {}

  ModelParams final_params;
  PointClass classification = PointClass::NonCritical;
  bool converged = false;
  bool monotone = true;         // loss never rose by more than 1e-12
  bool w_norm_violated = false; // |w| dipped below the configured floor
  bool degenerate = false;      // w reached exactly zero; run stopped
  double min_w_norm = 0.0;      // smallest |w| seen along the run
  std::size_t iterations = 0;
  std::vector<TrajectoryRecord> trajectory;
};

/// One full-batch update with the expected coarse gradient:
///   v <- v - eta * E[dl/dv],  w <- w - eta * E[g].
/// Pure function of its inputs.
ModelParams step(const ModelParams& p, const TeacherParams& t, const DescentConfig& cfg);

/// Iterates `step` until the stationarity residual drops to grad_tol or
/// max_iters is reached; records the trajectory and classifies the endpoint.
RunOutcome run(ModelParams p0, const TeacherParams& t, const DescentConfig& cfg,
               double classify_tol = 1e-5);

/// Initialization region that guarantees convergence to a global minimizer
/// for the ReLU-family surrogates:
///   v'v* > 0,  theta(w, w*) < pi/2,  (1'v*)(1'v) <= (1'v*)^2.
bool check_global_region(const ModelParams& p, const TeacherParams& t);

/// Halves cfg.eta until `probe_steps` consecutive steps are monotone
/// (no increase beyond 1e-12); returns the accepted eta.
double auto_halve_eta(const ModelParams& p0, const TeacherParams& t, DescentConfig cfg,
                      std::size_t probe_steps = 50);

}  // namespace stelab
