#pragma once

#include <cstdint>
#include <string>

#include "stelab/landscape.hpp"
#include "stelab/monte_carlo.hpp"
#include "stelab/optimizer.hpp"

namespace stelab {

/// One closed-form-vs-Monte-Carlo comparison: componentwise agreement at a
/// 4-standard-error band.
struct CheckRecord {
  std::string name;
  Vec closed_form;
  Vec mc_mean;
  Vec std_error;
  double max_abs_z = 0.0;
  bool pass = false;
};

/// Runs every closed-form identity against the sampling oracle at one
/// parameter point: population loss, true v-gradient, the three expected
/// coarse gradients, and the Gaussian indicator/band moments.
std::vector<CheckRecord> closed_form_vs_mc_checks(const ModelParams& p, const TeacherParams& t,
                                                  std::size_t samples, std::uint64_t seed,
                                                  unsigned threads = 0);

/// Empirical loss after one step of size eta along the negative empirical
/// coarse gradient of a fixed batch, traced over an eta grid.
struct Figure1Curve {
  std::size_t sample_size = 0;
  Vec etas;    // strictly increasing from 0
  Vec losses;  // losses[0] is the empirical loss at the start point
};

Figure1Curve make_figure1_curve(const ModelParams& p0, const TeacherParams& t, SteKind kind,
                                std::size_t sample_size, std::uint64_t seed,
                                std::size_t n_etas = 60);

double total_variation(const Vec& values);

/// Runs the three surrogates from a start near the theta = pi critical point:
/// the identity surrogate's behavior there is the object of interest, the
/// ReLU-family runs provide the stationary contrast.
struct InstabilityResult {
  std::string warning;  // nonempty when the nonvanishing premise fails
  double start_loss = 0.0;
  bool identity_loss_rose = false;
  std::size_t identity_rise_iter = 0;
  double identity_max_loss = 0.0;
  double relu_max_residual = 0.0;
  double crelu_max_residual = 0.0;
  std::optional<RunOutcome> identity_run;
};

/// start_offset perturbs (v0, w0) by a seeded random direction of that
/// radius; w_scale sets |w0| (the theta = pi ray is scale invariant, the
/// number of steps needed to traverse it is not).
InstabilityResult run_instability(const TeacherParams& t, double eta, std::size_t iters,
                                  double start_offset, std::uint64_t seed,
                                  double w_scale = 1.0);

struct SweepRunResult {
  SteKind kind = SteKind::Relu;
  std::uint64_t run_seed = 0;
  double eta = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool monotone = false;
  bool started_in_region = false;
  PointClass classification = PointClass::NonCritical;
  double final_loss = 0.0;
  double final_theta = 0.0;
};

/// K seeded coarse-descent runs for one surrogate. Starts are random unless
/// in_region is set, in which case they are resampled into the global
/// convergence region. eta <= 0 requests auto-halving from 0.5.
std::vector<SweepRunResult> run_sweep(const TeacherParams& t, SteKind kind, std::size_t k_runs,
                                      bool in_region, double eta, std::size_t max_iters,
                                      double grad_tol, std::uint64_t seed);

/// Seeded random start with entries scaled to be comparable to the teacher.
ModelParams random_start(const TeacherParams& t, ScalarRng& rng);

/// Resamples until the start satisfies the global-region conditions.
ModelParams random_start_in_region(const TeacherParams& t, ScalarRng& rng);

}  // namespace stelab
