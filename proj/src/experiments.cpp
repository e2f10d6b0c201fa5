#include "stelab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stelab/gaussian.hpp"

namespace stelab {

namespace {


CheckRecord compare(std::string name, Vec closed, const McEstimate& est) {
  CheckRecord rec;
  rec.name = std::move(name);
  rec.closed_form = std::move(closed);
  rec.mc_mean = est.mean;
  rec.std_error = est.std_error;
  rec.max_abs_z = 0.0;
  for (std::size_t i = 0; i < rec.closed_form.size(); ++i) {
    const double diff = std::abs(rec.mc_mean[i] - rec.closed_form[i]);
    // A zero standard error only happens for exactly constant components;
    // require exact agreement there.
    const double z = rec.std_error[i] > 0.0 ? diff / rec.std_error[i]
                                            : (diff == 0.0 ? 0.0 : 1e9);
    rec.max_abs_z = std::max(rec.max_abs_z, z);
  }
  rec.pass = rec.max_abs_z <= 4.0;
  return rec;
}

}  // namespace

std::vector<CheckRecord> closed_form_vs_mc_checks(const ModelParams& p, const TeacherParams& t,
                                                  std::size_t samples, std::uint64_t seed,
                                                  unsigned threads) {
  std::vector<CheckRecord> checks;
  const std::size_t m = p.m(), n = p.n();

  const SampleBatch batch{derive_seed(seed, 0), samples, m, n};

  checks.push_back(compare(
      "population_loss", {population_loss(p, t)},
      estimate_expectation(
          1, [&](const Mat& z, double* out) { out[0] = sample_loss(p, t, z); }, batch, threads)));

  checks.push_back(compare(
      "grad_v", population_grad(p, t).grad_v,
      estimate_expectation(
          m,
          [&](const Mat& z, double* out) {
            const Vec g = sample_grad_v(p, t, z);
            std::copy(g.begin(), g.end(), out);
          },
          batch, threads)));

  for (SteKind kind : {SteKind::Relu, SteKind::CappedRelu, SteKind::Identity}) {
    checks.push_back(compare(
        std::string("coarse_grad_w_") + ste_name(kind), expected_coarse_grad(kind, p, t).grad_w,
        estimate_expectation(
            n,
            [&](const Mat& z, double* out) {
              const Vec g = sample_coarse_grad(kind, p, t, z);
              std::copy(g.begin(), g.end(), out);
            },
            batch, threads)));
  }

  // Gaussian moment identities, sampled as single z vectors (1 x n).
  const SampleBatch zbatch{derive_seed(seed, 1), samples, 1, n};
  const Vec& w = p.w;
  const Vec& ws = t.w_star;
  const IndicatorMoments ind = gauss_indicator_moments(w, ws);
  const CappedMoments cap = gauss_capped_moments(w, ws);

  auto zmoment = [&](const char* name, Vec closed, auto fn) {
    const std::size_t dim = closed.size();
    checks.push_back(compare(name, std::move(closed),
                             estimate_expectation(dim, fn, zbatch, threads)));
  };

  auto row = [&](const Mat& z) {
    Vec zz(n);
    for (std::size_t j = 0; j < n; ++j) zz[j] = z.at(0, j);
    return zz;
  };

  zmoment("indicator_prob_single", Vec{ind.prob_single}, [&](const Mat& z, double* out) {
    out[0] = dot(row(z), w) > 0.0 ? 1.0 : 0.0;
  });
  zmoment("indicator_prob_joint", Vec{ind.prob_joint}, [&](const Mat& z, double* out) {
    const Vec zz = row(z);
    out[0] = (dot(zz, w) > 0.0 && dot(zz, ws) > 0.0) ? 1.0 : 0.0;
  });
  zmoment("indicator_vec_single", ind.vec_single, [&](const Mat& z, double* out) {
    const Vec zz = row(z);
    const double ind1 = dot(zz, w) > 0.0 ? 1.0 : 0.0;
    for (std::size_t j = 0; j < n; ++j) out[j] = ind1 * zz[j];
  });
  zmoment("indicator_vec_joint", ind.vec_joint, [&](const Mat& z, double* out) {
    const Vec zz = row(z);
    const double ind2 = (dot(zz, w) > 0.0 && dot(zz, ws) > 0.0) ? 1.0 : 0.0;
    for (std::size_t j = 0; j < n; ++j) out[j] = ind2 * zz[j];
  });
  zmoment("band_vec", cap.vec_band, [&](const Mat& z, double* out) {
    const Vec zz = row(z);
    const double zw = dot(zz, w);
    const double ind1 = (zw > 0.0 && zw < 1.0) ? 1.0 : 0.0;
    for (std::size_t j = 0; j < n; ++j) out[j] = ind1 * zz[j];
  });
  zmoment("band_vec_joint", cap.vec_band_joint, [&](const Mat& z, double* out) {
    const Vec zz = row(z);
    const double zw = dot(zz, w);
    const double ind2 = (zw > 0.0 && zw < 1.0 && dot(zz, ws) > 0.0) ? 1.0 : 0.0;
    for (std::size_t j = 0; j < n; ++j) out[j] = ind2 * zz[j];
  });

  return checks;
}

Figure1Curve make_figure1_curve(const ModelParams& p0, const TeacherParams& t, SteKind kind,
                                std::size_t sample_size, std::uint64_t seed,
                                std::size_t n_etas) {
  if (sample_size < 1) throw std::invalid_argument("make_figure1_curve: empty batch");
  if (n_etas < 2) throw std::invalid_argument("make_figure1_curve: need at least two etas");

  const SampleBatch batch{derive_seed(seed, 2), sample_size, p0.m(), p0.n()};

  // Empirical coarse gradient of this batch (mean per-sample v- and w-parts).
  Vec gv(p0.m(), 0.0), gw(p0.n(), 0.0);
  Mat z(batch.rows, batch.cols);
  for (std::size_t k = 0; k < sample_size; ++k) {
    fill_sample(batch, k, z);
    axpy(1.0, sample_grad_v(p0, t, z), gv);
    axpy(1.0, sample_coarse_grad(kind, p0, t, z), gw);
  }
  const double inv_n = 1.0 / static_cast<double>(sample_size);
  gv = scaled(gv, inv_n);
  gw = scaled(gw, inv_n);

  // Step sizes: 0 followed by log-spaced values up to the eta at which the
  // full displacement reaches twice |w0|.
  const double g_norm = std::sqrt(dot(gv, gv) + dot(gw, gw));
  const double eta_max = g_norm > 0.0 ? 2.0 * norm(p0.w) / g_norm : 1.0;
  const double eta_min = eta_max * 1e-3;

  Figure1Curve curve;
  curve.sample_size = sample_size;
  curve.etas.push_back(0.0);
  for (std::size_t i = 0; i + 1 < n_etas; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(n_etas - 2);
    curve.etas.push_back(eta_min * std::pow(eta_max / eta_min, frac));
  }

  for (const double eta : curve.etas) {
    Vec v = p0.v;
    Vec w = p0.w;
    axpy(-eta, gv, v);
    axpy(-eta, gw, w);
    const ModelParams moved(std::move(v), std::move(w));
    double loss = 0.0;
    for (std::size_t k = 0; k < sample_size; ++k) {
      fill_sample(batch, k, z);
      loss += sample_loss(moved, t, z);
    }
    curve.losses.push_back(loss * inv_n);
  }
  return curve;
}

double total_variation(const Vec& values) {
  double tv = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) tv += std::abs(values[i] - values[i - 1]);
  return tv;
}

InstabilityResult run_instability(const TeacherParams& t, double eta, std::size_t iters,
                                  double start_offset, std::uint64_t seed, double w_scale) {
  InstabilityResult res;
  if (t.m() == 1)
    res.warning = "identity coarse gradient vanishes at the theta=pi point for m=1";
  else if (sum(t.v_star) == 0.0)
    res.warning = "identity coarse gradient vanishes at the theta=pi point when 1'v* = 0";

  const CriticalPointReport rep = critical_points(t);
  Vec v0 = rep.spurious_v;
  Vec w0 = scaled(t.w_star, -w_scale);
  if (start_offset > 0.0) {
    ScalarRng rng(derive_seed(seed, 3));
    Vec dv(v0.size()), dw(w0.size());
    for (double& x : dv) x = rng.normal();
    for (double& x : dw) x = rng.normal();
    const double dn = std::sqrt(dot(dv, dv) + dot(dw, dw));
    axpy(start_offset / dn, dv, v0);
    axpy(start_offset / dn, dw, w0);
  }
  const ModelParams p0(v0, w0);
  res.start_loss = population_loss(p0, t);

  DescentConfig cfg;
  cfg.eta = eta;
  cfg.max_iters = iters;
  cfg.grad_tol = 1e-300;  // run the full horizon; stationarity is measured below
  cfg.record_every = 1;

  cfg.kind = SteKind::Identity;
  res.identity_run.emplace(run(p0, t, cfg));
  res.identity_max_loss = res.start_loss;
  for (const TrajectoryRecord& rec : res.identity_run->trajectory) {
    if (rec.loss > res.identity_max_loss) {
      res.identity_max_loss = rec.loss;
      if (!res.identity_loss_rose) res.identity_rise_iter = rec.iter;
      res.identity_loss_rose = true;
    }
  }

  for (SteKind kind : {SteKind::Relu, SteKind::CappedRelu}) {
    ModelParams p = p0;
    double max_resid = 0.0;
    DescentConfig c2 = cfg;
    c2.kind = kind;
    for (std::size_t i = 0; i < iters; ++i) {
      max_resid = std::max(max_resid, stationarity_residual(p, t, kind));
      p = step(p, t, c2);
    }
    (kind == SteKind::Relu ? res.relu_max_residual : res.crelu_max_residual) = max_resid;
  }
  return res;
}

ModelParams random_start(const TeacherParams& t, ScalarRng& rng) {
  // Per-entry scale chosen so the expected start norm matches |v*|. Starts
  // with |v| far above the teacher's scale drive |w| through zero before v
  // relaxes, leaving the regime where the descent guarantees apply.
  const double v_scale = norm(t.v_star) / std::sqrt(static_cast<double>(t.m()));
  Vec v(t.m()), w(t.n());
  for (double& x : v) x = v_scale * rng.normal();
  for (double& x : w) x = rng.normal();
  if (is_zero(w)) w[0] = 1.0;
  return ModelParams(std::move(v), std::move(w));
}

ModelParams random_start_in_region(const TeacherParams& t, ScalarRng& rng) {
  for (int tries = 0; tries < 10000; ++tries) {
    ModelParams p = random_start(t, rng);
    if (check_global_region(p, t)) return p;
  }
  throw std::runtime_error("random_start_in_region: sampling failed");
}

std::vector<SweepRunResult> run_sweep(const TeacherParams& t, SteKind kind, std::size_t k_runs,
                                      bool in_region, double eta, std::size_t max_iters,
                                      double grad_tol, std::uint64_t seed) {
  std::vector<SweepRunResult> results;
  results.reserve(k_runs);
  for (std::size_t k = 0; k < k_runs; ++k) {
    ScalarRng rng(derive_seed(seed, 100 + k));
    const ModelParams p0 =
        in_region ? random_start_in_region(t, rng) : random_start(t, rng);

    DescentConfig cfg;
    cfg.kind = kind;
    cfg.max_iters = max_iters;
    cfg.grad_tol = grad_tol;
    cfg.record_every = max_iters + 1;  // endpoints only
    cfg.eta = eta > 0.0 ? eta : auto_halve_eta(p0, t, DescentConfig{kind, 0.5, max_iters,
                                                                    grad_tol, 1e-3, 1, false});

    const RunOutcome out = run(p0, t, cfg, 1e-4);
    SweepRunResult r;
    r.kind = kind;
    r.run_seed = derive_seed(seed, 100 + k);
    r.eta = cfg.eta;
    r.iterations = out.iterations;
    r.converged = out.converged;
    r.monotone = out.monotone;
    r.started_in_region = check_global_region(p0, t);
    r.classification = out.classification;
    r.final_loss = population_loss(out.final_params, t);
    r.final_theta = angle_between(out.final_params.w, t.w_star).radians;
    results.push_back(r);
  }
  return results;
}

}  // namespace stelab
