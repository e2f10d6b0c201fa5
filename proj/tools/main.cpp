// stelab: command-line experiments over the coarse-gradient laboratory.
//
// Subcommands: verify | landscape | descend | figure1 | instability | sweep.
// Curves and trajectories are emitted as CSV (17 significant digits, LF);
// reports as JSON. All randomness derives from one --seed flag, so a fixed
// invocation reproduces its output byte for byte.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "stelab/experiments.hpp"
#include "stelab/gaussian.hpp"

using json = nlohmann::ordered_json;
using namespace stelab;

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

Vec parse_vec(const std::string& text) {
  Vec out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw CLI::ValidationError("expected a comma-separated list of reals");
  return out;
}

int write_text(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return 0;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot open " << path << " for writing\n";
    return 1;
  }
  f << content;
  return f.good() ? 0 : 1;
}

struct CommonOpts {
  std::size_t m = 2;
  std::size_t n = 4;
  std::uint64_t seed = 42;
  std::string v_star_text;
  std::string w_star_text;
  std::string ste = "relu";
  double eta = 0.0;  // 0 requests auto-halving
  std::size_t samples = 1000000;
  std::size_t iters = 100000;
  double tol = 1e-7;
  std::string out;
  std::string format = "csv";
};

void add_teacher_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--m", o.m, "second-layer width m (>= 1)");
  cmd->add_option("--n", o.n, "filter length n (>= 2)");
  cmd->add_option("--v-star", o.v_star_text, "teacher v* as comma-separated reals");
  cmd->add_option("--w-star", o.w_star_text,
                  "teacher w* as comma-separated reals (normalized to unit length)");
  cmd->add_option("--seed", o.seed, "master seed; every stream derives from it");
}

/// Teacher from flags; defaults to v* = all-ones and a seeded random unit w*.
TeacherParams make_teacher(const CommonOpts& o) {
  Vec v_star = o.v_star_text.empty() ? Vec(o.m, 1.0) : parse_vec(o.v_star_text);
  Vec w_star;
  if (o.w_star_text.empty()) {
    ScalarRng rng(derive_seed(o.seed, 7));
    w_star.resize(o.n);
    for (double& x : w_star) x = rng.normal();
  } else {
    w_star = parse_vec(o.w_star_text);
  }
  return TeacherParams::normalized(std::move(v_star), std::move(w_star));
}

json spec_echo(const CommonOpts& o, const TeacherParams& t) {
  json j;
  j["m"] = t.m();
  j["n"] = t.n();
  j["seed"] = o.seed;
  j["v_star"] = vec_to_json(t.v_star);
  j["w_star"] = vec_to_json(t.w_star);
  j["generator"] = kGeneratorVersion;
  return j;
}

int cmd_verify(const CommonOpts& o) {
  const TeacherParams t = make_teacher(o);
  ScalarRng rng(derive_seed(o.seed, 8));
  Vec v(t.m()), w(t.n());
  for (double& x : v) x = rng.normal();
  for (double& x : w) x = rng.normal();
  if (norm(w) < 1e-6) w[0] = 1.0;
  const ModelParams p(std::move(v), std::move(w));

  const auto checks = closed_form_vs_mc_checks(p, t, o.samples, o.seed);

  json report;
  report["spec"] = spec_echo(o, t);
  report["spec"]["samples"] = o.samples;
  report["point"] = {{"v", vec_to_json(p.v)}, {"w", vec_to_json(p.w)}};
  if (o.samples < 1000)
    report["low_power_warning"] =
        "sample count below 1000: standard errors are too wide for 4-sigma checks to carry weight";

  std::size_t passed = 0;
  json arr = json::array();
  for (const CheckRecord& c : checks) {
    json jc;
    jc["name"] = c.name;
    jc["closed_form"] = vec_to_json(c.closed_form);
    jc["mc_mean"] = vec_to_json(c.mc_mean);
    jc["std_error"] = vec_to_json(c.std_error);
    jc["max_abs_z"] = c.max_abs_z;
    jc["pass"] = c.pass;
    arr.push_back(jc);
    if (c.pass) ++passed;
  }
  report["checks"] = arr;
  report["summary"] = {{"total", checks.size()},
                       {"passed", passed},
                       {"all_pass", passed == checks.size()}};

  const int io = write_text(o.out, report.dump(2) + "\n");
  if (io != 0) return io;
  return passed == checks.size() ? 0 : 1;
}

int cmd_landscape(const CommonOpts& o) {
  if (o.v_star_text.empty()) {
    std::cerr << "error: landscape requires --v-star\n";
    return 2;
  }
  const TeacherParams t = make_teacher(o);
  const CriticalPointReport rep = critical_points(t);

  // w realizations at the named angles, in the plane of w* and a companion
  ScalarRng rng(derive_seed(o.seed, 9));
  Vec companion(t.n());
  for (double& x : companion) x = rng.normal();
  const Vec e2 = unit(reject(companion, t.w_star));
  const auto w_at = [&](double theta) {
    Vec w = scaled(t.w_star, std::cos(theta));
    axpy(std::sin(theta), e2, w);
    return w;
  };

  json report;
  report["spec"] = spec_echo(o, t);
  report["has_saddle"] = rep.has_saddle;
  if (rep.has_saddle) {
    report["saddle"] = {{"v", vec_to_json(rep.saddle_v)}, {"theta", rep.saddle_theta}};
  }
  report["spurious"] = {{"v", vec_to_json(rep.spurious_v)}, {"theta", rep.spurious_theta}};
  report["global"] = {{"v", vec_to_json(rep.global_v)}, {"theta", rep.global_theta}};

  json residuals;
  const auto residual_row = [&](const Vec& v_pt, double theta) {
    json row;
    const ModelParams p(v_pt, w_at(theta));
    for (SteKind kind : {SteKind::Identity, SteKind::Relu, SteKind::CappedRelu})
      row[ste_name(kind)] = stationarity_residual(p, t, kind);
    return row;
  };
  residuals["global"] = residual_row(rep.global_v, 0.0);
  residuals["spurious"] = residual_row(rep.spurious_v, kPi);
  if (rep.has_saddle) residuals["saddle"] = residual_row(rep.saddle_v, rep.saddle_theta);
  report["stationarity_residuals"] = residuals;

  return write_text(o.out, report.dump(2) + "\n");
}

std::string trajectory_csv(const RunOutcome& out) {
  std::string csv = "iter,loss,grad_v_norm,coarse_grad_w_norm,theta,w_norm\n";
  for (const TrajectoryRecord& r : out.trajectory) {
    csv += std::to_string(r.iter) + ',' + fmt(r.loss) + ',' + fmt(r.grad_v_norm) + ',' +
           fmt(r.coarse_grad_w_norm) + ',' + fmt(r.theta) + ',' + fmt(r.w_norm) + '\n';
  }
  return csv;
}

json run_summary(const RunOutcome& out, const TeacherParams& t) {
  json j;
  j["iterations"] = out.iterations;
  j["converged"] = out.converged;
  j["monotone"] = out.monotone;
  j["w_norm_violated"] = out.w_norm_violated;
  j["degenerate"] = out.degenerate;
  j["classification"] = point_class_name(out.classification);
  j["final_loss"] = population_loss(out.final_params, t);
  j["final_v"] = vec_to_json(out.final_params.v);
  return j;
}

int cmd_descend(const CommonOpts& o, std::size_t record_every) {
  const TeacherParams t = make_teacher(o);
  ScalarRng rng(derive_seed(o.seed, 10));
  const ModelParams p0 = random_start(t, rng);

  DescentConfig cfg;
  cfg.kind = *ste_from_name(o.ste);
  cfg.max_iters = o.iters;
  cfg.grad_tol = o.tol;
  cfg.record_every = record_every;
  cfg.eta = o.eta > 0.0 ? o.eta
                        : auto_halve_eta(p0, t, DescentConfig{cfg.kind, 0.5, o.iters, o.tol});

  const RunOutcome out = run(p0, t, cfg, 1e-5);

  if (o.format == "json") {
    json j;
    j["spec"] = spec_echo(o, t);
    j["eta"] = cfg.eta;
    j["ste"] = o.ste;
    j["result"] = run_summary(out, t);
    json traj = json::array();
    for (const TrajectoryRecord& r : out.trajectory)
      traj.push_back({{"iter", r.iter},
                      {"loss", r.loss},
                      {"grad_v_norm", r.grad_v_norm},
                      {"coarse_grad_w_norm", r.coarse_grad_w_norm},
                      {"theta", r.theta},
                      {"w_norm", r.w_norm}});
    j["trajectory"] = traj;
    return write_text(o.out, j.dump(2) + "\n");
  }
  return write_text(o.out, trajectory_csv(out));
}

int cmd_figure1(const CommonOpts& o, const std::vector<std::size_t>& sizes) {
  const TeacherParams t = make_teacher(o);
  ScalarRng rng(derive_seed(o.seed, 11));
  const ModelParams p0 = random_start(t, rng);
  const SteKind kind = *ste_from_name(o.ste);

  std::string csv = "sample_size,eta,loss\n";
  for (std::size_t n_samples : sizes) {
    const Figure1Curve curve = make_figure1_curve(p0, t, kind, n_samples, o.seed);
    for (std::size_t i = 0; i < curve.etas.size(); ++i)
      csv += std::to_string(n_samples) + ',' + fmt(curve.etas[i]) + ',' + fmt(curve.losses[i]) +
             '\n';
  }
  return write_text(o.out, csv);
}

int cmd_instability(const CommonOpts& o, double offset, double w_scale) {
  const TeacherParams t = make_teacher(o);
  const InstabilityResult res =
      run_instability(t, o.eta > 0 ? o.eta : 1e-3, o.iters, offset, o.seed, w_scale);

  if (!res.warning.empty()) std::cerr << "warning: " << res.warning << "\n";

  json j;
  j["spec"] = spec_echo(o, t);
  j["eta"] = o.eta > 0 ? o.eta : 1e-3;
  j["start_offset"] = offset;
  j["w_scale"] = w_scale;
  if (!res.warning.empty()) j["warning"] = res.warning;
  j["start_loss"] = res.start_loss;
  j["identity"] = {{"loss_rose", res.identity_loss_rose},
                   {"rise_iter", res.identity_rise_iter},
                   {"max_loss", res.identity_max_loss}};
  j["relu_max_residual"] = res.relu_max_residual;
  j["crelu_max_residual"] = res.crelu_max_residual;

  if (o.format == "csv") {
    std::string csv = trajectory_csv(*res.identity_run);
    const int io = write_text(o.out, csv);
    std::cerr << j.dump(2) << "\n";
    return io;
  }
  return write_text(o.out, j.dump(2) + "\n");
}

int cmd_sweep(const CommonOpts& o, std::size_t k_runs, bool in_region, bool all_stes) {
  const TeacherParams t = make_teacher(o);

  std::vector<SteKind> kinds;
  if (all_stes)
    kinds = {SteKind::Identity, SteKind::Relu, SteKind::CappedRelu};
  else
    kinds = {*ste_from_name(o.ste)};

  std::string csv =
      "run,ste,in_region_start,eta,iterations,converged,monotone,classification,final_loss,"
      "final_theta\n";
  bool region_contract_ok = true;
  json counts;
  for (SteKind kind : kinds) {
    const auto results = run_sweep(t, kind, k_runs, in_region, o.eta, o.iters, o.tol, o.seed);
    json per_class = json::object();
    for (std::size_t i = 0; i < results.size(); ++i) {
      const SweepRunResult& r = results[i];
      csv += std::to_string(i) + ',' + ste_name(r.kind) + ',' +
             (r.started_in_region ? "1," : "0,") + fmt(r.eta) + ',' +
             std::to_string(r.iterations) + ',' + (r.converged ? "1," : "0,") +
             (r.monotone ? "1," : "0,") + point_class_name(r.classification) + ',' +
             fmt(r.final_loss) + ',' + fmt(r.final_theta) + '\n';
      const char* cls = point_class_name(r.classification);
      per_class[cls] = (per_class.contains(cls) ? per_class[cls].get<int>() : 0) + 1;
      if (in_region && kind != SteKind::Identity &&
          r.classification != PointClass::GlobalMin)
        region_contract_ok = false;
    }
    counts[ste_name(kind)] = per_class;
  }

  const int io = write_text(o.out, csv);
  std::cerr << counts.dump(2) << "\n";
  if (io != 0) return io;
  return region_contract_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coarse-gradient descent laboratory for a binary-activation two-layer network"};
  app.require_subcommand(1);

  CommonOpts o;

  auto* verify = app.add_subcommand(
      "verify", "closed-form expectations vs the seeded Monte Carlo oracle");
  add_teacher_flags(verify, o);
  verify->add_option("--samples", o.samples, "Monte Carlo sample count");
  verify->add_option("--out", o.out, "output path for the JSON report (default stdout)");

  auto* landscape =
      app.add_subcommand("landscape", "critical points and stationarity residuals");
  add_teacher_flags(landscape, o);
  landscape->add_option("--out", o.out, "output path for the JSON report (default stdout)");

  auto* descend = app.add_subcommand("descend", "one coarse-gradient descent run");
  add_teacher_flags(descend, o);
  std::size_t record_every = 1;
  descend->add_option("--ste", o.ste, "surrogate: identity|relu|crelu")
      ->check(CLI::IsMember({"identity", "relu", "crelu"}));
  descend->add_option("--eta", o.eta, "learning rate (0 = auto-halving)");
  descend->add_option("--iters", o.iters, "iteration cap");
  descend->add_option("--tol", o.tol, "stationarity stopping tolerance");
  descend->add_option("--record-every", record_every, "trajectory recording stride");
  descend->add_option("--out", o.out, "output path (default stdout)");
  descend->add_option("--format", o.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* figure1 = app.add_subcommand(
      "figure1", "empirical loss along the negative batch coarse gradient vs step size");
  add_teacher_flags(figure1, o);
  std::vector<std::size_t> sizes{10, 50, 1000};
  figure1->add_option("--ste", o.ste, "surrogate: identity|relu|crelu")
      ->check(CLI::IsMember({"identity", "relu", "crelu"}));
  figure1->add_option("--sizes", sizes, "batch sizes, one curve each");
  figure1->add_option("--out", o.out, "output path for the CSV (default stdout)");

  auto* instability = app.add_subcommand(
      "instability", "identity-surrogate behavior near the theta = pi critical point");
  add_teacher_flags(instability, o);
  double offset = 0.0, w_scale = 1.0;
  instability->add_option("--eta", o.eta, "learning rate (default 1e-3)");
  instability->add_option("--iters", o.iters, "horizon (default 1000)")->default_val(1000);
  instability->add_option("--offset", offset, "start perturbation radius (default 0)");
  instability->add_option("--w-norm", w_scale, "start filter norm (default 1)");
  instability->add_option("--out", o.out, "output path (default stdout)");
  instability->add_option("--format", o.format, "csv trajectory or json summary")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* sweep = app.add_subcommand("sweep", "ensembles of seeded descent runs");
  add_teacher_flags(sweep, o);
  std::size_t k_runs = 20;
  bool in_region = false, all_stes = false;
  sweep->add_option("--runs", k_runs, "number of runs per surrogate");
  sweep->add_option("--ste", o.ste, "surrogate: identity|relu|crelu")
      ->check(CLI::IsMember({"identity", "relu", "crelu"}));
  sweep->add_flag("--all-stes", all_stes, "sweep all three surrogates");
  sweep->add_flag("--in-region", in_region, "restrict starts to the global-convergence region");
  sweep->add_option("--eta", o.eta, "learning rate (0 = auto-halving per run)");
  sweep->add_option("--iters", o.iters, "iteration cap per run")->default_val(20000);
  sweep->add_option("--tol", o.tol, "stationarity stopping tolerance");
  sweep->add_option("--out", o.out, "output path for the per-run CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(verify)) return cmd_verify(o);
    if (app.got_subcommand(landscape)) return cmd_landscape(o);
    if (app.got_subcommand(descend)) return cmd_descend(o, record_every);
    if (app.got_subcommand(figure1)) return cmd_figure1(o, sizes);
    if (app.got_subcommand(instability)) return cmd_instability(o, offset, w_scale);
    if (app.got_subcommand(sweep)) return cmd_sweep(o, k_runs, in_region, all_stes);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
