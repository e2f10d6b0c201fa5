#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stelab/experiments.hpp"
#include "stelab/monte_carlo.hpp"
#include "test_support.hpp"

using namespace stelab;
using testsupport::random_unit;
using testsupport::random_vec;

TEST_CASE("per-sample loss") {
  SUBCASE("zero residual") {
    const ModelParams p({1.0, 2.0}, {1.0, 0.0});
    const TeacherParams t({1.0, 2.0}, {1.0, 0.0});
    Mat z(2, 2);
    z.at(0, 0) = 0.3;
    z.at(1, 0) = -1.2;
    CHECK(sample_loss(p, t, z) == 0.0);
  }
  SUBCASE("both activations fire") {
    const ModelParams p({1.0}, {1.0, 0.0});
    const TeacherParams t({0.5}, {1.0, 0.0});
    Mat z(1, 2);
    z.at(0, 0) = 2.0;  // z'w = z'w* = 2 > 0
    CHECK(sample_loss(p, t, z) == doctest::Approx(0.125));
  }
  SUBCASE("activation at exactly zero does not fire") {
    const ModelParams p({1.0}, {1.0, 0.0});
    const TeacherParams t({0.5}, {0.0, 1.0});
    Mat z(1, 2);
    z.at(0, 0) = 0.0;
    z.at(0, 1) = 1.0;  // z'w = 0 (silent), z'w* = 1 (fires)
    CHECK(sample_loss(p, t, z) == doctest::Approx(0.125));
  }
}

TEST_CASE("per-sample gradients") {
  const ModelParams p({0.8, -0.3}, {0.6, 0.4});
  const TeacherParams t = TeacherParams::normalized({1.0, 0.5}, {1.0, 0.2});

  SUBCASE("zero residual kills both") {
    const ModelParams q(t.v_star, t.w_star);
    Mat z(2, 2);
    z.at(0, 0) = 1.0;
    z.at(1, 1) = -2.0;
    CHECK(norm(sample_grad_v(q, t, z)) == 0.0);
    CHECK(norm(sample_coarse_grad(SteKind::Relu, q, t, z)) == 0.0);
  }
  SUBCASE("silent rows give zero v-gradient entries") {
    Mat z(2, 2);
    z.at(0, 0) = -1.0;
    z.at(0, 1) = 1.0;  // z0'w = -0.2 silent
    z.at(1, 0) = -3.0;
    z.at(1, 1) = -1.0;  // z1'w < 0 silent
    const Vec g = sample_grad_v(p, t, z);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
  }
  SUBCASE("relu and capped relu agree inside the band") {
    Mat z(2, 2);
    z.at(0, 0) = 0.5;
    z.at(0, 1) = 0.5;  // z0'w = 0.5 in (0,1)
    z.at(1, 0) = 1.0;
    z.at(1, 1) = 0.1;  // z1'w = 0.64 in (0,1)
    const Vec a = sample_coarse_grad(SteKind::Relu, p, t, z);
    const Vec b = sample_coarse_grad(SteKind::CappedRelu, p, t, z);
    CHECK(norm(sub(a, b)) == 0.0);
  }
  SUBCASE("capped relu drops rows past the band edge") {
    Mat z(1, 2);
    z.at(0, 0) = 5.0;  // z'w = 3 > 1
    const ModelParams one({1.0}, {0.6, 0.4});
    const TeacherParams tt({0.5}, {1.0, 0.0});  // residual 0.5 at this sample
    CHECK(norm(sample_coarse_grad(SteKind::CappedRelu, one, tt, z)) == 0.0);
    CHECK(norm(sample_coarse_grad(SteKind::Relu, one, tt, z)) > 0.0);
  }
}

TEST_CASE("batch generation is reproducible and seed-sensitive") {
  const SampleBatch batch{123, 10, 3, 4};
  Mat a, b;
  fill_sample(batch, 7, a);
  fill_sample(batch, 7, b);
  CHECK(a.data == b.data);

  Mat c;
  fill_sample(SampleBatch{124, 10, 3, 4}, 7, c);
  CHECK(a.data != c.data);

  // entries look standard normal at a coarse level
  double mean = 0.0, var = 0.0;
  const SampleBatch big{9, 2000, 4, 4};
  Mat z;
  for (std::size_t k = 0; k < big.n_samples; ++k) {
    fill_sample(big, k, z);
    for (double x : z.data) {
      mean += x;
      var += x * x;
    }
  }
  const double n = 2000.0 * 16.0;
  mean /= n;
  var = var / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("estimator basics") {
  const SampleBatch batch{77, 4096, 1, 2};

  SUBCASE("constant function has zero standard error") {
    const McEstimate est = estimate_expectation(
        1, [](const Mat&, double* out) { out[0] = 2.0; }, batch);
    CHECK(est.mean[0] == 2.0);
    CHECK(est.std_error[0] == 0.0);
  }
  SUBCASE("same seed twice is bit-identical, any thread count") {
    auto fn = [](const Mat& z, double* out) { out[0] = z.at(0, 0) * z.at(0, 1); };
    const McEstimate a = estimate_expectation(1, fn, batch, 1);
    const McEstimate b = estimate_expectation(1, fn, batch, 1);
    const McEstimate c = estimate_expectation(1, fn, batch, 4);
    CHECK(a.mean[0] == b.mean[0]);
    CHECK(a.std_error[0] == b.std_error[0]);
    CHECK(a.mean[0] == c.mean[0]);
    CHECK(a.std_error[0] == c.std_error[0]);
  }
  SUBCASE("doubling the sample count shrinks the standard error like 1/sqrt(2)") {
    auto fn = [](const Mat& z, double* out) { out[0] = z.at(0, 0); };
    const McEstimate half = estimate_expectation(1, fn, SampleBatch{77, 40000, 1, 2});
    const McEstimate full = estimate_expectation(1, fn, SampleBatch{77, 80000, 1, 2});
    const double ratio = half.std_error[0] / full.std_error[0];
    CHECK(ratio > std::sqrt(2.0) * 0.8);
    CHECK(ratio < std::sqrt(2.0) * 1.2);
  }
  SUBCASE("tiny batches are rejected") {
    CHECK_THROWS_AS(estimate_expectation(
                        1, [](const Mat&, double* out) { out[0] = 0.0; },
                        SampleBatch{1, 1, 1, 2}),
                    std::invalid_argument);
  }
}

TEST_CASE("sampling oracle agrees with every closed form at one point") {
  // The full grid lives in the acceptance suite; this is the fast version.
  const ModelParams p({0.7, -0.4}, {0.5, 0.8, -0.1});
  const TeacherParams t = TeacherParams::normalized({1.0, 1.0}, {0.2, -0.4, 1.0});
  const auto checks = closed_form_vs_mc_checks(p, t, 200000, 4242);
  for (const CheckRecord& c : checks) {
    INFO(c.name, " max |z| = ", c.max_abs_z);
    CHECK(c.pass);
  }
  CHECK(checks.size() == 11);
}

TEST_CASE("the w = 0 loss branch matches the sampling mean") {
  // prediction is identically zero there, so the mean loss is the label power
  const ModelParams p({5.0, -2.0}, {0.0, 0.0, 0.0});
  const TeacherParams t({1.0, 1.0}, {1.0, 0.0, 0.0});
  CHECK(population_loss(p, t) == doctest::Approx(0.75));
  const McEstimate est = estimate_expectation(
      1, [&](const Mat& z, double* out) { out[0] = sample_loss(p, t, z); },
      SampleBatch{31337, 1000000, 2, 3});
  CHECK(std::abs(est.mean[0] - 0.75) <= 4.0 * est.std_error[0]);
}

TEST_CASE("derived seeds decorrelate streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  ScalarRng a(derive_seed(5, 0));
  ScalarRng b(derive_seed(5, 1));
  bool any_diff = false;
  for (int i = 0; i < 8; ++i) any_diff |= a.normal() != b.normal();
  CHECK(any_diff);
}
