#include "stelab/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace stelab {

namespace {

// Philox4x32-10 (counter-based): standard multipliers and Weyl constants.
constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

struct Counter4 {
  std::uint32_t c0, c1, c2, c3;
};

inline Counter4 philox4x32(Counter4 ctr, std::uint32_t k0, std::uint32_t k1) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr.c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr.c2;
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = Counter4{hi1 ^ ctr.c1 ^ k0, lo1, hi0 ^ ctr.c3 ^ k1, lo0};
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  return ctr;
}

inline double u64_to_open01(std::uint64_t x) {
  // (0, 1]: the +1 keeps log() finite.
  return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
}

inline double u64_to_halfopen01(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Two standard normals from one counter block via Box-Muller.
inline void normal_pair(std::uint64_t seed, std::uint64_t sample, std::uint64_t block,
                        double& z0, double& z1) {
  const Counter4 out = philox4x32(
      Counter4{static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
               static_cast<std::uint32_t>(sample), static_cast<std::uint32_t>(sample >> 32)},
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32));
  const std::uint64_t a = (static_cast<std::uint64_t>(out.c0) << 32) | out.c1;
  const std::uint64_t b = (static_cast<std::uint64_t>(out.c2) << 32) | out.c3;
  const double r = std::sqrt(-2.0 * std::log(u64_to_open01(a)));
  const double phi = 2.0 * std::numbers::pi * u64_to_halfopen01(b);
  z0 = r * std::cos(phi);
  z1 = r * std::sin(phi);
}

inline double binary_act(double x) { return x > 0.0 ? 1.0 : 0.0; }

inline double surrogate_deriv(SteKind kind, double x) {
  switch (kind) {
    case SteKind::Identity: return 1.0;
    case SteKind::Relu: return x > 0.0 ? 1.0 : 0.0;
    case SteKind::CappedRelu: return (x > 0.0 && x < 1.0) ? 1.0 : 0.0;
  }
  return 0.0;
}

void check_dims(const ModelParams& p, const TeacherParams& t, const Mat& z) {
  if (p.m() != t.m() || p.n() != t.n() || z.rows != p.m() || z.cols != p.n())
    throw std::invalid_argument("sample op: dimension mismatch");
}

double residual(const ModelParams& p, const TeacherParams& t, const Mat& z) {
  double pred = 0.0, label = 0.0;
  for (std::size_t i = 0; i < z.rows; ++i) {
    double zw = 0.0, zw_star = 0.0;
    for (std::size_t j = 0; j < z.cols; ++j) {
      zw += z.at(i, j) * p.w[j];
      zw_star += z.at(i, j) * t.w_star[j];
    }
    pred += p.v[i] * binary_act(zw);
    label += t.v_star[i] * binary_act(zw_star);
  }
  return pred - label;
}

}  // namespace

void fill_sample(const SampleBatch& batch, std::size_t index, Mat& out) {
  if (out.rows != batch.rows || out.cols != batch.cols) out = Mat(batch.rows, batch.cols);
  const std::size_t total = batch.rows * batch.cols;
  for (std::size_t e = 0; 2 * e < total; ++e) {
    double z0, z1;
    normal_pair(batch.seed, index, e, z0, z1);
    out.data[2 * e] = z0;
    if (2 * e + 1 < total) out.data[2 * e + 1] = z1;
  }
}

double ScalarRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double z0, z1;
  normal_pair(seed_, 0x5ca1ab1eull, counter_++, z0, z1);
  spare_ = z1;
  has_spare_ = true;
  return z0;
}

double ScalarRng::uniform() {
  const Counter4 out = philox4x32(
      Counter4{static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
               0xf1a7u, 0u},
      static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32));
  ++counter_;
  return u64_to_halfopen01((static_cast<std::uint64_t>(out.c0) << 32) | out.c1);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

double sample_loss(const ModelParams& p, const TeacherParams& t, const Mat& z) {
  check_dims(p, t, z);
  const double r = residual(p, t, z);
  return 0.5 * r * r;
}

Vec sample_grad_v(const ModelParams& p, const TeacherParams& t, const Mat& z) {
  check_dims(p, t, z);
  const double r = residual(p, t, z);
  Vec g(p.m(), 0.0);
  for (std::size_t i = 0; i < z.rows; ++i) {
    double zw = 0.0;
    for (std::size_t j = 0; j < z.cols; ++j) zw += z.at(i, j) * p.w[j];
    g[i] = binary_act(zw) * r;
  }
  return g;
}

Vec sample_coarse_grad(SteKind kind, const ModelParams& p, const TeacherParams& t, const Mat& z) {
  check_dims(p, t, z);
  const double r = residual(p, t, z);
  Vec g(p.n(), 0.0);
  for (std::size_t i = 0; i < z.rows; ++i) {
    double zw = 0.0;
    for (std::size_t j = 0; j < z.cols; ++j) zw += z.at(i, j) * p.w[j];
    const double c = surrogate_deriv(kind, zw) * p.v[i] * r;
    if (c == 0.0) continue;
    for (std::size_t j = 0; j < z.cols; ++j) g[j] += c * z.at(i, j);
  }
  return g;
}

McEstimate estimate_expectation(std::size_t dim, const SampleFn& f, const SampleBatch& batch,
                                unsigned threads) {
  if (batch.n_samples < 2)
    throw std::invalid_argument("estimate_expectation: need n_samples >= 2");
  if (dim == 0) throw std::invalid_argument("estimate_expectation: dim must be positive");

  constexpr std::size_t kChunk = 8192;
  const std::size_t n_chunks = (batch.n_samples + kChunk - 1) / kChunk;

  if (threads == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : (hw > 8 ? 8 : hw);
  }
  if (threads > n_chunks) threads = static_cast<unsigned>(n_chunks);

  std::vector<double> sums(n_chunks * dim, 0.0);
  std::vector<double> sumsqs(n_chunks * dim, 0.0);

  std::atomic<std::size_t> next_chunk{0};
  auto worker = [&]() {
    Mat z(batch.rows, batch.cols);
    std::vector<double> out(dim);
    for (;;) {
      const std::size_t c = next_chunk.fetch_add(1);
      if (c >= n_chunks) return;
      const std::size_t begin = c * kChunk;
      const std::size_t end = std::min(begin + kChunk, batch.n_samples);
      double* s = &sums[c * dim];
      double* s2 = &sumsqs[c * dim];
      for (std::size_t k = begin; k < end; ++k) {
        fill_sample(batch, k, z);
        f(z, out.data());
        for (std::size_t d = 0; d < dim; ++d) {
          s[d] += out[d];
          s2[d] += out[d] * out[d];
        }
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Combine partial sums in chunk order; the result does not depend on how
  // chunks were distributed over threads.
  McEstimate est;
  est.n_samples = batch.n_samples;
  est.mean.assign(dim, 0.0);
  est.std_error.assign(dim, 0.0);
  for (std::size_t c = 0; c < n_chunks; ++c)
    for (std::size_t d = 0; d < dim; ++d) {
      est.mean[d] += sums[c * dim + d];
      est.std_error[d] += sumsqs[c * dim + d];
    }
  const double n = static_cast<double>(batch.n_samples);
  for (std::size_t d = 0; d < dim; ++d) {
    est.mean[d] /= n;
    const double var = (est.std_error[d] - n * est.mean[d] * est.mean[d]) / (n - 1.0);
    est.std_error[d] = std::sqrt((var > 0.0 ? var : 0.0) / n);
  }
  return est;
}

}  // namespace stelab
