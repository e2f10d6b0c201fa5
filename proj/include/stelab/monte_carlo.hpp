#pragma once

#include <cstdint>
#include <functional>

#include "stelab/model.hpp"
#include "stelab/ste.hpp"

namespace stelab {

/// Generator identifier, recorded so results can be tied to the exact
/// sampling scheme: Philox4x32-10 counters fed through Box-Muller.
inline constexpr const char* kGeneratorVersion = "philox4x32-10/box-muller/v1";

/// Small dense row-major matrix; one Gaussian data sample Z is m x n.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Description of a reproducible batch of i.i.d. standard-normal matrices.
/// Samples are generated on demand from (seed, sample index), so a batch is
/// never materialized in memory as a whole.
struct SampleBatch {
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Fills `out` with sample `index` of the batch; bit-for-bit reproducible for
/// a fixed seed and generator version, independent of call order.
void fill_sample(const SampleBatch& batch, std::size_t index, Mat& out);

/// Stateless child-seed derivation so sub-experiments get decorrelated
/// streams from one user-facing seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Per-sample quantities. The binary activation uses the strict indicator
/// 1_{x>0}, so sigma(0) = 0.
double sample_loss(const ModelParams& p, const TeacherParams& t, const Mat& z);
Vec sample_grad_v(const ModelParams& p, const TeacherParams& t, const Mat& z);
Vec sample_coarse_grad(SteKind kind, const ModelParams& p, const TeacherParams& t, const Mat& z);

/// Scalar stream over the same counter-based generator; used wherever an
/// experiment needs a few seeded draws rather than a whole batch.
class ScalarRng {
 public:
  explicit ScalarRng(std::uint64_t seed) : seed_(seed) {}
  double normal();
  double uniform();  // [0, 1)

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct McEstimate {
  Vec mean;
  Vec std_error;
  std::size_t n_samples = 0;
};

using SampleFn = std::function<void(const Mat& z, double* out)>;

/// Componentwise sample mean and standard error of f over the batch.
/// Accumulation is chunked with a fixed chunk size and chunk results are
/// combined in index order, so the estimate is identical for any thread
/// count. Requires n_samples >= 2.
McEstimate estimate_expectation(std::size_t dim, const SampleFn& f, const SampleBatch& batch,
                                unsigned threads = 0);

}  // namespace stelab
