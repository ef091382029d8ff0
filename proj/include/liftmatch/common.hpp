#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace liftmatch {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatXf = MatX<float>;
using MatXd = MatX<double>;
using VecXf = VecX<float>;
using VecXd = VecX<double>;

/// Malformed files or invalid data. CLI exit code 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A robust estimator could not produce a model. CLI exit code 4.
struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Training diverged (loss became non-finite).
struct TrainingError : EstimationError {
  using EstimationError::EstimationError;
};

/// splitmix64 generator. The full recipe is documented in the README so that
/// generated corpora can be reproduced outside this codebase:
///   state += 0x9E3779B97F4A7C15; return mix(state)
/// where mix(z) is the standard splitmix64 finalizer. `derive(seed, stream)`
/// starts an independent sequence at state mix(seed) + stream * golden.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static SplitMix64 derive(std::uint64_t seed, std::uint64_t stream) {
    return SplitMix64(mix(seed) + stream * 0x9E3779B97F4A7C15ULL);
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  int uniform_int(int n) {
    return int(next() % static_cast<std::uint64_t>(n));
  }

  /// Standard normal via Box-Muller; consumes exactly two draws per call.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// Number of worker threads kernels may use. Capped by the LIFTMATCH_THREADS
/// environment variable; re-read on every call so tests can vary it.
int thread_cap();

/// Runs fn(begin, end) over a partition of [0, n). Chunks are disjoint, so
/// results are bit-identical to the serial order for any thread count.
void parallel_rows(int n, const std::function<void(int, int)>& fn);

}  // namespace liftmatch
