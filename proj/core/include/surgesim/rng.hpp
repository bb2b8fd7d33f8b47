#pragma once

#include <cstdint>
#include <random>

namespace surge {

// n-th output of a splitmix64 sequence started at `master`. Every consumer of
// randomness gets its own stream seed so that adding draws to one stream never
// perturbs another.
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream_index);

// Seeded random stream. The generator (mt19937_64) and every sampler are
// pinned to documented algorithms so trajectories stay reproducible for a
// given seed instead of depending on std::*_distribution implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // [0, 1), 53 random bits
  double uniform();

  // Marsaglia polar method; the spare variate is discarded.
  double normal(double mean, double stddev);

  // Rejection against the left truncation at zero. mean/stddev parameterize
  // the underlying (pre-truncation) normal.
  double truncated_normal(double mean, double stddev);

  // Inversion by sequential search below kSmallMeanCutoff, Hormann's PTRS
  // transformed rejection above it.
  std::int64_t poisson(double mean);

  static constexpr double kSmallMeanCutoff = 10.0;

 private:
  std::int64_t poisson_inversion(double mean);
  std::int64_t poisson_ptrs(double mean);

  std::mt19937_64 engine_;
};

}  // namespace surge
