#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "pmn/types.hpp"

namespace pmn {

/// Derives an independent stream seed from (master seed, stream name, index).
/// FNV-1a over the name, mixed with the master seed and index through
/// splitmix64; stable across platforms.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

/// Seeded random stream. Copyable; a copy replays the same sequence.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  Vec normal_vector(Eigen::Index n);

  /// Zero-mean Gaussian draw with the given covariance (Cholesky factor
  /// computed per call; covariance must be positive semi-definite).
  Vec gaussian(const Mat& covariance);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace pmn
