#include "pmn/rng.hpp"

namespace pmn {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return splitmix64(splitmix64(master ^ h) + index);
}

Vec RandomStream::normal_vector(Eigen::Index n) {
  Vec out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = normal();
  return out;
}

Vec RandomStream::gaussian(const Mat& covariance) {
  // LDLT tolerates semi-definite covariances (e.g. a vanishing process noise).
  const Eigen::LDLT<Mat> ldlt(covariance);
  const Vec d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  const Vec w = normal_vector(covariance.rows());
  Mat lower = ldlt.matrixL();
  Vec y = lower * d.cwiseProduct(w);
  return ldlt.transpositionsP().transpose() * y;
}

}  // namespace pmn
