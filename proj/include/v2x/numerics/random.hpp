#pragma once

#include <cstdint>
#include <random>

#include "v2x/numerics/matrix.hpp"

namespace v2x {

// Seeded generator shared by initialisers and scenario synthesis.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  bool bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }
  std::uint64_t next() { return engine_(); }

  Matrix uniform_matrix(std::size_t rows, std::size_t cols, double bound) {
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = uniform(-bound, bound);
    return m;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace v2x
