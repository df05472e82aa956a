#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "bmtensor/tensor.hpp"

namespace bmtensor {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/**
 * Derives a child seed from a master seed and a path of indices. The result
 * depends only on the values, never on call order, so per-trial streams are
 * reproducible regardless of scheduling.
 */
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double gaussian() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  std::uint64_t next() { return engine_(); }

  Matrix gaussian_matrix(Index rows, Index cols);
  Vector gaussian_vector(Index n);
  Vector unit_vector(Index n);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace bmtensor
