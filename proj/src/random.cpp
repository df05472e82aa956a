#include "bmtensor/random.hpp"

namespace bmtensor {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t v : path) h = mix64(h ^ mix64(v + 0x632be59bd9b4e019ull));
  return h;
}

Matrix Rng::gaussian_matrix(Index rows, Index cols) {
  Matrix out(rows, cols);
  // Column-major fill order keeps streams stable across Eigen versions.
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) out(r, c) = gaussian();
  return out;
}

Vector Rng::gaussian_vector(Index n) {
  Vector out(n);
  for (Index i = 0; i < n; ++i) out(i) = gaussian();
  return out;
}

Vector Rng::unit_vector(Index n) {
  Vector v = gaussian_vector(n);
  double nrm = v.norm();
  while (nrm == 0.0) {
    v = gaussian_vector(n);
    nrm = v.norm();
  }
  return v / nrm;
}

}  // namespace bmtensor
