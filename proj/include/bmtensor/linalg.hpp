#pragma once

#include "bmtensor/tensor.hpp"

namespace bmtensor {

struct PowerIterationResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct PowerIterationOptions {
  double rel_tol = 1e-10;
  int max_iters = 10000;
  std::uint64_t seed = 0x5eedu;
};

/**
 * Largest eigenvalue of a symmetric positive semidefinite matrix by power
 * iteration from a seeded random start. On non-convergence the best
 * estimate is returned with converged = false.
 */
PowerIterationResult psd_top_eigenvalue(const Matrix& a,
                                        const PowerIterationOptions& opts = {});

/// Largest singular value via power iteration on the smaller Gram matrix.
PowerIterationResult matrix_spectral_norm(const Matrix& a,
                                          const PowerIterationOptions& opts = {});

/// Convenience wrapper returning only the value.
double spectral_norm(const Matrix& a);

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // column q pairs with values(q)
  int sweeps = 0;
};

/// Cyclic Jacobi eigensolver; iterates until the off-diagonal Frobenius norm
/// drops below tol * ||A||_F.
SymmetricEigen jacobi_eigen(const Matrix& a, double tol = 1e-12,
                            int max_sweeps = 100);

}  // namespace bmtensor
