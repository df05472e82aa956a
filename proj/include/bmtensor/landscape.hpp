#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bmtensor/tensor.hpp"

namespace bmtensor {

/**
 * T* = sum_i u*_i (x) u*_i (x) u*_i with mutually orthogonal u*_i, viewed in
 * the normalized basis: T* = sum_i lambda_i uhat_i^{(x)3}, lambda_i = ||u*_i||^3.
 */
struct OrthogonalTarget {
  Matrix factors;  // n x r, columns u*_i
  Vector lambdas;
  Matrix basis;    // n x r, columns uhat_i
  SymTensor3 tensor;

  Index n() const { return factors.rows(); }
  Index r() const { return factors.cols(); }

  /// Throws std::invalid_argument for zero or non-orthogonal columns.
  static OrthogonalTarget from_factors(const Matrix& factors);
};

/// g(u) = ||u (x) u (x) u - T||_F^2, evaluated without forming u^{(x)3}.
double g_value(const Vector& u, const SymTensor3& t);
/// 6 ||u||^4 u - 6 T(., u, u).
Vector g_grad(const Vector& u, const SymTensor3& t);
/// 6 ||u||^4 I + 24 ||u||^2 u u^T - 12 T(u, ., .).
Matrix g_hess(const Vector& u, const SymTensor3& t);
/// d^3/dt^3 g(u + t d) at t = 0.
double third_directional(const Vector& u, const SymTensor3& t, const Vector& d);

enum class PointClass { third_order_saddle, strict_local_min, strict_saddle };

std::string to_string(PointClass c);

struct CriticalPoint {
  Vector point;
  Vector coefficients;        // basis^T point
  std::vector<Index> support;  // indices with nonzero coefficient
  PointClass klass = PointClass::third_order_saddle;
  double hess_min_eig = 0.0;
  double grad_norm = 0.0;
  Index support_size() const { return static_cast<Index>(support.size()); }
};

/// Raised when a point is not critical or its Hessian spectrum does not
/// separate from zero.
class ClassificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gradient tolerance used for criticality: tol * (1 + ||u||^5).
double critical_tolerance(const Vector& u, double tol);

CriticalPoint classify(const Vector& point, const OrthogonalTarget& target);

/**
 * All critical points with support size <= max_support, in order of support
 * size and then lexicographic support. For support J the point has basis
 * coefficients s^4 / lambda_i (i in J), where s^6 = 1 / sum_{i in J} lambda_i^-2.
 */
std::vector<CriticalPoint> enumerate_critical_points(const OrthogonalTarget& target,
                                                     Index max_support);

}  // namespace bmtensor
