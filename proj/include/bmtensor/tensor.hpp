#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace bmtensor {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Burer-Monteiro variable U (n x r); column p is the factor u_p.
using FactorMatrix = Eigen::MatrixXd;

/**
 * Dense third-order tensor of shape n x n x n.
 *
 * Entries are stored with i fastest, then j, then k, so the raw buffer read
 * column-major as an n x n^2 matrix is exactly the mode-1 unfolding: column
 * j + k*n holds T(:, j, k).
 *
 * The type does not enforce symmetry on arbitrary data; tensors produced by
 * outer3() and build_from_factors() are symmetric bit for bit, and the
 * arithmetic operators preserve that.
 */
class SymTensor3 {
 public:
  SymTensor3() = default;
  explicit SymTensor3(Index n);
  SymTensor3(Index n, std::vector<double> data);

  Index dim() const { return n_; }
  std::size_t size() const { return data_.size(); }

  double operator()(Index i, Index j, Index k) const {
    return data_[static_cast<std::size_t>(i + n_ * (j + n_ * k))];
  }
  double& operator()(Index i, Index j, Index k) {
    return data_[static_cast<std::size_t>(i + n_ * (j + n_ * k))];
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  /// Zero-copy view of the mode-1 unfolding (n x n^2).
  Eigen::Map<const Matrix> unfolding() const {
    return Eigen::Map<const Matrix>(data_.data(), n_, n_ * n_);
  }

  SymTensor3& operator+=(const SymTensor3& other);
  SymTensor3& operator-=(const SymTensor3& other);
  SymTensor3& operator*=(double s);

  /// Largest |T(i,j,k) - T(pi(i,j,k))| over all index permutations.
  double max_asymmetry() const;

  /// Replaces every entry orbit by its average over the 6 permutations.
  void symmetrize();

  /// Copies the entry at the sorted index i <= j <= k onto all permutations.
  void mirror_from_sorted();

  bool all_finite() const;

 private:
  Index n_ = 0;
  std::vector<double> data_;
};

SymTensor3 operator+(SymTensor3 a, const SymTensor3& b);
SymTensor3 operator-(SymTensor3 a, const SymTensor3& b);
SymTensor3 operator*(double s, SymTensor3 a);

/// u (x) u (x) u.
SymTensor3 outer3(const Vector& u);

/// U o U o U = sum_p u_p (x) u_p (x) u_p.
SymTensor3 build_from_factors(const FactorMatrix& U);

double inner(const SymTensor3& x, const SymTensor3& y);
double fro_norm(const SymTensor3& t);

/// Mode-1 unfolding T_(1) as an owned n x n^2 matrix.
Matrix matricize1(const SymTensor3& t);

/// Inverse of matricize1. Throws if the shape is not n x n^2.
SymTensor3 refold1(const Matrix& unfolded);

/**
 * Columnwise Kronecker product. Column p of the result is u_p (x)_Kron v_p
 * with the u index slow, i.e. row j + k*n_v holds U(k,p) * V(j,p). Under the
 * mode-1 unfolding above this gives (U o U o U)_(1) = U (U * U)^T.
 */
Matrix khatri_rao(const Matrix& U, const Matrix& V);

Matrix hadamard(const Matrix& a, const Matrix& b);

/// w_k = sum_{i,j} T(i,j,k) u_i v_j.
Vector contract12(const SymTensor3& t, const Vector& u, const Vector& v);

/// M(u)_{jk} = sum_i T(i,j,k) u_i.
Matrix contract1(const SymTensor3& t, const Vector& u);

/// T(u, v, w).
double contract123(const SymTensor3& t, const Vector& u, const Vector& v,
                   const Vector& w);

/**
 * Lower-bound estimate of max_{|x|=1} T(x,x,x) by higher-order power
 * iteration from `restarts` seeded random starts. For symmetric odd-order
 * tensors this is also the operator norm. The estimate never exceeds the
 * true value.
 */
double tensor_op_norm_estimate(const SymTensor3& t, int restarts,
                               std::uint64_t seed = 0x7e45u);

/**
 * Lower-bound estimate of the 2->p norm max_{|x|=1} |U^T x|_p, p in {3, 4},
 * by fixed-point ascent on the sphere. Diagnostic only.
 */
double two_to_p_norm_estimate(const Matrix& U, int p, int restarts,
                              std::uint64_t seed = 0x2b0au);

}  // namespace bmtensor
