#include "bmtensor/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bmtensor/random.hpp"

namespace bmtensor {

namespace {

void require_same_dim(const SymTensor3& a, const SymTensor3& b,
                      const char* what) {
  if (a.dim() != b.dim())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()) + ")");
}

// All index permutations of (i, j, k); duplicates are harmless.
std::array<std::array<Index, 3>, 6> permutations(Index i, Index j, Index k) {
  return {{{i, j, k}, {i, k, j}, {j, i, k}, {j, k, i}, {k, i, j}, {k, j, i}}};
}

}  // namespace

SymTensor3::SymTensor3(Index n) : n_(n) {
  if (n <= 0) throw std::invalid_argument("SymTensor3: dimension must be positive");
  data_.assign(static_cast<std::size_t>(n * n * n), 0.0);
}

SymTensor3::SymTensor3(Index n, std::vector<double> data)
    : n_(n), data_(std::move(data)) {
  if (n <= 0) throw std::invalid_argument("SymTensor3: dimension must be positive");
  if (data_.size() != static_cast<std::size_t>(n * n * n))
    throw std::invalid_argument("SymTensor3: expected " +
                                std::to_string(n * n * n) + " entries, got " +
                                std::to_string(data_.size()));
}

SymTensor3& SymTensor3::operator+=(const SymTensor3& other) {
  require_same_dim(*this, other, "operator+=");
  for (std::size_t q = 0; q < data_.size(); ++q) data_[q] += other.data_[q];
  return *this;
}

SymTensor3& SymTensor3::operator-=(const SymTensor3& other) {
  require_same_dim(*this, other, "operator-=");
  for (std::size_t q = 0; q < data_.size(); ++q) data_[q] -= other.data_[q];
  return *this;
}

SymTensor3& SymTensor3::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

double SymTensor3::max_asymmetry() const {
  double worst = 0.0;
  for (Index k = 0; k < n_; ++k)
    for (Index j = 0; j <= k; ++j)
      for (Index i = 0; i <= j; ++i) {
        const auto perms = permutations(i, j, k);
        double lo = (*this)(i, j, k), hi = lo;
        for (const auto& p : perms) {
          double v = (*this)(p[0], p[1], p[2]);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        worst = std::max(worst, hi - lo);
      }
  return worst;
}

void SymTensor3::symmetrize() {
  for (Index k = 0; k < n_; ++k)
    for (Index j = 0; j <= k; ++j)
      for (Index i = 0; i <= j; ++i) {
        const auto perms = permutations(i, j, k);
        const double first = (*this)(i, j, k);
        bool uniform = true;
        double sum = 0.0;
        for (const auto& p : perms) {
          double v = (*this)(p[0], p[1], p[2]);
          uniform = uniform && v == first;
          sum += v;
        }
        if (uniform) continue;
        const double avg = sum / 6.0;
        for (const auto& p : perms) (*this)(p[0], p[1], p[2]) = avg;
      }
}

void SymTensor3::mirror_from_sorted() {
  for (Index k = 0; k < n_; ++k)
    for (Index j = 0; j <= k; ++j)
      for (Index i = 0; i <= j; ++i) {
        const double v = (*this)(i, j, k);
        for (const auto& p : permutations(i, j, k)) (*this)(p[0], p[1], p[2]) = v;
      }
}

bool SymTensor3::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double x) { return std::isfinite(x); });
}

SymTensor3 operator+(SymTensor3 a, const SymTensor3& b) { return a += b; }
SymTensor3 operator-(SymTensor3 a, const SymTensor3& b) { return a -= b; }
SymTensor3 operator*(double s, SymTensor3 a) { return a *= s; }

SymTensor3 outer3(const Vector& u) {
  const Index n = u.size();
  if (n == 0) throw std::invalid_argument("outer3: empty vector");
  SymTensor3 t(n);
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j <= k; ++j)
      for (Index i = 0; i <= j; ++i) t(i, j, k) = u(i) * u(j) * u(k);
  t.mirror_from_sorted();
  return t;
}

SymTensor3 build_from_factors(const FactorMatrix& U) {
  const Index n = U.rows();
  if (n == 0 || U.cols() == 0)
    throw std::invalid_argument("build_from_factors: empty factor matrix");
  SymTensor3 t(n);
  Eigen::Map<Matrix> unfolded(t.data().data(), n, n * n);
  unfolded.noalias() = U * khatri_rao(U, U).transpose();
  // GEMM blocking does not produce bitwise-equal permuted entries.
  t.mirror_from_sorted();
  return t;
}

double inner(const SymTensor3& x, const SymTensor3& y) {
  require_same_dim(x, y, "inner");
  const auto a = x.data();
  const auto b = y.data();
  double s = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) s += a[q] * b[q];
  return s;
}

double fro_norm(const SymTensor3& t) { return std::sqrt(inner(t, t)); }

Matrix matricize1(const SymTensor3& t) { return t.unfolding(); }

SymTensor3 refold1(const Matrix& unfolded) {
  const Index n = unfolded.rows();
  if (n == 0 || unfolded.cols() != n * n)
    throw std::invalid_argument("refold1: expected an n x n^2 matrix");
  std::vector<double> data(unfolded.data(), unfolded.data() + unfolded.size());
  return SymTensor3(n, std::move(data));
}

Matrix khatri_rao(const Matrix& U, const Matrix& V) {
  if (U.cols() != V.cols())
    throw std::invalid_argument("khatri_rao: column count mismatch");
  const Index nu = U.rows(), nv = V.rows();
  Matrix out(nu * nv, U.cols());
  for (Index p = 0; p < U.cols(); ++p)
    for (Index k = 0; k < nu; ++k)
      out.col(p).segment(k * nv, nv) = U(k, p) * V.col(p);
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("hadamard: shape mismatch");
  return a.cwiseProduct(b);
}

Matrix contract1(const SymTensor3& t, const Vector& u) {
  const Index n = t.dim();
  if (u.size() != n) throw std::invalid_argument("contract1: dimension mismatch");
  Vector flat = t.unfolding().transpose() * u;
  return Eigen::Map<const Matrix>(flat.data(), n, n);
}

Vector contract12(const SymTensor3& t, const Vector& u, const Vector& v) {
  if (v.size() != t.dim())
    throw std::invalid_argument("contract12: dimension mismatch");
  return contract1(t, u).transpose() * v;
}

double contract123(const SymTensor3& t, const Vector& u, const Vector& v,
                   const Vector& w) {
  if (w.size() != t.dim())
    throw std::invalid_argument("contract123: dimension mismatch");
  return contract12(t, u, v).dot(w);
}

double tensor_op_norm_estimate(const SymTensor3& t, int restarts,
                               std::uint64_t seed) {
  if (restarts < 1)
    throw std::invalid_argument("tensor_op_norm_estimate: restarts must be >= 1");
  const Index n = t.dim();
  Rng rng(seed);
  double best = 0.0;
  for (int s = 0; s < restarts; ++s) {
    Vector x = rng.unit_vector(n);
    double prev = std::abs(contract123(t, x, x, x));
    best = std::max(best, prev);
    for (int it = 0; it < 2000; ++it) {
      Vector y = contract12(t, x, x);
      const double nrm = y.norm();
      if (nrm == 0.0) break;
      x = y / nrm;
      const double val = std::abs(contract123(t, x, x, x));
      best = std::max(best, val);
      if (std::abs(val - prev) <= 1e-15 * std::max(1.0, val)) break;
      prev = val;
    }
  }
  return best;
}

double two_to_p_norm_estimate(const Matrix& U, int p, int restarts,
                              std::uint64_t seed) {
  if (p != 3 && p != 4)
    throw std::invalid_argument("two_to_p_norm_estimate: p must be 3 or 4");
  if (restarts < 1)
    throw std::invalid_argument("two_to_p_norm_estimate: restarts must be >= 1");
  const double pd = static_cast<double>(p);
  auto pnorm = [pd](const Vector& y) {
    return std::pow(y.array().abs().pow(pd).sum(), 1.0 / pd);
  };
  Rng rng(seed);
  double best = 0.0;
  for (int s = 0; s < restarts; ++s) {
    Vector x = rng.unit_vector(U.rows());
    double prev = pnorm(U.transpose() * x);
    best = std::max(best, prev);
    for (int it = 0; it < 2000; ++it) {
      Vector y = U.transpose() * x;
      Vector w = y.array().sign() * y.array().abs().pow(pd - 1.0);
      Vector g = U * w;
      const double nrm = g.norm();
      if (nrm == 0.0) break;
      x = g / nrm;
      const double val = pnorm(U.transpose() * x);
      best = std::max(best, val);
      if (std::abs(val - prev) <= 1e-15 * std::max(1.0, val)) break;
      prev = val;
    }
  }
  return best;
}

}  // namespace bmtensor
