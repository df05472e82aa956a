#include "bmtensor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bmtensor/random.hpp"

namespace bmtensor {

PowerIterationResult psd_top_eigenvalue(const Matrix& a,
                                        const PowerIterationOptions& opts) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("psd_top_eigenvalue: matrix must be square");
  if (!a.allFinite())
    throw std::invalid_argument("psd_top_eigenvalue: non-finite entries");
  PowerIterationResult res;
  const Index n = a.rows();
  if (n == 0) {
    res.converged = true;
    return res;
  }
  Rng rng(opts.seed);
  Vector x = rng.unit_vector(n);
  double lambda = x.dot(a * x);
  for (int it = 1; it <= opts.max_iters; ++it) {
    Vector y = a * x;
    const double nrm = y.norm();
    res.iterations = it;
    if (nrm == 0.0) {
      // x lies in the null space; the start was generic, so A is (numerically) zero.
      res.value = std::max(lambda, 0.0);
      res.converged = a.norm() == 0.0;
      if (!res.converged) {
        x = rng.unit_vector(n);
        continue;
      }
      return res;
    }
    x = y / nrm;
    const double next = x.dot(a * x);
    const bool done = std::abs(next - lambda) <= opts.rel_tol * std::abs(next);
    lambda = next;
    if (done) {
      res.converged = true;
      break;
    }
  }
  res.value = std::max(lambda, 0.0);
  return res;
}

PowerIterationResult matrix_spectral_norm(const Matrix& a,
                                          const PowerIterationOptions& opts) {
  if (a.size() == 0) return {0.0, 0, true};
  const Matrix gram =
      a.rows() <= a.cols() ? Matrix(a * a.transpose()) : Matrix(a.transpose() * a);
  PowerIterationResult res = psd_top_eigenvalue(gram, opts);
  res.value = std::sqrt(res.value);
  return res;
}

double spectral_norm(const Matrix& a) { return matrix_spectral_norm(a).value; }

SymmetricEigen jacobi_eigen(const Matrix& a, double tol, int max_sweeps) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("jacobi_eigen: matrix must be square");
  const Index n = a.rows();
  Matrix m = 0.5 * (a + a.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double scale = m.norm();
  auto off_norm = [&m, n] {
    double s = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (sweep < max_sweeps && off_norm() > tol * scale) {
    ++sweep;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        // Rotation zeroing m(p,q) (Golub & Van Loan, sym.schur2).
        const double tau = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (Index k = 0; k < n; ++k) {
          const double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        m(p, q) = m(q, p) = 0.0;
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&m](Index x, Index y) { return m(x, x) < m(y, y); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index q = 0; q < n; ++q) {
    out.values(q) = m(order[q], order[q]);
    out.vectors.col(q) = v.col(order[q]);
  }
  out.sweeps = sweep;
  return out;
}

}  // namespace bmtensor
