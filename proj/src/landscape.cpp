#include "bmtensor/landscape.hpp"

#include <cmath>
#include <sstream>

#include "bmtensor/linalg.hpp"

namespace bmtensor {

OrthogonalTarget OrthogonalTarget::from_factors(const Matrix& factors) {
  if (factors.cols() == 0 || factors.rows() == 0)
    throw std::invalid_argument("OrthogonalTarget: empty factor matrix");
  OrthogonalTarget out;
  out.factors = factors;
  out.lambdas.resize(factors.cols());
  out.basis.resize(factors.rows(), factors.cols());
  for (Index i = 0; i < factors.cols(); ++i) {
    const double nrm = factors.col(i).norm();
    if (!(nrm > 0.0))
      throw std::invalid_argument("OrthogonalTarget: zero factor " + std::to_string(i));
    out.basis.col(i) = factors.col(i) / nrm;
    out.lambdas(i) = nrm * nrm * nrm;
  }
  const Matrix gram = out.basis.transpose() * out.basis;
  for (Index j = 0; j < gram.cols(); ++j)
    for (Index i = 0; i < j; ++i)
      if (std::abs(gram(i, j)) > 1e-10)
        throw std::invalid_argument("OrthogonalTarget: factors " + std::to_string(i) +
                                    " and " + std::to_string(j) + " are not orthogonal");
  out.tensor = build_from_factors(factors);
  return out;
}

double g_value(const Vector& u, const SymTensor3& t) {
  const double u2 = u.squaredNorm();
  const double tn = fro_norm(t);
  return u2 * u2 * u2 - 2.0 * contract12(t, u, u).dot(u) + tn * tn;
}

Vector g_grad(const Vector& u, const SymTensor3& t) {
  const double u2 = u.squaredNorm();
  return 6.0 * u2 * u2 * u - 6.0 * contract12(t, u, u);
}

Matrix g_hess(const Vector& u, const SymTensor3& t) {
  const Index n = u.size();
  const double u2 = u.squaredNorm();
  Matrix h = (6.0 * u2 * u2) * Matrix::Identity(n, n) + (24.0 * u2) * (u * u.transpose());
  h -= 12.0 * contract1(t, u);
  return h;
}

double third_directional(const Vector& u, const SymTensor3& t, const Vector& d) {
  // ||u + t d||^2 = a + 2 b t + c t^2; the t^3 coefficient of its cube is
  // 8 b^3 + 12 a b c.
  const double a = u.squaredNorm(), b = u.dot(d), c = d.squaredNorm();
  return 48.0 * b * b * b + 72.0 * a * b * c - 12.0 * contract123(t, d, d, d);
}

std::string to_string(PointClass c) {
  switch (c) {
    case PointClass::third_order_saddle: return "third_order_saddle";
    case PointClass::strict_local_min: return "strict_local_min";
    case PointClass::strict_saddle: return "strict_saddle";
  }
  return "unknown";
}

double critical_tolerance(const Vector& u, double tol) {
  const double nrm = u.norm();
  return tol * (1.0 + std::pow(nrm, 5.0));
}

CriticalPoint classify(const Vector& point, const OrthogonalTarget& target) {
  if (point.size() != target.n())
    throw std::invalid_argument("classify: dimension mismatch");
  CriticalPoint cp;
  cp.point = point;
  cp.coefficients = target.basis.transpose() * point;
  const double scale = 1.0 + point.norm();
  for (Index i = 0; i < cp.coefficients.size(); ++i)
    if (std::abs(cp.coefficients(i)) > 1e-9 * scale) cp.support.push_back(i);

  cp.grad_norm = g_grad(point, target.tensor).norm();
  if (cp.grad_norm > critical_tolerance(point, 1e-6)) {
    std::ostringstream os;
    os << "classify: not a critical point (|grad g| = " << cp.grad_norm << ")";
    throw ClassificationError(os.str());
  }

  const Matrix hess = g_hess(point, target.tensor);
  if (point.norm() == 0.0) {
    if (hess.norm() > 1e-9)
      throw ClassificationError("classify: nonzero Hessian at the origin");
    double best = 0.0;
    for (Index i = 0; i < target.r(); ++i)
      best = std::max(best, std::abs(third_directional(point, target.tensor,
                                                       target.basis.col(i))));
    if (!(best > 0.0))
      throw ClassificationError("classify: no third-order witness at the origin");
    cp.klass = PointClass::third_order_saddle;
    cp.hess_min_eig = 0.0;
    return cp;
  }

  cp.hess_min_eig = jacobi_eigen(hess).values(0);
  if (cp.hess_min_eig > 1e-9) {
    cp.klass = PointClass::strict_local_min;
  } else if (cp.hess_min_eig < -1e-9) {
    cp.klass = PointClass::strict_saddle;
  } else {
    std::ostringstream os;
    os << "classify: ambiguous Hessian spectrum (lambda_min = " << cp.hess_min_eig << ")";
    throw ClassificationError(os.str());
  }
  return cp;
}

std::vector<CriticalPoint> enumerate_critical_points(const OrthogonalTarget& target,
                                                     Index max_support) {
  const Index r = target.r();
  if (max_support < 0 || max_support > r)
    throw std::invalid_argument("enumerate_critical_points: max_support must lie in [0, r]");
  if (r > 20)
    throw std::invalid_argument("enumerate_critical_points: r > 20 is not supported");

  std::vector<CriticalPoint> out;
  std::vector<Index> subset;
  for (Index size = 0; size <= max_support; ++size) {
    subset.resize(static_cast<std::size_t>(size));
    for (Index q = 0; q < size; ++q) subset[q] = q;
    while (true) {
      Vector point = Vector::Zero(target.n());
      if (size > 0) {
        double inv_sq = 0.0;
        for (Index i : subset) inv_sq += 1.0 / (target.lambdas(i) * target.lambdas(i));
        const double s = std::cbrt(std::sqrt(1.0 / inv_sq));  // s^6 = 1 / inv_sq
        const double s4 = s * s * s * s;
        for (Index i : subset) point += (s4 / target.lambdas(i)) * target.basis.col(i);
      }
      CriticalPoint cp = classify(point, target);
      // Pin the support to the enumerated set rather than a thresholded read-back.
      cp.support.assign(subset.begin(), subset.end());
      out.push_back(std::move(cp));

      // Advance to the next size-`size` subset in lexicographic order.
      Index q = size - 1;
      while (q >= 0 && subset[q] == r - size + q) --q;
      if (q < 0) break;
      ++subset[q];
      for (Index k = q + 1; k < size; ++k) subset[k] = subset[k - 1] + 1;
    }
  }
  return out;
}

}  // namespace bmtensor
