#include "bmtensor/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bmtensor/assignment.hpp"
#include "bmtensor/linalg.hpp"

namespace bmtensor {

void ObjectiveSpec::validate() const {
  if (!grad_T || !value)
    throw std::invalid_argument("ObjectiveSpec: grad_T and value must be set");
  if (!(m > 0.0) || !(M >= m))
    throw std::invalid_argument("ObjectiveSpec: require M >= m > 0");
}

ObjectiveSpec QuadraticLoss::spec(Index r_budget) const {
  if (!(scale > 0.0))
    throw std::invalid_argument("QuadraticLoss: scale must be positive");
  ObjectiveSpec out;
  const SymTensor3 tgt = target;
  const double s = scale;
  out.grad_T = [tgt, s](const SymTensor3& t) { return (2.0 * s) * (t - tgt); };
  out.value = [tgt, s](const SymTensor3& t) {
    const double d = fro_norm(t - tgt);
    return s * d * d;
  };
  out.m = out.M = 2.0 * s;
  out.r_budget = r_budget;
  return out;
}

GroundTruth make_ground_truth(const FactorMatrix& U_star) {
  if (U_star.cols() == 0 || U_star.rows() == 0)
    throw std::invalid_argument("make_ground_truth: empty factor matrix");
  GroundTruth gt;
  gt.U_star = U_star;
  gt.U_hat.resize(U_star.rows(), U_star.cols());
  gt.c_star.resize(U_star.cols());
  for (Index p = 0; p < U_star.cols(); ++p) {
    const double nrm = U_star.col(p).norm();
    if (!(nrm > 0.0))
      throw std::invalid_argument("make_ground_truth: column " +
                                  std::to_string(p) + " is zero");
    gt.U_hat.col(p) = U_star.col(p) / nrm;
    gt.c_star(p) = nrm * nrm * nrm;
  }
  // c_p^{1/3} is the column norm itself; avoid the cube round trip.
  const Vector norms = U_star.colwise().norm().transpose();
  gt.c_under = norms.minCoeff();
  gt.c_bar = norms.maxCoeff();
  gt.omega = gt.c_bar / gt.c_under;
  return gt;
}

SymTensor3 tensor_gradient(const ObjectiveSpec& obj, const SymTensor3& t,
                           GradientReport* report) {
  SymTensor3 g = obj.grad_T(t);
  if (g.dim() != t.dim())
    throw std::invalid_argument("grad_T returned a tensor of wrong dimension");
  const double asym = g.max_asymmetry();
  if (asym > 0.0) g.symmetrize();
  if (report) {
    report->asymmetry = asym;
    report->flagged = asym > 1e-9;
  }
  return g;
}

FactorMatrix grad_U(const ObjectiveSpec& obj, const FactorMatrix& U,
                    GradientReport* report) {
  const SymTensor3 t = build_from_factors(U);
  const SymTensor3 g = tensor_gradient(obj, t, report);
  return 3.0 * (g.unfolding() * khatri_rao(U, U));
}

Distance dist(const FactorMatrix& U1, const FactorMatrix& U2) {
  if (U1.rows() != U2.rows() || U1.cols() != U2.cols())
    throw std::invalid_argument("dist: shape mismatch");
  const Index r = U1.cols();
  Matrix cost(r, r);
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < r; ++i) cost(i, j) = (U1.col(i) - U2.col(j)).squaredNorm();
  Distance out;
  out.perm = solve_assignment(cost).column_of;
  out.value = (U1 - apply_permutation(U2, out.perm)).norm();
  return out;
}

FactorMatrix apply_permutation(const FactorMatrix& U2,
                               const std::vector<Index>& perm) {
  if (static_cast<Index>(perm.size()) != U2.cols())
    throw std::invalid_argument("apply_permutation: size mismatch");
  FactorMatrix out(U2.rows(), U2.cols());
  for (Index i = 0; i < U2.cols(); ++i) out.col(i) = U2.col(perm[i]);
  return out;
}

double warm_start_radius(double m, double M, double c_under, double omega) {
  if (!(m > 0.0) || !(M > 0.0) || !(c_under > 0.0) || !(omega > 0.0))
    throw std::invalid_argument("warm_start_radius: inputs must be positive");
  if (M < m) throw std::invalid_argument("warm_start_radius: require M >= m");
  if (omega < 1.0) throw std::invalid_argument("warm_start_radius: require omega >= 1");
  return 0.07 * (m / M) * c_under / (omega * omega * omega);
}

TensorObjective::TensorObjective(ObjectiveSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
}

Evaluation TensorObjective::evaluate(const FactorMatrix& U,
                                     bool with_unfolding_norm) const {
  const SymTensor3 t = build_from_factors(U);
  const SymTensor3 g = tensor_gradient(spec_, t);
  Evaluation ev;
  ev.value = spec_.value(t);
  ev.gradient = 3.0 * (g.unfolding() * khatri_rao(U, U));
  if (with_unfolding_norm) ev.unfolding_norm = spectral_norm(g.unfolding());
  return ev;
}

FactoredQuadratic::FactoredQuadratic(FactorMatrix U_star, double scale)
    : U_star_(std::move(U_star)), scale_(scale) {
  if (!(scale_ > 0.0))
    throw std::invalid_argument("FactoredQuadratic: scale must be positive");
  const Matrix gs = U_star_.transpose() * U_star_;
  star_gram_sq_ = gs.cwiseProduct(gs);
  star_energy_ = star_gram_sq_.cwiseProduct(gs).sum();
}

Evaluation FactoredQuadratic::evaluate(const FactorMatrix& U,
                                       bool with_unfolding_norm) const {
  if (U.rows() != U_star_.rows())
    throw std::invalid_argument("FactoredQuadratic: dimension mismatch");
  const Matrix gram = U.transpose() * U;       // <u_p, u_q>
  const Matrix cross = U.transpose() * U_star_;  // <u_p, u*_q>
  const Matrix gram_sq = gram.cwiseProduct(gram);
  const Matrix cross_sq = cross.cwiseProduct(cross);

  Evaluation ev;
  const double energy = gram_sq.cwiseProduct(gram).sum();
  const double overlap = cross_sq.cwiseProduct(cross).sum();
  ev.value = scale_ * std::max(0.0, energy - 2.0 * overlap + star_energy_);
  ev.gradient = (6.0 * scale_) * (U * gram_sq - U_star_ * cross_sq.transpose());
  if (with_unfolding_norm) {
    // [grad f]_(1) [grad f]_(1)^T = 4 s^2 W B W^T with W = [U  U*].
    const Index r = U.cols(), rs = U_star_.cols();
    Matrix w(U.rows(), r + rs);
    w << U, U_star_;
    Matrix b(r + rs, r + rs);
    b << gram_sq, -cross_sq, -cross_sq.transpose(), star_gram_sq_;
    const Matrix outer = (4.0 * scale_ * scale_) * (w * b * w.transpose());
    ev.unfolding_norm = std::sqrt(psd_top_eigenvalue(outer).value);
  }
  return ev;
}

double residual_norm(const FactorMatrix& U, const SymTensor3& target) {
  return fro_norm(build_from_factors(U) - target);
}

double gram_residual_norm(const FactorMatrix& U, const FactorMatrix& U_star) {
  const Matrix g = U.transpose() * U;
  const Matrix c = U.transpose() * U_star;
  const Matrix gs = U_star.transpose() * U_star;
  const double sq = g.array().cube().sum() - 2.0 * c.array().cube().sum() +
                    gs.array().cube().sum();
  return std::sqrt(std::max(0.0, sq));
}

}  // namespace bmtensor
