#include "bmtensor/verifier.hpp"

#include <algorithm>
#include <sstream>

#include "bmtensor/gd_solver.hpp"
#include "bmtensor/io.hpp"
#include "bmtensor/linalg.hpp"

namespace bmtensor {

namespace {

double max_offdiag_abs(const Matrix& g) {
  double worst = 0.0;
  for (Index j = 0; j < g.cols(); ++j)
    for (Index i = 0; i < g.rows(); ++i)
      if (i != j) worst = std::max(worst, std::abs(g(i, j)));
  return worst;
}

void put(std::ostringstream& os, const char* key, double v) {
  os << key << '=' << format_double(v) << '\n';
}
void put(std::ostringstream& os, const char* key, bool v) {
  os << key << '=' << (v ? "true" : "false") << '\n';
}

}  // namespace

double default_gamma(Index n) {
  const double l = std::log(static_cast<double>(n));
  return l * l;
}

AssumptionReport check_assumptions(const GroundTruth& gt, double gamma, double c1) {
  if (!(gamma > 0.0) || !(c1 > 0.0))
    throw std::invalid_argument("check_assumptions: gamma and c1 must be positive");
  AssumptionReport rep;
  rep.n = gt.n();
  rep.r = gt.r();
  rep.gamma = gamma;
  rep.c1 = c1;
  const double n = static_cast<double>(rep.n);
  const double r = static_cast<double>(rep.r);

  const Matrix gram = gt.U_hat.transpose() * gt.U_hat;
  rep.mu_hat = max_offdiag_abs(gram);
  rep.mu_hat_bound = gamma / std::sqrt(n);
  rep.incoherence_ok = rep.mu_hat <= rep.mu_hat_bound;

  rep.mu_star = max_offdiag_abs(gt.U_star.transpose() * gt.U_star);
  rep.mu_star_bound = gt.c_bar * gt.c_bar * gamma / std::sqrt(n);
  rep.mu_star_ok = rep.mu_star <= rep.mu_star_bound;

  rep.spec_norm = spectral_norm(gt.U_hat);
  rep.spec_norm_bound = 1.0 + c1 * std::sqrt(r / n);
  rep.spectrum_ok = rep.spec_norm <= rep.spec_norm_bound;

  const Matrix dev = gram.cwiseProduct(gram) - Matrix::Identity(rep.r, rep.r);
  rep.gram_dev = spectral_norm(dev);
  rep.gram_dev_bound = gamma * std::sqrt(r) / n;
  rep.isometry_ok = rep.gram_dev <= rep.gram_dev_bound;
  return rep;
}

void check_warm_start(AssumptionReport& report, const GroundTruth& gt,
                      const FactorMatrix& U, double m, double M) {
  report.warm_dist = dist(U, gt.U_star).value;
  report.warm_radius = warm_start_radius(m, M, gt.c_under, gt.omega);
  // Relative slack absorbs the last-bit error in unit-norm column norms.
  report.warm_start_ok = *report.warm_dist <= *report.warm_radius * (1.0 + 1e-12);
}

std::string AssumptionReport::to_text() const {
  std::ostringstream os;
  os << "n=" << n << '\n' << "r=" << r << '\n';
  put(os, "gamma", gamma);
  put(os, "c1", c1);
  put(os, "mu_hat", mu_hat);
  put(os, "mu_hat_bound", mu_hat_bound);
  put(os, "incoherence_ok", incoherence_ok);
  put(os, "spec_norm", spec_norm);
  put(os, "spec_norm_bound", spec_norm_bound);
  put(os, "spectrum_ok", spectrum_ok);
  put(os, "gram_dev", gram_dev);
  put(os, "gram_dev_bound", gram_dev_bound);
  put(os, "isometry_ok", isometry_ok);
  put(os, "mu_star", mu_star);
  put(os, "mu_star_bound", mu_star_bound);
  put(os, "mu_star_ok", mu_star_ok);
  if (warm_start_ok) {
    put(os, "warm_dist", *warm_dist);
    put(os, "warm_radius", *warm_radius);
    put(os, "warm_start_ok", *warm_start_ok);
  }
  return os.str();
}

RegularityCertificate check_regularity(const FactoredObjective& obj,
                                       const GroundTruth& gt,
                                       const FactorMatrix& U, double eta) {
  RegularityCertificate cert;
  const Evaluation ev = obj.evaluate(U, true);
  const Distance d = dist(U, gt.U_star);
  const FactorMatrix h = U - apply_permutation(gt.U_star, d.perm);
  const double c2 = gt.c_under * gt.c_under;

  cert.eta = eta;
  cert.distance = d.value;
  cert.lhs = ev.gradient.cwiseProduct(h).sum();
  cert.rhs = 0.5 * eta * ev.gradient.squaredNorm() +
             0.13 * obj.m() * c2 * c2 * d.value * d.value;
  cert.margin = cert.lhs - cert.rhs;
  cert.eta_bound = adaptive_stepsize_from(ev.unfolding_norm, spectral_norm(U), obj.M());
  cert.eta_ok = eta <= cert.eta_bound;
  return cert;
}

std::string RegularityCertificate::to_text() const {
  std::ostringstream os;
  put(os, "regularity_lhs", lhs);
  put(os, "regularity_rhs", rhs);
  put(os, "regularity_margin", margin);
  put(os, "regularity_eta", eta);
  put(os, "regularity_eta_bound", eta_bound);
  put(os, "regularity_eta_ok", eta_ok);
  put(os, "regularity_dist", distance);
  return os.str();
}

SandwichCheck check_sandwich(const GroundTruth& gt, const FactorMatrix& U) {
  SandwichCheck out;
  const Distance d = dist(U, gt.U_star);
  const FactorMatrix h = U - apply_permutation(gt.U_star, d.perm);
  const double tensor_err =
      residual_norm(U, build_from_factors(gt.U_star));
  const double c2 = gt.c_under * gt.c_under;
  const double w2 = gt.omega * gt.omega;

  out.tensor_err_sq = tensor_err * tensor_err;
  out.h_sq = h.squaredNorm();
  out.lower = 1.679 * c2 * c2 * out.h_sq;
  out.upper = 10.336 * w2 * w2 * c2 * c2 * out.h_sq;
  out.lower_ok = out.lower <= out.tensor_err_sq;
  out.upper_ok = out.tensor_err_sq <= out.upper;
  if (out.h_sq > 0.0) out.ratio = out.tensor_err_sq / out.h_sq;
  out.hypothesis_ok =
      std::sqrt(out.h_sq) <= 0.07 * gt.c_under / (w2 * gt.omega) * (1.0 + 1e-12);
  return out;
}

std::string SandwichCheck::to_text() const {
  std::ostringstream os;
  put(os, "sandwich_tensor_err_sq", tensor_err_sq);
  put(os, "sandwich_h_sq", h_sq);
  put(os, "sandwich_ratio", ratio);
  put(os, "sandwich_lower_ok", lower_ok);
  put(os, "sandwich_upper_ok", upper_ok);
  put(os, "sandwich_hypothesis_ok", hypothesis_ok);
  return os.str();
}

HadamardGramCheck check_hadamard_gram_bounds(const GroundTruth& gt, double gamma) {
  const Matrix g = gt.U_star.transpose() * gt.U_star;
  const SymmetricEigen eig = jacobi_eigen(g.cwiseProduct(g));
  const double slack =
      gamma * std::sqrt(static_cast<double>(gt.r())) / static_cast<double>(gt.n());
  const double lo2 = gt.c_under * gt.c_under, hi2 = gt.c_bar * gt.c_bar;

  HadamardGramCheck out;
  out.lambda_min = eig.values(0);
  out.lambda_max = eig.values(eig.values.size() - 1);
  out.lo = lo2 * lo2 * (1.0 - slack);
  out.hi = hi2 * hi2 * (1.0 + slack);
  out.ok = out.lo <= out.lambda_min && out.lambda_max <= out.hi;
  return out;
}

InequalityCheck khatri_rao_norm_bound(const Matrix& U) {
  const double u = spectral_norm(U);
  return {spectral_norm(khatri_rao(U, U)), u * u};
}

InequalityCheck unfolding_norm_bound(const SymTensor3& q, int restarts) {
  return {tensor_op_norm_estimate(q, restarts), spectral_norm(q.unfolding())};
}

InequalityCheck trace_inner_bound(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("trace_inner_bound: shape mismatch");
  const double lhs = a.cwiseProduct(b).sum();
  const double rhs = std::min(spectral_norm(b) * a.trace(), spectral_norm(a) * b.trace());
  return {lhs, rhs};
}

}  // namespace bmtensor
