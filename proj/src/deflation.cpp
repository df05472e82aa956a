#include "bmtensor/deflation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bmtensor/assignment.hpp"
#include "bmtensor/landscape.hpp"
#include "bmtensor/linalg.hpp"
#include "bmtensor/random.hpp"

namespace bmtensor {

void SospConfig::validate() const {
  if (!(grad_tol > 0.0) || !(hess_tol > 0.0) || !(perturb_radius > 0.0) ||
      !(safety > 0.0))
    throw std::invalid_argument("SospConfig: tolerances and radius must be positive");
  if (max_restarts < 1) throw std::invalid_argument("SospConfig: max_restarts must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("SospConfig: max_iters must be >= 1");
}

double zero_threshold(const SymTensor3& t) { return 1e-6 * std::cbrt(fro_norm(t)); }

SospResult find_sosp(const SymTensor3& t, const SospConfig& cfg) {
  cfg.validate();
  const Index n = t.dim();
  SospResult best;
  best.point = Vector::Zero(n);
  const double tn = fro_norm(t);
  if (tn == 0.0) {
    best.ok = true;
    return best;
  }
  const double zthr = zero_threshold(t);
  const double unfold_norm = spectral_norm(t.unfolding());
  const double radius = std::cbrt(tn);
  // g without its constant ||T||^2 term.
  auto g_shifted = [&t](const Vector& u) {
    const double u2 = u.squaredNorm();
    return u2 * u2 * u2 - 2.0 * contract123(t, u, u, u);
  };

  best.grad_norm = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < cfg.max_restarts; ++restart) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(restart)}));
    Vector u = radius * rng.unit_vector(n);
    double gval = g_shifted(u);
    int kicks = 0;
    for (int it = 0; it < cfg.max_iters; ++it) {
      ++best.iterations;
      if (u.norm() <= zthr) {
        // The origin is second-order stationary (its Hessian vanishes).
        SospResult zero;
        zero.point = Vector::Zero(n);
        zero.ok = true;
        zero.restarts_used = restart;
        zero.iterations = best.iterations;
        return zero;
      }
      const Vector grad = g_grad(u, t);
      const double gn = grad.norm();
      if (gn < best.grad_norm) {
        best.point = u;
        best.grad_norm = gn;
        best.restarts_used = restart;
      }
      if (gn <= cfg.grad_tol) {
        const SymmetricEigen eig = jacobi_eigen(g_hess(u, t));
        if (eig.values(0) >= -cfg.hess_tol) {
          SospResult found;
          found.point = u;
          found.ok = true;
          found.grad_norm = gn;
          found.hess_min_eig = eig.values(0);
          found.restarts_used = restart;
          found.iterations = best.iterations;
          return found;
        }
        if (kicks++ >= cfg.max_perturbations) break;
        const double sign = rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
        u += (sign * cfg.perturb_radius) * eig.vectors.col(0);
        gval = g_shifted(u);
        continue;
      }
      // Local curvature bound: ||hess g(u)|| <= 30 ||u||^4 + 12 ||T_(1)|| ||u||.
      const double u2 = u.squaredNorm();
      double eta = cfg.safety / (30.0 * u2 * u2 + 12.0 * unfold_norm * std::sqrt(u2));
      Vector cand = u - eta * grad;
      double gc = g_shifted(cand);
      const double slack = 1e-14 * (std::abs(gval) + tn * tn);
      for (int h = 0; h < 60 && gc > gval + slack; ++h) {
        eta *= 0.5;
        cand = u - eta * grad;
        gc = g_shifted(cand);
      }
      u = std::move(cand);
      gval = gc;
    }
  }
  if (std::isfinite(best.grad_norm))
    best.hess_min_eig = jacobi_eigen(g_hess(best.point, t)).values(0);
  best.ok = false;
  return best;
}

SymTensor3 deflate(const SymTensor3& t, const Vector& u) {
  const double nrm = u.norm();
  if (!(nrm > 0.0)) throw std::invalid_argument("deflate: zero direction");
  if (u.size() != t.dim()) throw std::invalid_argument("deflate: dimension mismatch");
  const Vector v = u / nrm;
  const double weight = contract123(t, v, v, v);
  return t - weight * outer3(v);
}

std::string to_string(DecompositionStatus s) {
  switch (s) {
    case DecompositionStatus::complete: return "complete";
    case DecompositionStatus::incomplete: return "incomplete";
    case DecompositionStatus::failed: return "failed";
  }
  return "unknown";
}

FactorMatrix DecompositionResult::factor_matrix(Index n) const {
  FactorMatrix out(n, static_cast<Index>(factors.size()));
  for (std::size_t p = 0; p < factors.size(); ++p) out.col(static_cast<Index>(p)) = factors[p];
  return out;
}

std::vector<double> match_factor_errors(const FactorMatrix& recovered,
                                        const Matrix& truth) {
  if (recovered.cols() == 0) return {};
  if (recovered.rows() != truth.rows())
    throw std::invalid_argument("match_factor_errors: dimension mismatch");
  const Index k = recovered.cols(), r = truth.cols();
  const Index size = std::max(k, r);
  // Dummy rows/columns cost nothing, so unmatched entries never distort the match.
  Matrix cost = Matrix::Zero(size, size);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < r; ++j)
      cost(i, j) = (recovered.col(i) - truth.col(j)).squaredNorm();
  const Assignment a = solve_assignment(cost);
  std::vector<double> out(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    const Index j = a.column_of[i];
    out[i] = j < r ? (recovered.col(i) - truth.col(j)).norm()
                   : recovered.col(i).norm();
  }
  return out;
}

DecompositionResult decompose(const SymTensor3& t, const DecomposeOptions& opts) {
  if (opts.r_max < 1) throw std::invalid_argument("decompose: r_max must be >= 1");
  if (opts.zero_retries < 0) throw std::invalid_argument("decompose: zero_retries must be >= 0");
  opts.sosp.validate();
  const double input_norm = fro_norm(t);
  const double tol = opts.resid_tol.value_or(1e-8 * (1.0 + input_norm));

  DecompositionResult res;
  SymTensor3 cur = t;
  res.residual_history.push_back(input_norm);
  bool failed = false;
  for (int round = 0; round < opts.r_max; ++round) {
    if (fro_norm(cur) <= tol) break;
    std::optional<Vector> factor;
    for (int attempt = 0; attempt <= opts.zero_retries; ++attempt) {
      SospConfig cfg = opts.sosp;
      cfg.seed = derive_seed(opts.sosp.seed, {static_cast<std::uint64_t>(round),
                                              static_cast<std::uint64_t>(attempt)});
      const SospResult s = find_sosp(cur, cfg);
      if (!s.ok) continue;
      if (s.point.norm() <= zero_threshold(cur)) {
        ++res.zero_restarts;
        continue;
      }
      factor = s.point;
      break;
    }
    if (!factor) {
      failed = true;
      break;
    }
    cur = deflate(cur, *factor);
    res.factors.push_back(*factor);
    res.residual_history.push_back(fro_norm(cur));
  }
  res.residual_norm = fro_norm(cur);
  if (res.residual_norm <= tol)
    res.status = DecompositionStatus::complete;
  else
    res.status = failed ? DecompositionStatus::failed : DecompositionStatus::incomplete;
  if (opts.truth)
    res.factor_errors = match_factor_errors(res.factor_matrix(t.dim()), *opts.truth);
  return res;
}

}  // namespace bmtensor
