#include "bmtensor/gd_solver.hpp"

#include <cmath>
#include <stdexcept>

#include "bmtensor/linalg.hpp"

namespace bmtensor {

void StepsizePolicy::validate() const {
  switch (kind) {
    case Kind::fixed:
      if (!(eta > 0.0)) throw std::invalid_argument("fixed stepsize must be positive");
      break;
    case Kind::adaptive:
      if (!(safety > 0.0 && safety <= 1.0))
        throw std::invalid_argument("adaptive safety must lie in (0, 1]");
      if (!(eta_max > 0.0)) throw std::invalid_argument("eta_max must be positive");
      break;
    case Kind::constant:
      break;
  }
}

void StopRule::validate() const {
  if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (grad_tol < 0.0) throw std::invalid_argument("grad_tol must be >= 0");
  if (dist_tol && *dist_tol < 0.0) throw std::invalid_argument("dist_tol must be >= 0");
  if (!(divergence_cap > 0.0))
    throw std::invalid_argument("divergence_cap must be positive");
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::grad_converged: return "grad_converged";
    case RunStatus::dist_converged: return "dist_converged";
    case RunStatus::max_iters: return "max_iters";
    case RunStatus::diverged: return "diverged";
  }
  return "unknown";
}

double adaptive_stepsize_from(double unfolding_norm, double factor_norm,
                              double M, double safety, double eta_max) {
  const double u2 = factor_norm * factor_norm;
  const double denom = 18.0 * unfolding_norm * factor_norm + 9.0 * M * u2 * u2;
  if (!(denom > 0.0)) return eta_max;
  return safety / denom;
}

double adaptive_stepsize(const FactoredObjective& obj, const FactorMatrix& U,
                         double safety, double eta_max) {
  const Evaluation ev = obj.evaluate(U, true);
  return adaptive_stepsize_from(ev.unfolding_norm, spectral_norm(U), obj.M(),
                                safety, eta_max);
}

double constant_stepsize(double M, const FactorMatrix& U0) {
  const double nrm = spectral_norm(U0);
  if (!(nrm > 0.0)) throw std::invalid_argument("constant_stepsize: U0 is zero");
  if (!(M > 0.0)) throw std::invalid_argument("constant_stepsize: M must be positive");
  const double n2 = nrm * nrm;
  return 1.0 / (21.6 * M * n2 * n2);
}

FactorMatrix step(const FactoredObjective& obj, const FactorMatrix& U, double eta) {
  if (eta < 0.0) throw std::invalid_argument("step: eta must be nonnegative");
  if (eta == 0.0) return U;
  return U - eta * obj.evaluate(U, false).gradient;
}

double contraction_factor(double eta, double m, double c_under) {
  const double c2 = c_under * c_under;
  return 1.0 - 0.26 * eta * m * c2 * c2;
}

RunTrace run(const FactoredObjective& obj, const FactorMatrix& U0,
             const StepsizePolicy& policy, const StopRule& stop,
             const TraceOptions& trace_opts) {
  policy.validate();
  stop.validate();
  if (!U0.allFinite()) throw std::invalid_argument("run: U0 has non-finite entries");
  if (stop.dist_tol && !trace_opts.truth)
    throw std::invalid_argument("run: dist_tol requires a ground truth");

  const GroundTruth* truth = trace_opts.truth;
  SymTensor3 target;
  if (truth && trace_opts.residual == ResidualMode::dense)
    target = build_from_factors(truth->U_star);

  const bool adaptive = policy.kind == StepsizePolicy::Kind::adaptive;
  double eta_const = policy.eta;
  if (policy.kind == StepsizePolicy::Kind::constant)
    eta_const = constant_stepsize(obj.M(), U0);

  RunTrace trace;
  trace.final_iterate = U0;
  FactorMatrix U = U0;
  for (int t = 0;; ++t) {
    const Evaluation ev = obj.evaluate(U, adaptive);
    const double gnorm = ev.gradient.norm();
    if (!std::isfinite(ev.value) || !std::isfinite(gnorm) || !U.allFinite()) {
      trace.status = RunStatus::diverged;
      break;
    }
    const double eta =
        adaptive ? adaptive_stepsize_from(ev.unfolding_norm, spectral_norm(U),
                                          obj.M(), policy.safety, policy.eta_max)
                 : eta_const;

    trace.value.push_back(ev.value);
    trace.grad_norm.push_back(gnorm);
    trace.stepsize.push_back(eta);
    double d = 0.0;
    if (truth) {
      if (trace_opts.residual == ResidualMode::dense)
        trace.resid_norm.push_back(residual_norm(U, target));
      else if (trace_opts.residual == ResidualMode::gram)
        trace.resid_norm.push_back(gram_residual_norm(U, truth->U_star));
      if (trace_opts.record_distance || stop.dist_tol) {
        d = dist(U, truth->U_star).value;
        trace.dist.push_back(d);
      }
    }
    trace.final_iterate = U;

    if (ev.value > stop.divergence_cap) {
      trace.status = RunStatus::diverged;
      break;
    }
    if (gnorm <= stop.grad_tol) {
      trace.status = RunStatus::grad_converged;
      break;
    }
    if (stop.dist_tol && d <= *stop.dist_tol) {
      trace.status = RunStatus::dist_converged;
      break;
    }
    if (t >= stop.max_iters) {
      trace.status = RunStatus::max_iters;
      break;
    }
    U -= eta * ev.gradient;
  }
  return trace;
}

}  // namespace bmtensor
