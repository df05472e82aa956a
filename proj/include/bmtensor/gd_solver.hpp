#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bmtensor/objective.hpp"

namespace bmtensor {

struct StepsizePolicy {
  enum class Kind {
    constant,  // eta0 = 1 / (21.6 M ||U0||^4), fixed for the whole run
    adaptive,  // safety / (18 ||[grad f]_(1)|| ||U|| + 9 M ||U||^4), per iterate
    fixed      // user-supplied eta
  };

  Kind kind = Kind::adaptive;
  double eta = 0.0;      // fixed only
  double safety = 1.0;   // adaptive only, in (0, 1]
  double eta_max = 1.0;  // adaptive fallback when the bound's denominator is 0

  static StepsizePolicy constant_rule() { return {Kind::constant, 0.0, 1.0, 1.0}; }
  static StepsizePolicy adaptive_rule(double safety = 1.0) {
    return {Kind::adaptive, 0.0, safety, 1.0};
  }
  static StepsizePolicy fixed_rule(double eta) { return {Kind::fixed, eta, 1.0, 1.0}; }

  void validate() const;
};

struct StopRule {
  int max_iters = 1000;
  double grad_tol = 1e-10;
  std::optional<double> dist_tol;
  double divergence_cap = 1e12;

  void validate() const;
};

enum class RunStatus { grad_converged, dist_converged, max_iters, diverged };

std::string to_string(RunStatus s);

/// Per-iterate metrics. Entry t describes U^t; stepsize[t] is the eta that
/// maps U^t to U^{t+1} (for the last entry, the eta the policy would use next).
struct RunTrace {
  std::vector<double> value;
  std::vector<double> grad_norm;
  std::vector<double> resid_norm;  // empty unless a ground truth is supplied
  std::vector<double> dist;        // empty unless a ground truth is supplied
  std::vector<double> stepsize;
  RunStatus status = RunStatus::max_iters;
  FactorMatrix final_iterate;
  std::size_t size() const { return value.size(); }
};

enum class ResidualMode { none, dense, gram };

struct TraceOptions {
  const GroundTruth* truth = nullptr;
  ResidualMode residual = ResidualMode::dense;
  bool record_distance = true;
};

/// Largest eta allowed by the per-iterate stepsize bound, times `safety`.
double adaptive_stepsize(const FactoredObjective& obj, const FactorMatrix& U,
                         double safety = 1.0, double eta_max = 1.0);

/// Same bound from an already computed ||[grad f]_(1)||.
double adaptive_stepsize_from(double unfolding_norm, double factor_norm,
                              double M, double safety = 1.0, double eta_max = 1.0);

/// 1 / (21.6 M ||U0||^4).
double constant_stepsize(double M, const FactorMatrix& U0);

/// U - eta * grad_U f.
FactorMatrix step(const FactoredObjective& obj, const FactorMatrix& U, double eta);

/// Guaranteed per-step contraction of dist^2: 1 - 0.26 eta m c_under^4.
double contraction_factor(double eta, double m, double c_under);

RunTrace run(const FactoredObjective& obj, const FactorMatrix& U0,
             const StepsizePolicy& policy, const StopRule& stop,
             const TraceOptions& trace_opts = {});

}  // namespace bmtensor
