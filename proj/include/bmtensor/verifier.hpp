#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "bmtensor/objective.hpp"

namespace bmtensor {

/// Default polylog parameter gamma = ln(n)^2.
double default_gamma(Index n);

/**
 * Measured incoherence, spectrum and Gram-isometry quantities of a ground
 * truth next to the thresholds they are compared against.
 */
struct AssumptionReport {
  Index n = 0;
  Index r = 0;
  double gamma = 0.0;
  double c1 = 0.0;

  double mu_hat = 0.0;          // max_{i != j} |<uhat_i, uhat_j>|
  double mu_hat_bound = 0.0;    // gamma / sqrt(n)
  double mu_star = 0.0;         // max_{i != j} |<u*_i, u*_j>|
  double mu_star_bound = 0.0;   // c_bar^2 gamma / sqrt(n)
  double spec_norm = 0.0;       // ||Uhat||
  double spec_norm_bound = 0.0; // 1 + c1 sqrt(r/n)
  double gram_dev = 0.0;        // ||(Uhat^T Uhat).^2 - I||
  double gram_dev_bound = 0.0;  // gamma sqrt(r) / n

  bool incoherence_ok = false;
  bool spectrum_ok = false;
  bool isometry_ok = false;
  bool mu_star_ok = false;

  // Warm start, present only when an iterate was supplied.
  std::optional<double> warm_dist;
  std::optional<double> warm_radius;
  std::optional<bool> warm_start_ok;

  bool all_ok() const {
    return incoherence_ok && spectrum_ok && isometry_ok && warm_start_ok.value_or(true);
  }
  /// key=value lines.
  std::string to_text() const;
};

AssumptionReport check_assumptions(const GroundTruth& gt, double gamma, double c1);

/// Adds the warm-start check dist(U, U*) <= 0.07 (m/M) c_under / omega^3.
void check_warm_start(AssumptionReport& report, const GroundTruth& gt,
                      const FactorMatrix& U, double m, double M);

struct RegularityCertificate {
  double lhs = 0.0;      // <grad_U f, U - U* P_U>
  double rhs = 0.0;      // eta/2 ||grad_U f||^2 + 0.13 m c_under^4 dist^2
  double margin = 0.0;   // lhs - rhs
  double eta = 0.0;
  double eta_bound = 0.0;  // stepsize bound at U
  bool eta_ok = false;     // eta <= eta_bound
  double distance = 0.0;

  std::string to_text() const;
};

RegularityCertificate check_regularity(const FactoredObjective& obj,
                                       const GroundTruth& gt,
                                       const FactorMatrix& U, double eta);

struct SandwichCheck {
  double tensor_err_sq = 0.0;  // ||T - T*||_F^2
  double h_sq = 0.0;           // ||U - U* P_U||_F^2
  double lower = 0.0;          // 1.679 c_under^4 ||H||^2
  double upper = 0.0;          // 10.336 omega^4 c_under^4 ||H||^2
  bool lower_ok = false;
  bool upper_ok = false;
  double ratio = std::nan("");  // tensor_err_sq / h_sq; NaN when H = 0
  bool hypothesis_ok = false;   // ||H|| <= 0.07 c_under / omega^3

  std::string to_text() const;
};

SandwichCheck check_sandwich(const GroundTruth& gt, const FactorMatrix& U);

struct HadamardGramCheck {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double lo = 0.0;  // c_under^4 (1 - gamma sqrt(r)/n)
  double hi = 0.0;  // c_bar^4 (1 + gamma sqrt(r)/n)
  bool ok = false;
};

/// Extreme eigenvalues of (U*^T U*) .^ 2 against their isometry bounds.
HadamardGramCheck check_hadamard_gram_bounds(const GroundTruth& gt, double gamma);

/// A one-sided inequality lhs <= rhs evaluated with an absolute slack.
struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds(double slack = 1e-9) const { return lhs <= rhs + slack; }
};

/// ||U * U|| <= ||U||^2.
InequalityCheck khatri_rao_norm_bound(const Matrix& U);

/// Tensor operator-norm estimate of Q <= ||Q_(1)||.
InequalityCheck unfolding_norm_bound(const SymTensor3& q, int restarts = 8);

/// <A, B> <= min(||B|| tr A, ||A|| tr B) for PSD A, B.
InequalityCheck trace_inner_bound(const Matrix& a, const Matrix& b);

}  // namespace bmtensor
