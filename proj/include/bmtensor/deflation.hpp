#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bmtensor/tensor.hpp"

namespace bmtensor {

/// Second-order stationary point search on g(u) = ||u^{(x)3} - T||_F^2:
/// gradient descent, negative-curvature kicks at stalls, seeded restarts.
struct SospConfig {
  double grad_tol = 1e-9;
  double hess_tol = 1e-7;        // accept when lambda_min(hess g) >= -hess_tol
  double perturb_radius = 1e-3;
  int max_restarts = 10;
  int max_iters = 20000;         // gradient steps per restart
  int max_perturbations = 50;    // negative-curvature kicks per restart
  double safety = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SospResult {
  Vector point;
  bool ok = false;
  double grad_norm = 0.0;
  double hess_min_eig = 0.0;
  int restarts_used = 0;
  int iterations = 0;
};

/// ||u|| at or below this is treated as the origin: 1e-6 ||T||_F^{1/3}.
double zero_threshold(const SymTensor3& t);

SospResult find_sosp(const SymTensor3& t, const SospConfig& cfg);

/// T - <T, v^{(x)3}> v^{(x)3} with v = u / ||u||.
SymTensor3 deflate(const SymTensor3& t, const Vector& u);

enum class DecompositionStatus { complete, incomplete, failed };

std::string to_string(DecompositionStatus s);

struct DecompositionResult {
  std::vector<Vector> factors;            // in discovery order
  std::vector<double> residual_history;   // ||T||_F before round 0 and after each deflation
  double residual_norm = 0.0;
  std::vector<double> factor_errors;      // vs. ground truth, when supplied
  DecompositionStatus status = DecompositionStatus::incomplete;
  int zero_restarts = 0;

  FactorMatrix factor_matrix(Index n) const;
};

struct DecomposeOptions {
  SospConfig sosp;
  int r_max = 1;
  /// Residual tolerance; defaults to 1e-8 (1 + ||T_input||_F).
  std::optional<double> resid_tol;
  /// Fresh find_sosp attempts per round after landing on the origin.
  int zero_retries = 20;
  /// Optional ground truth (n x r) for per-factor error reporting.
  const Matrix* truth = nullptr;
};

DecompositionResult decompose(const SymTensor3& t, const DecomposeOptions& opts);

/// Per-recovered-factor distance to its matched true factor, using an
/// optimal assignment; recovered columns may be fewer than true ones.
std::vector<double> match_factor_errors(const FactorMatrix& recovered,
                                        const Matrix& truth);

}  // namespace bmtensor
