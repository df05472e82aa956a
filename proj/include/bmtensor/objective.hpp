#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "bmtensor/tensor.hpp"

namespace bmtensor {

/**
 * A smooth objective f on n x n x n tensors, (r, m, M)-restricted strongly
 * convex and smooth. grad_T must return a symmetric tensor of the same
 * dimension; grad_U symmetrizes defensively and reports asymmetry.
 */
struct ObjectiveSpec {
  std::function<SymTensor3(const SymTensor3&)> grad_T;
  std::function<double(const SymTensor3&)> value;
  double m = 1.0;
  double M = 1.0;
  Index r_budget = 0;

  /// Throws std::invalid_argument unless M >= m > 0 and both callbacks are set.
  void validate() const;
};

/// f(T) = scale * ||T - target||_F^2, so grad_T = 2 scale (T - target) and
/// m = M = 2 scale. scale = 1/2 gives m = M = 1.
struct QuadraticLoss {
  SymTensor3 target;
  double scale = 0.5;

  ObjectiveSpec spec(Index r_budget = 0) const;
};

/// Ground-truth factors U* with columns c_p^{1/3} * uhat_p.
struct GroundTruth {
  FactorMatrix U_star;
  Matrix U_hat;   // unit-norm columns
  Vector c_star;  // c_p = ||u*_p||^3
  double c_under = 0.0;
  double c_bar = 0.0;
  double omega = 0.0;

  Index n() const { return U_star.rows(); }
  Index r() const { return U_star.cols(); }
};

GroundTruth make_ground_truth(const FactorMatrix& U_star);

struct GradientReport {
  double asymmetry = 0.0;
  /// True when the tensor gradient was asymmetric beyond 1e-9.
  bool flagged = false;
};

/// grad_T(T) with defensive symmetrization.
SymTensor3 tensor_gradient(const ObjectiveSpec& obj, const SymTensor3& t,
                           GradientReport* report = nullptr);

/// grad_U f(U o U o U) = 3 [grad f(T)]_(1) (U * U).
FactorMatrix grad_U(const ObjectiveSpec& obj, const FactorMatrix& U,
                    GradientReport* report = nullptr);

struct Distance {
  double value = 0.0;
  /// perm[i] = j: column i of U2 P is column j of U2.
  std::vector<Index> perm;
};

/// min over column permutations P of ||U1 - U2 P||_F, solved exactly.
Distance dist(const FactorMatrix& U1, const FactorMatrix& U2);

/// U2 P for the permutation returned by dist().
FactorMatrix apply_permutation(const FactorMatrix& U2,
                               const std::vector<Index>& perm);

/// 0.07 (m/M) c_under / omega^3.
double warm_start_radius(double m, double M, double c_under, double omega);

/// Evaluation of a factored objective at one iterate.
struct Evaluation {
  double value = 0.0;
  FactorMatrix gradient;
  /// ||[grad f(T)]_(1)||; NaN unless requested.
  double unfolding_norm = std::numeric_limits<double>::quiet_NaN();
};

/// The interface gradient descent runs against: f(U o U o U) and its
/// U-gradient, plus the unfolding norm the adaptive stepsize needs.
class FactoredObjective {
 public:
  virtual ~FactoredObjective() = default;
  virtual double m() const = 0;
  virtual double M() const = 0;
  virtual Evaluation evaluate(const FactorMatrix& U,
                              bool with_unfolding_norm) const = 0;
};

/// Dense route through an arbitrary ObjectiveSpec.
class TensorObjective final : public FactoredObjective {
 public:
  explicit TensorObjective(ObjectiveSpec spec);
  double m() const override { return spec_.m; }
  double M() const override { return spec_.M; }
  Evaluation evaluate(const FactorMatrix& U,
                      bool with_unfolding_norm) const override;
  const ObjectiveSpec& spec() const { return spec_; }

 private:
  ObjectiveSpec spec_;
};

/**
 * scale * ||U o U o U - U* o U* o U*||_F^2 evaluated through r x r Gram
 * matrices in O(n r^2) per call, never forming a tensor. Algebraically
 * identical to TensorObjective on QuadraticLoss{build_from_factors(U*)}.
 */
class FactoredQuadratic final : public FactoredObjective {
 public:
  FactoredQuadratic(FactorMatrix U_star, double scale);
  double m() const override { return 2.0 * scale_; }
  double M() const override { return 2.0 * scale_; }
  Evaluation evaluate(const FactorMatrix& U,
                      bool with_unfolding_norm) const override;

 private:
  FactorMatrix U_star_;
  double scale_;
  Matrix star_gram_sq_;  // (U*^T U*) .^ 2
  double star_energy_;   // ||T*||_F^2
};

/// ||U o U o U - U* o U* o U*||_F via dense tensors.
double residual_norm(const FactorMatrix& U, const SymTensor3& target);

/// Same quantity through Gram matrices; loses accuracy below ~1e-7 relative.
double gram_residual_norm(const FactorMatrix& U, const FactorMatrix& U_star);

}  // namespace bmtensor
