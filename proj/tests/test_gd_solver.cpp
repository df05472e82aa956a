#include <gtest/gtest.h>

#include <cmath>

#include "bmtensor/experiment.hpp"
#include "bmtensor/gd_solver.hpp"
#include "bmtensor/linalg.hpp"
#include "bmtensor/random.hpp"
#include "test_support.hpp"

using namespace bmtensor;

namespace {

// A factored objective with prescribed m, M and no tensor behind it, for
// testing stepsize arithmetic in isolation.
class FixedObjective final : public FactoredObjective {
 public:
  FixedObjective(double M, double unfold_norm, Matrix grad)
      : M_(M), unfold_(unfold_norm), grad_(std::move(grad)) {}
  double m() const override { return M_; }
  double M() const override { return M_; }
  Evaluation evaluate(const FactorMatrix&, bool with_unfolding_norm) const override {
    Evaluation e;
    e.value = 0.0;
    e.gradient = grad_;
    if (with_unfolding_norm) e.unfolding_norm = unfold_;
    return e;
  }

 private:
  double M_, unfold_;
  Matrix grad_;
};

}  // namespace

TEST(AdaptiveStepsize, GradientFreeTerm) {
  // U = U*, M = 1, ||U*|| = 1.
  const Matrix Us = Matrix::Identity(3, 2);
  const FactoredQuadratic obj(Us, 0.5);
  EXPECT_NEAR(adaptive_stepsize(obj, Us), 1.0 / 9.0, 1e-12);
  EXPECT_NEAR(adaptive_stepsize(obj, Us, 0.5), 0.5 / 9.0, 1e-12);
}

TEST(AdaptiveStepsize, FormulaArithmetic) {
  EXPECT_DOUBLE_EQ(adaptive_stepsize_from(1.0, 1.0, 1.0), 1.0 / 27.0);
  EXPECT_DOUBLE_EQ(adaptive_stepsize_from(1.0, 1.0, 1.0, 0.5), 0.5 / 27.0);
  const FixedObjective obj(1.0, 1.0, Matrix::Zero(2, 1));
  EXPECT_NEAR(adaptive_stepsize(obj, Matrix::Identity(2, 1)), 1.0 / 27.0, 1e-12);
}

TEST(AdaptiveStepsize, ZeroDenominatorGivesEtaMax) {
  EXPECT_EQ(adaptive_stepsize_from(0.0, 0.0, 1.0, 1.0, 0.25), 0.25);
  const FactoredQuadratic obj(Matrix::Identity(2, 1), 0.5);
  EXPECT_EQ(adaptive_stepsize(obj, Matrix::Zero(2, 1), 1.0, 0.3), 0.3);
}

TEST(ConstantStepsize, Examples) {
  const Matrix U1 = Matrix::Identity(3, 2);
  EXPECT_NEAR(constant_stepsize(1.0, U1), 1.0 / 21.6, 1e-12);
  EXPECT_NEAR(constant_stepsize(2.0, U1), 0.5 / 21.6, 1e-12);
  EXPECT_NEAR(constant_stepsize(1.0, 2.0 * U1), 1.0 / 345.6, 1e-12);
  EXPECT_THROW(constant_stepsize(1.0, Matrix::Zero(3, 2)), std::invalid_argument);
}

TEST(ContractionFactor, Examples) {
  EXPECT_EQ(contraction_factor(0.0, 3.0, 1.0), 1.0);
  EXPECT_NEAR(contraction_factor(1.0 / 21.6, 1.0, 1.0), 1.0 - 0.26 / 21.6, 1e-15);
  EXPECT_NEAR(contraction_factor(1.0 / 21.6, 1.0, 1.0), 0.98796, 1e-5);
  EXPECT_NEAR(contraction_factor(0.02, 1.0, 1.0), 0.9948, 1e-15);
}

TEST(Step, Examples) {
  Rng rng(1);
  const Matrix Us = rng.gaussian_matrix(4, 2);
  const FactoredQuadratic obj(Us, 0.5);
  EXPECT_EQ(step(obj, Us, 0.1), Us);
  const Matrix U = Us + 0.1 * rng.gaussian_matrix(4, 2);
  EXPECT_EQ(step(obj, U, 0.0), U);
  EXPECT_THROW(step(obj, U, -1.0), std::invalid_argument);
}

TEST(Step, ConstantStepDecreasesDistance) {
  const FactorMatrix Us = sample_sphere_factors(8, 4, 11);
  const GroundTruth gt = make_ground_truth(Us);
  const FactoredQuadratic obj(Us, 0.5);
  const double radius = warm_start_radius(obj.m(), obj.M(), gt.c_under, gt.omega);
  const FactorMatrix U0 = perturb_init(Us, 0.05 * radius, 12);
  const double eta = constant_stepsize(obj.M(), U0);
  EXPECT_LT(dist(step(obj, U0, eta), Us).value, dist(U0, Us).value);
}

TEST(Policy, Validation) {
  EXPECT_THROW(StepsizePolicy::fixed_rule(0.0).validate(), std::invalid_argument);
  EXPECT_THROW(StepsizePolicy::adaptive_rule(1.5).validate(), std::invalid_argument);
  EXPECT_THROW(StepsizePolicy::adaptive_rule(0.0).validate(), std::invalid_argument);
  EXPECT_NO_THROW(StepsizePolicy::constant_rule().validate());
  StopRule stop;
  stop.max_iters = -1;
  EXPECT_THROW(stop.validate(), std::invalid_argument);
  stop = {};
  stop.grad_tol = -1.0;
  EXPECT_THROW(stop.validate(), std::invalid_argument);
}

TEST(Run, StartAtMinimizer) {
  const FactorMatrix Us = sample_sphere_factors(6, 3, 2);
  const FactoredQuadratic obj(Us, 0.5);
  const RunTrace tr = run(obj, Us, StepsizePolicy::adaptive_rule(), {});
  EXPECT_EQ(tr.status, RunStatus::grad_converged);
  EXPECT_EQ(tr.size(), 1u);
}

TEST(Run, ZeroIterationsRecordsStartOnly) {
  const FactorMatrix Us = sample_sphere_factors(6, 3, 2);
  const GroundTruth gt = make_ground_truth(Us);
  const FactoredQuadratic obj(Us, 0.5);
  const FactorMatrix U0 = perturb_init(Us, 0.05, 3);
  StopRule stop;
  stop.max_iters = 0;
  TraceOptions opts;
  opts.truth = &gt;
  const RunTrace tr = run(obj, U0, StepsizePolicy::fixed_rule(0.01), stop, opts);
  EXPECT_EQ(tr.status, RunStatus::max_iters);
  ASSERT_EQ(tr.size(), 1u);
  EXPECT_EQ(tr.final_iterate, U0);
  EXPECT_NEAR(tr.dist[0], dist(U0, Us).value, 0.0);
  EXPECT_EQ(tr.resid_norm.size(), 1u);
}

TEST(Run, TraceLengthsConsistent) {
  const FactorMatrix Us = sample_sphere_factors(6, 3, 4);
  const GroundTruth gt = make_ground_truth(Us);
  const FactoredQuadratic obj(Us, 0.5);
  StopRule stop;
  stop.max_iters = 25;
  TraceOptions opts;
  opts.truth = &gt;
  opts.residual = ResidualMode::gram;
  const RunTrace tr = run(obj, perturb_init(Us, 0.05, 5), StepsizePolicy::adaptive_rule(), stop, opts);
  EXPECT_EQ(tr.size(), 26u);
  EXPECT_EQ(tr.grad_norm.size(), tr.size());
  EXPECT_EQ(tr.resid_norm.size(), tr.size());
  EXPECT_EQ(tr.dist.size(), tr.size());
  EXPECT_EQ(tr.stepsize.size(), tr.size());
  for (double x : tr.value) EXPECT_TRUE(std::isfinite(x));
}

TEST(Run, DistToleranceStops) {
  const FactorMatrix Us = sample_sphere_factors(6, 3, 6);
  const GroundTruth gt = make_ground_truth(Us);
  const FactoredQuadratic obj(Us, 0.5);
  StopRule stop;
  stop.max_iters = 100000;
  stop.dist_tol = 1e-3;
  TraceOptions opts;
  opts.truth = &gt;
  const RunTrace tr = run(obj, perturb_init(Us, 0.05, 7), StepsizePolicy::adaptive_rule(), stop, opts);
  EXPECT_EQ(tr.status, RunStatus::dist_converged);
  EXPECT_LE(tr.dist.back(), 1e-3);
  StopRule no_truth = stop;
  EXPECT_THROW(run(obj, Us, StepsizePolicy::adaptive_rule(), no_truth, {}), std::invalid_argument);
}

TEST(Run, HugeStepDiverges) {
  const FactorMatrix Us = sample_sphere_factors(6, 3, 8);
  const FactoredQuadratic obj(Us, 1.0);
  const RunTrace tr = run(obj, perturb_init(Us, 3.0, 9), StepsizePolicy::fixed_rule(5.0), {});
  EXPECT_EQ(tr.status, RunStatus::diverged);
  for (double x : tr.value) EXPECT_TRUE(std::isfinite(x));
}

TEST(Run, Deterministic) {
  const FactorMatrix Us = sample_sphere_factors(10, 5, 10);
  const GroundTruth gt = make_ground_truth(Us);
  const FactoredQuadratic obj(Us, 1.0);
  StopRule stop;
  stop.max_iters = 50;
  TraceOptions opts;
  opts.truth = &gt;
  const FactorMatrix U0 = perturb_init(Us, 0.1, 11);
  const RunTrace a = run(obj, U0, StepsizePolicy::adaptive_rule(), stop, opts);
  const RunTrace b = run(obj, U0, StepsizePolicy::adaptive_rule(), stop, opts);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.dist, b.dist);
  EXPECT_EQ(a.final_iterate, b.final_iterate);
}

TEST(Run, ContractionAndDescentInsideWarmBall) {
  // Per-step dist^2 contraction and monotone descent for both stepsize rules.
  const FactorMatrix Us = sample_sphere_factors(64, 32, 21);
  const GroundTruth gt = make_ground_truth(Us);
  const FactoredQuadratic obj(Us, 0.5);
  const FactorMatrix U0 = perturb_init(Us, 0.07, 22);
  for (const StepsizePolicy& policy :
       {StepsizePolicy::adaptive_rule(), StepsizePolicy::constant_rule()}) {
    StopRule stop;
    stop.max_iters = 200;
    TraceOptions opts;
    opts.truth = &gt;
    opts.residual = ResidualMode::none;
    const RunTrace tr = run(obj, U0, policy, stop, opts);
    for (std::size_t t = 0; t + 1 < tr.size(); ++t) {
      const double rho = contraction_factor(tr.stepsize[t], obj.m(), gt.c_under);
      EXPECT_LE(tr.dist[t + 1] * tr.dist[t + 1], rho * tr.dist[t] * tr.dist[t] + 1e-9);
      EXPECT_LE(tr.value[t + 1], tr.value[t] * (1.0 + 1e-12));
    }
  }
}

TEST(Run, SuccessAndFailureAtDimension64) {
  ExperimentConfig cfg;
  cfg.alpha_list = {0.07, 16.0};
  cfg.eta_list = {0.02};
  cfg.trials = 1;
  const TrialOutcome ok = run_table_trial(cfg, 0, 0, 0, 0);
  EXPECT_TRUE(ok.success) << ok.final_dist;
  EXPECT_LE(ok.final_dist, 1e-3);
  const TrialOutcome bad = run_table_trial(cfg, 0, 2, 1, 0);
  EXPECT_FALSE(bad.success);
  EXPECT_GT(bad.final_dist, 1e-3);
}
