#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bmtensor/experiment.hpp"

using namespace bmtensor;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n = 8;
  cfg.alpha_list = {0.5, 16};
  cfg.eta_list = {0.02};
  cfg.iters = 200;
  cfg.trials = 3;
  return cfg;
}

}  // namespace

TEST(Config, Defaults) {
  const ExperimentConfig cfg;
  EXPECT_EQ(cfg.n, 64);
  EXPECT_EQ(cfg.ranks(), (std::vector<Index>{32, 64, 96}));
  EXPECT_EQ(cfg.alpha_list, (std::vector<double>{0.5, 1, 2, 4, 8, 16}));
  EXPECT_EQ(cfg.eta_list, (std::vector<double>{0.02, 0.04, 0.06}));
  EXPECT_EQ(cfg.iters, 1000);
  EXPECT_EQ(cfg.trials, 100);
  EXPECT_EQ(cfg.success_tol, 1e-3);
  EXPECT_EQ(cfg.scale, 1.0);
  EXPECT_EQ(cfg.figure_alpha, 0.07);
}

TEST(Config, ParseAndRoundTrip) {
  std::istringstream is("# comment\nn = 16\nr_list = 4, 8\neta_list=0.01\ntrials = 5 # inline\nseed = 9\n");
  const ExperimentConfig cfg = parse_config(is);
  EXPECT_EQ(cfg.n, 16);
  EXPECT_EQ(cfg.ranks(), (std::vector<Index>{4, 8}));
  EXPECT_EQ(cfg.eta_list, std::vector<double>{0.01});
  EXPECT_EQ(cfg.trials, 5);
  EXPECT_EQ(cfg.master_seed, 9u);
  std::istringstream again(cfg.to_text());
  EXPECT_EQ(parse_config(again).to_text(), cfg.to_text());
}

TEST(Config, Errors) {
  auto parse = [](const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
  };
  EXPECT_THROW(parse("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse("n 5\n"), ConfigError);
  EXPECT_THROW(parse("n = five\n"), ConfigError);
  EXPECT_THROW(parse("trials = 0\n"), ConfigError);
  EXPECT_THROW(parse("eta_list = 0.1, -1\n"), ConfigError);
  EXPECT_THROW(parse("scale = 0\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.txt"), ConfigError);
}

TEST(Instances, SphereAndPerturbation) {
  const FactorMatrix Us = sample_sphere_factors(64, 32, 1);
  for (Index p = 0; p < 32; ++p) EXPECT_NEAR(Us.col(p).norm(), 1.0, 1e-15);
  EXPECT_EQ(perturb_init(Us, 0.0, 2), Us);
  const FactorMatrix U0 = perturb_init(Us, 0.07, 2);
  EXPECT_NEAR((U0 - Us).norm(), 0.07, 1e-15);
  EXPECT_LE(dist(U0, Us).value, 0.07 + 1e-15);
  EXPECT_EQ(sample_sphere_factors(64, 32, 1), Us);
  EXPECT_THROW(perturb_init(Us, -1.0, 2), std::invalid_argument);
}

TEST(Instances, OrthogonalFactors) {
  const FactorMatrix F = sample_orthogonal_factors(10, 5, 1.0, 2.0, 3);
  const Matrix g = F.transpose() * F;
  for (Index i = 0; i < 5; ++i) {
    EXPECT_GE(std::sqrt(g(i, i)), 1.0 - 1e-12);
    EXPECT_LE(std::sqrt(g(i, i)), 2.0 + 1e-12);
    for (Index j = 0; j < i; ++j) EXPECT_LE(std::abs(g(i, j)), 1e-12);
  }
  EXPECT_THROW(sample_orthogonal_factors(3, 4, 1.0, 2.0, 1), std::invalid_argument);
}

TEST(Seeds, TrialSeedsDistinct) {
  EXPECT_NE(trial_seed(1, 0, 0, 0, 0), trial_seed(1, 0, 0, 0, 1));
  EXPECT_NE(trial_seed(1, 0, 0, 0, 0), trial_seed(1, 1, 0, 0, 0));
  EXPECT_EQ(trial_seed(1, 2, 1, 3, 4), trial_seed(1, 2, 1, 3, 4));
  EXPECT_NE(figure_seed(1, 0, 0), figure_seed(1, 0, 1));
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 2, [](std::size_t i) {
                 if (i == 5) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(Table1, SmallGridShapeAndDeterminism) {
  ExperimentConfig cfg = small_config();
  const TableResult a = run_table1(cfg);
  cfg.workers = 3;
  const TableResult b = run_table1(cfg);
  EXPECT_EQ(a.grid.csv(), b.grid.csv());
  EXPECT_EQ(a.trials_csv(), b.trials_csv());
  EXPECT_EQ(a.outcomes.size(), 1u * 3 * 2 * 3);
  for (std::size_t e = 0; e < 1; ++e)
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t al = 0; al < 2; ++al) {
        EXPECT_GE(a.grid.ratio(e, r, al), 0.0);
        EXPECT_LE(a.grid.ratio(e, r, al), 1.0);
      }
      EXPECT_GE(a.grid.ratio(e, r, 0), a.grid.ratio(e, r, 1));
    }
  const std::string csv = a.grid.csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "eta,r,alpha,successes,trials,ratio,within_bound");
  EXPECT_NE(a.grid.pretty(8).find("r=n/2"), std::string::npos);
  const std::string trials = a.trials_csv();
  EXPECT_EQ(trials.substr(0, trials.find('\n')),
            "eta,r,alpha,trial,seed,final_dist,iterations,status,success,within_bound");
}

TEST(Figure1, SmallRunShape) {
  ExperimentConfig cfg = small_config();
  cfg.iters = 20;
  const FigureResult res = run_figure1(cfg);
  ASSERT_EQ(res.traces.size(), 3u);
  for (const auto& t : res.traces) {
    EXPECT_EQ(t.trace.size(), 21u);
    EXPECT_EQ(t.trace.dist.size(), 21u);
    EXPECT_EQ(t.trace.resid_norm.size(), 21u);
  }
  const std::string csv = res.csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "r,eta,iter,grad_norm,resid_norm,dist");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 1u + 3 * 21);
}

TEST(Manifest, Written) {
  const auto dir = std::filesystem::temp_directory_path() / "bmtensor_manifest_test";
  std::filesystem::create_directories(dir);
  write_manifest(dir, "bmtensor table1", "trials = 3\n");
  std::ifstream is(dir / "manifest.txt");
  std::stringstream ss;
  ss << is.rdbuf();
  EXPECT_NE(ss.str().find("command = bmtensor table1"), std::string::npos);
  EXPECT_NE(ss.str().find("trials = 3"), std::string::npos);
  std::filesystem::remove_all(dir);
}
