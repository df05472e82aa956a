#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmtensor/gd_solver.hpp"

namespace bmtensor {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Settings shared by the convergence-curve and success-grid experiments.
 * An empty r_list means {n/2, n, 3n/2}.
 */
struct ExperimentConfig {
  Index n = 64;
  std::vector<Index> r_list;
  std::vector<double> alpha_list{0.5, 1, 2, 4, 8, 16};
  double figure_alpha = 0.07;
  std::vector<double> eta_list{0.02, 0.04, 0.06};
  int iters = 1000;
  int trials = 100;
  double success_tol = 1e-3;
  std::uint64_t master_seed = 2021;
  double scale = 1.0;  // f = scale * ||T - T*||_F^2
  int workers = 1;

  std::vector<Index> ranks() const;
  void validate() const;
  /// key=value lines, parseable by parse_config.
  std::string to_text() const;
};

/// Reads "key = value" lines ('#' starts a comment; lists are comma
/// separated) on top of `base`. Unknown keys and bad values throw ConfigError.
ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             ExperimentConfig base = {});

/// r independent standard-normal columns normalized to unit length.
FactorMatrix sample_sphere_factors(Index n, Index r, std::uint64_t seed);

/// r orthogonal columns (r <= n) with norms drawn uniformly from [lo, hi].
FactorMatrix sample_orthogonal_factors(Index n, Index r, double lo, double hi,
                                       std::uint64_t seed);

/// U* + alpha D with D standard normal scaled to ||D||_F = 1.
FactorMatrix perturb_init(const FactorMatrix& U_star, double alpha, std::uint64_t seed);

/// Seeds for the shared instance of each rank in the convergence experiment.
std::uint64_t figure_seed(std::uint64_t master, std::size_t r_index, int role);

/// Seed of one success-grid trial.
std::uint64_t trial_seed(std::uint64_t master, std::size_t eta_index,
                         std::size_t r_index, std::size_t alpha_index, int trial);

/// Runs fn(0..count-1) on `workers` threads; results must be written by index.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn);

struct FigureTrace {
  Index r = 0;
  double eta = 0.0;
  double eta_bound_at_start = 0.0;  // adaptive stepsize bound at U0
  double c_under = 1.0;
  double m = 1.0;
  RunTrace trace;
};

struct FigureResult {
  std::vector<FigureTrace> traces;
  /// Columns r, eta, iter, grad_norm, resid_norm, dist.
  std::string csv() const;
};

FigureResult run_figure1(const ExperimentConfig& cfg);

struct TrialOutcome {
  std::size_t eta_index = 0, r_index = 0, alpha_index = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double final_dist = 0.0;
  int iterations = 0;
  RunStatus status = RunStatus::max_iters;
  bool success = false;
  bool stepsize_within_bound = false;  // eta <= adaptive bound at U0
};

struct SuccessGrid {
  std::vector<double> etas;
  std::vector<Index> ranks;
  std::vector<double> alphas;
  int trials = 0;
  std::vector<int> successes;       // [eta][r][alpha]
  std::vector<int> within_bound;    // trials whose eta met the stepsize bound at U0

  std::size_t index(std::size_t e, std::size_t r, std::size_t a) const {
    return (e * ranks.size() + r) * alphas.size() + a;
  }
  double ratio(std::size_t e, std::size_t r, std::size_t a) const {
    return static_cast<double>(successes[index(e, r, a)]) / trials;
  }
  /// Columns eta, r, alpha, successes, trials, ratio, within_bound.
  std::string csv() const;
  /// Human-readable percentage tables, one per eta.
  std::string pretty(Index n) const;
};

struct TableResult {
  SuccessGrid grid;
  std::vector<TrialOutcome> outcomes;  // sorted by (eta, r, alpha, trial)
  std::string trials_csv() const;
};

/// One success-grid trial (exposed for tests and partial grids).
TrialOutcome run_table_trial(const ExperimentConfig& cfg, std::size_t eta_index,
                             std::size_t r_index, std::size_t alpha_index, int trial);

TableResult run_table1(const ExperimentConfig& cfg);

/// Writes `manifest.txt` recording the command, config and seed.
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::string& body);

}  // namespace bmtensor
