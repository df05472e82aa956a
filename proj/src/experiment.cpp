#include "bmtensor/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/QR>

#include "bmtensor/io.hpp"
#include "bmtensor/random.hpp"

namespace bmtensor {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const std::string t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::istringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(parse_number<T>(key, cell));
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ',';
    if constexpr (std::is_floating_point_v<T>)
      os << format_double(xs[i]);
    else
      os << xs[i];
  }
  return os.str();
}

}  // namespace

std::vector<Index> ExperimentConfig::ranks() const {
  if (!r_list.empty()) return r_list;
  return {n / 2, n, 3 * n / 2};
}

void ExperimentConfig::validate() const {
  if (n < 1) throw ConfigError("n must be positive");
  for (Index r : ranks())
    if (r < 1) throw ConfigError("ranks must be positive");
  if (alpha_list.empty() || eta_list.empty()) throw ConfigError("lists must be nonempty");
  for (double a : alpha_list)
    if (!(a >= 0.0)) throw ConfigError("alpha values must be nonnegative");
  for (double e : eta_list)
    if (!(e > 0.0)) throw ConfigError("eta values must be positive");
  if (!(figure_alpha >= 0.0)) throw ConfigError("figure_alpha must be nonnegative");
  if (iters < 1 || trials < 1 || workers < 1)
    throw ConfigError("iters, trials and workers must be positive");
  if (!(success_tol > 0.0)) throw ConfigError("success_tol must be positive");
  if (!(scale > 0.0)) throw ConfigError("scale must be positive");
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  os << "n = " << n << '\n'
     << "r_list = " << join(ranks()) << '\n'
     << "alpha_list = " << join(alpha_list) << '\n'
     << "figure_alpha = " << format_double(figure_alpha) << '\n'
     << "eta_list = " << join(eta_list) << '\n'
     << "iters = " << iters << '\n'
     << "trials = " << trials << '\n'
     << "success_tol = " << format_double(success_tol) << '\n'
     << "master_seed = " << master_seed << '\n'
     << "scale = " << format_double(scale) << '\n'
     << "workers = " << workers << '\n';
  return os.str();
}

ExperimentConfig parse_config(std::istream& is, ExperimentConfig cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "n") cfg.n = parse_number<Index>(key, val);
    else if (key == "r_list") cfg.r_list = parse_list<Index>(key, val);
    else if (key == "alpha_list") cfg.alpha_list = parse_list<double>(key, val);
    else if (key == "figure_alpha") cfg.figure_alpha = parse_number<double>(key, val);
    else if (key == "eta_list") cfg.eta_list = parse_list<double>(key, val);
    else if (key == "iters") cfg.iters = parse_number<int>(key, val);
    else if (key == "trials") cfg.trials = parse_number<int>(key, val);
    else if (key == "success_tol") cfg.success_tol = parse_number<double>(key, val);
    else if (key == "master_seed" || key == "seed")
      cfg.master_seed = parse_number<std::uint64_t>(key, val);
    else if (key == "scale") cfg.scale = parse_number<double>(key, val);
    else if (key == "workers") cfg.workers = parse_number<int>(key, val);
    else
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  return parse_config(is, std::move(base));
}

FactorMatrix sample_sphere_factors(Index n, Index r, std::uint64_t seed) {
  if (n < 1 || r < 1) throw std::invalid_argument("sample_sphere_factors: n, r must be >= 1");
  Rng rng(seed);
  FactorMatrix U(n, r);
  for (Index p = 0; p < r; ++p) U.col(p) = rng.unit_vector(n);
  return U;
}

FactorMatrix sample_orthogonal_factors(Index n, Index r, double lo, double hi,
                                       std::uint64_t seed) {
  if (n < 1 || r < 1 || r > n)
    throw std::invalid_argument("sample_orthogonal_factors: need 1 <= r <= n");
  if (!(lo > 0.0) || !(hi >= lo))
    throw std::invalid_argument("sample_orthogonal_factors: need 0 < lo <= hi");
  Rng rng(seed);
  const Matrix g = rng.gaussian_matrix(n, r);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(n, r);
  FactorMatrix out(n, r);
  for (Index p = 0; p < r; ++p) out.col(p) = rng.uniform(lo, hi) * q.col(p);
  return out;
}

FactorMatrix perturb_init(const FactorMatrix& U_star, double alpha, std::uint64_t seed) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("perturb_init: alpha must be >= 0");
  if (alpha == 0.0) return U_star;
  Rng rng(seed);
  Matrix d = rng.gaussian_matrix(U_star.rows(), U_star.cols());
  d /= d.norm();
  return U_star + alpha * d;
}

std::uint64_t figure_seed(std::uint64_t master, std::size_t r_index, int role) {
  return derive_seed(master, {0xF16u, r_index, static_cast<std::uint64_t>(role)});
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t eta_index,
                         std::size_t r_index, std::size_t alpha_index, int trial) {
  return derive_seed(master, {eta_index, r_index, alpha_index,
                              static_cast<std::uint64_t>(trial)});
}

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t nthreads =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < nthreads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string FigureResult::csv() const {
  std::ostringstream os;
  os << "r,eta,iter,grad_norm,resid_norm,dist\n";
  for (const auto& ft : traces) {
    const RunTrace& t = ft.trace;
    for (std::size_t i = 0; i < t.size(); ++i)
      os << ft.r << ',' << format_double(ft.eta) << ',' << i << ','
         << format_double(t.grad_norm[i]) << ',' << format_double(t.resid_norm[i]) << ','
         << format_double(t.dist[i]) << '\n';
  }
  return os.str();
}

FigureResult run_figure1(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto ranks = cfg.ranks();
  FigureResult out;
  out.traces.resize(ranks.size() * cfg.eta_list.size());
  parallel_for(out.traces.size(), cfg.workers, [&](std::size_t job) {
    const std::size_t ri = job / cfg.eta_list.size();
    const std::size_t ei = job % cfg.eta_list.size();
    const FactorMatrix U_star =
        sample_sphere_factors(cfg.n, ranks[ri], figure_seed(cfg.master_seed, ri, 0));
    const FactorMatrix U0 =
        perturb_init(U_star, cfg.figure_alpha, figure_seed(cfg.master_seed, ri, 1));
    const GroundTruth gt = make_ground_truth(U_star);
    const TensorObjective obj(QuadraticLoss{build_from_factors(U_star), cfg.scale}.spec(ranks[ri]));

    StopRule stop;
    stop.max_iters = cfg.iters;
    stop.grad_tol = 0.0;  // fixed-length traces
    TraceOptions opts;
    opts.truth = &gt;
    opts.residual = ResidualMode::dense;

    FigureTrace& ft = out.traces[job];
    ft.r = ranks[ri];
    ft.eta = cfg.eta_list[ei];
    ft.eta_bound_at_start = adaptive_stepsize(obj, U0);
    ft.c_under = gt.c_under;
    ft.m = obj.m();
    ft.trace = run(obj, U0, StepsizePolicy::fixed_rule(ft.eta), stop, opts);
  });
  return out;
}

std::string SuccessGrid::csv() const {
  std::ostringstream os;
  os << "eta,r,alpha,successes,trials,ratio,within_bound\n";
  for (std::size_t e = 0; e < etas.size(); ++e)
    for (std::size_t r = 0; r < ranks.size(); ++r)
      for (std::size_t a = 0; a < alphas.size(); ++a)
        os << format_double(etas[e]) << ',' << ranks[r] << ',' << format_double(alphas[a])
           << ',' << successes[index(e, r, a)] << ',' << trials << ','
           << format_double(ratio(e, r, a)) << ',' << within_bound[index(e, r, a)] << '\n';
  return os.str();
}

std::string SuccessGrid::pretty(Index n) const {
  std::ostringstream os;
  for (std::size_t e = 0; e < etas.size(); ++e) {
    os << "success ratio, eta = " << format_double(etas[e]) << " (" << trials
       << " trials/cell)\n";
    os << std::setw(10) << "alpha";
    for (double a : alphas) os << std::setw(8) << format_double(a);
    os << '\n';
    for (std::size_t r = 0; r < ranks.size(); ++r) {
      std::ostringstream label;
      label << "r=" << ranks[r];
      if (ranks[r] * 2 == n) label.str("r=n/2");
      else if (ranks[r] == n) label.str("r=n");
      else if (ranks[r] * 2 == 3 * n) label.str("r=3n/2");
      os << std::setw(10) << label.str();
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        std::ostringstream cell;
        cell << std::lround(100.0 * ratio(e, r, a)) << '%';
        os << std::setw(8) << cell.str();
      }
      os << '\n';
    }
    os << '\n';
  }
  return os.str();
}

std::string TableResult::trials_csv() const {
  std::ostringstream os;
  os << "eta,r,alpha,trial,seed,final_dist,iterations,status,success,within_bound\n";
  for (const auto& t : outcomes)
    os << format_double(grid.etas[t.eta_index]) << ',' << grid.ranks[t.r_index] << ','
       << format_double(grid.alphas[t.alpha_index]) << ',' << t.trial << ',' << t.seed << ','
       << format_double(t.final_dist) << ',' << t.iterations << ',' << to_string(t.status)
       << ',' << (t.success ? 1 : 0) << ',' << (t.stepsize_within_bound ? 1 : 0) << '\n';
  return os.str();
}

TrialOutcome run_table_trial(const ExperimentConfig& cfg, std::size_t eta_index,
                             std::size_t r_index, std::size_t alpha_index, int trial) {
  const auto ranks = cfg.ranks();
  TrialOutcome out;
  out.eta_index = eta_index;
  out.r_index = r_index;
  out.alpha_index = alpha_index;
  out.trial = trial;
  out.seed = trial_seed(cfg.master_seed, eta_index, r_index, alpha_index, trial);

  const FactorMatrix U_star =
      sample_sphere_factors(cfg.n, ranks[r_index], derive_seed(out.seed, {0}));
  const FactorMatrix U0 =
      perturb_init(U_star, cfg.alpha_list[alpha_index], derive_seed(out.seed, {1}));
  const FactoredQuadratic obj(U_star, cfg.scale);
  const double eta = cfg.eta_list[eta_index];
  out.stepsize_within_bound = eta <= adaptive_stepsize(obj, U0);

  StopRule stop;
  stop.max_iters = cfg.iters;
  const RunTrace trace = run(obj, U0, StepsizePolicy::fixed_rule(eta), stop, {});
  out.status = trace.status;
  out.iterations = static_cast<int>(trace.size()) - 1;
  if (trace.status == RunStatus::diverged) {
    out.final_dist = std::numeric_limits<double>::infinity();
    out.success = false;
  } else {
    out.final_dist = dist(trace.final_iterate, U_star).value;
    out.success = out.final_dist <= cfg.success_tol;
  }
  return out;
}

TableResult run_table1(const ExperimentConfig& cfg) {
  cfg.validate();
  TableResult res;
  SuccessGrid& grid = res.grid;
  grid.etas = cfg.eta_list;
  grid.ranks = cfg.ranks();
  grid.alphas = cfg.alpha_list;
  grid.trials = cfg.trials;
  const std::size_t cells = grid.etas.size() * grid.ranks.size() * grid.alphas.size();
  grid.successes.assign(cells, 0);
  grid.within_bound.assign(cells, 0);

  const std::size_t per_cell = static_cast<std::size_t>(cfg.trials);
  res.outcomes.resize(cells * per_cell);
  // Job order == output order: (eta, r, alpha, trial).
  parallel_for(res.outcomes.size(), cfg.workers, [&](std::size_t job) {
    const std::size_t cell = job / per_cell;
    const int trial = static_cast<int>(job % per_cell);
    const std::size_t a = cell % grid.alphas.size();
    const std::size_t r = (cell / grid.alphas.size()) % grid.ranks.size();
    const std::size_t e = cell / (grid.alphas.size() * grid.ranks.size());
    res.outcomes[job] = run_table_trial(cfg, e, r, a, trial);
  });
  for (std::size_t job = 0; job < res.outcomes.size(); ++job) {
    const std::size_t cell = job / per_cell;
    grid.successes[cell] += res.outcomes[job].success ? 1 : 0;
    grid.within_bound[cell] += res.outcomes[job].stepsize_within_bound ? 1 : 0;
  }
  return res;
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::string& body) {
  std::ofstream os(dir / "manifest.txt");
  if (!os) throw std::runtime_error("cannot write manifest in " + dir.string());
  os << "tool = bmtensor\n"
     << "version = 0.1.0\n"
     << "command = " << command << '\n'
     << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
     << EIGEN_MINOR_VERSION << '\n'
     << body;
}

}  // namespace bmtensor
