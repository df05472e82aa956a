// Command-line front end for the experiments and diagnostics.
//
// Exit codes: 0 success, 2 configuration or input error, 3 numeric failure.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bmtensor/deflation.hpp"
#include "bmtensor/experiment.hpp"
#include "bmtensor/io.hpp"
#include "bmtensor/landscape.hpp"
#include "bmtensor/random.hpp"
#include "bmtensor/verifier.hpp"

namespace fs = std::filesystem;
using namespace bmtensor;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

struct NumericFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::optional<int> workers;
  std::optional<int> trials;
  std::optional<int> iters;
  bool full = false;
  std::string command_line;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value experiment config file");
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--out-dir", c.out_dir, "output directory")->capture_default_str();
  app->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--trials", c.trials, "trials per cell")->check(CLI::PositiveNumber);
  app->add_option("--iters", c.iters, "gradient steps per run")->check(CLI::PositiveNumber);
}

// Defaults, then --full, then the config file, then explicit flags.
ExperimentConfig resolve_config(const Common& c, int default_trials) {
  ExperimentConfig cfg;
  cfg.trials = c.full ? 100 : default_trials;
  if (!c.config.empty()) cfg = load_config(c.config, cfg);
  if (c.seed) cfg.master_seed = *c.seed;
  if (c.workers) cfg.workers = *c.workers;
  if (c.trials) cfg.trials = *c.trials;
  if (c.iters) cfg.iters = *c.iters;
  cfg.validate();
  return cfg;
}

fs::path prepare_dir(const Common& c) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << text;
}

int cmd_figure1(const Common& c) {
  const ExperimentConfig cfg = resolve_config(c, 100);
  const fs::path dir = prepare_dir(c);
  const FigureResult res = run_figure1(cfg);
  write_text(dir / "figure1.csv", res.csv());

  std::ostringstream summary;
  bool any_diverged = false;
  for (const auto& t : res.traces) {
    const double final_dist = t.trace.dist.empty() ? NAN : t.trace.dist.back();
    summary << "r=" << t.r << " eta=" << format_double(t.eta)
            << " eta_bound_at_start=" << format_double(t.eta_bound_at_start)
            << " status=" << to_string(t.trace.status)
            << " final_dist=" << format_double(final_dist) << '\n';
    any_diverged = any_diverged || t.trace.status == RunStatus::diverged;
  }
  std::cout << summary.str();
  write_manifest(dir, c.command_line, cfg.to_text() + "objective = f(T) = scale * ||T - T*||_F^2\n");
  return any_diverged ? kNumericError : 0;
}

int cmd_table1(const Common& c) {
  const ExperimentConfig cfg = resolve_config(c, 20);
  const fs::path dir = prepare_dir(c);
  const TableResult res = run_table1(cfg);
  write_text(dir / "table1_grid.csv", res.grid.csv());
  write_text(dir / "table1_trials.csv", res.trials_csv());
  const std::string pretty = res.grid.pretty(cfg.n);
  write_text(dir / "table1.txt", pretty);
  std::cout << pretty;
  write_manifest(dir, c.command_line,
                 cfg.to_text() +
                     "objective = f(T) = scale * ||T - T*||_F^2\n"
                     "trial_instances = U* and D redrawn for every trial\n"
                     "trial_seed = derive_seed(master_seed, {eta_index, r_index, alpha_index, trial})\n");
  return 0;
}

struct GenerateArgs {
  Index n = 10;
  Index r = 5;
  std::string kind = "sphere";
  double lo = 1.0, hi = 2.0;
};

FactorMatrix generate_factors(const GenerateArgs& g, std::uint64_t seed) {
  if (g.kind == "sphere") return sample_sphere_factors(g.n, g.r, seed);
  if (g.kind == "orthogonal") return sample_orthogonal_factors(g.n, g.r, g.lo, g.hi, seed);
  throw ConfigError("unknown factor kind '" + g.kind + "'");
}

int cmd_generate(const Common& c, const GenerateArgs& g) {
  const fs::path dir = prepare_dir(c);
  const std::uint64_t seed = c.seed.value_or(2021);
  const FactorMatrix U = generate_factors(g, seed);
  write_factors_file(dir / "factors.csv", U);
  write_tensor_file(dir / "tensor.txt", build_from_factors(U));
  std::ostringstream body;
  body << "kind = " << g.kind << "\nn = " << g.n << "\nr = " << g.r << "\nseed = " << seed
       << "\nnorm_range = " << format_double(g.lo) << ',' << format_double(g.hi) << '\n';
  write_manifest(dir, c.command_line, body.str());
  return 0;
}

struct DecomposeArgs {
  std::string tensor;
  std::string truth;
  int r_max = 1;
  std::optional<double> resid_tol;
};

int cmd_decompose(const Common& c, const DecomposeArgs& a) {
  const SymTensor3 t = read_tensor_file(a.tensor);
  std::optional<Matrix> truth;
  if (!a.truth.empty()) {
    truth = read_factors_file(a.truth);
    if (truth->rows() != t.dim()) throw ConfigError("truth factors do not match tensor dimension");
  }
  const fs::path dir = prepare_dir(c);
  DecomposeOptions opts;
  opts.r_max = a.r_max;
  opts.resid_tol = a.resid_tol;
  opts.sosp.seed = c.seed.value_or(1);
  if (truth) opts.truth = &*truth;
  const DecompositionResult res = decompose(t, opts);

  write_factors_file(dir / "factors.csv", res.factor_matrix(t.dim()));
  std::ostringstream hist;
  hist << "round,residual_norm\n";
  for (std::size_t i = 0; i < res.residual_history.size(); ++i)
    hist << i << ',' << format_double(res.residual_history[i]) << '\n';
  write_text(dir / "residuals.csv", hist.str());

  std::ostringstream body;
  body << "status = " << to_string(res.status) << "\nfactors = " << res.factors.size()
       << "\nresidual_norm = " << format_double(res.residual_norm)
       << "\nzero_restarts = " << res.zero_restarts << '\n';
  for (std::size_t i = 0; i < res.factor_errors.size(); ++i)
    body << "factor_error_" << i << " = " << format_double(res.factor_errors[i]) << '\n';
  std::cout << body.str();
  write_manifest(dir, c.command_line,
                 "tensor = " + a.tensor + "\nr_max = " + std::to_string(a.r_max) + '\n' +
                     body.str());
  return res.status == DecompositionStatus::failed ? kNumericError : 0;
}

struct LandscapeArgs {
  std::string factors;
  Index n = 6;
  Index r = 3;
  double lo = 0.5, hi = 2.0;
  int max_support = -1;
};

std::string join_support(const std::vector<Index>& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(s[i]);
  }
  return out;
}

// Basis coefficients on the support, space separated like the support.
std::string join_coefficients(const CriticalPoint& p) {
  std::string out;
  for (std::size_t i = 0; i < p.support.size(); ++i) {
    if (i) out += ' ';
    out += format_double(p.coefficients(p.support[i]));
  }
  return out;
}

int cmd_landscape(const Common& c, const LandscapeArgs& a) {
  const std::uint64_t seed = c.seed.value_or(2021);
  const Matrix factors = a.factors.empty()
                             ? Matrix(sample_orthogonal_factors(a.n, a.r, a.lo, a.hi, seed))
                             : Matrix(read_factors_file(a.factors));
  const OrthogonalTarget target = OrthogonalTarget::from_factors(factors);
  const fs::path dir = prepare_dir(c);
  const Index max_support = a.max_support < 0 ? target.r() : a.max_support;
  std::vector<CriticalPoint> pts;
  try {
    pts = enumerate_critical_points(target, max_support);
  } catch (const ClassificationError& e) {
    throw NumericFailure(e.what());
  }

  std::ostringstream os;
  os << "index,support,support_size,coefficients,class,norm,g_value,grad_norm,hess_min_eig\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    os << i << ',' << join_support(p.support) << ',' << p.support_size() << ','
       << join_coefficients(p) << ',' << to_string(p.klass) << ',' << format_double(p.point.norm()) << ','
       << format_double(g_value(p.point, target.tensor)) << ',' << format_double(p.grad_norm)
       << ',' << format_double(p.hess_min_eig) << '\n';
  }
  write_text(dir / "critical_points.csv", os.str());
  write_factors_file(dir / "target_factors.csv", target.factors);
  std::cout << pts.size() << " critical points classified\n";
  write_manifest(dir, c.command_line,
                 "n = " + std::to_string(target.n()) + "\nr = " + std::to_string(target.r()) +
                     "\nseed = " + std::to_string(seed) + '\n');
  return 0;
}

struct VerifyArgs {
  std::string factors;
  std::string iterate;
  Index n = 64;
  Index r = 32;
  double alpha = 0.07;
  double eta = 0.0;
  double scale = 1.0;
  std::optional<double> gamma;
  double c1 = 1.0;
};

int cmd_verify(const Common& c, const VerifyArgs& a) {
  const std::uint64_t seed = c.seed.value_or(2021);
  const FactorMatrix U_star = a.factors.empty()
                                  ? sample_sphere_factors(a.n, a.r, derive_seed(seed, {0}))
                                  : read_factors_file(a.factors);
  const FactorMatrix U = a.iterate.empty()
                             ? perturb_init(U_star, a.alpha, derive_seed(seed, {1}))
                             : read_factors_file(a.iterate);
  if (U.rows() != U_star.rows() || U.cols() != U_star.cols())
    throw ConfigError("iterate and ground truth have different shapes");
  if (!(a.scale > 0.0)) throw ConfigError("scale must be positive");
  const fs::path dir = prepare_dir(c);

  const GroundTruth gt = make_ground_truth(U_star);
  const FactoredQuadratic obj(U_star, a.scale);
  AssumptionReport rep = check_assumptions(gt, a.gamma.value_or(default_gamma(gt.n())), a.c1);
  check_warm_start(rep, gt, U, obj.m(), obj.M());
  const double eta = a.eta > 0.0 ? a.eta : adaptive_stepsize(obj, U);
  const RegularityCertificate reg = check_regularity(obj, gt, U, eta);
  const SandwichCheck sw = check_sandwich(gt, U);

  const std::string text = "[assumptions]\n" + rep.to_text() + "\n[regularity]\n" +
                           reg.to_text() + "\n[sandwich]\n" + sw.to_text();
  write_text(dir / "verify.txt", text);
  std::cout << text;
  write_manifest(dir, c.command_line,
                 "seed = " + std::to_string(seed) + "\nscale = " + format_double(a.scale) + '\n');
  if (!std::isfinite(reg.margin)) throw NumericFailure("non-finite regularity margin");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Burer-Monteiro gradient descent for symmetric third-order tensors"};
  app.require_subcommand(1);
  Common common;
  for (int i = 0; i < argc; ++i) common.command_line += (i ? " " : "") + std::string(argv[i]);

  auto* fig = app.add_subcommand("figure1", "convergence traces at a small perturbation");
  add_common(fig, common);

  auto* tab = app.add_subcommand("table1", "success-rate grid over (eta, r, alpha)");
  add_common(tab, common);
  tab->add_flag("--full", common.full, "100 trials per cell instead of 20");

  GenerateArgs gen;
  auto* genc = app.add_subcommand("generate", "write a random factor matrix and its tensor");
  add_common(genc, common);
  genc->add_option("--n", gen.n, "dimension")->check(CLI::PositiveNumber);
  genc->add_option("--r", gen.r, "rank")->check(CLI::PositiveNumber);
  genc->add_option("--kind", gen.kind, "sphere or orthogonal")
      ->check(CLI::IsMember({"sphere", "orthogonal"}));
  genc->add_option("--norm-lo", gen.lo, "smallest factor norm (orthogonal)");
  genc->add_option("--norm-hi", gen.hi, "largest factor norm (orthogonal)");

  DecomposeArgs dec;
  auto* decc = app.add_subcommand("decompose", "deflation decomposition of a tensor file");
  add_common(decc, common);
  decc->add_option("--tensor", dec.tensor, "tensor file")->required();
  decc->add_option("--truth", dec.truth, "true factor CSV for error reporting");
  decc->add_option("--r-max", dec.r_max, "maximum number of rounds")->check(CLI::PositiveNumber);
  decc->add_option("--resid-tol", dec.resid_tol, "residual stopping tolerance");

  LandscapeArgs land;
  auto* landc = app.add_subcommand("landscape", "classify rank-one critical points");
  add_common(landc, common);
  landc->add_option("--factors", land.factors, "orthogonal factor CSV (random if omitted)");
  landc->add_option("--n", land.n, "dimension")->check(CLI::PositiveNumber);
  landc->add_option("--r", land.r, "rank")->check(CLI::Range(1, 20));
  landc->add_option("--norm-lo", land.lo, "smallest factor norm");
  landc->add_option("--norm-hi", land.hi, "largest factor norm");
  landc->add_option("--max-support", land.max_support, "largest support size enumerated");

  VerifyArgs ver;
  auto* verc = app.add_subcommand("verify", "assumption, regularity and sandwich report");
  add_common(verc, common);
  verc->add_option("--factors", ver.factors, "ground-truth factor CSV (random if omitted)");
  verc->add_option("--iterate", ver.iterate, "iterate CSV (perturbed truth if omitted)");
  verc->add_option("--n", ver.n, "dimension")->check(CLI::PositiveNumber);
  verc->add_option("--r", ver.r, "rank")->check(CLI::PositiveNumber);
  verc->add_option("--alpha", ver.alpha, "perturbation size when no iterate is given");
  verc->add_option("--eta", ver.eta, "stepsize (adaptive bound if omitted)");
  verc->add_option("--scale", ver.scale, "objective scale s in s ||T - T*||^2");
  verc->add_option("--gamma", ver.gamma, "polylog parameter (default ln(n)^2)");
  verc->add_option("--c1", ver.c1, "spectral-norm constant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*fig) return cmd_figure1(common);
    if (*tab) return cmd_table1(common);
    if (*genc) return cmd_generate(common, gen);
    if (*decc) return cmd_decompose(common, dec);
    if (*landc) return cmd_landscape(common, land);
    if (*verc) return cmd_verify(common, ver);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  }
  return 0;
}
