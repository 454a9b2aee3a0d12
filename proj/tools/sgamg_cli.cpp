#include "sgamg/driver.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace sgamg;

struct Overrides {
  std::string config;
  std::optional<std::string> problem, matrix, method, lumping, gammas, krylov, trigger, out, unit;
  std::optional<Index> n, max_iter, k, s, procs, max_size;
  std::optional<double> theta, epsilon, tol, gamma_min, rho_max, alpha, beta, c;
  std::optional<std::uint64_t> seed;
  bool adaptive = false;
  bool calibrate = false;
};

void add_options(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--problem", o.problem, "poisson3d_7pt | poisson3d_27pt | aniso2d_9pt | from_file");
  app->add_option("--n", o.n, "grid points per axis");
  app->add_option("--theta", o.theta, "anisotropy angle");
  app->add_option("--epsilon", o.epsilon, "anisotropy strength");
  app->add_option("--matrix", o.matrix, "Matrix Market input")->check(CLI::ExistingFile);
  app->add_option("--method", o.method, "galerkin | nongalerkin | sparse | hybrid");
  app->add_option("--lumping", o.lumping, "diagonal | neighbors");
  app->add_option("--gammas", o.gammas, "comma-separated drop tolerances per level");
  app->add_option("--max-size", o.max_size, "coarsest level size");
  app->add_option("--krylov", o.krylov, "pcg | gmres");
  app->add_option("--tol", o.tol, "relative residual tolerance");
  app->add_option("--max-iter", o.max_iter, "iteration limit");
  app->add_flag("--adaptive", o.adaptive, "reintroduce dropped entries during the solve");
  app->add_option("--k", o.k, "iterations per adaptive batch");
  app->add_option("--s", o.s, "levels updated per trigger");
  app->add_option("--gamma-min", o.gamma_min, "smallest nonzero tolerance");
  app->add_option("--trigger", o.trigger, "always | conv_factor");
  app->add_option("--rho-max", o.rho_max, "convergence factor that triggers re-adding");
  app->add_option("--procs", o.procs, "virtual process count");
  app->add_option("--alpha", o.alpha, "latency [s]");
  app->add_option("--beta", o.beta, "inverse bandwidth [s/word]");
  app->add_option("--c", o.c, "time per flop [s]");
  app->add_option("--unit", o.unit, "words | bytes");
  app->add_flag("--calibrate", o.calibrate, "measure c per level");
  app->add_option("--seed", o.seed, "RNG seed");
  app->add_option("--out", o.out, "output directory");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("gammas", "cannot parse '" + item + "'");
    }
  }
  return values;
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  auto wrap = [](const char* path, auto parse, const std::string& v) {
    try {
      return parse(v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, e.what());
    }
  };
  if (o.problem) cfg.problem.kind = wrap("problem.kind", parse_problem_kind, *o.problem);
  if (o.matrix) {
    cfg.problem.kind = ProblemKind::from_file;
    cfg.problem.path = *o.matrix;
  }
  if (o.n) cfg.problem.dims = {*o.n, *o.n, *o.n};
  if (o.theta) cfg.problem.theta = *o.theta;
  if (o.epsilon) cfg.problem.epsilon = *o.epsilon;
  if (o.method) cfg.method = wrap("method", parse_method, *o.method);
  if (o.lumping) cfg.lumping = wrap("lumping", parse_lumping, *o.lumping);
  if (o.gammas) cfg.gammas = parse_list(*o.gammas);
  if (o.max_size) cfg.setup.max_size = *o.max_size;
  if (o.krylov) cfg.krylov.method = wrap("krylov.method", parse_krylov_method, *o.krylov);
  if (o.tol) cfg.krylov.tol = *o.tol;
  if (o.max_iter) cfg.krylov.max_iter = *o.max_iter;
  if (o.adaptive && !cfg.adaptive) cfg.adaptive = AdaptiveSpec{};
  if (cfg.adaptive) {
    if (o.k) cfg.adaptive->k = *o.k;
    if (o.s) cfg.adaptive->s = *o.s;
    if (o.gamma_min) cfg.adaptive->gamma_min = *o.gamma_min;
    if (o.trigger) cfg.adaptive->trigger = wrap("adaptive.trigger", parse_trigger, *o.trigger);
    if (o.rho_max) cfg.adaptive->rho_max = *o.rho_max;
  }
  if (o.procs) cfg.model.procs = *o.procs;
  if (o.alpha) cfg.model.alpha = *o.alpha;
  if (o.beta) cfg.model.beta = *o.beta;
  if (o.c) cfg.model.c = *o.c;
  if (o.unit) {
    if (*o.unit == "words")
      cfg.model.unit = perf::ModelParams::Unit::words;
    else if (*o.unit == "bytes")
      cfg.model.unit = perf::ModelParams::Unit::bytes;
    else
      throw ConfigError("model.unit", "expected words or bytes");
  }
  if (o.calibrate) cfg.calibrate = true;
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classical AMG with sparsified coarse operators"};
  app.require_subcommand(1);

  Overrides solve_opts, sweep_opts, model_opts, spy_opts;
  std::string schedules;
  auto* solve = app.add_subcommand("solve", "set up, sparsify and solve; writes report artifacts");
  add_options(solve, solve_opts);
  auto* sweep = app.add_subcommand("sweep", "solve once per drop-tolerance schedule");
  add_options(sweep, sweep_opts);
  sweep->add_option("--schedules", schedules,
                    "schedules separated by ';', tolerances by ',' (default: six built-in)");
  auto* model = app.add_subcommand("model", "per-level communication model profiles");
  add_options(model, model_opts);
  auto* spy = app.add_subcommand("spy", "per-level sparsity pattern dumps");
  add_options(spy, spy_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      const RunConfig cfg = resolve(solve_opts);
      const int code = cmd_solve(cfg);
      std::cout << (code == 0 ? "converged" : "not converged") << ", results in " << cfg.out.string()
                << '\n';
      return code;
    }
    if (sweep->parsed()) {
      const RunConfig cfg = resolve(sweep_opts);
      std::vector<std::vector<double>> list;
      if (schedules.empty()) {
        list = default_schedules();
      } else {
        std::stringstream in(schedules);
        std::string item;
        while (std::getline(in, item, ';'))
          if (!item.empty()) list.push_back(parse_list(item));
      }
      const auto rows = cmd_sweep(cfg, list);
      for (const auto& row : rows)
        if (!row.error.empty()) std::cerr << "schedule failed: " << row.error << '\n';
      std::cout << rows.size() << " schedules, summary in " << (cfg.out / "sweep.csv").string()
                << '\n';
      return 0;
    }
    if (model->parsed()) {
      const RunConfig cfg = resolve(model_opts);
      cmd_model(cfg);
      std::cout << "profiles in " << cfg.out.string() << '\n';
      return 0;
    }
    if (spy->parsed()) {
      const RunConfig cfg = resolve(spy_opts);
      cmd_spy(cfg);
      std::cout << "patterns in " << (cfg.out / "spy").string() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
