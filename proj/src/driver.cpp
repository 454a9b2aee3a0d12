#include "sgamg/driver.hpp"

#include "sgamg/setup.hpp"
#include "sgamg/sparsify.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace sgamg {

using nlohmann::json;

std::uint64_t CounterRng::bits(std::uint64_t i) const {
  std::uint64_t z = seed_ + (i + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform(std::uint64_t i) const {
  return static_cast<double>(bits(i) >> 11) * 0x1.0p-53;
}

double CounterRng::symmetric(std::uint64_t i) const { return 2.0 * uniform(i) - 1.0; }

DenseVector random_vector(Index n, std::uint64_t seed) {
  const CounterRng rng(seed);
  DenseVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.symmetric(static_cast<std::uint64_t>(i));
  return v;
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::galerkin: return "galerkin";
    case Method::nongalerkin: return "nongalerkin";
    case Method::sparse: return "sparse";
    case Method::hybrid: return "hybrid";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::galerkin, Method::nongalerkin, Method::sparse, Method::hybrid})
    if (name == to_string(m)) return m;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Rhs rhs) {
  switch (rhs) {
    case Rhs::zero: return "zero";
    case Rhs::random_solution: return "random_solution";
    case Rhs::ones: return "ones";
  }
  return "unknown";
}

Rhs parse_rhs(std::string_view name) {
  for (Rhs r : {Rhs::zero, Rhs::random_solution, Rhs::ones})
    if (name == to_string(r)) return r;
  throw std::invalid_argument("unknown rhs '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  if (gammas.empty()) throw ConfigError("gammas", "at least one tolerance is required");
  for (double g : gammas)
    if (!(g >= 0.0)) throw ConfigError("gammas", "tolerances must be >= 0");
  if (!(setup.theta_s > 0.0 && setup.theta_s <= 1.0))
    throw ConfigError("setup.theta_s", "must lie in (0, 1]");
  if (setup.max_size < 1) throw ConfigError("setup.max_size", "must be >= 1");
  if (setup.max_levels < 1) throw ConfigError("setup.max_levels", "must be >= 1");
  if (setup.trunc_max_elements < 0) throw ConfigError("setup.trunc_max_elements", "must be >= 0");
  if (problem.kind == ProblemKind::from_file && !problem.path)
    throw ConfigError("problem.path", "required for kind from_file");
  if (adaptive && method == Method::nongalerkin)
    throw ConfigError("adaptive", "not available for method nongalerkin");
  try {
    smoother.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("smoother", e.what());
  }
  try {
    krylov.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("krylov", e.what());
  }
  try {
    if (adaptive) adaptive->validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("adaptive", e.what());
  }
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model", e.what());
  }
}

namespace {

std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void require_object(const json& j, const std::string& path,
                    std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw ConfigError(child(path, item.key()), "unknown key");
  }
}

double get_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

Index get_index(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<Index>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

template <class Parse>
auto get_enum(const json& j, const std::string& path, Parse parse) {
  const std::string name = get_string(j, path);
  try {
    return parse(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

ProblemSpec parse_problem(const json& j, const std::string& path) {
  require_object(j, path, {"kind", "dims", "theta", "epsilon", "path"});
  ProblemSpec spec;
  if (j.contains("kind")) spec.kind = get_enum(j["kind"], child(path, "kind"), parse_problem_kind);
  if (j.contains("dims")) {
    const std::string p = child(path, "dims");
    const json& d = j["dims"];
    if (d.is_number_integer()) {
      const Index n = get_index(d, p);
      spec.dims = {n, n, n};
    } else if (d.is_array() && (d.size() == 2 || d.size() == 3)) {
      for (size_t a = 0; a < d.size(); ++a) spec.dims[a] = get_index(d[a], p + "[" + std::to_string(a) + "]");
      if (d.size() == 2) spec.dims[2] = 1;
    } else {
      throw ConfigError(p, "expected an integer or an array of 2 or 3 integers");
    }
  }
  if (j.contains("theta")) spec.theta = get_double(j["theta"], child(path, "theta"));
  if (j.contains("epsilon")) spec.epsilon = get_double(j["epsilon"], child(path, "epsilon"));
  if (j.contains("path")) spec.path = get_string(j["path"], child(path, "path"));
  return spec;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  require_object(doc, "",
                 {"problem", "method", "lumping", "gammas", "setup", "smoother", "krylov", "adaptive",
                  "model", "rhs", "seed", "out"});
  RunConfig cfg;
  if (doc.contains("problem")) cfg.problem = parse_problem(doc["problem"], "problem");
  if (doc.contains("method")) cfg.method = get_enum(doc["method"], "method", parse_method);
  if (doc.contains("lumping")) cfg.lumping = get_enum(doc["lumping"], "lumping", parse_lumping);
  if (doc.contains("gammas")) {
    const json& g = doc["gammas"];
    if (!g.is_array()) throw ConfigError("gammas", "expected an array of numbers");
    cfg.gammas.clear();
    for (size_t i = 0; i < g.size(); ++i)
      cfg.gammas.push_back(get_double(g[i], "gammas[" + std::to_string(i) + "]"));
  }
  if (doc.contains("setup")) {
    const json& s = doc["setup"];
    require_object(s, "setup", {"max_size", "theta_s", "max_levels", "trunc_max_elements"});
    if (s.contains("max_size")) cfg.setup.max_size = get_index(s["max_size"], "setup.max_size");
    if (s.contains("theta_s")) cfg.setup.theta_s = get_double(s["theta_s"], "setup.theta_s");
    if (s.contains("max_levels")) cfg.setup.max_levels = get_index(s["max_levels"], "setup.max_levels");
    if (s.contains("trunc_max_elements"))
      cfg.setup.trunc_max_elements = get_index(s["trunc_max_elements"], "setup.trunc_max_elements");
  }
  if (doc.contains("smoother")) {
    const json& s = doc["smoother"];
    require_object(s, "smoother", {"kind", "sweeps", "weight"});
    if (s.contains("kind")) cfg.smoother.kind = get_enum(s["kind"], "smoother.kind", parse_smoother_kind);
    if (s.contains("sweeps")) cfg.smoother.sweeps = static_cast<int>(get_index(s["sweeps"], "smoother.sweeps"));
    if (s.contains("weight")) cfg.smoother.weight = get_double(s["weight"], "smoother.weight");
  }
  if (doc.contains("krylov")) {
    const json& k = doc["krylov"];
    require_object(k, "krylov", {"method", "tol", "max_iter", "restart"});
    if (k.contains("method")) cfg.krylov.method = get_enum(k["method"], "krylov.method", parse_krylov_method);
    if (k.contains("tol")) cfg.krylov.tol = get_double(k["tol"], "krylov.tol");
    if (k.contains("max_iter")) cfg.krylov.max_iter = get_index(k["max_iter"], "krylov.max_iter");
    if (k.contains("restart")) cfg.krylov.restart = get_index(k["restart"], "krylov.restart");
  }
  if (doc.contains("adaptive")) {
    const json& a = doc["adaptive"];
    require_object(a, "adaptive", {"enabled", "k", "s", "gamma_min", "trigger", "rho_max"});
    AdaptiveSpec spec;
    if (a.contains("k")) spec.k = get_index(a["k"], "adaptive.k");
    if (a.contains("s")) spec.s = get_index(a["s"], "adaptive.s");
    if (a.contains("gamma_min")) spec.gamma_min = get_double(a["gamma_min"], "adaptive.gamma_min");
    if (a.contains("trigger")) spec.trigger = get_enum(a["trigger"], "adaptive.trigger", parse_trigger);
    if (a.contains("rho_max")) spec.rho_max = get_double(a["rho_max"], "adaptive.rho_max");
    const bool enabled = a.contains("enabled") ? get_bool(a["enabled"], "adaptive.enabled") : true;
    if (enabled) cfg.adaptive = spec;
  }
  if (doc.contains("model")) {
    const json& m = doc["model"];
    require_object(m, "model", {"procs", "alpha", "beta", "c", "calibrate", "unit"});
    if (m.contains("procs")) cfg.model.procs = get_index(m["procs"], "model.procs");
    if (m.contains("alpha")) cfg.model.alpha = get_double(m["alpha"], "model.alpha");
    if (m.contains("beta")) cfg.model.beta = get_double(m["beta"], "model.beta");
    if (m.contains("c")) cfg.model.c = get_double(m["c"], "model.c");
    if (m.contains("calibrate")) cfg.calibrate = get_bool(m["calibrate"], "model.calibrate");
    if (m.contains("unit")) {
      const std::string unit = get_string(m["unit"], "model.unit");
      if (unit == "words")
        cfg.model.unit = perf::ModelParams::Unit::words;
      else if (unit == "bytes")
        cfg.model.unit = perf::ModelParams::Unit::bytes;
      else
        throw ConfigError("model.unit", "expected words or bytes");
    }
  }
  if (doc.contains("rhs")) cfg.rhs = get_enum(doc["rhs"], "rhs", parse_rhs);
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("out")) cfg.out = get_string(doc["out"], "out");
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  json problem{{"kind", to_string(c.problem.kind)},
               {"dims", {c.problem.dims[0], c.problem.dims[1], c.problem.dims[2]}},
               {"theta", c.problem.theta},
               {"epsilon", c.problem.epsilon}};
  if (c.problem.path) problem["path"] = c.problem.path->string();
  json doc{
      {"problem", problem},
      {"method", to_string(c.method)},
      {"lumping", to_string(c.lumping)},
      {"gammas", c.gammas},
      {"setup",
       {{"max_size", c.setup.max_size},
        {"theta_s", c.setup.theta_s},
        {"max_levels", c.setup.max_levels},
        {"trunc_max_elements", c.setup.trunc_max_elements}}},
      {"smoother",
       {{"kind", to_string(c.smoother.kind)},
        {"sweeps", c.smoother.sweeps},
        {"weight", c.smoother.weight}}},
      {"krylov",
       {{"method", to_string(c.krylov.method)},
        {"tol", c.krylov.tol},
        {"max_iter", c.krylov.max_iter},
        {"restart", c.krylov.restart}}},
      {"model",
       {{"procs", c.model.procs},
        {"alpha", c.model.alpha},
        {"beta", c.model.beta},
        {"c", c.model.c},
        {"calibrate", c.calibrate},
        {"unit", c.model.unit == perf::ModelParams::Unit::words ? "words" : "bytes"}}},
      {"rhs", to_string(c.rhs)},
      {"seed", c.seed},
      {"out", c.out.string()}};
  if (c.adaptive) {
    doc["adaptive"] = {{"enabled", true},
                       {"k", c.adaptive->k},
                       {"s", c.adaptive->s},
                       {"gamma_min", c.adaptive->gamma_min},
                       {"trigger", to_string(c.adaptive->trigger)},
                       {"rho_max", c.adaptive->rho_max}};
  } else {
    doc["adaptive"] = {{"enabled", false}};
  }
  return doc;
}

Hierarchy build_hierarchy(const CsrMatrix& A, const RunConfig& config) {
  switch (config.method) {
    case Method::galerkin:
      return amg_setup(A, config.setup);
    case Method::nongalerkin:
      return amg_setup(A, config.setup,
                       DropSchedule{config.gammas, config.lumping, Variant::nongalerkin});
    case Method::sparse:
    case Method::hybrid: {
      Hierarchy H = amg_setup(A, config.setup);
      const DropSchedule schedule{config.gammas, config.lumping,
                                  config.method == Method::sparse ? Variant::sparse : Variant::hybrid};
      sparse_hybrid_setup(H, schedule.fitted(H.num_levels()));
      return H;
    }
  }
  throw std::logic_error("unhandled method");
}

namespace {

Index galerkin_sends(const Hierarchy& H, const RunConfig& config) {
  if (config.method == Method::nongalerkin)
    return perf::hierarchy_sends(amg_setup(H.levels.front().A, config.setup), config.model.procs);
  Index total = 0;
  for (const Level& level : H.levels) total += perf::comm_stats(level.A, config.model.procs).s_p_max;
  return total;
}

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

json report_json(const RunConfig& config, const SolveRun& run) {
  const SolveReport& rep = run.result.report;
  json events = json::array();
  for (const AdaptiveEvent& e : rep.adaptive_events)
    events.push_back({{"iteration", e.iteration},
                      {"level", e.level},
                      {"old_gamma", e.old_gamma},
                      {"new_gamma", e.new_gamma}});
  json levels = json::array();
  for (size_t l = 0; l < run.H.levels.size(); ++l) {
    const Level& level = run.H.levels[l];
    levels.push_back({{"level", l},
                      {"n", level.size()},
                      {"nnz_galerkin", level.A.nnz()},
                      {"nnz", level.A_hat.nnz()},
                      {"gamma", level.gamma}});
  }
  const double final_relres =
      rep.residual_history.empty() ? 0.0 : rep.relative_residual(rep.residual_history.size() - 1);
  return json{{"config", to_json(config)},
              {"status", to_string(rep.status)},
              {"converged", rep.converged},
              {"iterations", rep.iterations},
              {"final_relative_residual", final_relres},
              {"residual_history", rep.residual_history},
              {"conv_factor_per_batch", rep.conv_factor_per_batch},
              {"adaptive_events", events},
              {"levels", levels},
              {"stalled", run.H.stalled},
              {"sends_per_iteration",
               rep.per_iteration_sends.empty() ? Index(0) : rep.per_iteration_sends.back()},
              {"galerkin_sends_per_iteration", run.galerkin_sends},
              {"wall_time", rep.wall_time}};
}

void write_artifacts(const RunConfig& config, const SolveRun& run) {
  ensure_dir(config.out);
  const SolveReport& rep = run.result.report;
  {
    auto out = open_out(config.out / "report.json");
    out << report_json(config, run).dump(2) << '\n';
  }
  {
    auto out = open_out(config.out / "residuals.csv");
    out << "iteration,relres,sends_modeled\n";
    for (size_t i = 0; i < rep.residual_history.size(); ++i) {
      const Index sends = i < rep.per_iteration_sends.size() ? rep.per_iteration_sends[i] : 0;
      out << i << ',' << format("%.12e", rep.relative_residual(i)) << ',' << sends << '\n';
    }
  }
  {
    auto out = open_out(config.out / "hierarchy.csv");
    out << "level,n,nnz,nnz_per_row\n";
    for (size_t l = 0; l < run.H.levels.size(); ++l) {
      const CsrMatrix& A = run.H.levels[l].A_hat;
      out << l << ',' << A.rows() << ',' << A.nnz() << ','
          << format("%.6f", A.rows() ? static_cast<double>(A.nnz()) / A.rows() : 0.0) << '\n';
    }
  }
  {
    auto out = open_out(config.out / "model.csv");
    perf::write_profile_csv(perf::hierarchy_profile(run.H, config.model, true, config.calibrate), out);
  }
}

}  // namespace

SolveRun run_solve(const RunConfig& config) {
  config.validate();
  SolveRun run;
  run.A = generate(config.problem);
  if (config.krylov.method == KrylovSpec::Method::pcg &&
      !is_symmetric(run.A, 1e-12 * max_abs(run.A)))
    throw std::invalid_argument("pcg requires a symmetric matrix");
  run.H = build_hierarchy(run.A, config);

  const Index n = run.A.rows();
  DenseVector b, x0;
  switch (config.rhs) {
    case Rhs::zero:
      b = DenseVector::Zero(n);
      x0 = random_vector(n, config.seed);
      break;
    case Rhs::random_solution:
      b = spmv(run.A, random_vector(n, config.seed));
      x0 = DenseVector::Zero(n);
      break;
    case Rhs::ones:
      b = DenseVector::Ones(n);
      x0 = DenseVector::Zero(n);
      break;
  }

  const Index procs = config.model.procs;
  run.galerkin_sends = galerkin_sends(run.H, config);
  if (config.adaptive) {
    run.result = adaptive_solve(run.A, b, x0, run.H, *config.adaptive, config.krylov,
                                config.smoother, procs);
  } else {
    run.result = krylov_solve(run.A, b, x0, vcycle_preconditioner(run.H, config.smoother),
                              config.krylov);
    run.result.report.per_iteration_sends.assign(run.result.report.residual_history.size(),
                                                 perf::hierarchy_sends(run.H, procs));
  }
  return run;
}

int exit_code(const SolveReport& report) { return report.converged ? 0 : 2; }

int cmd_solve(const RunConfig& config) {
  const SolveRun run = run_solve(config);
  write_artifacts(config, run);
  return exit_code(run.result.report);
}

std::vector<std::vector<double>> default_schedules() {
  return {{0.0, 0.01, 0.1, 1.0}, {0.0, 0.1, 1.0},       {0.0, 1.0},
          {0.0, 0.0, 0.01, 0.1, 1.0}, {0.0, 0.0, 0.1, 1.0}, {0.0, 0.0, 1.0}};
}

std::vector<SweepRow> cmd_sweep(const RunConfig& config,
                                const std::vector<std::vector<double>>& schedules) {
  if (schedules.empty()) throw std::invalid_argument("sweep needs at least one schedule");
  std::vector<SweepRow> rows;
  for (size_t i = 0; i < schedules.size(); ++i) {
    RunConfig cfg = config;
    cfg.gammas = schedules[i];
    if (cfg.method == Method::galerkin) cfg.method = Method::hybrid;
    cfg.out = config.out / ("schedule_" + std::to_string(i));
    SweepRow row;
    row.schedule = schedules[i];
    try {
      const SolveRun run = run_solve(cfg);
      write_artifacts(cfg, run);
      const SolveReport& rep = run.result.report;
      row.exit_code = exit_code(rep);
      row.iterations = rep.iterations;
      row.converged = rep.converged;
      row.wall_time = rep.wall_time;
      for (const auto& level : perf::hierarchy_profile(run.H, cfg.model, true, cfg.calibrate)) {
        row.modeled_time_per_iter += level.modeled_seconds;
        row.total_nnz += level.nnz;
        row.total_sends += level.sends_max;
      }
    } catch (const std::exception& e) {
      row.exit_code = 1;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }

  size_t best = rows.size();
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].converged && (best == rows.size() || rows[i].wall_time < rows[best].wall_time))
      best = i;
  }
  ensure_dir(config.out);
  auto out = open_out(config.out / "sweep.csv");
  out << "schedule,exit_code,iterations,converged,modeled_time_per_iter,wall_time,total_nnz,"
         "total_sends,argmin\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    std::string sched;
    for (size_t k = 0; k < r.schedule.size(); ++k)
      sched += (k ? ";" : "") + format("%g", r.schedule[k]);
    out << sched << ',' << r.exit_code << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
        << format("%.9e", r.modeled_time_per_iter) << ',' << format("%.6f", r.wall_time) << ','
        << r.total_nnz << ',' << r.total_sends << ',' << (i == best ? 1 : 0) << '\n';
  }
  return rows;
}

void cmd_model(const RunConfig& config) {
  config.validate();
  const CsrMatrix A = generate(config.problem);
  const Hierarchy H = build_hierarchy(A, config);
  ensure_dir(config.out);
  for (bool sparsified : {false, true}) {
    auto out = open_out(config.out / (sparsified ? "model_sparsified.csv" : "model_galerkin.csv"));
    perf::write_profile_csv(perf::hierarchy_profile(H, config.model, sparsified, config.calibrate), out);
  }
}

void write_pattern(const CsrMatrix& A, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "row,col\n";
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j : A.row_cols(i)) out << i << ',' << j << '\n';
}

std::vector<std::pair<Index, Index>> read_pattern(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "row,col")
    throw std::runtime_error(path.string() + ": missing row,col header");
  std::vector<std::pair<Index, Index>> entries;
  Index lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    Index r = 0, c = 0;
    char comma = 0;
    if (!(fields >> r >> comma >> c) || comma != ',')
      throw std::runtime_error(path.string() + ": line " + std::to_string(lineno) + ": malformed entry");
    entries.emplace_back(r, c);
  }
  return entries;
}

void cmd_spy(const RunConfig& config) {
  config.validate();
  const CsrMatrix A = generate(config.problem);
  const Hierarchy H = build_hierarchy(A, config);
  const auto dir = config.out / "spy";
  ensure_dir(dir);
  for (size_t l = 0; l < H.levels.size(); ++l) {
    write_pattern(H.levels[l].A, dir / ("level_" + std::to_string(l) + "_A.csv"));
    write_pattern(H.levels[l].A_hat, dir / ("level_" + std::to_string(l) + "_A_hat.csv"));
  }
}

}  // namespace sgamg
