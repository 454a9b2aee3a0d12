#pragma once

#include "sgamg/hierarchy.hpp"
#include "sgamg/perf_model.hpp"
#include "sgamg/problems.hpp"
#include "sgamg/solve.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sgamg {

/// Counter-based SplitMix64 stream: value i is mix(seed + (i + 1) * 0x9E3779B97F4A7C15).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t i) const;
  /// (bits(i) >> 11) * 2^-53, in [0, 1).
  double uniform(std::uint64_t i) const;
  /// 2 uniform(i) - 1, in [-1, 1).
  double symmetric(std::uint64_t i) const;

 private:
  std::uint64_t seed_;
};

DenseVector random_vector(Index n, std::uint64_t seed);

enum class Method { galerkin, nongalerkin, sparse, hybrid };
std::string_view to_string(Method method);
Method parse_method(std::string_view name);

/// How the right-hand side and initial guess are formed.
///   zero:            b = 0, x0 random in [-1, 1)
///   random_solution: x* random in [-1, 1), b = A x*, x0 = 0
///   ones:            b = 1, x0 = 0
enum class Rhs { zero, random_solution, ones };
std::string_view to_string(Rhs rhs);
Rhs parse_rhs(std::string_view name);

struct RunConfig {
  ProblemSpec problem;
  Method method = Method::galerkin;
  Lumping lumping = Lumping::diagonal;
  std::vector<double> gammas{0.0};
  SetupParams setup;
  SmootherSpec smoother;
  KrylovSpec krylov;
  std::optional<AdaptiveSpec> adaptive;
  perf::ModelParams model;
  bool calibrate = false;
  Rhs rhs = Rhs::zero;
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";

  void validate() const;
};

/// Carries the JSON path of the offending field, e.g. "krylov.tol".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

/// Builds the hierarchy requested by config.method / gammas / lumping.
Hierarchy build_hierarchy(const CsrMatrix& A, const RunConfig& config);

struct SolveRun {
  CsrMatrix A;
  Hierarchy H;
  SolveResult result;
  /// Sends of one iteration with the pure Galerkin hierarchy.
  Index galerkin_sends = 0;
};

/// Setup, sparsification and (adaptive) Krylov solve, without file output.
SolveRun run_solve(const RunConfig& config);

/// 0 converged, 2 not converged.
int exit_code(const SolveReport& report);

/// Writes report.json, residuals.csv, hierarchy.csv and model.csv into
/// config.out and returns the exit code.
int cmd_solve(const RunConfig& config);

struct SweepRow {
  std::vector<double> schedule;
  int exit_code = 1;
  Index iterations = 0;
  bool converged = false;
  double modeled_time_per_iter = 0.0;
  double wall_time = 0.0;
  Index total_nnz = 0;
  Index total_sends = 0;
  std::string error;
};

/// The six tolerance combinations tried by default.
std::vector<std::vector<double>> default_schedules();

/// One cmd_solve per schedule, each into out/schedule_<i>; writes
/// out/sweep.csv and returns the rows. The fastest converged row is marked.
std::vector<SweepRow> cmd_sweep(const RunConfig& config,
                                const std::vector<std::vector<double>>& schedules);

/// Writes out/model_galerkin.csv and out/model_sparsified.csv.
void cmd_model(const RunConfig& config);

/// Writes out/spy/level_<l>_A.csv and level_<l>_A_hat.csv (header row,col).
void cmd_spy(const RunConfig& config);
void write_pattern(const CsrMatrix& A, const std::filesystem::path& path);
std::vector<std::pair<Index, Index>> read_pattern(const std::filesystem::path& path);

}  // namespace sgamg
