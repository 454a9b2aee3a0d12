#pragma once

#include "sgamg/hierarchy.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace sgamg {

struct SmootherSpec {
  enum class Kind { gauss_seidel_sym, jacobi_weighted } kind = Kind::gauss_seidel_sym;
  int sweeps = 1;
  double weight = 2.0 / 3.0;  ///< Jacobi only

  void validate() const;
};

struct KrylovSpec {
  enum class Method { pcg, gmres } method = Method::pcg;
  double tol = 1e-8;
  Index max_iter = 100;
  Index restart = 50;

  void validate() const;
};

struct AdaptiveSpec {
  Index k = 3;       ///< Krylov iterations per batch
  Index s = 1;       ///< levels updated per trigger
  double gamma_min = 0.01;
  enum class Trigger { always, conv_factor } trigger = Trigger::conv_factor;
  double rho_max = 0.9;

  void validate() const;
};

std::string_view to_string(SmootherSpec::Kind kind);
std::string_view to_string(KrylovSpec::Method method);
std::string_view to_string(AdaptiveSpec::Trigger trigger);
SmootherSpec::Kind parse_smoother_kind(std::string_view name);
KrylovSpec::Method parse_krylov_method(std::string_view name);
AdaptiveSpec::Trigger parse_trigger(std::string_view name);

enum class SolveStatus { converged, max_iterations, breakdown, stagnation };
std::string_view to_string(SolveStatus status);

struct AdaptiveEvent {
  Index iteration;
  size_t level;
  double old_gamma;
  double new_gamma;
};

struct SolveReport {
  /// Absolute 2-norm residuals; entry 0 is ||b - A x0||.
  std::vector<double> residual_history;
  Index iterations = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::max_iterations;
  std::vector<double> conv_factor_per_batch;
  std::vector<AdaptiveEvent> adaptive_events;
  /// Modelled sends of one iteration, aligned with residual_history.
  std::vector<Index> per_iteration_sends;
  double wall_time = 0.0;

  double relative_residual(size_t i) const;
};

struct SolveResult {
  DenseVector x;
  SolveReport report;
};

/// Linear operator applied as a preconditioner: z = M r.
using Preconditioner = std::function<DenseVector(const DenseVector&)>;

/// Smoothing sweeps on A x = b, in place.
void relax_inplace(const CsrMatrix& A, DenseVector& x, const DenseVector& b,
                   const SmootherSpec& spec);
DenseVector relax(const CsrMatrix& A, const DenseVector& x, const DenseVector& b,
                  const SmootherSpec& spec);

/// One V-cycle: smoothing and residuals use each level's A_hat, transfers use
/// the unmodified P, the coarsest level is solved directly.
DenseVector vcycle(const Hierarchy& H, const DenseVector& b, const DenseVector& x,
                   const SmootherSpec& spec = {});

/// z = V-cycle applied to r from a zero initial guess. Holds a reference to H.
Preconditioner vcycle_preconditioner(const Hierarchy& H, const SmootherSpec& spec = {});
Preconditioner identity_preconditioner();

/// Preconditioned CG on ||r|| <= tol * reference_norm (reference_norm <= 0
/// uses ||b - A x0||). A non-positive curvature p^T A p or r^T M r ends the
/// run with status breakdown.
SolveResult pcg(const CsrMatrix& A, const DenseVector& b, const DenseVector& x0,
                const Preconditioner& M, const KrylovSpec& spec, double reference_norm = 0.0);

/// Right-preconditioned restarted GMRES. A restart cycle whose relative
/// reduction is below 1e-12 ends the run with status stagnation.
SolveResult gmres(const CsrMatrix& A, const DenseVector& b, const DenseVector& x0,
                  const Preconditioner& M, const KrylovSpec& spec, double reference_norm = 0.0);

/// Dispatches on spec.method.
SolveResult krylov_solve(const CsrMatrix& A, const DenseVector& b, const DenseVector& x0,
                         const Preconditioner& M, const KrylovSpec& spec,
                         double reference_norm = 0.0);

/// Stationary iteration x <- x + V-cycle correction.
SolveResult amg_solve(const Hierarchy& H, const DenseVector& b, const DenseVector& x0,
                      const SmootherSpec& smoother, double tol, Index max_iter);

/// Runs Krylov batches of `spec.k` iterations preconditioned by H; after a
/// non-converged batch whose trigger fires, the finest `spec.s` levels that
/// still drop entries get gamma / 10 (0 below gamma_min) and are re-sparsified
/// from their Galerkin operators. The iterate is kept unless the residual
/// grew past ||r0||. `procs` > 0 records modelled sends per iteration.
SolveResult adaptive_solve(const CsrMatrix& A, const DenseVector& b, const DenseVector& x0,
                           Hierarchy& H, const AdaptiveSpec& spec, const KrylovSpec& kspec,
                           const SmootherSpec& smoother = {}, Index procs = 0);

/// New tolerance after one adaptive reduction step.
double reduced_gamma(double gamma, double gamma_min);

/// Applies one adaptive trigger to H: returns the events (empty when every
/// coarse level already has gamma = 0).
std::vector<AdaptiveEvent> reintroduce_entries(Hierarchy& H, Index s, double gamma_min,
                                               Index iteration = 0);

}  // namespace sgamg
