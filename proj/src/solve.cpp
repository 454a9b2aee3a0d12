#include "sgamg/solve.hpp"

#include "sgamg/perf_model.hpp"
#include "sgamg/sparsify.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <stdexcept>

namespace sgamg {

void SmootherSpec::validate() const {
  if (sweeps < 1) throw std::invalid_argument("smoother sweeps must be >= 1");
  if (kind == Kind::jacobi_weighted && !(weight > 0.0 && weight <= 1.0))
    throw std::invalid_argument("Jacobi weight must lie in (0, 1]");
}

void KrylovSpec::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("Krylov tolerance must be > 0");
  if (max_iter < 0) throw std::invalid_argument("max_iter must be >= 0");
  if (restart < 1) throw std::invalid_argument("GMRES restart must be >= 1");
}

void AdaptiveSpec::validate() const {
  if (k < 1 || s < 1) throw std::invalid_argument("adaptive k and s must be >= 1");
  if (!(gamma_min > 0.0 && gamma_min < 1.0))
    throw std::invalid_argument("gamma_min must lie in (0, 1)");
  if (!(rho_max > 0.0 && rho_max < 1.0)) throw std::invalid_argument("rho_max must lie in (0, 1)");
}

std::string_view to_string(SmootherSpec::Kind kind) {
  return kind == SmootherSpec::Kind::gauss_seidel_sym ? "gauss_seidel_sym" : "jacobi_weighted";
}
std::string_view to_string(KrylovSpec::Method method) {
  return method == KrylovSpec::Method::pcg ? "pcg" : "gmres";
}
std::string_view to_string(AdaptiveSpec::Trigger trigger) {
  return trigger == AdaptiveSpec::Trigger::always ? "always" : "conv_factor";
}
std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::breakdown: return "breakdown";
    case SolveStatus::stagnation: return "stagnation";
  }
  return "unknown";
}

SmootherSpec::Kind parse_smoother_kind(std::string_view name) {
  if (name == "gauss_seidel_sym") return SmootherSpec::Kind::gauss_seidel_sym;
  if (name == "jacobi_weighted") return SmootherSpec::Kind::jacobi_weighted;
  throw std::invalid_argument("unknown smoother '" + std::string(name) + "'");
}
KrylovSpec::Method parse_krylov_method(std::string_view name) {
  if (name == "pcg") return KrylovSpec::Method::pcg;
  if (name == "gmres") return KrylovSpec::Method::gmres;
  throw std::invalid_argument("unknown Krylov method '" + std::string(name) + "'");
}
AdaptiveSpec::Trigger parse_trigger(std::string_view name) {
  if (name == "always") return AdaptiveSpec::Trigger::always;
  if (name == "conv_factor") return AdaptiveSpec::Trigger::conv_factor;
  throw std::invalid_argument("unknown trigger '" + std::string(name) + "'");
}

double SolveReport::relative_residual(size_t i) const {
  const double r0 = residual_history.empty() ? 0.0 : residual_history.front();
  return r0 > 0.0 ? residual_history.at(i) / r0 : 0.0;
}

namespace {

template <bool Forward>
void gauss_seidel_sweep(const CsrMatrix& A, DenseVector& x, const DenseVector& b) {
  const auto rowptr = A.rowptr();
  const auto colind = A.colind();
  const auto values = A.values();
  const Index n = A.rows();
  for (Index step = 0; step < n; ++step) {
    const Index i = Forward ? step : n - 1 - step;
    double sum = 0.0, diag = 0.0;
    for (Index k = rowptr[i]; k < rowptr[i + 1]; ++k) {
      const Index j = colind[k];
      if (j == i)
        diag = values[k];
      else
        sum += values[k] * x(j);
    }
    if (diag == 0.0) throw std::domain_error("relax: zero diagonal in row " + std::to_string(i));
    x(i) = (b(i) - sum) / diag;
  }
}

void cycle(const Hierarchy& H, size_t l, const DenseVector& b, DenseVector& x,
           const SmootherSpec& spec) {
  if (l + 1 == H.levels.size()) {
    if (H.coarsest_singular) throw std::runtime_error("vcycle: coarsest operator is singular");
    x = H.coarsest.solve(b);
    return;
  }
  const Level& level = H.levels[l];
  relax_inplace(level.A_hat, x, b, spec);
  const DenseVector coarse_b = spmv_transpose(level.P, residual(level.A_hat, x, b));
  DenseVector coarse_x = DenseVector::Zero(coarse_b.size());
  cycle(H, l + 1, coarse_b, coarse_x, spec);
  x += spmv(level.P, coarse_x);
  relax_inplace(level.A_hat, x, b, spec);
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_system(const CsrMatrix& A, const DenseVector& b, const DenseVector& x0) {
  if (!A.is_square() || A.rows() != b.size() || A.cols() != x0.size())
    throw DimensionError("solve: system dimensions disagree");
}

}  // namespace

void relax_inplace(const CsrMatrix& A, DenseVector& x, const DenseVector& b,
                   const SmootherSpec& spec) {
  if (!A.is_square() || A.rows() != x.size() || A.rows() != b.size())
    throw DimensionError("relax: dimensions disagree");
  spec.validate();
  for (int sweep = 0; sweep < spec.sweeps; ++sweep) {
    if (spec.kind == SmootherSpec::Kind::gauss_seidel_sym) {
      gauss_seidel_sweep<true>(A, x, b);
      gauss_seidel_sweep<false>(A, x, b);
    } else {
      const DenseVector d = diagonal(A);
      for (Index i = 0; i < d.size(); ++i)
        if (d(i) == 0.0) throw std::domain_error("relax: zero diagonal in row " + std::to_string(i));
      x += spec.weight * residual(A, x, b).cwiseQuotient(d);
    }
  }
}

DenseVector relax(const CsrMatrix& A, const DenseVector& x, const DenseVector& b,
                  const SmootherSpec& spec) {
  DenseVector out = x;
  relax_inplace(A, out, b, spec);
  return out;
}

DenseVector vcycle(const Hierarchy& H, const DenseVector& b, const DenseVector& x,
                   const SmootherSpec& spec) {
  if (H.levels.empty()) throw std::invalid_argument("vcycle: empty hierarchy");
  if (b.size() != H.levels[0].size() || x.size() != b.size())
    throw DimensionError("vcycle: vector length does not match the finest level");
  DenseVector out = x;
  cycle(H, 0, b, out, spec);
  return out;
}

Preconditioner vcycle_preconditioner(const Hierarchy& H, const SmootherSpec& spec) {
  return [&H, spec](const DenseVector& r) {
    return vcycle(H, r, DenseVector::Zero(r.size()), spec);
  };
}

Preconditioner identity_preconditioner() {
  return [](const DenseVector& r) { return r; };
}

SolveResult pcg(const CsrMatrix& A, const DenseVector& b, const DenseVector& x0,
                const Preconditioner& M, const KrylovSpec& spec, double reference_norm) {
  check_system(A, b, x0);
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  SolveResult out{x0, {}};
  SolveReport& rep = out.report;
  DenseVector& x = out.x;

  DenseVector r = residual(A, x, b);
  double rnorm = r.norm();
  rep.residual_history.push_back(rnorm);
  const double ref = reference_norm > 0.0 ? reference_norm : rnorm;
  const double target = spec.tol * ref;
  if (rnorm <= target) {
    rep.converged = true;
    rep.status = SolveStatus::converged;
    rep.wall_time = elapsed_since(start);
    return out;
  }

  DenseVector z = M(r);
  double rz = r.dot(z);
  DenseVector p = z;
  rep.status = SolveStatus::max_iterations;
  if (!(rz > 0.0)) {
    rep.status = SolveStatus::breakdown;
  } else {
    for (Index it = 1; it <= spec.max_iter; ++it) {
      const DenseVector Ap = spmv(A, p);
      const double pAp = p.dot(Ap);
      if (!(pAp > 0.0)) {
        rep.status = SolveStatus::breakdown;
        break;
      }
      const double alpha = rz / pAp;
      x += alpha * p;
      r -= alpha * Ap;
      rnorm = r.norm();
      rep.residual_history.push_back(rnorm);
      rep.iterations = it;
      if (rnorm <= target) {
        rep.converged = true;
        rep.status = SolveStatus::converged;
        break;
      }
      z = M(r);
      const double rz_next = r.dot(z);
      if (!(rz_next > 0.0)) {
        rep.status = SolveStatus::breakdown;
        break;
      }
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
  }
  rep.wall_time = elapsed_since(start);
  return out;
}

SolveResult gmres(const CsrMatrix& A, const DenseVector& b, const DenseVector& x0,
                  const Preconditioner& M, const KrylovSpec& spec, double reference_norm) {
  check_system(A, b, x0);
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  SolveResult out{x0, {}};
  SolveReport& rep = out.report;
  DenseVector& x = out.x;
  const Index n = A.rows();
  const Index m = spec.restart;

  DenseVector r = residual(A, x, b);
  double rnorm = r.norm();
  rep.residual_history.push_back(rnorm);
  const double ref = reference_norm > 0.0 ? reference_norm : rnorm;
  const double target = spec.tol * ref;
  rep.status = SolveStatus::max_iterations;

  DenseMatrix<double> V(n, m + 1);
  DenseMatrix<double> Hm = DenseMatrix<double>::Zero(m + 1, m);
  DenseVector cs(m), sn(m), g(m + 1);

  while (true) {
    if (rnorm <= target) {
      rep.converged = true;
      rep.status = SolveStatus::converged;
      break;
    }
    if (rep.iterations >= spec.max_iter) break;
    const double cycle_start = rnorm;
    V.col(0) = r / rnorm;
    Hm.setZero();
    g.setZero();
    g(0) = rnorm;
    Index j = 0;
    while (j < m && rep.iterations < spec.max_iter) {
      DenseVector w = spmv(A, M(V.col(j)));
      for (Index i = 0; i <= j; ++i) {
        Hm(i, j) = w.dot(V.col(i));
        w -= Hm(i, j) * V.col(i);
      }
      const double h_next = w.norm();
      Hm(j + 1, j) = h_next;
      for (Index i = 0; i < j; ++i) {
        const double t = cs(i) * Hm(i, j) + sn(i) * Hm(i + 1, j);
        Hm(i + 1, j) = -sn(i) * Hm(i, j) + cs(i) * Hm(i + 1, j);
        Hm(i, j) = t;
      }
      const double denom = std::hypot(Hm(j, j), Hm(j + 1, j));
      cs(j) = denom > 0.0 ? Hm(j, j) / denom : 1.0;
      sn(j) = denom > 0.0 ? Hm(j + 1, j) / denom : 0.0;
      Hm(j, j) = denom;
      Hm(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);
      ++j;
      ++rep.iterations;
      rep.residual_history.push_back(std::abs(g(j)));
      if (h_next == 0.0 || std::abs(g(j)) <= target) break;
      V.col(j) = w / h_next;
    }
    const DenseVector y =
        Hm.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    x += M(V.leftCols(j) * y);
    r = residual(A, x, b);
    rnorm = r.norm();
    rep.residual_history.back() = rnorm;
    if (rnorm <= target) continue;
    if (rnorm > cycle_start * (1.0 - 1e-12)) {
      rep.status = SolveStatus::stagnation;
      break;
    }
  }
  rep.wall_time = elapsed_since(start);
  return out;
}

SolveResult krylov_solve(const CsrMatrix& A, const DenseVector& b, const DenseVector& x0,
                         const Preconditioner& M, const KrylovSpec& spec, double reference_norm) {
  return spec.method == KrylovSpec::Method::pcg ? pcg(A, b, x0, M, spec, reference_norm)
                                                : gmres(A, b, x0, M, spec, reference_norm);
}

SolveResult amg_solve(const Hierarchy& H, const DenseVector& b, const DenseVector& x0,
                      const SmootherSpec& smoother, double tol, Index max_iter) {
  const CsrMatrix& A = H.levels.at(0).A;
  check_system(A, b, x0);
  const auto start = std::chrono::steady_clock::now();
  SolveResult out{x0, {}};
  double rnorm = residual(A, out.x, b).norm();
  const double target = tol * rnorm;
  out.report.residual_history.push_back(rnorm);
  out.report.status = SolveStatus::max_iterations;
  for (Index it = 1; it <= max_iter && rnorm > target; ++it) {
    out.x = vcycle(H, b, out.x, smoother);
    rnorm = residual(A, out.x, b).norm();
    out.report.residual_history.push_back(rnorm);
    out.report.iterations = it;
  }
  if (rnorm <= target) {
    out.report.converged = true;
    out.report.status = SolveStatus::converged;
  }
  out.report.wall_time = elapsed_since(start);
  return out;
}

double reduced_gamma(double gamma, double gamma_min) {
  const double next = gamma / 10.0;
  return next < gamma_min ? 0.0 : next;
}

std::vector<AdaptiveEvent> reintroduce_entries(Hierarchy& H, Index s, double gamma_min,
                                               Index iteration) {
  std::vector<AdaptiveEvent> events;
  size_t first = 0;
  for (size_t l = 1; l < H.levels.size(); ++l) {
    if (H.levels[l].gamma > 0.0) {
      first = l;
      break;
    }
  }
  if (first == 0) return events;
  const size_t last = std::min(H.levels.size(), first + static_cast<size_t>(s));
  for (size_t l = first; l < last; ++l) {
    const double old_gamma = H.levels[l].gamma;
    const double new_gamma = reduced_gamma(old_gamma, gamma_min);
    restore(H, l, new_gamma);
    events.push_back({iteration, l, old_gamma, new_gamma});
  }
  return events;
}

SolveResult adaptive_solve(const CsrMatrix& A, const DenseVector& b, const DenseVector& x0,
                           Hierarchy& H, const AdaptiveSpec& spec, const KrylovSpec& kspec,
                           const SmootherSpec& smoother, Index procs) {
  check_system(A, b, x0);
  spec.validate();
  kspec.validate();
  const auto start = std::chrono::steady_clock::now();
  SolveResult out{x0, {}};
  SolveReport& rep = out.report;

  const double r0 = residual(A, x0, b).norm();
  rep.residual_history.push_back(r0);
  Index sends = procs > 0 ? perf::hierarchy_sends(H, procs) : 0;
  rep.per_iteration_sends.push_back(sends);
  rep.status = SolveStatus::max_iterations;
  if (r0 <= kspec.tol * r0 || r0 == 0.0) {
    rep.converged = true;
    rep.status = SolveStatus::converged;
    rep.wall_time = elapsed_since(start);
    return out;
  }

  while (rep.iterations < kspec.max_iter) {
    KrylovSpec batch = kspec;
    batch.max_iter = std::min(spec.k, kspec.max_iter - rep.iterations);
    const double batch_start = residual(A, out.x, b).norm();
    SolveResult run = krylov_solve(A, b, out.x, vcycle_preconditioner(H, smoother), batch, r0);
    for (size_t i = 1; i < run.report.residual_history.size(); ++i) {
      rep.residual_history.push_back(run.report.residual_history[i]);
      rep.per_iteration_sends.push_back(sends);
    }
    rep.iterations += run.report.iterations;
    out.x = std::move(run.x);
    if (run.report.converged) {
      rep.converged = true;
      rep.status = SolveStatus::converged;
      break;
    }

    const double rnorm = residual(A, out.x, b).norm();
    const double factor =
        run.report.iterations > 0 && run.report.status != SolveStatus::breakdown
            ? std::pow(rnorm / batch_start, 1.0 / static_cast<double>(run.report.iterations))
            : std::numeric_limits<double>::infinity();
    rep.conv_factor_per_batch.push_back(factor);
    if (run.report.iterations == 0 && run.report.status != SolveStatus::breakdown) break;

    const bool fire = spec.trigger == AdaptiveSpec::Trigger::always || !(factor <= spec.rho_max);
    if (fire) {
      const auto events = reintroduce_entries(H, spec.s, spec.gamma_min, rep.iterations);
      rep.adaptive_events.insert(rep.adaptive_events.end(), events.begin(), events.end());
      if (!events.empty() && procs > 0) sends = perf::hierarchy_sends(H, procs);
      if (events.empty() && run.report.status == SolveStatus::breakdown) {
        rep.status = SolveStatus::breakdown;
        break;
      }
    }
    if (rnorm > r0) out.x = x0;
  }
  rep.wall_time = elapsed_since(start);
  return out;
}

}  // namespace sgamg
