#include "sgamg/setup.hpp"

#include "sgamg/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace sgamg {

std::string_view to_string(Lumping lumping) {
  return lumping == Lumping::neighbors ? "neighbors" : "diagonal";
}

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::sparse: return "sparse";
    case Variant::hybrid: return "hybrid";
    case Variant::nongalerkin: return "nongalerkin";
  }
  return "unknown";
}

Lumping parse_lumping(std::string_view name) {
  if (name == "neighbors") return Lumping::neighbors;
  if (name == "diagonal") return Lumping::diagonal;
  throw std::invalid_argument("unknown lumping '" + std::string(name) + "'");
}

Variant parse_variant(std::string_view name) {
  if (name == "sparse") return Variant::sparse;
  if (name == "hybrid") return Variant::hybrid;
  if (name == "nongalerkin") return Variant::nongalerkin;
  throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

void DropSchedule::validate() const {
  for (double g : gammas)
    if (!(g >= 0.0 && g <= 1.0))
      throw std::invalid_argument("drop tolerances must lie in [0, 1]");
}

double DropSchedule::gamma_at(size_t level) const {
  if (gammas.empty()) return 0.0;
  return level < gammas.size() ? gammas[level] : gammas.back();
}

DropSchedule DropSchedule::fitted(size_t levels) const {
  DropSchedule out = *this;
  out.gammas.resize(levels);
  for (size_t l = 0; l < levels; ++l) out.gammas[l] = gamma_at(l);
  return out;
}

void Hierarchy::factor_coarsest() {
  if (levels.empty()) return;
  coarsest.compute(levels.back().A_hat.to_dense());
  const auto& lu = coarsest.matrixLU();
  coarsest_singular = false;
  for (Index i = 0; i < lu.rows(); ++i)
    if (lu(i, i) == 0.0 || !std::isfinite(lu(i, i))) coarsest_singular = true;
  if (lu.rows() > 0 && coarsest.rcond() < 1e-14) coarsest_singular = true;
}

std::vector<double> Hierarchy::gammas() const {
  std::vector<double> g;
  for (const auto& level : levels) g.push_back(level.gamma);
  return g;
}

StrengthMatrix strength(const CsrMatrix& A, double theta_s) {
  if (!(theta_s >= 0.0 && theta_s <= 1.0))
    throw std::invalid_argument("strength threshold must lie in [0, 1]");
  if (!A.is_square()) throw DimensionError("strength: matrix is not square");
  std::vector<Index> rowptr(A.rows() + 1, 0);
  std::vector<Index> colind;
  std::vector<double> values;
  for (Index i = 0; i < A.rows(); ++i) {
    const auto cols = A.row_cols(i);
    const auto vals = A.row_values(i);
    double max_neg = 0.0;
    for (size_t k = 0; k < cols.size(); ++k)
      if (cols[k] != i) max_neg = std::max(max_neg, -vals[k]);
    if (max_neg > 0.0) {
      const double cut = theta_s * max_neg;
      for (size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] != i && -vals[k] >= cut && vals[k] != 0.0) {
          colind.push_back(cols[k]);
          values.push_back(std::abs(vals[k]));
        }
      }
    }
    rowptr[i + 1] = static_cast<Index>(colind.size());
  }
  return {CsrMatrix(A.rows(), A.cols(), std::move(rowptr), std::move(colind), std::move(values)),
          theta_s};
}

CfSplitting cf_split(const StrengthMatrix& S, const CsrMatrix* A) {
  const CsrMatrix& G = S.pattern;
  const Index n = G.rows();
  const CsrMatrix GT = transpose(G);

  enum : unsigned char { U, C, F };
  std::vector<unsigned char> state(n, U);
  std::vector<Index> measure(n, 0);
  for (Index i = 0; i < n; ++i) measure[i] = static_cast<Index>(GT.row_cols(i).size());

  // (-measure, index) so that begin() is the largest measure, lowest index.
  std::set<std::pair<Index, Index>> queue;
  auto set_measure = [&](Index i, Index m) {
    queue.erase({-measure[i], i});
    measure[i] = m;
    queue.insert({-m, i});
  };

  auto make_coarse = [&](Index i) {
    state[i] = C;
    queue.erase({-measure[i], i});
    for (Index j : GT.row_cols(i)) {
      if (state[j] != U) continue;
      state[j] = F;
      queue.erase({-measure[j], j});
      for (Index k : G.row_cols(j))
        if (state[k] == U) set_measure(k, measure[k] + 1);
    }
    for (Index k : G.row_cols(i))
      if (state[k] == U) set_measure(k, measure[k] - 1);
  };

  for (Index i = 0; i < n; ++i) queue.insert({-measure[i], i});

  for (Index i = 0; i < n; ++i) {
    if (!G.row_cols(i).empty() || state[i] != U) continue;
    bool isolated = false;
    if (A != nullptr) {
      isolated = true;
      for (Index j : A->row_cols(i))
        if (j != i) isolated = false;
    }
    if (isolated) {
      state[i] = F;
      queue.erase({-measure[i], i});
    } else {
      make_coarse(i);
    }
  }

  while (!queue.empty()) {
    const auto [neg, i] = *queue.begin();
    if (neg == 0) break;
    make_coarse(i);
  }
  for (Index i = 0; i < n; ++i)
    if (state[i] == U) state[i] = F;

  for (Index i = 0; i < n; ++i) {
    if (state[i] != F || G.row_cols(i).empty()) continue;
    const auto strong = G.row_cols(i);
    if (std::none_of(strong.begin(), strong.end(), [&](Index j) { return state[j] == C; }))
      state[i] = C;
  }

  CfSplitting split;
  split.labels.resize(n);
  split.coarse_index.assign(n, -1);
  for (Index i = 0; i < n; ++i) {
    split.labels[i] = state[i] == C ? PointType::coarse : PointType::fine;
    if (state[i] == C) split.coarse_index[i] = split.num_coarse++;
  }
  return split;
}

Interpolation interpolation(const CsrMatrix& A, const StrengthMatrix& S, const CfSplitting& split,
                            Index max_elements) {
  const Index n = A.rows();
  if (static_cast<Index>(split.labels.size()) != n || S.pattern.rows() != n)
    throw DimensionError("interpolation: splitting does not match matrix");
  std::vector<Index> rowptr(n + 1, 0), inj_rowptr(n + 1, 0);
  std::vector<Index> colind, inj_colind;
  std::vector<double> values, inj_values;
  std::vector<std::pair<Index, double>> weights;

  for (Index i = 0; i < n; ++i) {
    if (split.is_coarse(i)) {
      colind.push_back(split.coarse_index[i]);
      values.push_back(1.0);
      inj_colind.push_back(split.coarse_index[i]);
      inj_values.push_back(1.0);
    } else {
      const auto strong = S.pattern.row_cols(i);
      double diag = 0.0, sum_all = 0.0, sum_c = 0.0;
      const auto cols = A.row_cols(i);
      const auto vals = A.row_values(i);
      for (size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] == i) {
          diag = vals[k];
        } else {
          sum_all += vals[k];
          if (split.is_coarse(cols[k]) && std::binary_search(strong.begin(), strong.end(), cols[k]))
            sum_c += vals[k];
        }
      }
      weights.clear();
      bool has_c = false;
      for (Index j : strong) has_c = has_c || split.is_coarse(j);
      if (!strong.empty() && !has_c)
        throw std::logic_error("interpolation: F point " + std::to_string(i) +
                               " has strong connections but no strong C neighbour");
      if (has_c) {
        if (diag == 0.0) throw std::domain_error("interpolation: zero diagonal in row " + std::to_string(i));
        const double scale = -(sum_all / sum_c) / diag;
        for (size_t k = 0; k < cols.size(); ++k) {
          const Index j = cols[k];
          if (j != i && split.is_coarse(j) && std::binary_search(strong.begin(), strong.end(), j))
            weights.emplace_back(split.coarse_index[j], scale * vals[k]);
        }
        if (max_elements > 0 && static_cast<Index>(weights.size()) > max_elements) {
          double total = 0.0, kept = 0.0;
          for (const auto& w : weights) total += w.second;
          std::stable_sort(weights.begin(), weights.end(), [](const auto& a, const auto& b) {
            return std::abs(a.second) > std::abs(b.second);
          });
          weights.resize(max_elements);
          for (const auto& w : weights) kept += w.second;
          if (kept != 0.0)
            for (auto& w : weights) w.second *= total / kept;
          std::sort(weights.begin(), weights.end());
        }
        for (const auto& [c, w] : weights) {
          if (w == 0.0) continue;
          colind.push_back(c);
          values.push_back(w);
        }
      }
    }
    rowptr[i + 1] = static_cast<Index>(colind.size());
    inj_rowptr[i + 1] = static_cast<Index>(inj_colind.size());
  }
  return {CsrMatrix(n, split.num_coarse, std::move(rowptr), std::move(colind), std::move(values)),
          CsrMatrix(n, split.num_coarse, std::move(inj_rowptr), std::move(inj_colind),
                    std::move(inj_values))};
}

CsrMatrix galerkin_product(const CsrMatrix& A, const CsrMatrix& P) {
  if (A.cols() != P.rows() || !A.is_square())
    throw DimensionError("galerkin_product: A must be square with A.cols == P.rows");
  const CsrMatrix coarse = matmat(transpose(P), matmat(A, P));
  if (!is_symmetric(A)) return coarse;
  const double tol = 1e-12 * max_abs(coarse);
  if (!is_symmetric(coarse, tol))
    throw std::runtime_error("galerkin_product: coarse operator lost symmetry beyond 1e-12");
  return add_scaled(coarse, transpose(coarse), 0.5, 0.5);
}

Hierarchy amg_setup(const CsrMatrix& A0, const SetupParams& params,
                    const std::optional<DropSchedule>& nongalerkin) {
  if (!A0.is_square()) throw DimensionError("amg_setup: matrix is not square");
  if (!is_symmetric(A0, 1e-12 * max_abs(A0)))
    throw std::invalid_argument("amg_setup: input matrix is not symmetric");
  if (params.max_levels < 1) throw std::invalid_argument("amg_setup: max_levels must be >= 1");
  if (nongalerkin) nongalerkin->validate();

  Hierarchy H;
  H.params = params;
  if (nongalerkin) {
    H.variant = Variant::nongalerkin;
    H.lumping = nongalerkin->lumping;
  }
  {
    Level finest;
    finest.A = A0;
    finest.A_hat = A0;
    finest.S = strength(A0, params.theta_s);
    H.levels.push_back(std::move(finest));
  }

  while (H.levels.back().size() > params.max_size &&
         static_cast<Index>(H.levels.size()) < params.max_levels) {
    Level& current = H.levels.back();
    const bool modified = !(current.A_hat == current.A);
    const StrengthMatrix coarsen_strength =
        modified ? strength(current.A_hat, params.theta_s) : current.S;
    const CfSplitting split = cf_split(coarsen_strength, &current.A_hat);
    if (split.num_coarse == 0 || split.num_coarse >= current.size()) {
      H.stalled = true;
      break;
    }
    Interpolation transfer =
        interpolation(current.A_hat, coarsen_strength, split, params.trunc_max_elements);

    Level next;
    next.A = galerkin_product(current.A_hat, transfer.P);
    next.A_hat = next.A;
    next.S = strength(next.A, params.theta_s);
    if (nongalerkin) {
      const double gamma = nongalerkin->gamma_at(H.levels.size());
      if (gamma > 0.0) {
        SparsifyResult sparse = sparsify(next.A, current.A_hat, transfer.P, transfer.P_inj, next.S,
                                         gamma, nongalerkin->lumping);
        next.A_hat = std::move(sparse.A_hat);
        next.delta = std::move(sparse.delta);
      }
      next.gamma = gamma;
    }
    current.P = std::move(transfer.P);
    current.P_inj = std::move(transfer.P_inj);
    H.levels.push_back(std::move(next));
  }
  H.factor_coarsest();
  return H;
}

}  // namespace sgamg
