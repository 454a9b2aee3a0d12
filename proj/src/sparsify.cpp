#include "sgamg/sparsify.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace sgamg {

namespace {

// A row is treated as zero-sum when |sum_j a_ij| <= kZeroRowSum * sum_j |a_ij|.
constexpr double kZeroRowSum = 1e-10;

CsrMatrix ones_like(const CsrMatrix& A) {
  return CsrMatrix(A.rows(), A.cols(), std::vector<Index>(A.rowptr().begin(), A.rowptr().end()),
                   std::vector<Index>(A.colind().begin(), A.colind().end()),
                   std::vector<double>(A.nnz(), 1.0));
}

/// Matrix with the given pattern and values copied from A (zero where A has
/// no entry).
CsrMatrix gather(const CsrMatrix& A, const std::vector<Triplet<double>>& positions) {
  CsrMatrix pattern = CsrMatrix::from_triplets(A.rows(), A.cols(), positions);
  CsrMatrix out = ones_like(pattern);
  auto values = out.values();
  for (Index i = 0; i < out.rows(); ++i)
    for (Index k = out.rowptr()[i]; k < out.rowptr()[i + 1]; ++k)
      values[k] = A.coeff(i, out.colind()[k]);
  return out;
}

void require_square(const CsrMatrix& A, const char* what) {
  if (!A.is_square()) throw DimensionError(std::string(what) + ": matrix is not square");
}

}  // namespace

SparsityPattern minimal_pattern(const CsrMatrix& A_fine, const CsrMatrix& P,
                                const CsrMatrix& P_inj) {
  if (A_fine.cols() != P.rows() || A_fine.rows() != P_inj.rows() || P.cols() != P_inj.cols())
    throw DimensionError("minimal_pattern: operator shapes do not compose");
  const CsrMatrix inj_t = transpose(abs_values(P_inj));
  const CsrMatrix left = matmat(inj_t, matmat(abs_values(A_fine), abs_values(P)));
  return {ones_like(add_scaled(left, transpose(left), 1.0, 1.0))};
}

SparsityPattern keep_set(const CsrMatrix& A_c, const SparsityPattern& M, double gamma) {
  require_square(A_c, "keep_set");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("keep_set: gamma outside [0, 1]");
  if (M.edges.rows() != A_c.rows() || M.edges.cols() != A_c.cols())
    throw DimensionError("keep_set: pattern shape differs from A_c");
  std::vector<Triplet<double>> keep;
  keep.reserve(2 * A_c.nnz() + A_c.rows());
  for (Index i = 0; i < A_c.rows(); ++i) {
    keep.push_back({i, i, 1.0});
    const auto cols = A_c.row_cols(i);
    const auto vals = A_c.row_values(i);
    double row_max = 0.0;
    for (size_t k = 0; k < cols.size(); ++k)
      if (cols[k] != i) row_max = std::max(row_max, std::abs(vals[k]));
    const double cut = gamma * row_max;
    for (size_t k = 0; k < cols.size(); ++k) {
      const Index j = cols[k];
      if (j == i || vals[k] == 0.0) continue;
      if (M.contains(i, j) || std::abs(vals[k]) >= cut) {
        keep.push_back({i, j, 1.0});
        keep.push_back({j, i, 1.0});
      }
    }
  }
  return {ones_like(CsrMatrix::from_triplets(A_c.rows(), A_c.cols(), keep))};
}

SparsifyResult lump_diagonal(const CsrMatrix& A_c, const SparsityPattern& N) {
  require_square(A_c, "lump_diagonal");
  const Index n = A_c.rows();

  // Column retained by the row-maximum rule, or -1.
  std::vector<Index> ismax(n, -1);
  for (Index i = 0; i < n; ++i) {
    const auto cols = A_c.row_cols(i);
    const auto vals = A_c.row_values(i);
    double row_max = 0.0, sum = 0.0, abs_sum = 0.0;
    bool others_dropped = true;
    Index arg = -1;
    for (size_t k = 0; k < cols.size(); ++k) {
      sum += vals[k];
      abs_sum += std::abs(vals[k]);
      if (cols[k] == i) continue;
      if (N.contains(i, cols[k])) others_dropped = false;
      if (std::abs(vals[k]) > row_max) {
        row_max = std::abs(vals[k]);
        arg = cols[k];
      }
    }
    if (arg >= 0 && others_dropped && std::abs(sum) <= kZeroRowSum * abs_sum) ismax[i] = arg;
  }

  std::vector<Triplet<double>> positions;
  positions.reserve(A_c.nnz() + n);
  for (Index i = 0; i < n; ++i) {
    positions.push_back({i, i, 1.0});
    for (Index j : A_c.row_cols(i))
      if (j != i && (N.contains(i, j) || ismax[i] == j || ismax[j] == i))
        positions.push_back({i, j, 1.0});
  }
  CsrMatrix A_hat = gather(A_c, positions);

  DeltaLog delta;
  auto values = A_hat.values();
  for (Index i = 0; i < n; ++i) {
    const Index diag = A_hat.find(i, i);
    const auto cols = A_c.row_cols(i);
    const auto vals = A_c.row_values(i);
    for (size_t k = 0; k < cols.size(); ++k) {
      const Index j = cols[k];
      if (j == i || A_hat.find(i, j) >= 0) continue;
      values[diag] += vals[k];
      delta.records.push_back({i, j, vals[k], {{i, i, 1.0}}});
    }
  }
  return {prune(A_hat), std::move(delta)};
}

SparsifyResult lump_neighbors(const CsrMatrix& A_c, const SparsityPattern& N,
                              const StrengthMatrix& S_c) {
  require_square(A_c, "lump_neighbors");
  const Index n = A_c.rows();
  const CsrMatrix& S = S_c.pattern;
  if (S.rows() != n) throw DimensionError("lump_neighbors: strength matrix shape");

  // W(i, j): strong neighbours k != i of j with (i, k) kept.
  auto targets = [&](Index i, Index j) {
    std::vector<Index> w;
    const auto strong = S.row_cols(j);
    const auto kept = N.edges.row_cols(i);
    std::set_intersection(strong.begin(), strong.end(), kept.begin(), kept.end(),
                          std::back_inserter(w));
    std::erase(w, i);
    return w;
  };
  auto dropped_without_target = [&](Index i, Index j) {
    return A_c.find(i, j) >= 0 && !N.contains(i, j) && targets(i, j).empty();
  };

  std::vector<Triplet<double>> positions;
  positions.reserve(A_c.nnz() + N.size());
  for (Index i = 0; i < n; ++i)
    for (Index j : N.edges.row_cols(i)) positions.push_back({i, j, 1.0});
  for (Index i = 0; i < n; ++i)
    for (Index j : A_c.row_cols(i))
      if (!N.contains(i, j) && (dropped_without_target(i, j) || dropped_without_target(j, i)))
        positions.push_back({i, j, 1.0});
  CsrMatrix A_hat = gather(A_c, positions);

  DeltaLog delta;
  auto values = A_hat.values();
  for (Index i = 0; i < n; ++i) {
    const auto cols = A_c.row_cols(i);
    const auto vals = A_c.row_values(i);
    for (size_t k = 0; k < cols.size(); ++k) {
      const Index j = cols[k];
      if (A_hat.find(i, j) >= 0) continue;
      const double v = vals[k];
      const std::vector<Index> w = targets(i, j);
      double total = 0.0;
      for (Index m : w) total += S.coeff(j, m);
      DeltaRecord record{i, j, v, {}};
      auto at = [&](Index r, Index c) -> double& {
        const Index pos = A_hat.find(r, c);
        if (pos < 0) throw std::logic_error("lump_neighbors: keep set is not symmetric");
        return values[pos];
      };
      for (Index m : w) {
        const double alpha = S.coeff(j, m) / total;
        at(i, m) += alpha * v;
        at(m, i) += alpha * v;
        at(m, m) -= alpha * v;
        record.destinations.push_back({i, m, alpha});
        record.destinations.push_back({m, i, alpha});
        record.destinations.push_back({m, m, -alpha});
      }
      delta.records.push_back(std::move(record));
    }
  }
  return {prune(A_hat), std::move(delta)};
}

SparsifyResult sparsify(const CsrMatrix& A_c, const CsrMatrix& A_fine, const CsrMatrix& P,
                        const CsrMatrix& P_inj, const StrengthMatrix& S_c, double gamma,
                        Lumping lumping) {
  if (P.cols() != A_c.rows()) throw DimensionError("sparsify: P does not map onto A_c");
  const SparsityPattern M = minimal_pattern(A_fine, P, P_inj);
  const SparsityPattern N = keep_set(A_c, M, gamma);
  SparsifyResult result =
      lumping == Lumping::diagonal ? lump_diagonal(A_c, N) : lump_neighbors(A_c, N, S_c);
  result.delta.gamma = gamma;
  return result;
}

void resparsify_level(Hierarchy& H, size_t level, Variant variant, Lumping lumping) {
  if (level == 0 || level >= H.levels.size())
    throw std::out_of_range("resparsify_level: level must be a coarse level");
  if (variant == Variant::nongalerkin)
    throw std::invalid_argument("resparsify_level: non-Galerkin hierarchies are not lossless");
  Level& target = H.levels[level];
  const Level& finer = H.levels[level - 1];
  if (target.gamma == 0.0) {
    target.A_hat = target.A;
    target.delta = DeltaLog{};
  } else {
    const CsrMatrix& fine = variant == Variant::sparse ? finer.A : finer.A_hat;
    SparsifyResult result =
        sparsify(target.A, fine, finer.P, finer.P_inj, target.S, target.gamma, lumping);
    target.A_hat = std::move(result.A_hat);
    target.delta = std::move(result.delta);
  }
  if (level + 1 == H.levels.size()) H.factor_coarsest();
}

void sparse_hybrid_setup(Hierarchy& H, const DropSchedule& schedule) {
  schedule.validate();
  if (schedule.gammas.size() != H.levels.size())
    throw std::invalid_argument("sparse_hybrid_setup: schedule has " +
                                std::to_string(schedule.gammas.size()) + " tolerances for " +
                                std::to_string(H.levels.size()) + " levels");
  if (schedule.variant == Variant::nongalerkin)
    throw std::invalid_argument("sparse_hybrid_setup: variant must be sparse or hybrid");
  if (H.variant == Variant::nongalerkin)
    throw std::invalid_argument("sparse_hybrid_setup: hierarchy is not a Galerkin hierarchy");

  H.variant = schedule.variant;
  H.lumping = schedule.lumping;
  H.levels[0].A_hat = H.levels[0].A;
  H.levels[0].gamma = 0.0;
  for (size_t l = 1; l < H.levels.size(); ++l) {
    H.levels[l].gamma = schedule.gammas[l];
    resparsify_level(H, l, schedule.variant, schedule.lumping);
  }
  H.factor_coarsest();
}

void restore(Hierarchy& H, size_t level, double new_gamma) {
  if (level == 0 || level >= H.levels.size())
    throw std::out_of_range("restore: level must be a coarse level");
  if (H.variant == Variant::nongalerkin)
    throw std::invalid_argument("restore: non-Galerkin hierarchies are not lossless");
  Level& target = H.levels[level];
  if (new_gamma > target.gamma)
    throw std::invalid_argument("restore: new tolerance exceeds the current one");
  if (new_gamma < 0.0) throw std::invalid_argument("restore: negative tolerance");
  if (new_gamma == target.gamma) return;
  target.gamma = new_gamma;
  resparsify_level(H, level, H.variant, H.lumping);
  // Hybrid patterns of coarser levels depend on this level's operator.
  if (H.variant == Variant::hybrid)
    for (size_t l = level + 1; l < H.levels.size(); ++l)
      if (H.levels[l].gamma > 0.0) resparsify_level(H, l, H.variant, H.lumping);
}

CsrMatrix replay_inverse(const CsrMatrix& A_hat, const DeltaLog& delta) {
  std::map<std::pair<Index, Index>, double> entries;
  for (Index i = 0; i < A_hat.rows(); ++i) {
    const auto cols = A_hat.row_cols(i);
    const auto vals = A_hat.row_values(i);
    for (size_t k = 0; k < cols.size(); ++k) entries[{i, cols[k]}] = vals[k];
  }
  for (auto it = delta.records.rbegin(); it != delta.records.rend(); ++it) {
    for (auto d = it->destinations.rbegin(); d != it->destinations.rend(); ++d)
      entries[{d->row, d->col}] -= d->fraction * it->value_removed;
    entries[{it->row, it->col}] += it->value_removed;
  }
  std::vector<Triplet<double>> triplets;
  triplets.reserve(entries.size());
  for (const auto& [pos, v] : entries) triplets.push_back({pos.first, pos.second, v});
  return CsrMatrix::from_triplets(A_hat.rows(), A_hat.cols(), triplets);
}

void write_delta_log(const DeltaLog& delta, std::ostream& out) {
  out << nlohmann::json{{"gamma", delta.gamma}, {"records", delta.records.size()}}.dump() << '\n';
  for (const auto& r : delta.records) {
    nlohmann::json dest = nlohmann::json::array();
    for (const auto& d : r.destinations) dest.push_back({d.row, d.col, d.fraction});
    out << nlohmann::json{{"row", r.row}, {"col", r.col}, {"value", r.value_removed},
                          {"destinations", dest}}
               .dump()
        << '\n';
  }
}

DeltaLog read_delta_log(std::istream& in) {
  DeltaLog delta;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("delta log: missing header");
  delta.gamma = nlohmann::json::parse(line).at("gamma").get<double>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    DeltaRecord r{j.at("row").get<Index>(), j.at("col").get<Index>(),
                  j.at("value").get<double>(), {}};
    for (const auto& d : j.at("destinations"))
      r.destinations.push_back({d.at(0).get<Index>(), d.at(1).get<Index>(), d.at(2).get<double>()});
    delta.records.push_back(std::move(r));
  }
  return delta;
}

}  // namespace sgamg
