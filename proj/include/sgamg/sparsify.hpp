#pragma once

#include "sgamg/hierarchy.hpp"

#include <iosfwd>

namespace sgamg {

/// Structural edge set; values are all 1.
struct SparsityPattern {
  CsrMatrix edges;

  bool contains(Index i, Index j) const { return edges.find(i, j) >= 0; }
  Index size() const { return edges.nnz(); }
};

struct SparsifyResult {
  CsrMatrix A_hat;
  DeltaLog delta;
};

/// edges(P_inj^T A P + P^T A P_inj), evaluated on |A|, |P| so that no edge is
/// lost to cancellation.
SparsityPattern minimal_pattern(const CsrMatrix& A_fine, const CsrMatrix& P,
                                const CsrMatrix& P_inj);

/// Entries of A_c inside M, or with |a_ij| >= gamma * max_{k != i} |a_ik|,
/// together with their mirrors and every diagonal position.
SparsityPattern keep_set(const CsrMatrix& A_c, const SparsityPattern& M, double gamma);

/// Drops entries outside N, distributing each to the strong neighbours of its
/// column that row i keeps. Pairs with no admissible neighbour are kept.
SparsifyResult lump_neighbors(const CsrMatrix& A_c, const SparsityPattern& N,
                              const StrengthMatrix& S_c);

/// Drops entries outside N onto the diagonal, retaining the row maximum of a
/// zero-sum row whose off-diagonals would otherwise all be removed.
SparsifyResult lump_diagonal(const CsrMatrix& A_c, const SparsityPattern& N);

/// minimal_pattern -> keep_set -> lumping.
SparsifyResult sparsify(const CsrMatrix& A_c, const CsrMatrix& A_fine, const CsrMatrix& P,
                        const CsrMatrix& P_inj, const StrengthMatrix& S_c, double gamma,
                        Lumping lumping);

/// Recomputes levels[level].A_hat from its Galerkin operator at
/// levels[level].gamma, using the variant's fine operator for the pattern.
void resparsify_level(Hierarchy& H, size_t level, Variant variant, Lumping lumping);

/// Post-processes a Galerkin hierarchy into a Sparse or Hybrid Galerkin one.
/// The schedule must have one tolerance per level; gammas[0] is ignored.
void sparse_hybrid_setup(Hierarchy& H, const DropSchedule& schedule);

/// Lowers the tolerance of one level and recomputes its operator from the
/// retained Galerkin matrix. new_gamma may not exceed the current tolerance.
void restore(Hierarchy& H, size_t level, double new_gamma);

/// Undoes a delta log on `A_hat` in reverse insertion order.
CsrMatrix replay_inverse(const CsrMatrix& A_hat, const DeltaLog& delta);

/// One JSON object per line: a header {"gamma": ...} then one record per
/// dropped entry.
void write_delta_log(const DeltaLog& delta, std::ostream& out);
DeltaLog read_delta_log(std::istream& in);

}  // namespace sgamg
