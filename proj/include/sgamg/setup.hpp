#pragma once

#include "sgamg/hierarchy.hpp"

#include <optional>

namespace sgamg {

/// Classical strength of connection: j != i is strong for row i iff
/// -a_ij >= theta_s * max_{k != i}(-a_ik). Rows whose largest negative
/// coupling is <= 0 have no strong edges.
StrengthMatrix strength(const CsrMatrix& A, double theta_s = 0.25);

/// Ruge-Stueben C/F splitting.
///
/// First pass: greedy selection of the unassigned point with the largest
/// measure |S^T_i intersect U| + 2 |S^T_i intersect F| (ties to the lowest
/// index); its unassigned strong transpose-neighbours become F. Points left
/// with zero measure become F. Second pass: F points with strong
/// connections but no strong C neighbour are promoted to C.
///
/// Rows without strong edges become C, except that when `A` is supplied rows
/// with no off-diagonal entries at all become F (interpolated by zero).
CfSplitting cf_split(const StrengthMatrix& S, const CsrMatrix* A = nullptr);

struct Interpolation {
  CsrMatrix P;
  CsrMatrix P_inj;
};

/// Direct interpolation. C rows inject; F row i takes, for each strong C
/// neighbour j, w_ij = -(a_ij / a_ii) * (sum_{k in N_i} a_ik) / (sum_{k in C_i^s} a_ik).
/// `max_elements > 0` truncates each F row to its largest weights and
/// rescales them to the original row sum.
Interpolation interpolation(const CsrMatrix& A, const StrengthMatrix& S, const CfSplitting& split,
                            Index max_elements = 0);

/// P^T A P. Symmetric input yields an exactly symmetric result; a relative
/// asymmetry above 1e-12 before symmetrization is an error.
CsrMatrix galerkin_product(const CsrMatrix& A, const CsrMatrix& P);

/// Builds levels until size <= max_size, max_levels is reached or coarsening
/// stalls. With `nongalerkin`, each coarse operator is sparsified before the
/// next level is formed from it.
Hierarchy amg_setup(const CsrMatrix& A0, const SetupParams& params = {},
                    const std::optional<DropSchedule>& nongalerkin = std::nullopt);

}  // namespace sgamg
