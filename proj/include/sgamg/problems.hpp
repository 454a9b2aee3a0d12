#pragma once

#include "sgamg/csr.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace sgamg {

enum class ProblemKind { poisson3d_7pt, poisson3d_27pt, aniso2d_9pt, from_file };

std::string_view to_string(ProblemKind kind);
ProblemKind parse_problem_kind(std::string_view name);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::poisson3d_7pt;
  /// Interior grid points per axis; the 2D problem ignores dims[2].
  std::array<Index, 3> dims{16, 16, 16};
  double theta = 0.0;
  double epsilon = 1.0;
  std::optional<std::filesystem::path> path;
};

/// Finite-difference Laplacian, diagonal 6 and -1 per axis neighbor,
/// Dirichlet nodes eliminated, x-fastest ordering.
CsrMatrix poisson3d_7pt(Index nx, Index ny, Index nz);

/// Trilinear (Q1) stiffness matrix of -Laplace on a uniform hexahedral mesh
/// with unit element size. Interior rows carry the 27-point stencil.
CsrMatrix poisson3d_27pt(Index nx, Index ny, Index nz);

/// Bilinear (Q1) stiffness matrix of -div(K grad u), K = Q^T D Q with
/// Q = [[cos t, sin t], [-sin t, cos t]] and D = diag(1, epsilon).
CsrMatrix aniso2d_9pt(Index nx, Index ny, double theta, double epsilon);

/// Dispatches on `spec.kind`; validates the spec first.
CsrMatrix generate(const ProblemSpec& spec);

/// Exact Q1 element matrices (unit element), local node a = ax + 2 ay (+ 4 az).
DenseMatrix<double> q1_laplace_element_3d();
DenseMatrix<double> q1_diffusion_element_2d(double kxx, double kxy, double kyy);

}  // namespace sgamg
