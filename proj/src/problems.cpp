#include "sgamg/problems.hpp"

#include "sgamg/matrix_market.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace sgamg {

namespace {

// 1D linear-element integrals on [0, 1] with f0 = 1 - x, f1 = x.
// stiffness: int f_i' f_j', mass: int f_i f_j, mixed: int f_i' f_j.
constexpr double kStiff[2][2] = {{1.0, -1.0}, {-1.0, 1.0}};
constexpr double kMass[2][2] = {{1.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 1.0 / 3.0}};
constexpr double kMixed[2][2] = {{-0.5, -0.5}, {0.5, 0.5}};

void require_dims(std::initializer_list<Index> dims) {
  for (Index d : dims)
    if (d < 2) throw std::invalid_argument("grid dimensions must be >= 2, got " + std::to_string(d));
}

}  // namespace

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::poisson3d_7pt: return "poisson3d_7pt";
    case ProblemKind::poisson3d_27pt: return "poisson3d_27pt";
    case ProblemKind::aniso2d_9pt: return "aniso2d_9pt";
    case ProblemKind::from_file: return "from_file";
  }
  return "unknown";
}

ProblemKind parse_problem_kind(std::string_view name) {
  for (auto kind : {ProblemKind::poisson3d_7pt, ProblemKind::poisson3d_27pt,
                    ProblemKind::aniso2d_9pt, ProblemKind::from_file})
    if (to_string(kind) == name) return kind;
  throw std::invalid_argument("unknown problem kind '" + std::string(name) + "'");
}

CsrMatrix poisson3d_7pt(Index nx, Index ny, Index nz) {
  require_dims({nx, ny, nz});
  const Index n = nx * ny * nz;
  std::vector<Index> rowptr(n + 1, 0);
  std::vector<Index> colind;
  std::vector<double> values;
  colind.reserve(7 * n);
  values.reserve(7 * n);
  const Index sy = nx, sz = nx * ny;
  for (Index k = 0; k < nz; ++k) {
    for (Index j = 0; j < ny; ++j) {
      for (Index i = 0; i < nx; ++i) {
        const Index row = i + sy * j + sz * k;
        auto push = [&](Index col, double v) {
          colind.push_back(col);
          values.push_back(v);
        };
        if (k > 0) push(row - sz, -1.0);
        if (j > 0) push(row - sy, -1.0);
        if (i > 0) push(row - 1, -1.0);
        push(row, 6.0);
        if (i + 1 < nx) push(row + 1, -1.0);
        if (j + 1 < ny) push(row + sy, -1.0);
        if (k + 1 < nz) push(row + sz, -1.0);
        rowptr[row + 1] = static_cast<Index>(colind.size());
      }
    }
  }
  return CsrMatrix(n, n, std::move(rowptr), std::move(colind), std::move(values));
}

DenseMatrix<double> q1_laplace_element_3d() {
  DenseMatrix<double> K(8, 8);
  for (int a = 0; a < 8; ++a) {
    const int ax = a & 1, ay = (a >> 1) & 1, az = (a >> 2) & 1;
    for (int b = 0; b < 8; ++b) {
      const int bx = b & 1, by = (b >> 1) & 1, bz = (b >> 2) & 1;
      K(a, b) = kStiff[ax][bx] * kMass[ay][by] * kMass[az][bz] +
                kMass[ax][bx] * kStiff[ay][by] * kMass[az][bz] +
                kMass[ax][bx] * kMass[ay][by] * kStiff[az][bz];
    }
  }
  return K;
}

DenseMatrix<double> q1_diffusion_element_2d(double kxx, double kxy, double kyy) {
  DenseMatrix<double> K(4, 4);
  for (int a = 0; a < 4; ++a) {
    const int ax = a & 1, ay = a >> 1;
    for (int b = 0; b < 4; ++b) {
      const int bx = b & 1, by = b >> 1;
      K(a, b) = kxx * kStiff[ax][bx] * kMass[ay][by] + kyy * kMass[ax][bx] * kStiff[ay][by] +
                kxy * (kMixed[ax][bx] * kMixed[by][ay] + kMixed[bx][ax] * kMixed[ay][by]);
    }
  }
  return K;
}

CsrMatrix poisson3d_27pt(Index nx, Index ny, Index nz) {
  require_dims({nx, ny, nz});
  const DenseMatrix<double> Ke = q1_laplace_element_3d();
  const Index n = nx * ny * nz;
  // Mesh nodes run 0..n{x,y,z}+1; boundary nodes carry Dirichlet values.
  auto dof = [&](Index I, Index J, Index K) -> Index {
    if (I < 1 || I > nx || J < 1 || J > ny || K < 1 || K > nz) return -1;
    return (I - 1) + nx * ((J - 1) + ny * (K - 1));
  };
  std::vector<Triplet<double>> entries;
  entries.reserve(static_cast<size_t>(27 * n));
  for (Index ek = 0; ek <= nz; ++ek)
    for (Index ej = 0; ej <= ny; ++ej)
      for (Index ei = 0; ei <= nx; ++ei) {
        Index local[8];
        for (int a = 0; a < 8; ++a)
          local[a] = dof(ei + (a & 1), ej + ((a >> 1) & 1), ek + ((a >> 2) & 1));
        for (int a = 0; a < 8; ++a) {
          if (local[a] < 0) continue;
          for (int b = 0; b < 8; ++b)
            if (local[b] >= 0) entries.push_back({local[a], local[b], Ke(a, b)});
        }
      }
  return CsrMatrix::from_triplets(n, n, entries);
}

CsrMatrix aniso2d_9pt(Index nx, Index ny, double theta, double epsilon) {
  require_dims({nx, ny});
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  Eigen::Matrix2d Q;
  Q << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  const Eigen::Matrix2d D = Eigen::Vector2d(1.0, epsilon).asDiagonal();
  const Eigen::Matrix2d K = Q.transpose() * D * Q;
  const DenseMatrix<double> Ke = q1_diffusion_element_2d(K(0, 0), 0.5 * (K(0, 1) + K(1, 0)), K(1, 1));

  const Index n = nx * ny;
  auto dof = [&](Index I, Index J) -> Index {
    if (I < 1 || I > nx || J < 1 || J > ny) return -1;
    return (I - 1) + nx * (J - 1);
  };
  std::vector<Triplet<double>> entries;
  entries.reserve(static_cast<size_t>(9 * n));
  for (Index ej = 0; ej <= ny; ++ej)
    for (Index ei = 0; ei <= nx; ++ei) {
      Index local[4];
      for (int a = 0; a < 4; ++a) local[a] = dof(ei + (a & 1), ej + (a >> 1));
      for (int a = 0; a < 4; ++a) {
        if (local[a] < 0) continue;
        for (int b = 0; b < 4; ++b)
          if (local[b] >= 0) entries.push_back({local[a], local[b], Ke(a, b)});
      }
    }
  return CsrMatrix::from_triplets(n, n, entries);
}

CsrMatrix generate(const ProblemSpec& spec) {
  switch (spec.kind) {
    case ProblemKind::poisson3d_7pt:
      return poisson3d_7pt(spec.dims[0], spec.dims[1], spec.dims[2]);
    case ProblemKind::poisson3d_27pt:
      return poisson3d_27pt(spec.dims[0], spec.dims[1], spec.dims[2]);
    case ProblemKind::aniso2d_9pt:
      if (!(spec.theta >= 0.0 && spec.theta < 2.0 * std::numbers::pi))
        throw std::invalid_argument("theta must lie in [0, 2*pi)");
      return aniso2d_9pt(spec.dims[0], spec.dims[1], spec.theta, spec.epsilon);
    case ProblemKind::from_file:
      if (!spec.path) throw std::invalid_argument("from_file problem requires a path");
      return read_matrix_market(*spec.path);
  }
  throw std::invalid_argument("unknown problem kind");
}

}  // namespace sgamg
