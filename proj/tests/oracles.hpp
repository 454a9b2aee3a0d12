#pragma once

// Dense reference implementations used to cross-check the sparse code paths.

#include "sgamg/csr.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using sgamg::CsrMatrix;
using sgamg::Index;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using BoolMat = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline CsrMatrix sparse(const Mat& M) { return CsrMatrix::from_dense(M); }

inline CsrMatrix poisson1d(Index n) {
  std::vector<sgamg::Triplet<double>> t;
  for (Index i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return CsrMatrix::from_triplets(n, n, t);
}

inline CsrMatrix poisson2d_5pt(Index nx, Index ny) {
  std::vector<sgamg::Triplet<double>> t;
  auto id = [&](Index x, Index y) { return x + nx * y; };
  for (Index y = 0; y < ny; ++y)
    for (Index x = 0; x < nx; ++x) {
      t.push_back({id(x, y), id(x, y), 4.0});
      if (x > 0) t.push_back({id(x, y), id(x - 1, y), -1.0});
      if (x + 1 < nx) t.push_back({id(x, y), id(x + 1, y), -1.0});
      if (y > 0) t.push_back({id(x, y), id(x, y - 1), -1.0});
      if (y + 1 < ny) t.push_back({id(x, y), id(x, y + 1), -1.0});
    }
  return CsrMatrix::from_triplets(nx * ny, nx * ny, t);
}

// Q1 element stiffness by 2-point Gauss quadrature on the unit square / cube.
inline Mat gauss_q1_element(int dim, const Mat& K) {
  const double g = 0.5 / std::sqrt(3.0);
  const std::array<double, 2> pts{0.5 - g, 0.5 + g};
  const int nodes = 1 << dim;
  Mat E = Mat::Zero(nodes, nodes);
  auto grad = [&](int a, const std::array<double, 3>& q) {
    Vec d(dim);
    for (int c = 0; c < dim; ++c) {
      double v = 1.0;
      for (int e = 0; e < dim; ++e) {
        const int bit = (a >> e) & 1;
        if (e == c)
          v *= bit ? 1.0 : -1.0;
        else
          v *= bit ? q[e] : 1.0 - q[e];
      }
      d(c) = v;
    }
    return d;
  };
  const int npts = 1 << dim;
  for (int p = 0; p < npts; ++p) {
    std::array<double, 3> q{pts[p & 1], pts[(p >> 1) & 1], pts[(p >> 2) & 1]};
    const double w = 1.0 / npts;
    for (int a = 0; a < nodes; ++a)
      for (int b = 0; b < nodes; ++b) E(a, b) += w * grad(a, q).dot(K * grad(b, q));
  }
  return E;
}

// Dense assembly on an (n+2)^dim node grid, then boundary rows/columns removed.
inline Mat assemble_q1(int dim, Index n, const Mat& K) {
  const Mat E = gauss_q1_element(dim, K);
  const Index m = n + 2;
  const Index total = dim == 2 ? m * m : m * m * m;
  Mat G = Mat::Zero(total, total);
  const Index elems = n + 1;
  const Index ez = dim == 2 ? 1 : elems;
  for (Index ex = 0; ex < elems; ++ex)
    for (Index ey = 0; ey < elems; ++ey)
      for (Index eZ = 0; eZ < ez; ++eZ) {
        std::vector<Index> ids(1 << dim);
        for (int a = 0; a < (1 << dim); ++a)
          ids[a] = (ex + (a & 1)) + m * (ey + ((a >> 1) & 1)) + m * m * (eZ + ((a >> 2) & 1));
        for (int a = 0; a < (1 << dim); ++a)
          for (int b = 0; b < (1 << dim); ++b) G(ids[a], ids[b]) += E(a, b);
      }
  std::vector<Index> interior;
  for (Index z = 0; z < (dim == 2 ? 1 : m); ++z)
    for (Index y = 1; y <= n; ++y)
      for (Index x = 1; x <= n; ++x)
        if (dim == 2 || (z >= 1 && z <= n)) interior.push_back(x + m * y + m * m * z);
  Mat A(interior.size(), interior.size());
  for (size_t i = 0; i < interior.size(); ++i)
    for (size_t j = 0; j < interior.size(); ++j) A(i, j) = G(interior[i], interior[j]);
  return A;
}

inline BoolMat strength(const Mat& A, double theta) {
  const Index n = A.rows();
  BoolMat S = BoolMat::Constant(n, n, false);
  for (Index i = 0; i < n; ++i) {
    double m = 0.0;
    for (Index j = 0; j < n; ++j)
      if (j != i) m = std::max(m, -A(i, j));
    if (m <= 0.0) continue;
    for (Index j = 0; j < n; ++j)
      if (j != i && A(i, j) != 0.0 && -A(i, j) >= theta * m) S(i, j) = true;
  }
  return S;
}

// Greedy Ruge-Stueben splitting recomputing every measure from scratch.
inline std::vector<bool> rs_split(const BoolMat& S, const Mat& A) {
  enum { U, C, F };
  const Index n = S.rows();
  std::vector<int> state(n, U);
  auto make_c = [&](Index i) {
    state[i] = C;
    for (Index j = 0; j < n; ++j)
      if (state[j] == U && S(j, i)) state[j] = F;
  };
  for (Index i = 0; i < n; ++i) {
    if (S.row(i).any() || state[i] != U) continue;
    bool offdiag = false;
    for (Index j = 0; j < n; ++j) offdiag = offdiag || (j != i && A(i, j) != 0.0);
    if (offdiag)
      make_c(i);
    else
      state[i] = F;
  }
  while (true) {
    Index best = -1, best_m = 0;
    for (Index i = 0; i < n; ++i) {
      if (state[i] != U) continue;
      Index m = 0;
      for (Index j = 0; j < n; ++j)
        if (S(j, i)) m += state[j] == U ? 1 : state[j] == F ? 2 : 0;
      if (m > best_m) {
        best_m = m;
        best = i;
      }
    }
    if (best < 0) break;
    make_c(best);
  }
  for (Index i = 0; i < n; ++i)
    if (state[i] == U) state[i] = F;
  for (Index i = 0; i < n; ++i) {
    if (state[i] != F || !S.row(i).any()) continue;
    bool has_c = false;
    for (Index j = 0; j < n; ++j) has_c = has_c || (S(i, j) && state[j] == C);
    if (!has_c) state[i] = C;
  }
  std::vector<bool> coarse(n);
  for (Index i = 0; i < n; ++i) coarse[i] = state[i] == C;
  return coarse;
}

inline Mat direct_interpolation(const Mat& A, const BoolMat& S, const std::vector<bool>& coarse) {
  const Index n = A.rows();
  std::vector<Index> cidx(n, -1);
  Index nc = 0;
  for (Index i = 0; i < n; ++i)
    if (coarse[i]) cidx[i] = nc++;
  Mat P = Mat::Zero(n, nc);
  for (Index i = 0; i < n; ++i) {
    if (coarse[i]) {
      P(i, cidx[i]) = 1.0;
      continue;
    }
    double all = 0.0, strong_c = 0.0;
    for (Index k = 0; k < n; ++k) {
      if (k == i) continue;
      all += A(i, k);
      if (S(i, k) && coarse[k]) strong_c += A(i, k);
    }
    for (Index j = 0; j < n; ++j)
      if (S(i, j) && coarse[j]) P(i, cidx[j]) = -(A(i, j) / A(i, i)) * all / strong_c;
  }
  return P;
}

inline Mat injection(const std::vector<bool>& coarse) {
  const Index n = static_cast<Index>(coarse.size());
  const Index nc = std::count(coarse.begin(), coarse.end(), true);
  Mat R = Mat::Zero(n, nc);
  Index c = 0;
  for (Index i = 0; i < n; ++i)
    if (coarse[i]) R(i, c++) = 1.0;
  return R;
}

inline BoolMat minimal_pattern(const Mat& A, const Mat& P, const Mat& Pinj) {
  const Mat L = Pinj.cwiseAbs().transpose() * A.cwiseAbs() * P.cwiseAbs();
  const Mat M = L + L.transpose();
  return M.array() > 0.0;
}

inline BoolMat keep_set(const Mat& Ac, const BoolMat& M, double gamma) {
  const Index n = Ac.rows();
  BoolMat N = BoolMat::Constant(n, n, false);
  for (Index i = 0; i < n; ++i) {
    N(i, i) = true;
    double m = 0.0;
    for (Index j = 0; j < n; ++j)
      if (j != i) m = std::max(m, std::abs(Ac(i, j)));
    for (Index j = 0; j < n; ++j)
      if (j != i && Ac(i, j) != 0.0 && (M(i, j) || std::abs(Ac(i, j)) >= gamma * m)) {
        N(i, j) = true;
        N(j, i) = true;
      }
  }
  return N;
}

inline Mat lump_diagonal(const Mat& Ac, const BoolMat& N) {
  const Index n = Ac.rows();
  std::vector<Index> keep_max(n, -1);
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0, abs_sum = 0.0, m = 0.0;
    Index arg = -1;
    bool kept_any = false;
    for (Index j = 0; j < n; ++j) {
      sum += Ac(i, j);
      abs_sum += std::abs(Ac(i, j));
      if (j == i || Ac(i, j) == 0.0) continue;
      kept_any = kept_any || N(i, j);
      if (std::abs(Ac(i, j)) > m) {
        m = std::abs(Ac(i, j));
        arg = j;
      }
    }
    if (arg >= 0 && !kept_any && std::abs(sum) <= 1e-10 * abs_sum) keep_max[i] = arg;
  }
  Mat B = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    B(i, i) += Ac(i, i);
    for (Index j = 0; j < n; ++j) {
      if (j == i || Ac(i, j) == 0.0) continue;
      if (N(i, j) || keep_max[i] == j || keep_max[j] == i)
        B(i, j) = Ac(i, j);
      else
        B(i, i) += Ac(i, j);
    }
  }
  return B;
}

inline Mat lump_neighbors(const Mat& Ac, const BoolMat& N, const BoolMat& S) {
  const Index n = Ac.rows();
  auto targets = [&](Index i, Index j) {
    std::vector<Index> w;
    for (Index k = 0; k < n; ++k)
      if (k != i && S(j, k) && N(i, k)) w.push_back(k);
    return w;
  };
  BoolMat keep = N;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (Ac(i, j) != 0.0 && !N(i, j) && (targets(i, j).empty() || targets(j, i).empty())) keep(i, j) = true;
  Mat B = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (keep(i, j)) B(i, j) = Ac(i, j);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (Ac(i, j) == 0.0 || keep(i, j)) continue;
      const auto w = targets(i, j);
      double total = 0.0;
      for (Index m : w) total += std::abs(Ac(j, m));
      for (Index m : w) {
        const double part = std::abs(Ac(j, m)) / total * Ac(i, j);
        B(i, m) += part;
        B(m, i) += part;
        B(m, m) -= part;
      }
    }
  return B;
}

// Symmetric Gauss-Seidel sweep as two triangular solves.
inline Vec sym_gauss_seidel(const Mat& A, const Vec& x, const Vec& b) {
  const Mat lower = A.triangularView<Eigen::Lower>();
  const Mat upper = A.triangularView<Eigen::Upper>();
  Vec y = x + lower.triangularView<Eigen::Lower>().solve(b - A * x);
  return y + upper.triangularView<Eigen::Upper>().solve(b - A * y);
}

struct Comm {
  Index s_max = 0;
  Index n_max = 0;
  Index total = 0;
};

inline Comm brute_force_comm(const CsrMatrix& A, Index p) {
  const Index n = A.rows();
  auto owner = [&](Index row) {
    const Index base = n / p, extra = n % p;
    const Index cut = extra * (base + 1);
    return row < cut ? row / (base + 1) : extra + (row - cut) / std::max<Index>(base, 1);
  };
  std::map<std::pair<Index, Index>, std::set<Index>> msgs;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (A.find(i, j) >= 0 && owner(i) != owner(j)) msgs[{owner(i), owner(j)}].insert(j);
  std::vector<Index> count(p, 0);
  Comm c;
  for (const auto& [key, cols] : msgs) {
    ++count[key.first];
    c.n_max = std::max<Index>(c.n_max, cols.size());
    c.total += cols.size();
  }
  for (Index q = 0; q < p; ++q) c.s_max = std::max(c.s_max, count[q]);
  return c;
}

// Symmetric, weakly diagonally dominant, integer-valued.
inline Mat random_sdd(std::mt19937_64& rng, Index n, double density, bool zero_row_sums) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> val(-5, 5);
  Mat A = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (u(rng) < density) {
        int v = val(rng);
        if (zero_row_sums) v = -std::abs(v);
        A(i, j) = A(j, i) = v;
      }
  std::uniform_int_distribution<int> slack(0, 3);
  for (Index i = 0; i < n; ++i) {
    double r = 0.0;
    for (Index j = 0; j < n; ++j)
      if (j != i) r += std::abs(A(i, j));
    A(i, i) = r + (zero_row_sums ? 0 : slack(rng));
    if (A(i, i) == 0.0) A(i, i) = 1.0;
  }
  return A;
}

inline BoolMat random_keep(std::mt19937_64& rng, const Mat& A, double keep_prob) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Index n = A.rows();
  BoolMat N = BoolMat::Constant(n, n, false);
  for (Index i = 0; i < n; ++i) {
    N(i, i) = true;
    for (Index j = i + 1; j < n; ++j)
      if (A(i, j) != 0.0 && u(rng) < keep_prob) N(i, j) = N(j, i) = true;
  }
  return N;
}

inline CsrMatrix pattern_of(const BoolMat& N) {
  std::vector<sgamg::Triplet<double>> t;
  for (Index i = 0; i < N.rows(); ++i)
    for (Index j = 0; j < N.cols(); ++j)
      if (N(i, j)) t.push_back({i, j, 1.0});
  return CsrMatrix::from_triplets(N.rows(), N.cols(), t);
}

}  // namespace oracle
