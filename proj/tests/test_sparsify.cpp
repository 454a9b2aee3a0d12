#include "oracles.hpp"

#include <doctest.h>

#include "sgamg/problems.hpp"
#include "sgamg/setup.hpp"
#include "sgamg/sparsify.hpp"

#include <random>
#include <sstream>

using namespace sgamg;
using oracle::BoolMat;
using oracle::Mat;

namespace {

SparsityPattern full_pattern(const CsrMatrix& A) {
  return {abs_values(A)};
}

SparsityPattern dense_pattern(const BoolMat& N) { return {oracle::pattern_of(N)}; }

struct TwoLevel {
  CsrMatrix A, Ac, P, P_inj;
  StrengthMatrix Sc;
};

TwoLevel two_level(const CsrMatrix& A) {
  SetupParams params;
  params.max_levels = 2;
  params.max_size = 1;
  const Hierarchy H = amg_setup(A, params);
  REQUIRE(H.num_levels() == 2);
  return {A, H.levels[1].A, H.levels[0].P, H.levels[0].P_inj, H.levels[1].S};
}

}  // namespace

TEST_CASE("minimal pattern") {
  const CsrMatrix A = oracle::poisson2d_5pt(4, 4);
  const CsrMatrix I = CsrMatrix::identity(16);
  CHECK(same_pattern(minimal_pattern(A, I, I).edges, A));

  const TwoLevel t = two_level(oracle::poisson1d(7));
  const SparsityPattern M = minimal_pattern(t.A, t.P, t.P_inj);
  const BoolMat ref = oracle::minimal_pattern(t.A.to_dense(), t.P.to_dense(), t.P_inj.to_dense());
  CHECK(same_pattern(M.edges, oracle::pattern_of(ref)));

  const TwoLevel u = two_level(aniso2d_9pt(8, 8, 0.4, 0.01));
  CHECK(pattern_contains(u.Ac, minimal_pattern(u.A, u.P, u.P_inj).edges));
}

TEST_CASE("keep set") {
  const TwoLevel t = two_level(oracle::poisson2d_5pt(8, 8));
  const SparsityPattern M = minimal_pattern(t.A, t.P, t.P_inj);
  CHECK(same_pattern(keep_set(t.Ac, M, 0.0).edges, t.Ac));

  const SparsityPattern N1 = keep_set(t.Ac, M, 1.0);
  CHECK(pattern_contains(N1.edges, M.edges));
  for (Index i = 0; i < t.Ac.rows(); ++i) {
    double m = 0.0;
    for (size_t k = 0; k < t.Ac.row_cols(i).size(); ++k)
      if (t.Ac.row_cols(i)[k] != i) m = std::max(m, std::abs(t.Ac.row_values(i)[k]));
    for (size_t k = 0; k < t.Ac.row_cols(i).size(); ++k) {
      const Index j = t.Ac.row_cols(i)[k];
      const bool is_max = j != i && std::abs(t.Ac.row_values(i)[k]) == m;
      if (is_max) CHECK(N1.contains(i, j));
      if (N1.contains(i, j) && j != i && !M.contains(i, j) && !is_max) CHECK(N1.contains(j, i));
    }
  }

  const CsrMatrix B = CsrMatrix::from_dense(
      (Mat(4, 4) << 5, -4, -0.1, 0, -4, 5, 0, 0, -0.1, 0, 6, -5, 0, 0, -5, 5).finished());
  const SparsityPattern N = keep_set(B, {CsrMatrix::identity(4)}, 0.1);
  CHECK(N.contains(0, 1));
  CHECK_FALSE(N.contains(0, 2));
}

TEST_CASE("diagonal lumping") {
  const CsrMatrix A = CsrMatrix::from_dense((Mat(3, 3) << 4, -2, -0.2, -2, 4, 0, -0.2, 0, 4).finished());
  const SparsifyResult same = lump_diagonal(A, full_pattern(A));
  CHECK(same.A_hat == A);
  CHECK(same.delta.empty());

  BoolMat N = BoolMat::Identity(3, 3);
  N(0, 1) = N(1, 0) = true;
  const SparsifyResult r = lump_diagonal(A, dense_pattern(N));
  CHECK(r.A_hat.coeff(0, 0) == doctest::Approx(3.8));
  CHECK(r.A_hat.coeff(2, 2) == doctest::Approx(3.8));
  CHECK(r.A_hat.find(0, 2) < 0);
  CHECK(spmv(r.A_hat, DenseVector::Ones(3)).isApprox(spmv(A, DenseVector::Ones(3))));
  CHECK(r.delta.records.size() == 2);

  const Mat Z = (Mat(4, 4) << 3, -2, -1, 0, -2, 2, 0, 0, -1, 0, 2, -1, 0, 0, -1, 1).finished();
  const BoolMat diag_only = BoolMat::Identity(4, 4);
  const SparsifyResult zr = lump_diagonal(CsrMatrix::from_dense(Z), dense_pattern(diag_only));
  CHECK(zr.A_hat.to_dense() == oracle::lump_diagonal(Z, diag_only));
  CHECK(zr.A_hat.find(0, 1) >= 0);
  CHECK(zr.A_hat.find(1, 0) >= 0);
  CHECK(zr.A_hat.find(2, 0) >= 0);
}

TEST_CASE("neighbour lumping") {
  const Mat A = (Mat(4, 4) << 2.1, -0.1, -1, -1,
                              -0.1, 4.1, -3, -1,
                              -1, -3, 5, -1,
                              -1, -1, -1, 3).finished();
  const CsrMatrix As = CsrMatrix::from_dense(A);
  const StrengthMatrix S = strength(As);
  CHECK(lump_neighbors(As, full_pattern(As), S).A_hat == As);

  BoolMat N = BoolMat::Constant(4, 4, true);
  N(0, 1) = N(1, 0) = false;
  const SparsifyResult r = lump_neighbors(As, dense_pattern(N), S);
  CHECK(r.A_hat.find(0, 1) < 0);
  const DeltaRecord& rec = r.delta.records.front();
  CHECK(rec.row == 0);
  CHECK(rec.col == 1);
  REQUIRE(rec.destinations.size() == 6);
  CHECK(rec.destinations[0].fraction == doctest::Approx(0.75));
  CHECK(rec.destinations[3].fraction == doctest::Approx(0.25));
  CHECK((spmv(r.A_hat, DenseVector::Ones(4)) - A * DenseVector::Ones(4)).norm() < 1e-14);
  CHECK((r.A_hat.to_dense() - oracle::lump_neighbors(A, N, oracle::strength(A, 0.25))).norm() < 1e-14);
  CHECK(is_symmetric(r.A_hat, 1e-14));

  // single admissible neighbour: the whole value moves
  const Mat B = (Mat(3, 3) << 2, -0.5, -1, -0.5, 2, -1, -1, -1, 3).finished();
  BoolMat NB = BoolMat::Constant(3, 3, true);
  NB(0, 1) = NB(1, 0) = false;
  const SparsifyResult rb = lump_neighbors(CsrMatrix::from_dense(B), dense_pattern(NB), strength(CsrMatrix::from_dense(B)));
  CHECK(rb.A_hat.coeff(0, 2) == doctest::Approx(-1.5));
  CHECK(rb.A_hat.coeff(2, 2) == doctest::Approx(4.0));
}

TEST_CASE("sparsify pipeline against dense oracle") {
  for (const CsrMatrix& A : {oracle::poisson1d(40), oracle::poisson2d_5pt(10, 10),
                             aniso2d_9pt(10, 10, 0.39, 0.001)}) {
    const TwoLevel t = two_level(A);
    const Mat Af = t.A.to_dense(), Ac = t.Ac.to_dense();
    const BoolMat M = oracle::minimal_pattern(Af, t.P.to_dense(), t.P_inj.to_dense());
    for (double gamma : {0.0, 0.01, 0.1, 1.0}) {
      const BoolMat N = oracle::keep_set(Ac, M, gamma);
      const Mat diag = oracle::lump_diagonal(Ac, N);
      const Mat nbr = oracle::lump_neighbors(Ac, N, oracle::strength(Ac, 0.25));
      const auto d = sparsify(t.Ac, t.A, t.P, t.P_inj, t.Sc, gamma, Lumping::diagonal);
      const auto n = sparsify(t.Ac, t.A, t.P, t.P_inj, t.Sc, gamma, Lumping::neighbors);
      CHECK((d.A_hat.to_dense() - diag).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((n.A_hat.to_dense() - nbr).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(is_symmetric(d.A_hat, 1e-14));
      CHECK(is_symmetric(n.A_hat, 1e-14 * max_abs(n.A_hat)));
      if (gamma == 0.0) CHECK(d.A_hat == t.Ac);
    }
  }
}

TEST_CASE("sparse and hybrid setup") {
  const CsrMatrix A = aniso2d_9pt(24, 24, 0.39, 0.001);
  SetupParams params;
  params.max_size = 20;
  const Hierarchy G = amg_setup(A, params);
  REQUIRE(G.num_levels() >= 4);

  Hierarchy zero = G;
  sparse_hybrid_setup(zero, DropSchedule{{0.0}, Lumping::diagonal, Variant::hybrid}.fitted(G.num_levels()));
  for (const Level& l : zero.levels) CHECK(l.A_hat == l.A);

  std::vector<double> g(G.num_levels(), 1.0);
  g[0] = g[1] = 0.0;
  Hierarchy sp = G, hy = G;
  sparse_hybrid_setup(sp, DropSchedule{g, Lumping::diagonal, Variant::sparse});
  sparse_hybrid_setup(hy, DropSchedule{g, Lumping::diagonal, Variant::hybrid});
  CHECK(sp.levels[2].A_hat == hy.levels[2].A_hat);
  for (size_t l = 0; l < G.num_levels(); ++l) {
    CHECK(pattern_contains(G.levels[l].A, sp.levels[l].A_hat));
    CHECK(pattern_contains(G.levels[l].A, hy.levels[l].A_hat));
  }

  CHECK_THROWS(sparse_hybrid_setup(sp, DropSchedule{{0.0, 1.0}, Lumping::diagonal, Variant::sparse}));
  CHECK_THROWS(sparse_hybrid_setup(sp, DropSchedule{g, Lumping::diagonal, Variant::nongalerkin}));
}

TEST_CASE("restore") {
  const CsrMatrix A = poisson3d_7pt(10, 10, 10);
  SetupParams params;
  params.max_size = 30;
  const Hierarchy G = amg_setup(A, params);
  for (Variant v : {Variant::sparse, Variant::hybrid}) {
    Hierarchy H = G;
    sparse_hybrid_setup(H, DropSchedule{{0.0, 1.0}, Lumping::diagonal, v}.fitted(G.num_levels()));
    const CsrMatrix before = H.levels[2].A_hat;
    restore(H, 2, 1.0);
    CHECK(H.levels[2].A_hat == before);
    restore(H, 2, 0.1);
    CHECK(H.levels[2].A_hat.nnz() >= before.nnz());
    CHECK(pattern_contains(H.levels[2].A_hat, before));
    CHECK_THROWS(restore(H, 2, 0.5));
    CHECK_THROWS(restore(H, 0, 0.0));
    for (size_t l = 1; l < H.num_levels(); ++l) restore(H, l, 0.0);
    for (size_t l = 0; l < H.num_levels(); ++l) {
      CHECK(H.levels[l].A_hat == G.levels[l].A);
      CHECK(H.levels[l].A == G.levels[l].A);
      CHECK(H.levels[l].delta.empty());
    }
  }
}

TEST_CASE("delta log") {
  const TwoLevel t = two_level(aniso2d_9pt(10, 10, 0.39, 0.001));
  for (Lumping lumping : {Lumping::diagonal, Lumping::neighbors}) {
    const SparsifyResult r = sparsify(t.Ac, t.A, t.P, t.P_inj, t.Sc, 1.0, lumping);
    REQUIRE_FALSE(r.delta.empty());
    std::stringstream io;
    write_delta_log(r.delta, io);
    const DeltaLog back = read_delta_log(io);
    CHECK(back.gamma == 1.0);
    REQUIRE(back.records.size() == r.delta.records.size());
    CHECK(back.records.back().value_removed == r.delta.records.back().value_removed);
    CHECK(back.records.back().destinations.size() == r.delta.records.back().destinations.size());

    const CsrMatrix undone = replay_inverse(r.A_hat, r.delta);
    CHECK((undone.to_dense() - t.Ac.to_dense()).cwiseAbs().maxCoeff() < 1e-12 * max_abs(t.Ac));
  }
  std::istringstream bad("{\"gamma\": 1.0, \"records\": 2}\n{\"row\": 0}\n");
  CHECK_THROWS(read_delta_log(bad));
}

TEST_CASE("random symmetric inputs keep symmetry and row sums") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat A = oracle::random_sdd(rng, 30, 0.2, trial % 2 == 0);
    const BoolMat N = oracle::random_keep(rng, A, 0.4);
    const CsrMatrix As = CsrMatrix::from_dense(A);
    const SparsifyResult d = lump_diagonal(As, dense_pattern(N));
    const SparsifyResult n = lump_neighbors(As, dense_pattern(N), strength(As));
    CHECK(d.A_hat.to_dense() == oracle::lump_diagonal(A, N));
    CHECK((n.A_hat.to_dense() - oracle::lump_neighbors(A, N, oracle::strength(A, 0.25))).norm() < 1e-12);
    CHECK(spmv(d.A_hat, DenseVector::Ones(30)).isApprox(A.rowwise().sum()));
    CHECK((spmv(n.A_hat, DenseVector::Ones(30)) - A.rowwise().sum()).norm() < 1e-12);
  }
}
