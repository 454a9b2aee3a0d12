#include "oracles.hpp"

#include <doctest.h>

#include "sgamg/problems.hpp"

#include <cmath>
#include <numbers>

using namespace sgamg;
using oracle::Mat;

namespace {

Mat rotated_k(double theta, double eps) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat Q(2, 2);
  Q << c, s, -s, c;
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = eps;
  return Q.transpose() * D * Q;
}

Index row_nnz(const CsrMatrix& A, Index i) { return static_cast<Index>(A.row_cols(i).size()); }

}  // namespace

TEST_CASE("poisson3d_7pt") {
  const CsrMatrix A = poisson3d_7pt(2, 2, 2);
  CHECK(A.rows() == 8);
  for (Index i = 0; i < 8; ++i) {
    CHECK(A.coeff(i, i) == 6.0);
    CHECK(row_nnz(A, i) == 4);
  }
  const CsrMatrix B = poisson3d_7pt(3, 3, 3);
  CHECK(row_nnz(B, 13) == 7);
  CHECK(B.coeff(13, 13) == 6.0);
  CHECK(B.coeff(13, 12) == -1.0);
  CHECK(B.coeff(13, 4) == -1.0);
  CHECK(is_symmetric(B));
}

TEST_CASE("poisson3d_7pt at Table 1 size") {
  const CsrMatrix A = poisson3d_7pt(100, 100, 100);
  CHECK(A.rows() == 1000000);
  CHECK(A.nnz() == 6940000);
}

TEST_CASE("poisson3d_27pt") {
  const CsrMatrix A = poisson3d_27pt(3, 3, 3);
  // face couplings of the exact trilinear stiffness vanish: 21 nonzeros in a 27-point footprint
  CHECK(row_nnz(A, 13) == 21);
  for (Index j : A.row_cols(13)) {
    const Index dx = std::abs(j % 3 - 1), dy = std::abs(j / 3 % 3 - 1), dz = std::abs(j / 9 - 1);
    CHECK(dx + dy + dz != 1);
  }
  CHECK(A.coeff(13, 13) == doctest::Approx(8.0 / 3.0));
  CHECK(A.coeff(13, 13 + 1 + 3) == doctest::Approx(-1.0 / 6.0));
  CHECK(A.coeff(13, 13 + 1 + 3 + 9) == doctest::Approx(-1.0 / 12.0));
  double sum = 0.0;
  for (double v : A.row_values(13)) sum += v;
  CHECK(std::abs(sum) < 1e-14);
  const Mat ref = oracle::assemble_q1(3, 3, Mat::Identity(3, 3));
  CHECK((A.to_dense() - ref).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("aniso2d_9pt") {
  const CsrMatrix iso = aniso2d_9pt(4, 4, 0.0, 1.0);
  const Mat ref_iso = oracle::assemble_q1(2, 4, Mat::Identity(2, 2));
  CHECK((iso.to_dense() - ref_iso).cwiseAbs().maxCoeff() < 1e-14);
  const Index centre = 1 + 4 * 1;
  CHECK(iso.coeff(centre, centre) == doctest::Approx(8.0 / 3.0));
  CHECK(iso.coeff(centre, centre + 1) == doctest::Approx(-1.0 / 3.0));

  const double theta = std::numbers::pi / 8.0;
  const CsrMatrix A = aniso2d_9pt(3, 3, theta, 0.001);
  const Mat ref = oracle::assemble_q1(2, 3, rotated_k(theta, 0.001));
  CHECK((A.to_dense() - ref).cwiseAbs().maxCoeff() < 1e-14);
  double sum = 0.0;
  for (double v : A.row_values(4)) sum += v;
  CHECK(std::abs(sum) < 1e-14);
  CHECK(row_nnz(A, 4) == 9);
}

TEST_CASE("element matrices") {
  const Mat E3 = q1_laplace_element_3d();
  CHECK((E3 - oracle::gauss_q1_element(3, Mat::Identity(3, 3))).norm() < 1e-14);
  const Mat K = rotated_k(0.3, 0.05);
  const Mat E2 = q1_diffusion_element_2d(K(0, 0), K(0, 1), K(1, 1));
  CHECK((E2 - oracle::gauss_q1_element(2, K)).norm() < 1e-14);
}

TEST_CASE("generate validates its problem description") {
  ProblemSpec spec;
  spec.kind = ProblemKind::aniso2d_9pt;
  spec.dims = {8, 8, 1};
  spec.theta = 7.0;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec.theta = 0.5;
  spec.epsilon = 0.0;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec.epsilon = 0.1;
  CHECK(generate(spec).rows() == 64);
  spec.kind = ProblemKind::from_file;
  CHECK_THROWS(generate(spec));
  CHECK(parse_problem_kind("poisson3d_27pt") == ProblemKind::poisson3d_27pt);
  CHECK_THROWS(parse_problem_kind("heat"));
}
