#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/QR>

#include "birkps/conditioning.hpp"
#include "birkps/grid.hpp"
#include "oracles.hpp"

using namespace birkps;

namespace {

Eigen::MatrixXd orthogonal(int n, oracles::Rng& rng) {
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = rng.sym();
  return Eigen::HouseholderQR<Eigen::MatrixXd>(M).householderQ();
}

}  // namespace

TEST_CASE("condition number recovers planted singular values") {
  oracles::Rng rng(0x5eedu);
  for (int n : {6, 12, 30}) {  // covers both svd code paths
    Eigen::VectorXd sv(n);
    for (int i = 0; i < n; ++i) sv[i] = std::pow(10.0, -3.0 * i / (n - 1.0));
    const Eigen::MatrixXd A =
        orthogonal(n, rng) * sv.asDiagonal() * orthogonal(n, rng).transpose();
    CHECK(std::abs(cond2(A) - 1e3) <= 1e3 * 1e-9);
  }
}

TEST_CASE("condition number of rectangular blocks") {
  // [I | 0] has all singular values 1.
  Eigen::MatrixXd A(3, 7);
  A.setZero();
  A.diagonal().setOnes();
  CHECK(cond2(A) == doctest::Approx(1.0));

  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(4, 4);
  CHECK(std::isinf(cond2(Z)));
}

TEST_CASE("test matrix shapes") {
  const int n = 12;
  for (GridKind k : {GridKind::Cgl, GridKind::Lgl, GridKind::Lgr}) {
    const Grid g = make_grid(k, n);
    CHECK(assemble_test_matrix(g, TestMatrixKind::InnerD).rows() == n);
    CHECK(assemble_test_matrix(g, TestMatrixKind::InnerD).cols() == n);
    CHECK(assemble_test_matrix(g, TestMatrixKind::CLagr).cols() == 2 * n);
    CHECK(assemble_test_matrix(g, TestMatrixKind::CBirk).cols() == 2 * n);
    CHECK(assemble_test_matrix(g, TestMatrixKind::ABirk).cols() == 2 * n + 1);
  }
}

TEST_CASE("augmented block appends the constant column") {
  const Grid g = make_grid(GridKind::Cgl, 10);
  const Eigen::MatrixXd C = assemble_test_matrix(g, TestMatrixKind::CBirk);
  const Eigen::MatrixXd A = assemble_test_matrix(g, TestMatrixKind::ABirk);
  CHECK((A.leftCols(20) - C).cwiseAbs().maxCoeff() == 0.0);
  CHECK((A.col(20) - Eigen::VectorXd::Ones(10)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("conditioning growth across families") {
  // Squaring the order should roughly quadruple the differentiation block's
  // condition number, leave the Birkhoff collocation block flat, and grow the
  // augmented block like sqrt.
  auto kappa = [](TestMatrixKind m, int n) {
    return cond2(assemble_test_matrix(make_grid(GridKind::Cgl, n), m));
  };
  const double d64 = kappa(TestMatrixKind::InnerD, 64);
  const double d128 = kappa(TestMatrixKind::InnerD, 128);
  CHECK(d128 / d64 > 2.5);
  CHECK(d128 / d64 < 6.0);

  const double c64 = kappa(TestMatrixKind::CBirk, 64);
  const double c256 = kappa(TestMatrixKind::CBirk, 256);
  CHECK(c64 < 10.0);
  CHECK(c256 < 10.0);
  CHECK(std::abs(c256 - c64) < 1.0);

  const double a64 = kappa(TestMatrixKind::ABirk, 64);
  const double a256 = kappa(TestMatrixKind::ABirk, 256);
  CHECK(a256 / a64 > 1.4);
  CHECK(a256 / a64 < 3.0);
}

TEST_CASE("sweep fits the expected slopes on cgl") {
  const std::vector<int> orders = {16, 32, 64, 128, 256};
  const CondSweep sweep =
      sweep_and_fit({GridKind::Cgl}, {TestMatrixKind::InnerD, TestMatrixKind::CLagr,
                                      TestMatrixKind::CBirk, TestMatrixKind::ABirk},
                    orders);
  REQUIRE(sweep.series.size() == 4);
  for (const CondSeries& s : sweep.series) {
    REQUIRE(s.supported);
    REQUIRE(!s.partial);
    REQUIRE(s.records.size() == orders.size());
    switch (s.matrix) {
      case TestMatrixKind::InnerD:
      case TestMatrixKind::CLagr:
        CHECK(s.slope > 1.8);
        CHECK(s.slope < 2.2);
        break;
      case TestMatrixKind::CBirk:
        CHECK(std::abs(s.slope) < 0.1);
        break;
      case TestMatrixKind::ABirk:
        CHECK(s.slope > 0.35);
        CHECK(s.slope < 0.65);
        break;
    }
  }
}

TEST_CASE("families outside the integration construction are flagged") {
  const CondSweep sweep = sweep_and_fit({GridKind::Lg, GridKind::Uniform},
                                        {TestMatrixKind::CBirk}, {8, 16});
  for (const CondSeries& s : sweep.series) {
    CHECK(!s.supported);
    CHECK(s.records.empty());
  }
  CHECK_THROWS(assemble_test_matrix(make_grid(GridKind::Lg, 8), TestMatrixKind::ABirk));
}
