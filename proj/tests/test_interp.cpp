#include <doctest.h>

#include <cmath>
#include <vector>

#include "birkps/grid.hpp"
#include "birkps/interp.hpp"
#include "oracles.hpp"

using namespace birkps;

namespace {

// Evaluate a polynomial given by coefficients (low order first) and its
// derivative, via Horner.
double polyval(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) acc = acc * x + c[i];
  return acc;
}

double polyder(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (int i = static_cast<int>(c.size()) - 1; i >= 1; --i)
    acc = acc * x + i * c[i];
  return acc;
}

}  // namespace

TEST_CASE("interpolation reproduces node samples exactly") {
  for (GridKind k : {GridKind::Cgl, GridKind::Lgr, GridKind::Uniform}) {
    const Grid g = make_grid(k, 10);
    const LagrangeBasis basis = build_basis(g);
    oracles::Rng rng(11);
    Eigen::MatrixXd samples(11, 2);
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 11; ++i) samples(i, j) = rng.sym();
    const Eigen::MatrixXd out = interpolate(basis, samples, g.nodes);
    for (int i = 0; i < 11; ++i)
      for (int j = 0; j < 2; ++j) CHECK(out(i, j) == samples(i, j));
  }
}

TEST_CASE("cubic through its own samples: value at 0.3") {
  const Grid g = make_grid(GridKind::Cgl, 3);
  const LagrangeBasis basis = build_basis(g);
  Eigen::MatrixXd samples(4, 1);
  for (int i = 0; i < 4; ++i) samples(i, 0) = std::pow(g.nodes[i], 3);
  Eigen::VectorXd q(1);
  q[0] = 0.3;
  const Eigen::MatrixXd out = interpolate(basis, samples, q);
  CHECK(std::abs(out(0, 0) - 0.027) <= 1e-15);
}

TEST_CASE("queries outside the canonical domain are rejected") {
  const Grid g = make_grid(GridKind::Cgl, 4);
  const LagrangeBasis basis = build_basis(g);
  const Eigen::MatrixXd samples = Eigen::MatrixXd::Zero(5, 1);
  Eigen::VectorXd q(1);
  q[0] = 1.1;
  CHECK_THROWS_AS(interpolate(basis, samples, q), std::invalid_argument);
  q[0] = -1.0 - 1e-9;
  CHECK_THROWS_AS(interpolate(basis, samples, q), std::invalid_argument);
  q[0] = 1.0 + 1e-13;  // inside the slack band
  CHECK_NOTHROW(interpolate(basis, samples, q));

  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(4, 1);
  q[0] = 0.0;
  CHECK_THROWS_AS(interpolate(basis, bad, q), std::invalid_argument);
}

TEST_CASE("differentiation matrix: row sums vanish") {
  for (GridKind k : {GridKind::Cgl, GridKind::Lgl, GridKind::Lgr, GridKind::Uniform}) {
    const Grid g = make_grid(k, 24);
    const SpectralOperators ops = diff_matrix(build_basis(g));
    for (int i = 0; i <= 24; ++i) {
      // Summed in assembly order (off-diagonal ascending, diagonal last) the
      // cancellation is exact by construction.
      double acc = 0.0;
      for (int j = 0; j <= 24; ++j)
        if (j != i) acc += ops.D(i, j);
      CHECK(acc + ops.D(i, i) == 0.0);
    }
    CHECK((ops.D * Eigen::VectorXd::Ones(25)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("differentiation matrix: polynomial exactness") {
  oracles::Rng rng(23);
  const std::vector<GridKind> kinds = {GridKind::Cgl, GridKind::Lgl, GridKind::Lgr,
                                       GridKind::Cg, GridKind::Lg};
  for (GridKind k : kinds) {
    for (int n : {4, 8, 16, 32, 64}) {
      const Grid g = make_grid(k, n);
      const SpectralOperators ops = diff_matrix(build_basis(g));
      std::vector<double> coeff(n + 1);
      double cmax = 0.0;
      for (double& c : coeff) {
        c = rng.sym();
        cmax = std::max(cmax, std::abs(c));
      }
      Eigen::VectorXd p(n + 1), dp(n + 1);
      for (int i = 0; i <= n; ++i) {
        p[i] = polyval(coeff, g.nodes[i]);
        dp[i] = polyder(coeff, g.nodes[i]);
      }
      const double err = (ops.D * p - dp).cwiseAbs().maxCoeff();
      CHECK(err <= 1e-11 * n * n * cmax);
    }
  }
  // Equispaced grids amplify rounding through the weight ratios, so the
  // exactness check stays at low order there.
  for (int n : {4, 8, 12}) {
    const Grid g = make_grid(GridKind::Uniform, n);
    const SpectralOperators ops = diff_matrix(build_basis(g));
    std::vector<double> coeff(n + 1, 0.0);
    coeff[n] = 1.0;
    Eigen::VectorXd p(n + 1), dp(n + 1);
    for (int i = 0; i <= n; ++i) {
      p[i] = polyval(coeff, g.nodes[i]);
      dp[i] = polyder(coeff, g.nodes[i]);
    }
    CHECK((ops.D * p - dp).cwiseAbs().maxCoeff() <= 1e-11 * n * n);
  }
}

TEST_CASE("second application of D annihilates affine functions") {
  const Grid g = make_grid(GridKind::Cgl, 32);
  const SpectralOperators ops = diff_matrix(build_basis(g));
  Eigen::VectorXd v(33);
  for (int i = 0; i <= 32; ++i) v[i] = 3.5 * g.nodes[i] - 1.25;
  const double err = (ops.D * (ops.D * v)).cwiseAbs().maxCoeff();
  CHECK(err <= 1e-10 * 32.0 * 32.0 * 3.5);
}

TEST_CASE("operator partitions index into D") {
  const Grid g = make_grid(GridKind::Lgl, 6);
  const SpectralOperators ops = diff_matrix(build_basis(g));
  CHECK(ops.Da.rows() == 6);
  CHECK(ops.Db.rows() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(ops.l0[i] == ops.D(i + 1, 0));
    CHECK(ops.lN[i] == ops.D(i, 6));
    for (int j = 0; j < 6; ++j) {
      CHECK(ops.Da(i, j) == ops.D(i + 1, j + 1));
      CHECK(ops.Db(i, j) == ops.D(i, j));
    }
  }
}

TEST_CASE("modal coefficients match a projection quadrature") {
  const int n = 16;
  const Grid g = make_grid(GridKind::Cgl, n);
  Eigen::VectorXd f(n + 1);
  for (int i = 0; i <= n; ++i) f[i] = std::exp(g.nodes[i]);
  const SpectralCoefficients c = modal_coefficients(g, f);

  constexpr double pi = 3.14159265358979323846;
  for (int m = 0; m <= 8; ++m) {
    const double cm = (m == 0) ? 2.0 : 1.0;
    const double ref = (2.0 / (pi * cm)) * oracles::adaptive_simpson(
        [m](double th) { return std::cos(m * th) * std::exp(std::cos(th)); },
        0.0, pi, 1e-15);
    CHECK(std::abs(c.coeffs[m] - ref) <= 1e-13);
  }
}

TEST_CASE("modal round trip is the identity at the nodes") {
  const int n = 64;
  const Grid g = make_grid(GridKind::Cgl, n);
  oracles::Rng rng(5);
  SpectralCoefficients c;
  c.coeffs.resize(n + 1);
  for (int m = 0; m <= n; ++m) c.coeffs[m] = rng.sym();

  Eigen::VectorXd f(n + 1);
  for (int i = 0; i <= n; ++i) f[i] = chebyshev_eval(c, g.nodes[i]);
  const SpectralCoefficients back = modal_coefficients(g, f);
  CHECK((back.coeffs - c.coeffs).cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::VectorXd f2(n + 1);
  for (int i = 0; i <= n; ++i) f2[i] = chebyshev_eval(back, g.nodes[i]);
  CHECK((f2 - f).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("modal coefficients reject non-cgl grids") {
  const Grid g = make_grid(GridKind::Lgl, 8);
  CHECK_THROWS_AS(modal_coefficients(g, Eigen::VectorXd::Zero(9)),
                  std::invalid_argument);
  const Grid ok = make_grid(GridKind::Cgl, 8);
  CHECK_THROWS_AS(modal_coefficients(ok, Eigen::VectorXd::Zero(5)),
                  std::invalid_argument);
}
