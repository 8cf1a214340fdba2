#include <doctest.h>

#include <cmath>
#include <vector>

#include "birkps/grid.hpp"
#include "legendre.hpp"
#include "oracles.hpp"

using namespace birkps;

TEST_CASE("cgl nodes: closed-form values") {
  const Grid g = make_grid(GridKind::Cgl, 4);
  const double r = std::sqrt(2.0) / 2.0;
  const double expect[5] = {-1.0, -r, 0.0, r, 1.0};
  for (int i = 0; i <= 4; ++i) CHECK(g.nodes[i] == doctest::Approx(expect[i]).epsilon(1e-15));
  CHECK(g.nodes[0] == -1.0);
  CHECK(g.nodes[4] == 1.0);
  CHECK(g.nodes[2] == 0.0);
}

TEST_CASE("cgl physical map on [0,1], order 2") {
  const Grid g = make_grid(GridKind::Cgl, 2, 0.0, 1.0);
  const Eigen::VectorXd t = to_physical_time(g);
  CHECK(t[0] == 0.0);
  CHECK(t[1] == 0.5);
  CHECK(t[2] == 1.0);
}

TEST_CASE("uniform nodes order 2") {
  const Grid g = make_grid(GridKind::Uniform, 2);
  CHECK(g.nodes[0] == -1.0);
  CHECK(g.nodes[1] == 0.0);
  CHECK(g.nodes[2] == 1.0);
}

TEST_CASE("lgl nodes: frozen low orders") {
  const Grid g2 = make_grid(GridKind::Lgl, 2);
  CHECK(g2.nodes[0] == -1.0);
  CHECK(g2.nodes[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(g2.nodes[2] == 1.0);

  const Grid g4 = make_grid(GridKind::Lgl, 4);
  const double r = std::sqrt(3.0 / 7.0);
  CHECK(g4.nodes[1] == doctest::Approx(-r).epsilon(1e-14));
  CHECK(g4.nodes[2] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(g4.nodes[3] == doctest::Approx(r).epsilon(1e-14));
}

TEST_CASE("lgr nodes: frozen low orders") {
  // Roots of P_1 + P_2 and P_2 + P_3.
  const Grid g1 = make_grid(GridKind::Lgr, 1);
  CHECK(g1.nodes[0] == -1.0);
  CHECK(g1.nodes[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  const Grid g2 = make_grid(GridKind::Lgr, 2);
  const double s6 = std::sqrt(6.0);
  CHECK(g2.nodes[1] == doctest::Approx((1.0 - s6) / 5.0).epsilon(1e-14));
  CHECK(g2.nodes[2] == doctest::Approx((1.0 + s6) / 5.0).epsilon(1e-14));
}

TEST_CASE("lg nodes are Legendre roots") {
  const Grid g1 = make_grid(GridKind::Lg, 1);
  const double r = 1.0 / std::sqrt(3.0);
  CHECK(g1.nodes[0] == doctest::Approx(-r).epsilon(1e-14));
  CHECK(g1.nodes[1] == doctest::Approx(r).epsilon(1e-14));

  const Grid g = make_grid(GridKind::Lg, 16);
  for (int i = 0; i <= 16; ++i)
    CHECK(std::abs(birkps::detail::legendre(17, g.nodes[i]).p) <= 1e-12);
}

TEST_CASE("cg nodes: interior family") {
  const Grid g = make_grid(GridKind::Cg, 1);
  const double r = std::sqrt(2.0) / 2.0;
  CHECK(g.nodes[0] == doctest::Approx(-r).epsilon(1e-15));
  CHECK(g.nodes[1] == doctest::Approx(r).epsilon(1e-15));
  CHECK(std::abs(g.nodes[0]) < 1.0);
}

TEST_CASE("nodes strictly increasing across kinds and orders") {
  const std::vector<GridKind> kinds = {GridKind::Cgl, GridKind::Lgl, GridKind::Lgr,
                                       GridKind::Cg, GridKind::Lg, GridKind::Uniform};
  const std::vector<int> orders = {1, 2, 3, 5, 16, 64, 511, 512, 1024, 4096};
  for (GridKind k : kinds) {
    for (int n : orders) {
      const Grid g = make_grid(k, n);
      REQUIRE(g.nodes.size() == n + 1);
      for (int i = 1; i <= n; ++i) REQUIRE(g.nodes[i] > g.nodes[i - 1]);
      REQUIRE(g.nodes[0] >= -1.0);
      REQUIRE(g.nodes[n] <= 1.0);
    }
  }
}

TEST_CASE("cgl grids are nested when the order doubles") {
  const Grid coarse = make_grid(GridKind::Cgl, 16);
  const Grid fine = make_grid(GridKind::Cgl, 32);
  for (int i = 0; i <= 16; ++i)
    CHECK(std::abs(coarse.nodes[i] - fine.nodes[2 * i]) <= 1e-15);
}

TEST_CASE("lgl interior Newton residuals") {
  for (int n : {16, 64, 128}) {
    const Grid g = make_grid(GridKind::Lgl, n);
    for (int i = 1; i < n; ++i)
      CHECK(std::abs(birkps::detail::legendre(n, g.nodes[i]).dp) <= 1e-12 * n * n);
  }
}

TEST_CASE("physical map hits interval endpoints exactly") {
  oracles::Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const double t0 = rng.range(-50.0, 50.0);
    const double tf = t0 + rng.range(0.1, 100.0);
    for (GridKind k : {GridKind::Cgl, GridKind::Lgl, GridKind::Uniform}) {
      const Grid g = make_grid(k, 8, t0, tf);
      const Eigen::VectorXd t = to_physical_time(g);
      CHECK(t[0] == t0);
      CHECK(t[8] == tf);
      for (int i = 1; i <= 8; ++i) CHECK(t[i] > t[i - 1]);
    }
  }
}

TEST_CASE("invalid grid parameters are rejected") {
  CHECK_THROWS_AS(make_grid(GridKind::Cgl, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(GridKind::Lgl, -3), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(GridKind::Cgl, 4, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(GridKind::Cgl, 4, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid_kind("chebyshev"), std::invalid_argument);
}

TEST_CASE("grid kind names round-trip") {
  for (GridKind k : {GridKind::Cgl, GridKind::Lgl, GridKind::Lgr, GridKind::Cg,
                     GridKind::Lg, GridKind::Uniform})
    CHECK(parse_grid_kind(grid_kind_name(k)) == k);
  CHECK(parse_grid_kind("CGL") == GridKind::Cgl);
}

TEST_CASE("internal Gauss rule: degree exactness and symmetry") {
  using birkps::detail::gauss_legendre;
  const auto r2 = gauss_legendre(2);
  CHECK(r2.points[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(r2.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

  const auto r5 = gauss_legendre(5);
  CHECK(r5.weights.sum() == doctest::Approx(2.0).epsilon(1e-15));
  double m8 = 0.0;
  for (int q = 0; q < 5; ++q) m8 += r5.weights[q] * std::pow(r5.points[q], 8);
  CHECK(m8 == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
  for (int q = 0; q < 5; ++q) {
    CHECK(r5.points[q] == -r5.points[4 - q]);
    CHECK(r5.weights[q] == r5.weights[4 - q]);
  }
}
