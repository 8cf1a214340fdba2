#include "birkps/grid.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include "legendre.hpp"

namespace birkps {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNewtonTol = 1e-14;
constexpr int kNewtonMaxIter = 100;

// Newton refinement of a polynomial root from a nearby seed.
template <typename F>
double newton_root(double seed, F&& value_and_slope) {
  double x = seed;
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    const auto [f, df] = value_and_slope(x);
    const double dx = f / df;
    x -= dx;
    if (std::abs(dx) <= kNewtonTol) return x;
  }
  throw std::runtime_error("grid: Newton iteration did not converge");
}

// Antisymmetric closed form for Chebyshev-Gauss-Lobatto nodes.
Eigen::VectorXd cgl_nodes(int n) {
  Eigen::VectorXd tau(n + 1);
  for (int i = 0; i <= n; ++i)
    tau[i] = std::sin(kPi * (2.0 * i - n) / (2.0 * n));
  tau[0] = -1.0;
  tau[n] = 1.0;
  return tau;
}

Eigen::VectorXd cg_nodes(int n) {
  Eigen::VectorXd tau(n + 1);
  for (int i = 0; i <= n; ++i)
    tau[i] = std::sin(kPi * (2.0 * i - n) / (2.0 * n + 2.0));
  return tau;
}

// Interior Legendre-Gauss-Lobatto nodes are the roots of P_N'; Newton from
// Chebyshev-Lobatto seeds.
Eigen::VectorXd lgl_nodes(int n) {
  Eigen::VectorXd tau(n + 1);
  tau[0] = -1.0;
  tau[n] = 1.0;
  const Eigen::VectorXd seeds = cgl_nodes(n);
  for (int i = 1; i < n; ++i) {
    tau[i] = newton_root(seeds[i], [n](double x) {
      const auto e = detail::legendre(n, x);
      return std::pair<double, double>(e.dp, e.ddp);
    });
  }
  return tau;
}

// Legendre-Gauss-Radau nodes (left endpoint included) are the roots of
// P_N + P_{N+1}; Newton from Chebyshev-Radau seeds.
Eigen::VectorXd lgr_nodes(int n) {
  Eigen::VectorXd tau(n + 1);
  tau[0] = -1.0;
  for (int j = 1; j <= n; ++j) {
    const double seed = -std::cos(2.0 * kPi * j / (2.0 * n + 1.0));
    tau[j] = newton_root(seed, [n](double x) {
      const auto a = detail::legendre(n, x);
      const auto b = detail::legendre(n + 1, x);
      return std::pair<double, double>(a.p + b.p, a.dp + b.dp);
    });
  }
  return tau;
}

// Legendre-Gauss nodes are the roots of P_{N+1}; Newton from Chebyshev-Gauss
// seeds.
Eigen::VectorXd lg_nodes(int n) {
  Eigen::VectorXd tau(n + 1);
  const Eigen::VectorXd seeds = cg_nodes(n);
  for (int i = 0; i <= n; ++i) {
    tau[i] = newton_root(seeds[i], [n](double x) {
      const auto e = detail::legendre(n + 1, x);
      return std::pair<double, double>(e.p, e.dp);
    });
  }
  return tau;
}

Eigen::VectorXd uniform_nodes(int n) {
  Eigen::VectorXd tau(n + 1);
  for (int i = 0; i <= n; ++i) tau[i] = -1.0 + 2.0 * i / n;
  tau[n] = 1.0;
  return tau;
}

}  // namespace

namespace detail {

QuadRule gauss_legendre(int m) {
  if (m < 1) throw std::invalid_argument("gauss_legendre: m must be >= 1");
  QuadRule rule;
  rule.points.resize(m);
  rule.weights.resize(m);
  // Compute the left half and mirror so the rule is exactly antisymmetric.
  for (int i = 0; i < (m + 1) / 2; ++i) {
    const double seed = -std::cos(kPi * (i + 0.75) / (m + 0.5));
    const double x = newton_root(seed, [m](double t) {
      const auto e = legendre(m, t);
      return std::pair<double, double>(e.p, e.dp);
    });
    const double dp = legendre(m, x).dp;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = x;
    rule.weights[i] = w;
    rule.points[m - 1 - i] = -x;
    rule.weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) rule.points[m / 2] = 0.0;
  return rule;
}

}  // namespace detail

Grid make_grid(GridKind kind, int order, double t0, double tf) {
  if (order < 1)
    throw std::invalid_argument("make_grid: order must be >= 1, got " +
                                std::to_string(order));
  if (!(tf > t0))
    throw std::invalid_argument("make_grid: tf must exceed t0");

  Grid g;
  g.kind = kind;
  g.order = order;
  g.t0 = t0;
  g.tf = tf;
  switch (kind) {
    case GridKind::Cgl: g.nodes = cgl_nodes(order); break;
    case GridKind::Lgl: g.nodes = lgl_nodes(order); break;
    case GridKind::Lgr: g.nodes = lgr_nodes(order); break;
    case GridKind::Cg: g.nodes = cg_nodes(order); break;
    case GridKind::Lg: g.nodes = lg_nodes(order); break;
    case GridKind::Uniform: g.nodes = uniform_nodes(order); break;
  }

  for (int i = 0; i <= order; ++i) {
    if (std::abs(g.nodes[i]) > 1.0)
      throw std::runtime_error("make_grid: node escaped [-1,1]");
    if (i > 0 && !(g.nodes[i] > g.nodes[i - 1]))
      throw std::runtime_error("make_grid: nodes not strictly increasing");
  }
  return g;
}

Eigen::VectorXd to_physical_time(const Grid& grid) {
  const double s = 0.5 * (grid.tf - grid.t0);
  Eigen::VectorXd t(grid.nodes.size());
  for (int i = 0; i < grid.nodes.size(); ++i) {
    const double tau = grid.nodes[i];
    if (tau == -1.0)       t[i] = grid.t0;
    else if (tau == 1.0)   t[i] = grid.tf;
    else                   t[i] = grid.t0 + (tau + 1.0) * s;
  }
  return t;
}

bool is_lobatto(GridKind kind) {
  return kind == GridKind::Cgl || kind == GridKind::Lgl ||
         kind == GridKind::Uniform;
}

const char* grid_kind_name(GridKind kind) {
  switch (kind) {
    case GridKind::Cgl: return "cgl";
    case GridKind::Lgl: return "lgl";
    case GridKind::Lgr: return "lgr";
    case GridKind::Cg: return "cg";
    case GridKind::Lg: return "lg";
    case GridKind::Uniform: return "uniform";
  }
  return "?";
}

GridKind parse_grid_kind(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(c)));
  if (s == "cgl") return GridKind::Cgl;
  if (s == "lgl") return GridKind::Lgl;
  if (s == "lgr") return GridKind::Lgr;
  if (s == "cg") return GridKind::Cg;
  if (s == "lg") return GridKind::Lg;
  if (s == "uniform") return GridKind::Uniform;
  throw std::invalid_argument("unknown grid kind: " + name);
}

}  // namespace birkps
