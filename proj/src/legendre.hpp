#pragma once

// Internal Legendre-polynomial utilities shared by the grid generators and the
// Birkhoff matrix quadrature. Not part of the public API.

#include <Eigen/Core>

namespace birkps::detail {

struct LegendreEval {
  double p;    // P_n(x)
  double dp;   // P_n'(x)
  double ddp;  // P_n''(x)
};

// Three-term recurrences for P_n and its first two derivatives; valid on all
// of [-1,1] including the endpoints.
inline LegendreEval legendre(int n, double x) {
  double p0 = 1.0, dp0 = 0.0, ddp0 = 0.0;
  if (n == 0) return {p0, dp0, ddp0};
  double p1 = x, dp1 = 1.0, ddp1 = 0.0;
  for (int k = 2; k <= n; ++k) {
    const double a = (2.0 * k - 1.0) / k;
    const double b = (k - 1.0) / k;
    const double p2 = a * x * p1 - b * p0;
    const double dp2 = dp0 + (2.0 * k - 1.0) * p1;
    const double ddp2 = ddp0 + (2.0 * k - 1.0) * dp1;
    p0 = p1; p1 = p2;
    dp0 = dp1; dp1 = dp2;
    ddp0 = ddp1; ddp1 = ddp2;
  }
  return {p1, dp1, ddp1};
}

struct QuadRule {
  Eigen::VectorXd points;
  Eigen::VectorXd weights;
};

// Gauss-Legendre rule with m points on [-1,1]; exact through degree 2m-1.
QuadRule gauss_legendre(int m);

}  // namespace birkps::detail
