#pragma once

#include <Eigen/Core>

#include "birkps/grid.hpp"

namespace birkps {

/// Barycentric form of the Lagrange interpolant on a grid. Weights are
/// rescaled so max |w_j| = 1.
struct LagrangeBasis {
  Grid grid;
  Eigen::VectorXd weights;
};

LagrangeBasis build_basis(const Grid& grid);

/// Evaluate the interpolants of the sample columns at the given canonical
/// coordinates. Queries must lie in [-1 - 1e-12, 1 + 1e-12]; queries within
/// 1e-14 of a node reproduce the sample exactly.
Eigen::MatrixXd interpolate(const LagrangeBasis& basis,
                            const Eigen::MatrixXd& samples,
                            const Eigen::VectorXd& queries);

/// Differentiation matrix on the canonical domain together with the
/// partitions used by the Birkhoff and preconditioned forms: Da drops row and
/// column 0, Db drops row and column N, l0/lN are the dropped columns on the
/// retained rows.
struct SpectralOperators {
  Eigen::MatrixXd D;    // (N+1) x (N+1)
  Eigen::MatrixXd Da;   // rows/cols 1..N
  Eigen::MatrixXd Db;   // rows/cols 0..N-1
  Eigen::VectorXd l0;   // column 0 of D at rows 1..N
  Eigen::VectorXd lN;   // column N of D at rows 0..N-1
};

SpectralOperators diff_matrix(const LagrangeBasis& basis);

/// Chebyshev coefficients a_m of the polynomial interpolating the samples at
/// Chebyshev-Gauss-Lobatto nodes: p(tau) = sum a_m T_m(tau). Exact inverse of
/// chebyshev_eval at the nodes up to rounding. Cgl grids only.
struct SpectralCoefficients {
  Eigen::VectorXd coeffs;
};

SpectralCoefficients modal_coefficients(const Grid& grid,
                                        const Eigen::VectorXd& samples);

/// Clenshaw evaluation of sum a_m T_m(tau).
double chebyshev_eval(const SpectralCoefficients& c, double tau);

}  // namespace birkps
