#pragma once

#include <Eigen/Core>

#include "birkps/interp.hpp"

namespace birkps {

/// Case A anchors the integration at the first node and builds cardinals on
/// the trailing subgrid (nodes 1..N); case B mirrors from the last node with
/// cardinals on the leading subgrid (nodes 0..N-1).
enum class BirkhoffCase { A, B };

/// Birkhoff interpolation operators. B holds antiderivative values of the
/// subgrid cardinals at the retained nodes; boundary_col is the value column
/// of the anchored constant function (exactly ones); boundary_row holds the
/// subgrid cardinal values at the anchor node; boundary_dot is the derivative
/// of the anchored cardinal at the anchor (exactly zero).
struct BirkhoffOperators {
  BirkhoffCase which = BirkhoffCase::A;
  Eigen::MatrixXd B;             // N x N
  Eigen::VectorXd boundary_col;  // length N, all ones
  Eigen::VectorXd boundary_row;  // length N
  double boundary_dot = 0.0;
};

/// Assemble the operators by per-entry Gauss quadrature of the subgrid
/// cardinals (never by inverting the differentiation matrix).
BirkhoffOperators build_birkhoff(const LagrangeBasis& basis, BirkhoffCase which);

/// Max-abs entry of D_a * B_a - I (case A) or D_b * B_b - I (case B).
double theorem1_residual(const SpectralOperators& ops,
                         const BirkhoffOperators& birk);

}  // namespace birkps
