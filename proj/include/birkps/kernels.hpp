#pragma once

#include <Eigen/Core>

// Raw assembly kernels on plain node/weight vectors. Each kernel comes as a
// serial reference and an OpenMP variant that distributes the same per-element
// arithmetic across threads, so the two produce bitwise-identical results.
// The unsuffixed wrappers pick the OpenMP variant when it is compiled in.

namespace birkps::kernels {

struct QuadRuleView {
  const Eigen::VectorXd& points;
  const Eigen::VectorXd& weights;
};

// Barycentric weights w_j = 1/prod_{k!=j}(x_j - x_k), rescaled so
// max_j |w_j| = 1. Products are accumulated in log space so equispaced grids
// with thousands of nodes stay representable.
void barycentric_weights_serial(const Eigen::VectorXd& nodes, Eigen::VectorXd& w);
void barycentric_weights_parallel(const Eigen::VectorXd& nodes, Eigen::VectorXd& w);
Eigen::VectorXd barycentric_weights(const Eigen::VectorXd& nodes);

// Differentiation matrix D_ij = (w_j/w_i)/(x_i - x_j) with the diagonal set
// to the negated off-diagonal row sum, so D * ones == 0 exactly.
void diff_matrix_serial(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                        Eigen::MatrixXd& out);
void diff_matrix_parallel(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                          Eigen::MatrixXd& out);
Eigen::MatrixXd diff_matrix(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w);

// All Lagrange cardinal values l_j(x) for the given nodes/weights. Queries
// within 1e-14 of a node return the exact unit vector.
void basis_values(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                  double x, Eigen::VectorXd& out);

// out(i,j) = integral from origin to eval_points[i] of cardinal j on the
// given nodes, one mapped Gauss rule application per entry row.
void integrated_basis_serial(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                             double origin, const Eigen::VectorXd& eval_points,
                             QuadRuleView rule, Eigen::MatrixXd& out);
void integrated_basis_parallel(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                               double origin, const Eigen::VectorXd& eval_points,
                               QuadRuleView rule, Eigen::MatrixXd& out);
Eigen::MatrixXd integrated_basis(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                                 double origin, const Eigen::VectorXd& eval_points,
                                 QuadRuleView rule);

// Barycentric evaluation of column signals at many query points.
// samples: (#nodes x #signals), out: (#queries x #signals).
void interpolate_many_serial(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                             const Eigen::MatrixXd& samples,
                             const Eigen::VectorXd& queries, Eigen::MatrixXd& out);
void interpolate_many_parallel(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                               const Eigen::MatrixXd& samples,
                               const Eigen::VectorXd& queries, Eigen::MatrixXd& out);
Eigen::MatrixXd interpolate_many(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                                 const Eigen::MatrixXd& samples,
                                 const Eigen::VectorXd& queries);

}  // namespace birkps::kernels
