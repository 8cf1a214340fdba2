#include "birkps/birkhoff.hpp"

#include <stdexcept>

#include "birkps/kernels.hpp"
#include "legendre.hpp"

namespace birkps {

BirkhoffOperators build_birkhoff(const LagrangeBasis& basis, BirkhoffCase which) {
  const int n = basis.grid.order;
  if (n < 1) throw std::invalid_argument("build_birkhoff: grid order must be >= 1");

  const Eigen::VectorXd& tau = basis.grid.nodes;
  const Eigen::VectorXd sub = (which == BirkhoffCase::A)
                                  ? Eigen::VectorXd(tau.tail(n))
                                  : Eigen::VectorXd(tau.head(n));
  const double anchor = (which == BirkhoffCase::A) ? tau[0] : tau[n];
  const Eigen::VectorXd sub_w = kernels::barycentric_weights(sub);

  // The subgrid cardinals have degree N-1, so (N+1)/2 rounded up plus one
  // Gauss points integrate every entry exactly in exact arithmetic.
  const detail::QuadRule rule = detail::gauss_legendre((n + 2) / 2 + 1);

  BirkhoffOperators out;
  out.which = which;
  out.B = kernels::integrated_basis(sub, sub_w, anchor, sub,
                                    kernels::QuadRuleView{rule.points, rule.weights});
  out.boundary_col = Eigen::VectorXd::Ones(n);
  kernels::basis_values(sub, sub_w, anchor, out.boundary_row);
  out.boundary_dot = 0.0;
  return out;
}

double theorem1_residual(const SpectralOperators& ops,
                         const BirkhoffOperators& birk) {
  const int n = static_cast<int>(birk.B.rows());
  const Eigen::MatrixXd& d = (birk.which == BirkhoffCase::A) ? ops.Da : ops.Db;
  if (d.rows() != n)
    throw std::invalid_argument("theorem1_residual: operator size mismatch");
  return (d * birk.B - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
}

}  // namespace birkps
