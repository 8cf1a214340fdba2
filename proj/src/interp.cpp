#include "birkps/interp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "birkps/kernels.hpp"

namespace birkps {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDomainSlack = 1e-12;
}

LagrangeBasis build_basis(const Grid& grid) {
  LagrangeBasis basis;
  basis.grid = grid;
  basis.weights = kernels::barycentric_weights(grid.nodes);
  return basis;
}

Eigen::MatrixXd interpolate(const LagrangeBasis& basis,
                            const Eigen::MatrixXd& samples,
                            const Eigen::VectorXd& queries) {
  if (samples.rows() != basis.grid.nodes.size())
    throw std::invalid_argument("interpolate: samples rows (" +
                                std::to_string(samples.rows()) +
                                ") != node count (" +
                                std::to_string(basis.grid.nodes.size()) + ")");
  for (int i = 0; i < queries.size(); ++i) {
    if (std::abs(queries[i]) > 1.0 + kDomainSlack)
      throw std::invalid_argument("interpolate: query " + std::to_string(i) +
                                  " = " + std::to_string(queries[i]) +
                                  " outside [-1,1]");
  }
  return kernels::interpolate_many(basis.grid.nodes, basis.weights, samples,
                                   queries);
}

SpectralOperators diff_matrix(const LagrangeBasis& basis) {
  const int n = basis.grid.order;
  SpectralOperators ops;
  ops.D = kernels::diff_matrix(basis.grid.nodes, basis.weights);
  ops.Da = ops.D.block(1, 1, n, n);
  ops.Db = ops.D.block(0, 0, n, n);
  ops.l0 = ops.D.block(1, 0, n, 1);
  ops.lN = ops.D.block(0, n, n, 1);
  return ops;
}

SpectralCoefficients modal_coefficients(const Grid& grid,
                                        const Eigen::VectorXd& samples) {
  if (grid.kind != GridKind::Cgl)
    throw std::invalid_argument("modal_coefficients: grid kind must be cgl, got " +
                                std::string(grid_kind_name(grid.kind)));
  const int n = grid.order;
  if (samples.size() != n + 1)
    throw std::invalid_argument("modal_coefficients: samples length mismatch");

  // Node i (ascending) sits at angle theta = (N-i)*pi/N; reindex by angle and
  // apply the half-weighted discrete cosine pairing.
  SpectralCoefficients out;
  out.coeffs.resize(n + 1);
  for (int m = 0; m <= n; ++m) {
    const double cm = (m == 0 || m == n) ? 2.0 : 1.0;
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double dk = (k == 0 || k == n) ? 2.0 : 1.0;
      const double g = samples[n - k];
      acc += g * std::cos(m * k * kPi / n) / dk;
    }
    out.coeffs[m] = 2.0 * acc / (n * cm);
  }
  return out;
}

double chebyshev_eval(const SpectralCoefficients& c, double tau) {
  const int n = static_cast<int>(c.coeffs.size()) - 1;
  double b1 = 0.0, b2 = 0.0;
  for (int m = n; m >= 1; --m) {
    const double b0 = c.coeffs[m] + 2.0 * tau * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return c.coeffs[0] + tau * b1 - b2;
}

}  // namespace birkps
