#include "birkps/kernels.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace birkps::kernels {
namespace {

constexpr double kNodeHitTol = 1e-14;

inline void weights_row(const Eigen::VectorXd& x, int j, int n, Eigen::VectorXd& logw,
                        Eigen::VectorXd& sign) {
  double acc = 0.0;
  int negs = 0;
  for (int k = 0; k < n; ++k) {
    if (k == j) continue;
    const double d = x[j] - x[k];
    if (d < 0.0) ++negs;
    acc -= std::log(std::abs(d));
  }
  logw[j] = acc;
  sign[j] = (negs % 2 == 0) ? 1.0 : -1.0;
}

inline void weights_finish(const Eigen::VectorXd& logw, const Eigen::VectorXd& sign,
                           Eigen::VectorXd& w) {
  const double shift = logw.maxCoeff();
  const int n = static_cast<int>(logw.size());
  w.resize(n);
  for (int j = 0; j < n; ++j) w[j] = sign[j] * std::exp(logw[j] - shift);
}

inline void diff_row(const Eigen::VectorXd& x, const Eigen::VectorXd& w, int i, int n,
                     Eigen::MatrixXd& out) {
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const double d = (w[j] / w[i]) / (x[i] - x[j]);
    out(i, j) = d;
    acc += d;
  }
  out(i, i) = -acc;
}

inline void integrated_row(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                           double origin, double b, QuadRuleView rule, int i,
                           Eigen::MatrixXd& out, Eigen::VectorXd& basis) {
  const int n = static_cast<int>(x.size());
  const double h = 0.5 * (b - origin);
  const double mid = 0.5 * (b + origin);
  for (int j = 0; j < n; ++j) out(i, j) = 0.0;
  for (int q = 0; q < rule.points.size(); ++q) {
    const double s = mid + h * rule.points[q];
    basis_values(x, w, s, basis);
    const double wq = h * rule.weights[q];
    for (int j = 0; j < n; ++j) out(i, j) += wq * basis[j];
  }
}

inline void interp_row(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                       const Eigen::MatrixXd& samples, double q, int i,
                       Eigen::MatrixXd& out) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(samples.cols());
  int hit = -1;
  for (int j = 0; j < n; ++j) {
    if (std::abs(q - x[j]) <= kNodeHitTol) { hit = j; break; }
  }
  if (hit >= 0) {
    for (int k = 0; k < m; ++k) out(i, k) = samples(hit, k);
    return;
  }
  double den = 0.0;
  for (int k = 0; k < m; ++k) out(i, k) = 0.0;
  for (int j = 0; j < n; ++j) {
    const double t = w[j] / (q - x[j]);
    den += t;
    for (int k = 0; k < m; ++k) out(i, k) += t * samples(j, k);
  }
  for (int k = 0; k < m; ++k) out(i, k) /= den;
}

}  // namespace

void barycentric_weights_serial(const Eigen::VectorXd& nodes, Eigen::VectorXd& w) {
  const int n = static_cast<int>(nodes.size());
  Eigen::VectorXd logw(n), sign(n);
  for (int j = 0; j < n; ++j) weights_row(nodes, j, n, logw, sign);
  weights_finish(logw, sign, w);
}

void barycentric_weights_parallel(const Eigen::VectorXd& nodes, Eigen::VectorXd& w) {
#ifdef _OPENMP
  const int n = static_cast<int>(nodes.size());
  Eigen::VectorXd logw(n), sign(n);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j) weights_row(nodes, j, n, logw, sign);
  weights_finish(logw, sign, w);
#else
  barycentric_weights_serial(nodes, w);
#endif
}

Eigen::VectorXd barycentric_weights(const Eigen::VectorXd& nodes) {
  Eigen::VectorXd w;
#ifdef _OPENMP
  barycentric_weights_parallel(nodes, w);
#else
  barycentric_weights_serial(nodes, w);
#endif
  return w;
}

void diff_matrix_serial(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                        Eigen::MatrixXd& out) {
  const int n = static_cast<int>(nodes.size());
  out.resize(n, n);
  for (int i = 0; i < n; ++i) diff_row(nodes, w, i, n, out);
}

void diff_matrix_parallel(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                          Eigen::MatrixXd& out) {
#ifdef _OPENMP
  const int n = static_cast<int>(nodes.size());
  out.resize(n, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) diff_row(nodes, w, i, n, out);
#else
  diff_matrix_serial(nodes, w, out);
#endif
}

Eigen::MatrixXd diff_matrix(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w) {
  Eigen::MatrixXd d;
#ifdef _OPENMP
  diff_matrix_parallel(nodes, w, d);
#else
  diff_matrix_serial(nodes, w, d);
#endif
  return d;
}

void basis_values(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w, double x,
                  Eigen::VectorXd& out) {
  const int n = static_cast<int>(nodes.size());
  out.resize(n);
  for (int j = 0; j < n; ++j) {
    if (std::abs(x - nodes[j]) <= kNodeHitTol) {
      out.setZero();
      out[j] = 1.0;
      return;
    }
  }
  double den = 0.0;
  for (int j = 0; j < n; ++j) {
    const double t = w[j] / (x - nodes[j]);
    out[j] = t;
    den += t;
  }
  out /= den;
}

void integrated_basis_serial(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                             double origin, const Eigen::VectorXd& eval_points,
                             QuadRuleView rule, Eigen::MatrixXd& out) {
  const int rows = static_cast<int>(eval_points.size());
  out.resize(rows, nodes.size());
  Eigen::VectorXd basis;
  for (int i = 0; i < rows; ++i)
    integrated_row(nodes, w, origin, eval_points[i], rule, i, out, basis);
}

void integrated_basis_parallel(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                               double origin, const Eigen::VectorXd& eval_points,
                               QuadRuleView rule, Eigen::MatrixXd& out) {
#ifdef _OPENMP
  const int rows = static_cast<int>(eval_points.size());
  out.resize(rows, nodes.size());
#pragma omp parallel
  {
    Eigen::VectorXd basis;
#pragma omp for schedule(static)
    for (int i = 0; i < rows; ++i)
      integrated_row(nodes, w, origin, eval_points[i], rule, i, out, basis);
  }
#else
  integrated_basis_serial(nodes, w, origin, eval_points, rule, out);
#endif
}

Eigen::MatrixXd integrated_basis(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                                 double origin, const Eigen::VectorXd& eval_points,
                                 QuadRuleView rule) {
  Eigen::MatrixXd out;
#ifdef _OPENMP
  integrated_basis_parallel(nodes, w, origin, eval_points, rule, out);
#else
  integrated_basis_serial(nodes, w, origin, eval_points, rule, out);
#endif
  return out;
}

void interpolate_many_serial(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                             const Eigen::MatrixXd& samples,
                             const Eigen::VectorXd& queries, Eigen::MatrixXd& out) {
  if (samples.rows() != nodes.size())
    throw std::invalid_argument("interpolate_many: sample rows != node count");
  const int nq = static_cast<int>(queries.size());
  out.resize(nq, samples.cols());
  for (int i = 0; i < nq; ++i) interp_row(nodes, w, samples, queries[i], i, out);
}

void interpolate_many_parallel(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                               const Eigen::MatrixXd& samples,
                               const Eigen::VectorXd& queries, Eigen::MatrixXd& out) {
#ifdef _OPENMP
  if (samples.rows() != nodes.size())
    throw std::invalid_argument("interpolate_many: sample rows != node count");
  const int nq = static_cast<int>(queries.size());
  out.resize(nq, samples.cols());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nq; ++i) interp_row(nodes, w, samples, queries[i], i, out);
#else
  interpolate_many_serial(nodes, w, samples, queries, out);
#endif
}

Eigen::MatrixXd interpolate_many(const Eigen::VectorXd& nodes, const Eigen::VectorXd& w,
                                 const Eigen::MatrixXd& samples,
                                 const Eigen::VectorXd& queries) {
  Eigen::MatrixXd out;
#ifdef _OPENMP
  interpolate_many_parallel(nodes, w, samples, queries, out);
#else
  interpolate_many_serial(nodes, w, samples, queries, out);
#endif
  return out;
}

}  // namespace birkps::kernels
