#include "birkps/validate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

#include "birkps/birkhoff.hpp"
#include "birkps/conditioning.hpp"
#include "birkps/interp.hpp"

namespace birkps {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                 kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33,
                 kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
// Difference between the 5th-order weights and the embedded 4th-order ones.
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;
constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5, kC5 = 8.0 / 9;

// Control sampler over the canonical domain.
class ControlSampler {
 public:
  ControlSampler(const LagrangeBasis& basis, const Eigen::MatrixXd& U,
                 ControlInterp mode)
      : basis_(basis), U_(U), mode_(mode) {}

  Eigen::VectorXd operator()(double tau) const {
    tau = std::clamp(tau, -1.0, 1.0);
    if (U_.cols() == 0) return Eigen::VectorXd();
    if (mode_ == ControlInterp::Lagrange) {
      Eigen::VectorXd q(1);
      q[0] = tau;
      return interpolate(basis_, U_, q).row(0).transpose();
    }
    const Eigen::VectorXd& nodes = basis_.grid.nodes;
    const int n = static_cast<int>(nodes.size());
    int hi = 1;
    while (hi < n - 1 && nodes[hi] < tau) ++hi;
    const double a = (tau - nodes[hi - 1]) / (nodes[hi] - nodes[hi - 1]);
    return (1.0 - a) * U_.row(hi - 1).transpose() + a * U_.row(hi).transpose();
  }

 private:
  const LagrangeBasis& basis_;
  const Eigen::MatrixXd& U_;
  ControlInterp mode_;
};

}  // namespace

PropagationReport propagate(const OcpProblem& prob, const Trajectory& traj,
                            double rtol, double atol, ControlInterp control) {
  validate_dimensions(prob);
  if (!(rtol > 0.0) || !(atol > 0.0))
    throw std::invalid_argument("propagate: tolerances must be positive");
  if (traj.X.cols() != prob.nx || traj.U.cols() != prob.nu)
    throw std::invalid_argument("propagate: trajectory shape != problem");
  if (!(traj.tf > traj.t0))
    throw std::invalid_argument("propagate: horizon is empty");

  const int N = traj.grid.order;
  const int nx = prob.nx;
  const int M = 10 * (N + 1);
  const double t0 = traj.t0, tf = traj.tf;
  const double span = tf - t0;

  const LagrangeBasis basis = build_basis(traj.grid);
  const ControlSampler usamp(basis, traj.U, control);

  PropagationReport rep;
  rep.t.resize(M);
  for (int k = 0; k < M; ++k) rep.t[k] = t0 + span * k / (M - 1);
  rep.t[M - 1] = tf;

  Eigen::VectorXd taus(M);
  for (int k = 0; k < M; ++k)
    taus[k] = std::clamp(-1.0 + 2.0 * (rep.t[k] - t0) / span, -1.0, 1.0);
  rep.x_ps = interpolate(basis, traj.X, taus);

  auto rhs = [&](double t, const Eigen::VectorXd& x) {
    const double tau = -1.0 + 2.0 * (t - t0) / span;
    return prob.dynamics(x, usamp(tau), t);
  };

  rep.x_rk.resize(M, nx);
  Eigen::VectorXd x = traj.X.row(0).transpose();
  rep.x_rk.row(0) = x.transpose();

  double h = span / (M - 1);
  Eigen::VectorXd k1 = rhs(t0, x);
  bool broke = false;
  for (int seg = 0; seg + 1 < M && !broke; ++seg) {
    double t = rep.t[seg];
    const double t_end = rep.t[seg + 1];
    while (t < t_end) {
      const double h_min = 16.0 * 2.2e-16 * std::max(std::abs(t), 1.0);
      if (t_end - t <= h_min) {  // sub-resolution sliver left by rounding
        t = t_end;
        break;
      }
      // clip the attempt to the sample boundary without forgetting the
      // controller's step size; breakdown means the controller itself
      // collapsed, not that a segment end is near
      const double hs = std::min(h, t_end - t);
      if (hs < h_min) {
        rep.ok = false;
        rep.breakdown_time = t;
        broke = true;
        break;
      }
      const Eigen::VectorXd k2 = rhs(t + kC2 * hs, x + hs * (kA21 * k1));
      const Eigen::VectorXd k3 =
          rhs(t + kC3 * hs, x + hs * (kA31 * k1 + kA32 * k2));
      const Eigen::VectorXd k4 =
          rhs(t + kC4 * hs, x + hs * (kA41 * k1 + kA42 * k2 + kA43 * k3));
      const Eigen::VectorXd k5 = rhs(
          t + kC5 * hs, x + hs * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
      const Eigen::VectorXd k6 =
          rhs(t + hs,
              x + hs * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
      const Eigen::VectorXd x_new =
          x + hs * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
      const Eigen::VectorXd k7 = rhs(t + hs, x_new);
      const Eigen::VectorXd et =
          hs * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);

      double err = 0.0;
      for (int j = 0; j < nx; ++j) {
        const double sc =
            atol + rtol * std::max(std::abs(x[j]), std::abs(x_new[j]));
        err += (et[j] / sc) * (et[j] / sc);
      }
      err = std::sqrt(err / nx);
      if (!std::isfinite(err)) {
        rep.ok = false;
        rep.breakdown_time = t;
        broke = true;
        break;
      }

      if (err <= 1.0) {
        t += hs;
        x = x_new;
        k1 = k7;  // first-same-as-last
        ++rep.steps;
        const double grow =
            std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 1.0, 5.0);
        // a boundary-clipped step says nothing about how far the nominal
        // size could go, so only unclipped steps update it
        if (hs >= h) h = hs * grow;
      } else {
        ++rep.rejected_steps;
        h = hs * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 0.9);
      }
    }
    rep.x_rk.row(seg + 1) = x.transpose();
  }
  if (broke)  // freeze the remaining samples at the breakdown state
    for (int k = 0; k < M; ++k)
      if (rep.t[k] > rep.breakdown_time) rep.x_rk.row(k) = x.transpose();

  rep.error = (rep.x_rk - rep.x_ps).cwiseAbs();
  rep.terminal_error = (rep.x_rk.row(M - 1) - rep.x_ps.row(M - 1)).transpose();

  if (prob.nb > 0) {
    const Eigen::VectorXd c = prob.boundary(traj.X.row(0).transpose(),
                                            rep.x_rk.row(M - 1).transpose(), t0, tf);
    double worst = 0.0;
    for (int r = 0; r < prob.nb; ++r)
      worst = std::max({worst, prob.boundary_lower[r] - c[r],
                        c[r] - prob.boundary_upper[r]});
    rep.terminal_constraint_violation = std::max(worst, 0.0);
  }
  return rep;
}

FeasibilityError feasibility_error(const PropagationReport& rep) {
  FeasibilityError fe;
  fe.state_error = rep.error.colwise().maxCoeff().transpose();
  fe.terminal_error = rep.terminal_error;
  fe.terminal_constraint_violation = rep.terminal_constraint_violation;
  return fe;
}

LinearOdeResult solve_linear_ode(const Grid& grid, const Eigen::MatrixXd& Lambda,
                                 const std::function<Eigen::VectorXd(double)>& g,
                                 const Eigen::VectorXd& x0, LinearOdeForm form) {
  if (!is_lobatto(grid.kind))
    throw std::invalid_argument("solve_linear_ode: grid must include both endpoints");
  const int nx = static_cast<int>(x0.size());
  if (Lambda.rows() != nx || Lambda.cols() != nx)
    throw std::invalid_argument("solve_linear_ode: system matrix shape != state size");
  if (!Lambda.allFinite() || !x0.allFinite())
    throw std::invalid_argument("solve_linear_ode: non-finite inputs");

  const int N = grid.order;
  const LagrangeBasis basis = build_basis(grid);
  const SpectralOperators ops = diff_matrix(basis);

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N, nx);
  if (g)
    for (int k = 0; k < N; ++k) G.row(k) = g(grid.nodes[k + 1]).transpose();

  const int n = N * nx;
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);

  if (form == LinearOdeForm::Birkhoff) {
    const BirkhoffOperators birk = build_birkhoff(basis, BirkhoffCase::A);
    // X_a - B_a X_a Lambda^T = b0 x0^T + B_a G, vectorized column-major.
    const Eigen::MatrixXd BG = birk.B * G;
    for (int j = 0; j < nx; ++j)
      for (int k = 0; k < N; ++k) {
        const int r = j * N + k;
        for (int l = 0; l < nx; ++l)
          for (int q = 0; q < N; ++q)
            A(r, l * N + q) = -Lambda(j, l) * birk.B(k, q);
        A(r, r) += 1.0;
        b[r] = birk.boundary_col[k] * x0[j] + BG(k, j);
      }
  } else {
    // D_a X_a + l0 x0^T = X_a Lambda^T + G.
    for (int j = 0; j < nx; ++j)
      for (int k = 0; k < N; ++k) {
        const int r = j * N + k;
        for (int l = 0; l < nx; ++l)
          for (int q = 0; q < N; ++q)
            A(r, l * N + q) =
                (l == j ? ops.Da(k, q) : 0.0) - (q == k ? Lambda(j, l) : 0.0);
        b[r] = G(k, j) - ops.l0[k] * x0[j];
      }
  }

  LinearOdeResult out;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::VectorXd v = lu.solve(b);
  const double resid = (A * v - b).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if (!v.allFinite() || resid > 1e-6 * scale) {
    out.ok = false;
    out.kappa = cond2(A);
  }

  out.X.resize(N + 1, nx);
  out.X.row(0) = x0.transpose();
  for (int j = 0; j < nx; ++j)
    for (int k = 0; k < N; ++k) out.X(k + 1, j) = v[j * N + k];
  return out;
}

}  // namespace birkps
