#include "birkps/ocp.hpp"

#include <cmath>
#include <stdexcept>

namespace birkps {

OcpProblem make_orbit_transfer(double accel, double r_ratio) {
  if (!(accel > 0.0)) throw std::invalid_argument("orbit transfer: accel must be > 0");
  if (!(r_ratio > 1.0)) throw std::invalid_argument("orbit transfer: r_ratio must be > 1");

  OcpProblem p;
  p.name = "oxfer";
  p.nx = 4;  // r, theta, v_r, v_t
  p.nu = 1;  // alpha

  p.dynamics = [accel](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       double) {
    const double r = x[0], vr = x[2], vt = x[3], a = u[0];
    Eigen::VectorXd f(4);
    f[0] = vr;
    f[1] = vt / r;
    f[2] = vt * vt / r - 1.0 / (r * r) + accel * std::sin(a);
    f[3] = -vr * vt / r + accel * std::cos(a);
    return f;
  };
  p.dynamics_jac = [accel](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           double, Eigen::MatrixXd& fx, Eigen::MatrixXd& fu,
                           Eigen::VectorXd& ft) {
    const double r = x[0], vr = x[2], vt = x[3], a = u[0];
    fx.setZero(4, 4);
    fx(0, 2) = 1.0;
    fx(1, 0) = -vt / (r * r);
    fx(1, 3) = 1.0 / r;
    fx(2, 0) = -vt * vt / (r * r) + 2.0 / (r * r * r);
    fx(2, 3) = 2.0 * vt / r;
    fx(3, 0) = vr * vt / (r * r);
    fx(3, 2) = -vt / r;
    fx(3, 3) = -vr / r;
    fu.setZero(4, 1);
    fu(2, 0) = accel * std::cos(a);
    fu(3, 0) = -accel * std::sin(a);
    ft.setZero(4);
  };

  p.endpoint_cost = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double,
                       double tf) { return tf; };

  const double vtf = 1.0 / std::sqrt(r_ratio);
  p.nb = 7;
  p.boundary = [r_ratio, vtf](const Eigen::VectorXd& x0,
                              const Eigen::VectorXd& xf, double, double) {
    Eigen::VectorXd e(7);
    e[0] = x0[0] - 1.0;
    e[1] = x0[1];
    e[2] = x0[2];
    e[3] = x0[3] - 1.0;
    e[4] = xf[0] - r_ratio;
    e[5] = xf[2];
    e[6] = xf[3] - vtf;
    return e;
  };
  p.boundary_lower = Eigen::VectorXd::Zero(7);
  p.boundary_upper = Eigen::VectorXd::Zero(7);

  constexpr double pi = 3.14159265358979323846;
  p.x_lower.resize(4);
  p.x_upper.resize(4);
  p.x_lower << 0.5, -1e4, -2.0, 0.05;
  p.x_upper << 2.0 * r_ratio, 1e4, 2.0, 2.0;
  p.u_lower = Eigen::VectorXd::Constant(1, -pi);
  p.u_upper = Eigen::VectorXd::Constant(1, pi);

  // Circular-spiral estimates seed the solve: duration from the velocity
  // change at constant thrust, phase from integrating the spiral rate.
  const double dv = 1.0 - vtf;
  const double tf_est = dv / accel;
  const double theta_est = (1.0 - std::pow(1.0 - accel * tf_est, 4)) / (4.0 * accel);

  p.time.t0 = 0.0;
  p.time.tf_free = true;
  p.time.tf = tf_est;
  p.time.tf_min = 0.1 * tf_est;
  p.time.tf_max = 10.0 * tf_est;
  p.guess_tf = tf_est;
  p.guess_x0.resize(4);
  p.guess_x0 << 1.0, 0.0, 0.0, 1.0;
  p.guess_xf.resize(4);
  p.guess_xf << r_ratio, theta_est, 0.0, vtf;
  // Thrust-angle ramp spanning pi/2 about the along-track direction: radial
  // velocity must build early and be killed again to circularize at the end.
  p.guess_u = [](double s) {
    Eigen::VectorXd u(1);
    u[0] = 0.25 * M_PI * (1.0 - 2.0 * s);
    return u;
  };
  return p;
}

OcpProblem make_double_integrator(double d) {
  if (!(d > 0.0)) throw std::invalid_argument("double integrator: d must be > 0");

  OcpProblem p;
  p.name = "dintegrator";
  p.nx = 2;
  p.nu = 1;

  p.dynamics = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double) {
    Eigen::VectorXd f(2);
    f[0] = x[1];
    f[1] = u[0];
    return f;
  };
  p.dynamics_jac = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double,
                      Eigen::MatrixXd& fx, Eigen::MatrixXd& fu,
                      Eigen::VectorXd& ft) {
    fx.setZero(2, 2);
    fx(0, 1) = 1.0;
    fu.setZero(2, 1);
    fu(1, 0) = 1.0;
    ft.setZero(2);
  };

  p.endpoint_cost = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double,
                       double tf) { return tf; };

  p.nb = 4;
  p.boundary = [d](const Eigen::VectorXd& x0, const Eigen::VectorXd& xf, double,
                   double) {
    Eigen::VectorXd e(4);
    e[0] = x0[0];
    e[1] = x0[1];
    e[2] = xf[0] - d;
    e[3] = xf[1];
    return e;
  };
  p.boundary_lower = Eigen::VectorXd::Zero(4);
  p.boundary_upper = Eigen::VectorXd::Zero(4);

  p.x_lower = Eigen::VectorXd::Constant(2, -5.0 - d);
  p.x_upper = Eigen::VectorXd::Constant(2, 5.0 + d);
  p.u_lower = Eigen::VectorXd::Constant(1, -1.0);
  p.u_upper = Eigen::VectorXd::Constant(1, 1.0);

  const double tf_est = 2.0 * std::sqrt(d);
  p.time.t0 = 0.0;
  p.time.tf_free = true;
  p.time.tf = tf_est;
  p.time.tf_min = 0.1;
  p.time.tf_max = 10.0 * tf_est;
  p.guess_tf = tf_est;
  p.guess_x0 = Eigen::VectorXd::Zero(2);
  p.guess_xf.resize(2);
  p.guess_xf << d, 0.0;
  p.guess_u = [](double) { return Eigen::VectorXd::Zero(1); };
  return p;
}

void dynamics_jacobians(const OcpProblem& prob, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u, double t, Eigen::MatrixXd& fx,
                        Eigen::MatrixXd& fu, Eigen::VectorXd& ft) {
  if (prob.dynamics_jac) {
    prob.dynamics_jac(x, u, t, fx, fu, ft);
    return;
  }
  const double croot = std::cbrt(2.2e-16);
  fx.resize(prob.nx, prob.nx);
  fu.resize(prob.nx, prob.nu);
  ft.resize(prob.nx);
  Eigen::VectorXd xp = x, xm = x, up = u, um = u;
  for (int j = 0; j < prob.nx; ++j) {
    const double h = croot * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    fx.col(j) = (prob.dynamics(xp, u, t) - prob.dynamics(xm, u, t)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  for (int j = 0; j < prob.nu; ++j) {
    const double h = croot * std::max(1.0, std::abs(u[j]));
    up[j] = u[j] + h;
    um[j] = u[j] - h;
    fu.col(j) = (prob.dynamics(x, up, t) - prob.dynamics(x, um, t)) / (2.0 * h);
    up[j] = u[j];
    um[j] = u[j];
  }
  const double h = croot * std::max(1.0, std::abs(t));
  ft = (prob.dynamics(x, u, t + h) - prob.dynamics(x, u, t - h)) / (2.0 * h);
}

void validate_dimensions(const OcpProblem& prob) {
  if (prob.nx < 1) throw std::invalid_argument("ocp: nx must be >= 1");
  if (prob.nu < 0) throw std::invalid_argument("ocp: nu must be >= 0");
  if (!prob.dynamics) throw std::invalid_argument("ocp: dynamics missing");

  const Eigen::VectorXd x = prob.guess_x0.size() == prob.nx
                                ? prob.guess_x0
                                : Eigen::VectorXd::Zero(prob.nx);
  const Eigen::VectorXd u = Eigen::VectorXd::Zero(std::max(prob.nu, 1)).head(prob.nu);
  const double t = prob.time.t0;

  if (prob.dynamics(x, u, t).size() != prob.nx)
    throw std::invalid_argument("ocp: dynamics output size != nx");
  if (prob.boundary) {
    if (prob.boundary(x, x, t, prob.time.tf).size() != prob.nb)
      throw std::invalid_argument("ocp: boundary output size != nb");
    if (prob.boundary_lower.size() != prob.nb || prob.boundary_upper.size() != prob.nb)
      throw std::invalid_argument("ocp: boundary bound sizes != nb");
  } else if (prob.nb != 0) {
    throw std::invalid_argument("ocp: nb > 0 but boundary evaluator missing");
  }
  if (prob.path) {
    if (prob.path(x, u, t).size() != prob.nh)
      throw std::invalid_argument("ocp: path output size != nh");
    if (prob.path_lower.size() != prob.nh || prob.path_upper.size() != prob.nh)
      throw std::invalid_argument("ocp: path bound sizes != nh");
  } else if (prob.nh != 0) {
    throw std::invalid_argument("ocp: nh > 0 but path evaluator missing");
  }
  if (prob.x_lower.size() != prob.nx || prob.x_upper.size() != prob.nx)
    throw std::invalid_argument("ocp: state bound sizes != nx");
  if (prob.u_lower.size() != prob.nu || prob.u_upper.size() != prob.nu)
    throw std::invalid_argument("ocp: control bound sizes != nu");
  if (prob.dynamics_jac) {
    Eigen::MatrixXd fx, fu;
    Eigen::VectorXd ft;
    prob.dynamics_jac(x, u, t, fx, fu, ft);
    if (fx.rows() != prob.nx || fx.cols() != prob.nx || fu.rows() != prob.nx ||
        fu.cols() != prob.nu || ft.size() != prob.nx)
      throw std::invalid_argument("ocp: dynamics Jacobian shape mismatch");
  }
}

}  // namespace birkps
