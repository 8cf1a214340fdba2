#pragma once

#include <functional>
#include <limits>
#include <string>

#include <Eigen/Core>

#include "birkps/grid.hpp"

namespace birkps {

/// Time horizon. When tf_free is set, the final time is a decision variable
/// constrained to [tf_min, tf_max] and tf holds the initial guess.
struct TimeSpec {
  double t0 = -1.0;
  double tf = 1.0;
  bool tf_free = false;
  double tf_min = 1e-3;
  double tf_max = 1e6;
};

using DynamicsFn = std::function<Eigen::VectorXd(
    const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t)>;
using DynamicsJacFn = std::function<void(
    const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t,
    Eigen::MatrixXd& fx, Eigen::MatrixXd& fu, Eigen::VectorXd& ft)>;
using EndpointCostFn = std::function<double(
    const Eigen::VectorXd& x0, const Eigen::VectorXd& xf, double t0, double tf)>;
using RunningCostFn = std::function<double(
    const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t)>;
using BoundaryFn = std::function<Eigen::VectorXd(
    const Eigen::VectorXd& x0, const Eigen::VectorXd& xf, double t0, double tf)>;
using PathFn = std::function<Eigen::VectorXd(
    const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t)>;

/// Mayer + integral cost, dynamics, endpoint constraint vector with bounds,
/// optional path constraint vector with bounds, and box bounds on states,
/// controls, and the free final time.
struct OcpProblem {
  std::string name;
  int nx = 0;
  int nu = 0;

  DynamicsFn dynamics;
  DynamicsJacFn dynamics_jac;      // optional; finite differences otherwise
  EndpointCostFn endpoint_cost;    // optional
  RunningCostFn running_cost;      // optional

  int nb = 0;                      // endpoint constraint rows
  BoundaryFn boundary;
  Eigen::VectorXd boundary_lower, boundary_upper;

  int nh = 0;                      // path constraint rows
  PathFn path;
  Eigen::VectorXd path_lower, path_upper;

  Eigen::VectorXd x_lower, x_upper;
  Eigen::VectorXd u_lower, u_upper;
  TimeSpec time;

  // Warm-start hints consumed by the transcription's default initial guess.
  Eigen::VectorXd guess_x0, guess_xf;
  double guess_tf = 1.0;
  std::function<Eigen::VectorXd(double)> guess_u;  // arg in [0,1]; optional
};

/// Planar circular-to-circular low-thrust transfer in canonical units
/// (radius, phase, radial and tangential speed; control is the thrust angle
/// from the tangential direction). Minimum time, free final time.
OcpProblem make_orbit_transfer(double accel = 0.01, double r_ratio = 6.0);

/// Minimum-time double integrator from rest at the origin to rest at
/// distance d, |u| <= 1. Analytic optimum: t_f = 2 sqrt(d).
OcpProblem make_double_integrator(double d = 1.0);

/// Dynamics Jacobians: analytic hook when present, central differences
/// otherwise.
void dynamics_jacobians(const OcpProblem& prob, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u, double t, Eigen::MatrixXd& fx,
                        Eigen::MatrixXd& fu, Eigen::VectorXd& ft);

/// Throws if evaluator output dimensions disagree with the declared sizes.
void validate_dimensions(const OcpProblem& prob);

/// Discrete solution bundle on a grid.
struct Trajectory {
  Grid grid;
  Eigen::MatrixXd X;  // (N+1) x nx
  Eigen::MatrixXd U;  // (N+1) x nu
  Eigen::MatrixXd V;  // N x nx canonical-domain derivative samples, or empty
  double t0 = -1.0;
  double tf = 1.0;
  double objective = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace birkps
