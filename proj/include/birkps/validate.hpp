#pragma once

#include <functional>
#include <limits>

#include <Eigen/Core>

#include "birkps/grid.hpp"
#include "birkps/ocp.hpp"

namespace birkps {

/// How the node controls are turned into u(t) between nodes.
enum class ControlInterp { Lagrange, PiecewiseLinear };

/// Outcome of re-integrating the dynamics through the interpolated control
/// and comparing against the polynomial state interpolant on a dense grid.
struct PropagationReport {
  Eigen::VectorXd t;       // strictly increasing, spans [t0, tf]
  Eigen::MatrixXd x_ps;    // interpolant samples, row per time
  Eigen::MatrixXd x_rk;    // propagated samples
  Eigen::MatrixXd error;   // |x_rk - x_ps|
  Eigen::VectorXd terminal_error;            // propagated minus interpolant at tf
  double terminal_constraint_violation = 0.0;
  int steps = 0;
  int rejected_steps = 0;
  bool ok = true;
  double breakdown_time = std::numeric_limits<double>::quiet_NaN();
};

/// Adaptive embedded Runge-Kutta 5(4) re-integration of a discrete solution.
/// Defaults keep the integrator far below the discretization error budget.
PropagationReport propagate(const OcpProblem& prob, const Trajectory& traj,
                            double rtol = 1e-10, double atol = 1e-12,
                            ControlInterp control = ControlInterp::Lagrange);

struct FeasibilityError {
  Eigen::VectorXd state_error;     // per-state max over the dense grid
  Eigen::VectorXd terminal_error;  // per-state signed miss at tf
  double terminal_constraint_violation = 0.0;
};

FeasibilityError feasibility_error(const PropagationReport& rep);

/// Which linear algebra route solves the collocated linear ODE.
enum class LinearOdeForm { Birkhoff, Lagrange };

struct LinearOdeResult {
  Eigen::MatrixXd X;  // (N+1) x nx node states, first row is x0
  bool ok = true;
  double kappa = std::numeric_limits<double>::quiet_NaN();  // set when singular
};

/// Solve x' = Lambda x + g(tau) with x(-1) = x0 collocated on a Lobatto grid,
/// either through the integration-matrix form (value variables, anchored
/// column carries x0) or the differentiation-matrix form. The forcing may be
/// empty for a homogeneous system.
LinearOdeResult solve_linear_ode(
    const Grid& grid, const Eigen::MatrixXd& Lambda,
    const std::function<Eigen::VectorXd(double)>& g, const Eigen::VectorXd& x0,
    LinearOdeForm form = LinearOdeForm::Birkhoff);

}  // namespace birkps
