#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "birkps/transcribe.hpp"

namespace birkps {

struct SolverOptions {
  double tol_feas = 1e-8;
  double tol_opt = 1e-6;
  int max_outer = 40;
  int max_inner = 500;   // per outer iteration
  double mu0 = 10.0;
  double mu_factor = 10.0;
  double mu_max = 1e12;
  double y_max = 1e10;
  std::ostream* log = nullptr;  // per-outer progress lines when set
};

enum class SolveStatus { Optimal, MaxIter, Infeasible, NumericalFailure };

const char* solve_status_name(SolveStatus s);

/// Norms of the first-order optimality system at a point: the box-projected
/// gradient of the Lagrangian, the worst constraint or bound violation, and
/// the worst multiplier-times-inactivity product.
struct ResidualReport {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
};

struct NlpSolution {
  Eigen::VectorXd z;
  Eigen::VectorXd y;  // constraint multipliers, sign convention grad f = J^T y
  SolveStatus status = SolveStatus::NumericalFailure;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double objective = 0.0;
  double mu_final = 0.0;  // penalty weight at termination; seeds continuation
  ResidualReport kkt;
  std::vector<double> outer_violations;  // worst constraint violation per outer pass
  std::string message;
};

ResidualReport kkt_residual(const NlpProblem& nlp, const Eigen::VectorXd& z,
                            const Eigen::VectorXd& y);

/// Bound-constrained augmented Lagrangian method. Ranged constraint rows are
/// folded into a single shifted quadratic penalty; the inner subproblems are
/// solved by a projected quasi-Newton iteration whose Hessian model combines
/// a Gauss-Newton penalty term with damped BFGS curvature. Deterministic:
/// equal inputs produce bitwise equal iterates.
NlpSolution solve(const NlpProblem& nlp, const Eigen::VectorXd& z0,
                  const SolverOptions& opts = {});

}  // namespace birkps
