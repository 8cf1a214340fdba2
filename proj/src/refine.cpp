#include "birkps/refine.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "birkps/grid.hpp"
#include "birkps/interp.hpp"

namespace birkps {

namespace {

// Worst over states of max|a_m| over the trailing tenth of the spectrum,
// relative to the largest coefficient. The tenth is ceil((N+1)/10) but never
// fewer than three coefficients: symmetric solutions parity-suppress every
// other coefficient, and case-a solutions carry structurally tiny top modes,
// so a one- or two-entry tail can read as converged while a_{N-2} is still
// large.
double tail_ratio_of(const Grid& grid, const Eigen::MatrixXd& X) {
  const int n = static_cast<int>(X.rows());
  const int tail = std::min(n - 1, std::max(3, (n + 9) / 10));
  double worst = 0.0;
  for (int j = 0; j < X.cols(); ++j) {
    const Eigen::VectorXd a = modal_coefficients(grid, X.col(j)).coeffs;
    const double amax = a.cwiseAbs().maxCoeff();
    if (amax == 0.0) continue;
    worst = std::max(worst, a.tail(tail).cwiseAbs().maxCoeff() / amax);
  }
  return worst;
}

// Carry a coarse solution onto a finer transcription: states and controls by
// polynomial interpolation clamped into the box, the horizon as-is, and the
// derivative slice from differentiating the carried states. As with the cold
// guess, seeding V with the path's own slope keeps the fine rung's linear
// integration rows satisfied at the start; rebuilding V from the dynamics
// instead would charge the coarse solution's interpolation defect to those
// rows and destabilize the warm solve.
Eigen::VectorXd warm_start(const OcpProblem& prob, const Trajectory& prev,
                           const Transcription& tr, MethodVariant variant) {
  const VariableLayout& lay = tr.layout;
  const int N = lay.order;
  const LagrangeBasis basis = build_basis(prev.grid);
  const Eigen::MatrixXd X = interpolate(basis, prev.X, lay.grid.nodes);
  const Eigen::MatrixXd U = interpolate(basis, prev.U, lay.grid.nodes);

  Eigen::VectorXd z = tr.initial_guess;
  for (int j = 0; j < lay.nx; ++j)
    for (int i = 0; i <= N; ++i)
      z[lay.x_index(i, j)] = std::clamp(X(i, j), prob.x_lower[j], prob.x_upper[j]);
  for (int j = 0; j < lay.nu; ++j)
    for (int i = 0; i <= N; ++i)
      z[lay.u_index(i, j)] = std::clamp(U(i, j), prob.u_lower[j], prob.u_upper[j]);

  if (lay.tf_free) z[lay.tf_index] = std::clamp(prev.tf, prob.time.tf_min, prob.time.tf_max);
  if (lay.has_v) {
    Eigen::MatrixXd Xw(N + 1, lay.nx);
    for (int i = 0; i <= N; ++i)
      for (int j = 0; j < lay.nx; ++j) Xw(i, j) = z[lay.x_index(i, j)];
    const Eigen::MatrixXd DXw = diff_matrix(build_basis(lay.grid)).D * Xw;
    for (int k = 0; k < N; ++k) {
      const int node = (variant == MethodVariant::BirkhoffB) ? k : k + 1;
      for (int j = 0; j < lay.nx; ++j) z[lay.v_index(k, j)] = DXw(node, j);
    }
  }
  return z;
}

}  // namespace

RefinementResult refine_solve(const OcpProblem& prob, const RefinementPlan& plan,
                              MethodVariant variant, const SolverOptions& opts) {
  if (plan.ladder.empty())
    throw std::invalid_argument("refine_solve: ladder is empty");
  for (std::size_t k = 0; k < plan.ladder.size(); ++k) {
    if (plan.ladder[k] < 2)
      throw std::invalid_argument("refine_solve: ladder orders must be at least 2");
    if (k > 0 && plan.ladder[k] <= plan.ladder[k - 1])
      throw std::invalid_argument("refine_solve: ladder must be strictly increasing");
  }
  if (!(plan.eps_tail > 0.0))
    throw std::invalid_argument("refine_solve: eps_tail must be positive");

  RefinementResult out;
  const int rungs =
      plan.max_rungs > 0
          ? std::min<int>(plan.max_rungs, static_cast<int>(plan.ladder.size()))
          : static_cast<int>(plan.ladder.size());

  bool have_good = false;
  Trajectory prev;
  double prev_mu = 0.0;
  for (int k = 0; k < rungs; ++k) {
    const Grid grid = make_grid(GridKind::Cgl, plan.ladder[k]);
    const Transcription tr = transcribe(prob, grid, variant);
    const Eigen::VectorXd z0 =
        have_good ? warm_start(prob, prev, tr, variant) : tr.initial_guess;
    SolverOptions ropts = opts;
    if (have_good) {
      // Penalty continuation: a warm iterate is near-feasible, and restarting
      // the penalty at its cold value lets the objective trade that
      // feasibility away before the multiplier loop can react. Resume near
      // the weight the previous rung needed, leaving escalation headroom.
      ropts.mu0 = std::clamp(prev_mu, opts.mu0, 0.01 * opts.mu_max);
    }
    NlpSolution sol = solve(tr.nlp, z0, ropts);
    Trajectory traj = extract_trajectory(sol.z, tr.layout);
    traj.objective = sol.objective;

    RungReport rep;
    rep.order = plan.ladder[k];
    rep.status = sol.status;
    rep.objective = sol.objective;
    rep.feasibility = sol.kkt.feasibility;
    rep.tail_ratio = tail_ratio_of(traj.grid, traj.X);
    rep.inner_iterations = sol.inner_iterations;
    rep.warm_started = have_good;
    out.rungs.push_back(rep);

    if (sol.status != SolveStatus::Optimal) {
      out.failed = true;
      out.message = "order " + std::to_string(plan.ladder[k]) + " rung failed: " +
                    (sol.message.empty() ? solve_status_name(sol.status)
                                         : sol.message);
      if (!have_good) {
        out.trajectory = std::move(traj);
        out.solution = std::move(sol);
      }
      return out;
    }

    prev = traj;
    prev_mu = sol.mu_final;
    out.trajectory = std::move(traj);
    out.solution = std::move(sol);
    have_good = true;
    if (rep.tail_ratio <= plan.eps_tail) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged)
    out.message = "ladder exhausted before the coefficient tail decayed";
  return out;
}

}  // namespace birkps
