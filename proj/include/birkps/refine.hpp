#pragma once

#include <string>
#include <vector>

#include "birkps/nlpsolve.hpp"
#include "birkps/ocp.hpp"
#include "birkps/transcribe.hpp"

namespace birkps {

/// Ladder of polynomial orders with a coefficient-decay stopping rule.
struct RefinementPlan {
  std::vector<int> ladder;  // strictly increasing orders, each >= 2
  double eps_tail = 1e-6;   // stop when the tail max <= eps_tail * spectrum max
  int max_rungs = 0;        // 0 runs the whole ladder
};

struct RungReport {
  int order = 0;
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  double feasibility = 0.0;  // worst constraint or bound violation at the end
  double tail_ratio = 0.0;   // worst state's trailing-tenth coefficient ratio
  int inner_iterations = 0;
  bool warm_started = false;
};

struct RefinementResult {
  Trajectory trajectory;          // finest successful rung
  NlpSolution solution;           // solver output at that rung
  std::vector<RungReport> rungs;  // one entry per attempted rung
  bool converged = false;         // tail rule fired before the ladder ran out
  bool failed = false;            // a rung broke; trajectory is the last good one
  std::string message;
};

/// Solve on successively finer cgl grids, warm-starting each rung from the
/// previous solution interpolated onto the finer nodes (derivative samples
/// rebuilt from the dynamics, multipliers restarted at zero). Stops when, for
/// every state, the trailing tenth of the chebyshev spectrum falls below
/// eps_tail relative to the largest coefficient. Controls with jumps never
/// satisfy that rule; the ladder then runs to exhaustion and the result says
/// so rather than pretending convergence.
RefinementResult refine_solve(const OcpProblem& prob, const RefinementPlan& plan,
                              MethodVariant variant, const SolverOptions& opts = {});

}  // namespace birkps
