#include "birkps/nlpsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace birkps {

namespace {

double clamp1(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

Eigen::VectorXd project_box(const Eigen::VectorXd& z, const NlpProblem& nlp) {
  Eigen::VectorXd out(z.size());
  for (int i = 0; i < z.size(); ++i) out[i] = clamp1(z[i], nlp.x_lower[i], nlp.x_upper[i]);
  return out;
}

double range_violation(const Eigen::VectorXd& v, const Eigen::VectorXd& lo,
                       const Eigen::VectorXd& hi) {
  double worst = 0.0;
  for (int i = 0; i < v.size(); ++i)
    worst = std::max({worst, lo[i] - v[i], v[i] - hi[i]});
  return worst;
}

struct Evals {
  double f = 0.0;
  Eigen::VectorXd gf;
  Eigen::VectorXd c;
  Eigen::MatrixXd J;
  bool finite = false;
};

Evals evaluate(const NlpProblem& nlp, const Eigen::VectorXd& z, bool with_derivs) {
  Evals e;
  e.f = nlp.objective(z);
  e.c = nlp.m > 0 ? nlp.constraints(z) : Eigen::VectorXd();
  if (with_derivs) {
    e.gf = nlp.gradient(z);
    if (nlp.m > 0) nlp.jacobian(z, e.J);
  }
  e.finite = std::isfinite(e.f) && e.c.allFinite() &&
             (!with_derivs || (e.gf.allFinite() && (nlp.m == 0 || e.J.allFinite())));
  return e;
}

// Shifted quadratic penalty pieces for ranged rows: each row is pulled
// toward the nearest attainable target P_[l,u](c - y/mu). Inactive rows
// contribute a constant and a vanishing effective multiplier.
struct Penalty {
  Eigen::VectorXd r;     // c minus its target
  Eigen::VectorXd yhat;  // y - mu r
  double phi = 0.0;      // merit value including the objective
  std::vector<int> active;
};

Penalty penalty_terms(const NlpProblem& nlp, const Evals& e,
                      const Eigen::VectorXd& y, double mu) {
  Penalty p;
  p.r.resize(nlp.m);
  p.yhat.resize(nlp.m);
  p.phi = e.f;
  for (int i = 0; i < nlp.m; ++i) {
    const double w = e.c[i] - y[i] / mu;
    const double target = clamp1(w, nlp.c_lower[i], nlp.c_upper[i]);
    if (w <= nlp.c_lower[i] || w >= nlp.c_upper[i]) p.active.push_back(i);
    p.r[i] = e.c[i] - target;
    p.yhat[i] = y[i] - mu * p.r[i];
    p.phi += -y[i] * p.r[i] + 0.5 * mu * p.r[i] * p.r[i];
  }
  return p;
}

double merit_only(const NlpProblem& nlp, const Evals& e, const Eigen::VectorXd& y,
                  double mu) {
  double phi = e.f;
  for (int i = 0; i < nlp.m; ++i) {
    const double w = e.c[i] - y[i] / mu;
    const double r = e.c[i] - clamp1(w, nlp.c_lower[i], nlp.c_upper[i]);
    phi += -y[i] * r + 0.5 * mu * r * r;
  }
  return phi;
}

double complementarity_norm(const NlpProblem& nlp, const Eigen::VectorXd& c,
                            const Eigen::VectorXd& y) {
  double worst = 0.0;
  for (int i = 0; i < nlp.m; ++i) {
    if (nlp.c_lower[i] == nlp.c_upper[i]) continue;  // equality row
    double gap = std::numeric_limits<double>::infinity();
    if (std::isfinite(nlp.c_lower[i])) gap = std::min(gap, std::abs(c[i] - nlp.c_lower[i]));
    if (std::isfinite(nlp.c_upper[i])) gap = std::min(gap, std::abs(nlp.c_upper[i] - c[i]));
    if (std::isfinite(gap)) worst = std::max(worst, std::abs(y[i]) * gap);
  }
  return worst;
}

// Pinpoints which evaluator produced the first non-finite value.
std::string nonfinite_detail(const Evals& e) {
  if (!std::isfinite(e.f)) return "objective evaluated non-finite";
  for (int i = 0; i < e.c.size(); ++i)
    if (!std::isfinite(e.c[i]))
      return "constraint " + std::to_string(i) + " evaluated non-finite";
  if (e.gf.size() > 0 && !e.gf.allFinite()) return "objective gradient evaluated non-finite";
  for (int i = 0; i < e.J.rows(); ++i)
    if (!e.J.row(i).allFinite())
      return "jacobian row " + std::to_string(i) + " evaluated non-finite";
  return "non-finite problem functions";
}

void bfgs_update(Eigen::MatrixXd& B, const Eigen::VectorXd& s,
                 Eigen::VectorXd yv) {
  const double sn = s.norm();
  if (sn <= 1e-16) return;
  const Eigen::VectorXd Bs = B * s;
  const double sBs = s.dot(Bs);
  double sy = s.dot(yv);
  if (sBs <= 0.0) return;
  if (sy < 0.2 * sBs) {  // Powell damping keeps the model positive definite
    const double theta = 0.8 * sBs / (sBs - sy);
    yv = theta * yv + (1.0 - theta) * Bs;
    sy = s.dot(yv);
  }
  if (sy <= 1e-12 * sn * yv.norm()) return;
  B.noalias() += yv * yv.transpose() / sy;
  B.noalias() -= Bs * Bs.transpose() / sBs;
}

}  // namespace

const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIter: return "max-iterations";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

ResidualReport kkt_residual(const NlpProblem& nlp, const Eigen::VectorXd& z,
                            const Eigen::VectorXd& y) {
  if (z.size() != nlp.n)
    throw std::invalid_argument("kkt_residual: point length != problem dimension");
  if (y.size() != nlp.m)
    throw std::invalid_argument("kkt_residual: multiplier length != constraint count");
  const Evals e = evaluate(nlp, z, true);
  Eigen::VectorXd gl = e.gf;
  if (nlp.m > 0) gl.noalias() -= e.J.transpose() * y;
  ResidualReport rep;
  rep.stationarity = (project_box(z - gl, nlp) - z).cwiseAbs().maxCoeff();
  rep.feasibility = std::max(nlp.m > 0 ? range_violation(e.c, nlp.c_lower, nlp.c_upper) : 0.0,
                             range_violation(z, nlp.x_lower, nlp.x_upper));
  rep.complementarity = nlp.m > 0 ? complementarity_norm(nlp, e.c, y) : 0.0;
  return rep;
}

NlpSolution solve(const NlpProblem& nlp, const Eigen::VectorXd& z0,
                  const SolverOptions& opts) {
  NlpSolution sol;
  if (z0.size() != nlp.n) {
    sol.message = "initial point has wrong length";
    return sol;
  }

  Eigen::VectorXd z = project_box(z0, nlp);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(nlp.m);
  double mu = opts.mu0;
  double omega = 1.0 / mu;                 // inner stationarity target
  double eta = 1.0 / std::pow(mu, 0.1);    // multiplier-update gate
  const double omega_floor = 0.5 * opts.tol_opt;

  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(nlp.n, nlp.n);
  Eigen::VectorXd prev_z, prev_gf;
  Eigen::MatrixXd prev_J;
  bool have_prev = false;
  int stall_resets = 0;
  double lambda = 1e-6;  // step damping, adapted by the inner loop

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    sol.outer_iterations = outer + 1;
    const double inner_tol = std::max(omega, omega_floor);
    bool stalled = false;

    Evals e = evaluate(nlp, z, true);
    if (!e.finite) {
      sol.z = z;
      sol.y = y;
      sol.mu_final = mu;
      sol.message = nonfinite_detail(e);
      return sol;
    }
    Penalty pen = penalty_terms(nlp, e, y, mu);

    for (int it = 0; it < opts.max_inner; ++it) {
      const Eigen::VectorXd g =
          nlp.m > 0 ? Eigen::VectorXd(e.gf - e.J.transpose() * pen.yhat) : e.gf;
      const double pg = (project_box(z - g, nlp) - z).cwiseAbs().maxCoeff();
      if (pg <= inner_tol) break;

      ++sol.inner_iterations;

      if (have_prev) {
        Eigen::VectorXd yv = e.gf - prev_gf;
        if (nlp.m > 0) yv.noalias() -= (e.J - prev_J).transpose() * pen.yhat;
        bfgs_update(B, z - prev_z, std::move(yv));
      }
      prev_z = z;
      prev_gf = e.gf;
      prev_J = e.J;
      have_prev = true;

      // Model Hessian: damped quasi-Newton curvature plus the Gauss-Newton
      // term of the penalty on its active rows.
      Eigen::MatrixXd H = B;
      if (!pen.active.empty()) {
        Eigen::MatrixXd JA(static_cast<int>(pen.active.size()), nlp.n);
        for (size_t a = 0; a < pen.active.size(); ++a) JA.row(a) = e.J.row(pen.active[a]);
        H.noalias() += mu * JA.transpose() * JA;
      }

      std::vector<int> free;
      free.reserve(nlp.n);
      for (int i = 0; i < nlp.n; ++i) {
        const bool at_lo = z[i] <= nlp.x_lower[i] && g[i] > 0.0;
        const bool at_hi = z[i] >= nlp.x_upper[i] && g[i] < 0.0;
        if (!at_lo && !at_hi) free.push_back(i);
      }
      if (free.empty()) break;  // every variable pinned; pg already measured

      Eigen::MatrixXd Hff = H(free, free);
      Eigen::VectorXd gFree(free.size());
      for (size_t i = 0; i < free.size(); ++i) gFree[i] = g[free[i]];

      // Damped step: (H + lambda diag) p = -g with the damping carried across
      // iterations and adapted to step quality. The penalty block is a
      // Gauss-Newton model, and a near-singular constraint Jacobian makes the
      // undamped step blow up along its sloppy directions; a line search
      // alone cannot repair that because it only shortens the bad direction,
      // while damping turns the step toward descent.
      Eigen::VectorXd dref = Hff.diagonal().cwiseAbs();
      const double dfloor = std::max(1.0, dref.maxCoeff()) * 1e-10;
      for (int i = 0; i < dref.size(); ++i) dref[i] = std::max(dref[i], dfloor);

      bool accepted = false;
      Eigen::VectorXd z_trial;
      while (!accepted && lambda <= 1e14) {
        Eigen::MatrixXd Hr = Hff;
        Hr.diagonal() += lambda * dref;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(Hr);
        Eigen::VectorXd pf;
        bool descent = false;
        if (ldlt.info() == Eigen::Success) {
          pf = ldlt.solve(-gFree);
          descent = pf.allFinite() && gFree.dot(pf) < 0.0;
        }
        if (descent) {
          Eigen::VectorXd p = Eigen::VectorXd::Zero(nlp.n);
          for (size_t i = 0; i < free.size(); ++i) p[free[i]] = pf[i];
          for (double alpha = 1.0; alpha >= 1e-14 && !accepted; alpha *= 0.5) {
            z_trial = project_box(z + alpha * p, nlp);
            const double decrease = g.dot(z_trial - z);
            if (decrease >= 0.0) continue;
            const Evals e_trial = evaluate(nlp, z_trial, false);
            if (e_trial.finite &&
                merit_only(nlp, e_trial, y, mu) <= pen.phi + 1e-4 * decrease) {
              accepted = true;
              // Full steps relax the damping, backtracked ones tighten it.
              lambda = alpha == 1.0 ? std::max(lambda / 10.0, 1e-14)
                                    : std::min(lambda * 2.0, 1e14);
            }
          }
          if (accepted) break;
        }
        lambda = std::max(lambda * 10.0, 1e-8);
      }
      if (!accepted) {
        // No merit decrease even at steepest-descent-scale damping: the
        // iterate is at this subproblem's numerical floor.
        stalled = true;
        break;
      }

      z = z_trial;
      e = evaluate(nlp, z, true);
      if (!e.finite) {
        sol.z = z;
        sol.y = y;
        sol.mu_final = mu;
        sol.message = nonfinite_detail(e);
        return sol;
      }
      pen = penalty_terms(nlp, e, y, mu);
    }

    // Outer bookkeeping with fresh values at the inner solution.
    const double viol = nlp.m > 0 ? range_violation(e.c, nlp.c_lower, nlp.c_upper) : 0.0;
    sol.outer_violations.push_back(viol);
    const Eigen::VectorXd gl =
        nlp.m > 0 ? Eigen::VectorXd(e.gf - e.J.transpose() * pen.yhat) : e.gf;
    const double stat = (project_box(z - gl, nlp) - z).cwiseAbs().maxCoeff();
    if (opts.log)
      (*opts.log) << "outer " << outer << "  mu " << mu << "  f " << e.f << "  viol "
                  << viol << "  stat " << stat << "  inner " << sol.inner_iterations
                  << "\n";

    // First-order test with the shifted estimate, then with the plain
    // multipliers: once the residual sits at evaluation roundoff, yhat
    // carries mu times that noise and only the unshifted y can pass.
    for (int pass = 0; pass < (nlp.m > 0 ? 2 : 1); ++pass) {
      const Eigen::VectorXd& yc = pass == 0 ? pen.yhat : y;
      const double st =
          pass == 0 ? stat
                    : (project_box(z - (e.gf - e.J.transpose() * yc), nlp) - z)
                          .cwiseAbs()
                          .maxCoeff();
      const double comp = nlp.m > 0 ? complementarity_norm(nlp, e.c, yc) : 0.0;
      const double ynorm = nlp.m > 0 ? yc.cwiseAbs().maxCoeff() : 0.0;
      const double comp_tol =
          std::max(10.0 * opts.tol_feas * (1.0 + ynorm), opts.tol_feas);
      if (st <= opts.tol_opt && viol <= opts.tol_feas && comp <= comp_tol) {
        sol.z = z;
        sol.y = yc;
        sol.status = SolveStatus::Optimal;
        sol.objective = e.f;
        sol.mu_final = mu;
        sol.kkt = kkt_residual(nlp, z, sol.y);
        sol.message = "converged";
        return sol;
      }
    }

    // Least-squares multiplier polish. Near-feasible iterates can miss the
    // stationarity target only because yhat carries mu-scaled residual noise;
    // solving gf = J_A^T y on the active rows over the free variables gives
    // the multipliers directly and is gated by the same optimality tests.
    if (nlp.m > 0 && viol <= opts.tol_feas && stat > opts.tol_opt) {
      std::vector<int> act;       // active rows: equalities plus tight ranges
      std::vector<int> sign;      // +1 lower-active, -1 upper-active, 0 equality
      for (int i = 0; i < nlp.m; ++i) {
        if (nlp.c_lower[i] == nlp.c_upper[i]) {
          act.push_back(i);
          sign.push_back(0);
          continue;
        }
        const double tight = 10.0 * opts.tol_feas * (1.0 + std::abs(e.c[i]));
        if (std::isfinite(nlp.c_lower[i]) && e.c[i] - nlp.c_lower[i] <= tight) {
          act.push_back(i);
          sign.push_back(+1);
        } else if (std::isfinite(nlp.c_upper[i]) && nlp.c_upper[i] - e.c[i] <= tight) {
          act.push_back(i);
          sign.push_back(-1);
        }
      }
      std::vector<int> freev;
      for (int i = 0; i < nlp.n; ++i)
        if (z[i] > nlp.x_lower[i] && z[i] < nlp.x_upper[i]) freev.push_back(i);
      if (!act.empty() && !freev.empty()) {
        Eigen::MatrixXd A(static_cast<int>(freev.size()), static_cast<int>(act.size()));
        Eigen::VectorXd b(static_cast<int>(freev.size()));
        for (size_t r = 0; r < freev.size(); ++r) {
          b[r] = e.gf[freev[r]];
          for (size_t q = 0; q < act.size(); ++q) A(r, q) = e.J(act[q], freev[r]);
        }
        Eigen::VectorXd ya = A.colPivHouseholderQr().solve(b);
        for (size_t q = 0; q < act.size(); ++q) {
          if (sign[q] > 0) ya[q] = std::max(ya[q], 0.0);
          if (sign[q] < 0) ya[q] = std::min(ya[q], 0.0);
        }
        Eigen::VectorXd yls = Eigen::VectorXd::Zero(nlp.m);
        for (size_t q = 0; q < act.size(); ++q) yls[act[q]] = ya[q];
        const double st =
            (project_box(z - (e.gf - e.J.transpose() * yls), nlp) - z)
                .cwiseAbs()
                .maxCoeff();
        const double comp = complementarity_norm(nlp, e.c, yls);
        const double comp_tol = std::max(
            10.0 * opts.tol_feas * (1.0 + yls.cwiseAbs().maxCoeff()), opts.tol_feas);
        if (st <= opts.tol_opt && comp <= comp_tol) {
          sol.z = z;
          sol.y = yls;
          sol.status = SolveStatus::Optimal;
          sol.objective = e.f;
          sol.mu_final = mu;
          sol.kkt = kkt_residual(nlp, z, sol.y);
          sol.message = "converged";
          return sol;
        }
      }
    }

    if (stalled) {
      if (stall_resets < 6) {
        // Restart the curvature model and let the outer updates proceed; a
        // stale quasi-Newton matrix is the usual culprit.
        ++stall_resets;
        B.setIdentity();
        have_prev = false;
      } else {
        sol.z = z;
        sol.y = pen.yhat;
        sol.objective = e.f;
        sol.kkt = kkt_residual(nlp, z, sol.y);
        sol.status = SolveStatus::NumericalFailure;
        sol.mu_final = mu;
        sol.message = "line search stalled";
        return sol;
      }
    }

    const double rnorm = nlp.m > 0 ? pen.r.cwiseAbs().maxCoeff() : 0.0;
    if (rnorm <= eta) {
      // Residuals at or below the feasibility floor are evaluation noise;
      // folding mu times noise into y would poison the multipliers.
      if (rnorm > 0.01 * opts.tol_feas)
        for (int i = 0; i < nlp.m; ++i) y[i] = clamp1(pen.yhat[i], -opts.y_max, opts.y_max);
      eta = std::max(eta / std::pow(mu, 0.9), 0.1 * opts.tol_feas);
      omega = std::max(omega / mu, omega_floor);
    } else {
      mu *= opts.mu_factor;
      if (mu > opts.mu_max) {
        sol.z = z;
        sol.y = pen.yhat;
        sol.objective = e.f;
        sol.kkt = kkt_residual(nlp, z, sol.y);
        sol.status = viol > 100.0 * opts.tol_feas ? SolveStatus::Infeasible
                                                  : SolveStatus::MaxIter;
        sol.mu_final = mu;
        sol.message = "penalty limit reached";
        return sol;
      }
      eta = 1.0 / std::pow(mu, 0.1);
      omega = std::max(1.0 / mu, omega_floor);
    }
  }

  const Evals e = evaluate(nlp, z, true);
  const Penalty pen = penalty_terms(nlp, e, y, mu);
  sol.z = z;
  sol.y = pen.yhat;
  sol.objective = e.f;
  sol.kkt = kkt_residual(nlp, z, sol.y);
  sol.status = SolveStatus::MaxIter;
  sol.mu_final = mu;
  sol.message = "outer iteration limit";
  return sol;
}

}  // namespace birkps
