#include <doctest.h>

#include <cmath>

#include "birkps/grid.hpp"
#include "birkps/nlpsolve.hpp"
#include "birkps/ocp.hpp"
#include "birkps/transcribe.hpp"
#include "birkps/validate.hpp"

using namespace birkps;

namespace {

// Scalar problem with pluggable dynamics, no boundary rows.
OcpProblem scalar_problem(DynamicsFn f) {
  OcpProblem p;
  p.name = "scalar";
  p.nx = 1;
  p.nu = 1;
  p.dynamics = std::move(f);
  p.x_lower = Eigen::VectorXd::Constant(1, -1e6);
  p.x_upper = Eigen::VectorXd::Constant(1, 1e6);
  p.u_lower = Eigen::VectorXd::Constant(1, -1e6);
  p.u_upper = Eigen::VectorXd::Constant(1, 1e6);
  p.time.t0 = 0.0;
  p.time.tf = 1.0;
  p.time.tf_free = false;
  return p;
}

Trajectory sampled_trajectory(const Grid& g, double t0, double tf,
                              const std::function<double(double)>& xfn,
                              const std::function<double(double)>& ufn) {
  Trajectory tr;
  tr.grid = g;
  tr.t0 = t0;
  tr.tf = tf;
  const int n = g.order + 1;
  tr.X.resize(n, 1);
  tr.U.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    const double t = t0 + 0.5 * (g.nodes[i] + 1.0) * (tf - t0);
    tr.X(i, 0) = xfn(t);
    tr.U(i, 0) = ufn(t);
  }
  return tr;
}

}  // namespace

TEST_CASE("zero dynamics propagate to a constant with roundoff-level error") {
  OcpProblem p = scalar_problem([](const Eigen::VectorXd& x, const Eigen::VectorXd&,
                                   double) { return Eigen::VectorXd::Zero(x.size()); });
  const Grid g = make_grid(GridKind::Cgl, 8);
  const Trajectory tr = sampled_trajectory(g, 0.0, 1.0, [](double) { return 0.7; },
                                           [](double) { return 0.0; });
  const PropagationReport rep = propagate(p, tr);
  REQUIRE(rep.ok);
  // barycentric evaluation of a constant rounds at the last ulp between nodes
  CHECK(rep.error.maxCoeff() <= 1e-14);
  CHECK(rep.terminal_error.cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(rep.t.size() == 10 * 9);
  for (int k = 1; k < rep.t.size(); ++k) CHECK(rep.t[k] > rep.t[k - 1]);
}

TEST_CASE("exponential growth reproduces e at the horizon end") {
  OcpProblem p = scalar_problem(
      [](const Eigen::VectorXd& x, const Eigen::VectorXd&, double) { return x; });
  const Grid g = make_grid(GridKind::Cgl, 16);
  const Trajectory tr = sampled_trajectory(g, 0.0, 1.0,
                                           [](double t) { return std::exp(t); },
                                           [](double) { return 0.0; });
  const double rtol = 1e-10;
  const PropagationReport rep = propagate(p, tr, rtol);
  REQUIRE(rep.ok);
  CHECK(std::abs(rep.x_rk(rep.t.size() - 1, 0) - std::exp(1.0)) <=
        10.0 * rtol * std::exp(1.0));
  CHECK(rep.steps > 0);
  const FeasibilityError fe = feasibility_error(rep);
  CHECK(fe.state_error[0] <= 1e-9);
}

TEST_CASE("piecewise-linear control integrates a ramp exactly") {
  // x' = u with u(t) = t sampled at the nodes: the linear interpolant is the
  // ramp itself, so only integrator error remains.
  OcpProblem p = scalar_problem([](const Eigen::VectorXd&, const Eigen::VectorXd& u,
                                   double) { return u; });
  const Grid g = make_grid(GridKind::Lgl, 10);
  const Trajectory tr = sampled_trajectory(g, 0.0, 2.0,
                                           [](double t) { return 0.5 * t * t; },
                                           [](double t) { return t; });
  const PropagationReport rep =
      propagate(p, tr, 1e-10, 1e-12, ControlInterp::PiecewiseLinear);
  REQUIRE(rep.ok);
  CHECK(feasibility_error(rep).state_error[0] <= 1e-8);
}

TEST_CASE("propagation rejects bad tolerances and mismatched shapes") {
  OcpProblem p = scalar_problem(
      [](const Eigen::VectorXd& x, const Eigen::VectorXd&, double) { return x; });
  const Grid g = make_grid(GridKind::Cgl, 8);
  const Trajectory tr = sampled_trajectory(g, 0.0, 1.0, [](double) { return 1.0; },
                                           [](double) { return 0.0; });
  CHECK_THROWS(propagate(p, tr, 0.0));
  CHECK_THROWS(propagate(p, tr, 1e-10, -1.0));
  Trajectory bad = tr;
  bad.X.resize(9, 2);
  CHECK_THROWS(propagate(p, bad));
}

TEST_CASE("a finite-escape flow reports the breakdown time") {
  // x' = x^2 from x(0)=1 escapes at t=1; the report must flag it.
  OcpProblem p = scalar_problem([](const Eigen::VectorXd& x, const Eigen::VectorXd&,
                                   double) {
    return Eigen::VectorXd(x.array().square());
  });
  const Grid g = make_grid(GridKind::Cgl, 8);
  Trajectory tr = sampled_trajectory(g, 0.0, 1.2, [](double) { return 1.0; },
                                     [](double) { return 0.0; });
  const PropagationReport rep = propagate(p, tr, 1e-8, 1e-10);
  CHECK_FALSE(rep.ok);
  CHECK(rep.breakdown_time == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("propagated double-integrator solution stays within the derived budget") {
  const OcpProblem p = make_double_integrator(1.0);
  const Transcription tr =
      transcribe(p, make_grid(GridKind::Cgl, 32), MethodVariant::BirkhoffA);
  const NlpSolution sol = solve(tr.nlp, tr.initial_guess);
  REQUIRE(sol.status == SolveStatus::Optimal);
  const Trajectory traj = extract_trajectory(sol.z, tr.layout);
  const PropagationReport rep = propagate(p, traj);
  REQUIRE(rep.ok);
  const FeasibilityError fe = feasibility_error(rep);
  CHECK(fe.state_error[0] <= 1e-4);  // position
  // Tightening the integrator 100x must not move the measured errors: they
  // belong to the discrete solution, not the integrator. The absolute floor
  // covers solutions whose defect sits at the integrator's own roundoff.
  const PropagationReport rep2 = propagate(p, traj, 1e-12, 1e-14);
  const FeasibilityError fe2 = feasibility_error(rep2);
  CHECK(std::abs(fe2.state_error[0] - fe.state_error[0]) <=
        std::max(0.1 * fe.state_error[0], 1e-10));
}

TEST_CASE("linear ode solve: trivial, exponential, and forced cases") {
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);

  SUBCASE("zero system holds the initial state") {
    const LinearOdeResult r = solve_linear_ode(
        make_grid(GridKind::Cgl, 12), Eigen::MatrixXd::Zero(1, 1), nullptr, one);
    REQUIRE(r.ok);
    CHECK((r.X.array() - 1.0).abs().maxCoeff() == 0.0);
  }

  SUBCASE("exponential on cgl within 1e-10 at n=24") {
    for (LinearOdeForm f : {LinearOdeForm::Birkhoff, LinearOdeForm::Lagrange}) {
      const Grid g = make_grid(GridKind::Cgl, 24);
      const LinearOdeResult r =
          solve_linear_ode(g, Eigen::MatrixXd::Identity(1, 1), nullptr, one, f);
      REQUIRE(r.ok);
      double worst = 0.0;
      for (int i = 0; i <= 24; ++i)
        worst = std::max(worst, std::abs(r.X(i, 0) - std::exp(g.nodes[i] + 1.0)));
      CHECK(worst <= 1e-10);
    }
  }

  SUBCASE("pure forcing reproduces the sine antiderivative at n=32") {
    const double pi = 3.14159265358979323846;
    const Grid g = make_grid(GridKind::Cgl, 32);
    auto force = [pi](double tau) {
      return Eigen::VectorXd::Constant(1, 0.5 * pi * std::cos(0.5 * pi * tau));
    };
    for (LinearOdeForm f : {LinearOdeForm::Birkhoff, LinearOdeForm::Lagrange}) {
      const LinearOdeResult r = solve_linear_ode(
          g, Eigen::MatrixXd::Zero(1, 1), force, -one, f);
      REQUIRE(r.ok);
      double worst = 0.0;
      for (int i = 0; i <= 32; ++i)
        worst = std::max(worst, std::abs(r.X(i, 0) - std::sin(0.5 * pi * g.nodes[i])));
      CHECK(worst <= 1e-10);
    }
  }

  SUBCASE("coupled rotation matches cosine and sine") {
    Eigen::MatrixXd rot(2, 2);
    rot << 0.0, 1.0, -1.0, 0.0;
    Eigen::VectorXd x0(2);
    x0 << 1.0, 0.0;
    const Grid g = make_grid(GridKind::Lgl, 24);
    for (LinearOdeForm f : {LinearOdeForm::Birkhoff, LinearOdeForm::Lagrange}) {
      const LinearOdeResult r = solve_linear_ode(g, rot, nullptr, x0, f);
      REQUIRE(r.ok);
      double worst = 0.0;
      for (int i = 0; i <= 24; ++i) {
        worst = std::max(worst, std::abs(r.X(i, 0) - std::cos(g.nodes[i] + 1.0)));
        worst = std::max(worst, std::abs(r.X(i, 1) + std::sin(g.nodes[i] + 1.0)));
      }
      CHECK(worst <= 1e-9);
    }
  }

  SUBCASE("input validation") {
    CHECK_THROWS(solve_linear_ode(make_grid(GridKind::Lg, 8),
                                  Eigen::MatrixXd::Zero(1, 1), nullptr, one));
    CHECK_THROWS(solve_linear_ode(make_grid(GridKind::Cgl, 8),
                                  Eigen::MatrixXd::Zero(2, 1), nullptr, one));
  }
}

TEST_CASE("exponential solve converges geometrically then floors") {
  for (GridKind k : {GridKind::Cgl, GridKind::Lgl}) {
    CAPTURE(grid_kind_name(k));
    double prev = 1e300;
    for (int n : {8, 12, 16, 20, 24}) {
      const Grid g = make_grid(k, n);
      const LinearOdeResult r = solve_linear_ode(
          g, Eigen::MatrixXd::Identity(1, 1), nullptr, Eigen::VectorXd::Ones(1));
      REQUIRE(r.ok);
      double worst = 0.0;
      for (int i = 0; i <= n; ++i)
        worst = std::max(worst, std::abs(r.X(i, 0) - std::exp(g.nodes[i] + 1.0)));
      if (prev > 1e-12) CHECK(worst < 0.2 * prev);  // at least geometric
      prev = worst;
    }
    CHECK(prev <= 1e-10);
  }
}

TEST_CASE("integration-matrix route beats the differentiation route at large n") {
  // x' = x from x(-1) = 1. The differentiation matrix amplifies entry and node
  // rounding by roughly n^2 near the boundary clusters; the integration matrix
  // has o(1) entries and stays at a few ulps. The contrast is starkest on lgl,
  // where the nodes come from a newton iteration; the trig-form cgl entries are
  // accurate enough that the differentiation route loses only one extra digit.
  auto max_err = [](const Grid& g, LinearOdeForm f) {
    const LinearOdeResult r = solve_linear_ode(
        g, Eigen::MatrixXd::Identity(1, 1), nullptr, Eigen::VectorXd::Ones(1), f);
    REQUIRE(r.ok);
    double e = 0.0;
    for (int i = 0; i < g.nodes.size(); ++i)
      e = std::max(e, std::abs(r.X(i, 0) - std::exp(g.nodes[i] + 1.0)));
    return e;
  };
  const Grid lgl = make_grid(GridKind::Lgl, 256);
  const double b_lgl = max_err(lgl, LinearOdeForm::Birkhoff);
  const double d_lgl = max_err(lgl, LinearOdeForm::Lagrange);
  CHECK(b_lgl <= 1e-12);
  CHECK(b_lgl * 50.0 <= d_lgl);  // measured ~267x; acceptance pins 100x at n=1024

  const Grid cgl = make_grid(GridKind::Cgl, 256);
  const double b_cgl = max_err(cgl, LinearOdeForm::Birkhoff);
  const double d_cgl = max_err(cgl, LinearOdeForm::Lagrange);
  CHECK(b_cgl <= 1e-12);
  CHECK(b_cgl * 4.0 <= d_cgl);  // measured ~13x
}
