#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "birkps/ocp.hpp"

namespace birkps {

/// Discretization variants. LagrangePN collocates the differentiated state,
/// BirkhoffA/B carry derivative samples V and recover states through the
/// integration matrix anchored at either endpoint, LeftPrecondA eliminates V
/// from the case-A form. The right-preconditioned form is algebraically the
/// case-A form itself, so "right-precond-a" parses to BirkhoffA.
enum class MethodVariant { LagrangePN, BirkhoffA, BirkhoffB, LeftPrecondA };

const char* method_name(MethodVariant m);
MethodVariant parse_method(const std::string& name);

/// Decision-vector layout: column-major X slice, column-major U slice,
/// optional column-major V slice, optional trailing t_f scalar.
struct VariableLayout {
  int order = 0;  // N
  int nx = 0, nu = 0;
  bool has_v = false;
  bool tf_free = false;
  int x_offset = 0, u_offset = 0, v_offset = -1, tf_index = -1;
  int n_vars = 0;
  Grid grid;
  TimeSpec time;

  int x_index(int node, int j) const { return x_offset + j * (order + 1) + node; }
  int u_index(int node, int j) const { return u_offset + j * (order + 1) + node; }
  int v_index(int row, int j) const { return v_offset + j * order + row; }
};

/// Dense nonlinear program: minimize objective subject to
/// c_lower <= constraints(z) <= c_upper and x_lower <= z <= x_upper.
/// Rows with equal bounds are equalities. The sparsity list enumerates the
/// structurally nonzero Jacobian entries.
struct NlpProblem {
  int n = 0;
  int m = 0;
  std::function<double(const Eigen::VectorXd&)> objective;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> constraints;
  std::function<void(const Eigen::VectorXd&, Eigen::MatrixXd&)> jacobian;
  Eigen::VectorXd c_lower, c_upper;
  Eigen::VectorXd x_lower, x_upper;
  std::vector<std::pair<int, int>> sparsity;
  VariableLayout layout;
};

struct Transcription {
  NlpProblem nlp;
  VariableLayout layout;
  Eigen::VectorXd initial_guess;
};

/// Discretize the problem on the grid with the chosen variant. Requires a
/// family containing both endpoints: boundary conditions bind at the first
/// and last node and the endpoint cost is evaluated there, which Radau and
/// Gauss families cannot express on this finite horizon.
Transcription transcribe(const OcpProblem& prob, const Grid& grid,
                         MethodVariant variant);

/// Canonical-domain integration weights: Clenshaw-Curtis weights on cgl
/// grids, Gauss-Lobatto weights on lgl grids. Other families are rejected.
Eigen::VectorXd quadrature_weights(const Grid& grid);

/// Reassemble the trajectory slices from a decision vector.
Trajectory extract_trajectory(const Eigen::VectorXd& z,
                              const VariableLayout& layout);

}  // namespace birkps
