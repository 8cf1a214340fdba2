#include "birkps/transcribe.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "birkps/birkhoff.hpp"
#include "birkps/interp.hpp"
#include "legendre.hpp"

namespace birkps {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kFdStep = std::cbrt(2.2e-16);

double fd_h(double v) { return kFdStep * std::max(1.0, std::abs(v)); }

// Everything a transcription's callbacks need, shared by value once.
struct Ctx {
  OcpProblem prob;
  MethodVariant variant = MethodVariant::LagrangePN;
  VariableLayout lay;
  Eigen::MatrixXd D;   // full differentiation matrix
  Eigen::MatrixXd B;   // value matrix for the Birkhoff-based variants
  Eigen::VectorXd anchor_row;
  Eigen::VectorXd Bl0;  // B * l0 for the eliminated form
  // Row equilibration for constraints built from D rows. Edge rows of D carry
  // O(N^2) entries; scaling them to unit size keeps the penalty Hessian of the
  // solver within double-precision reach without changing the feasible set.
  Eigen::VectorXd dscale;
  Eigen::VectorXd qw;   // running-cost weights; empty when no running cost
  int m = 0;
  int dyn_rows = 0;     // rows before the boundary block
  int path_offset = 0;

  int nodes() const { return lay.order + 1; }

  double tf_of(const Eigen::VectorXd& z) const {
    return lay.tf_free ? z[lay.tf_index] : lay.time.tf;
  }
  double scale_of(double tf) const { return 0.5 * (tf - lay.time.t0); }
  double time_at(int i, double tf) const {
    const double tau = lay.grid.nodes[i];
    if (tau == -1.0) return lay.time.t0;
    if (tau == 1.0) return tf;
    return lay.time.t0 + (tau + 1.0) * scale_of(tf);
  }
  double dt_dtf(int i) const { return 0.5 * (lay.grid.nodes[i] + 1.0); }

  Eigen::VectorXd x_at(const Eigen::VectorXd& z, int i) const {
    Eigen::VectorXd x(lay.nx);
    for (int j = 0; j < lay.nx; ++j) x[j] = z[lay.x_index(i, j)];
    return x;
  }
  Eigen::VectorXd u_at(const Eigen::VectorXd& z, int i) const {
    Eigen::VectorXd u(lay.nu);
    for (int j = 0; j < lay.nu; ++j) u[j] = z[lay.u_index(i, j)];
    return u;
  }
};

using CtxPtr = std::shared_ptr<const Ctx>;

Eigen::VectorXd eval_constraints(const Ctx& c, const Eigen::VectorXd& z) {
  const int N = c.lay.order, nx = c.lay.nx;
  const double tf = c.tf_of(z);
  const double s = c.scale_of(tf);
  Eigen::VectorXd out(c.m);

  // Dynamics samples at every node feed all variants.
  Eigen::MatrixXd F(c.nodes(), nx);
  for (int i = 0; i < c.nodes(); ++i)
    F.row(i) = c.prob.dynamics(c.x_at(z, i), c.u_at(z, i), c.time_at(i, tf)).transpose();

  auto X = [&](int i, int j) { return z[c.lay.x_index(i, j)]; };
  auto V = [&](int k, int j) { return z[c.lay.v_index(k, j)]; };

  switch (c.variant) {
    case MethodVariant::LagrangePN: {
      for (int j = 0; j < nx; ++j) {
        for (int i = 0; i <= N; ++i) {
          double acc = 0.0;
          for (int k = 0; k <= N; ++k) acc += c.D(i, k) * X(k, j);
          out[j * (N + 1) + i] = c.dscale[i] * (acc - s * F(i, j));
        }
      }
      break;
    }
    case MethodVariant::BirkhoffA:
    case MethodVariant::BirkhoffB: {
      const bool caseA = (c.variant == MethodVariant::BirkhoffA);
      const int anchor = caseA ? 0 : N;
      for (int j = 0; j < nx; ++j) {
        for (int k = 0; k < N; ++k) {
          const int node = caseA ? k + 1 : k;
          out[j * N + k] = V(k, j) - s * F(node, j);
        }
        for (int k = 0; k < N; ++k) {
          const int node = caseA ? k + 1 : k;
          double acc = 0.0;
          for (int q = 0; q < N; ++q) acc += c.B(k, q) * V(q, j);
          out[N * nx + j * N + k] = X(node, j) - X(anchor, j) - acc;
        }
        double acc = 0.0;
        for (int q = 0; q < N; ++q) acc += c.anchor_row[q] * V(q, j);
        out[2 * N * nx + j] = acc - s * F(anchor, j);
      }
      break;
    }
    case MethodVariant::LeftPrecondA: {
      for (int j = 0; j < nx; ++j) {
        double acc = 0.0;
        for (int k = 0; k <= N; ++k) acc += c.D(0, k) * X(k, j);
        out[j] = c.dscale[0] * (acc - s * F(0, j));
      }
      for (int j = 0; j < nx; ++j) {
        for (int k = 0; k < N; ++k) {
          double acc = 0.0;
          for (int q = 0; q < N; ++q) acc += c.B(k, q) * F(q + 1, j);
          out[nx + j * N + k] = X(k + 1, j) - s * acc + X(0, j) * c.Bl0[k];
        }
      }
      break;
    }
  }

  if (c.prob.nb > 0) {
    out.segment(c.dyn_rows, c.prob.nb) =
        c.prob.boundary(c.x_at(z, 0), c.x_at(z, N), c.lay.time.t0, tf);
  }
  if (c.prob.nh > 0) {
    for (int i = 0; i <= N; ++i) {
      const Eigen::VectorXd h = c.prob.path(c.x_at(z, i), c.u_at(z, i), c.time_at(i, tf));
      for (int r = 0; r < c.prob.nh; ++r)
        out[c.path_offset + r * (N + 1) + i] = h[r];
    }
  }
  return out;
}

void eval_jacobian(const Ctx& c, const Eigen::VectorXd& z, Eigen::MatrixXd& J) {
  const int N = c.lay.order, nx = c.lay.nx, nu = c.lay.nu;
  const double tf = c.tf_of(z);
  const double s = c.scale_of(tf);
  J.setZero(c.m, c.lay.n_vars);

  Eigen::MatrixXd F(c.nodes(), nx);
  std::vector<Eigen::MatrixXd> fxs(c.nodes()), fus(c.nodes());
  std::vector<Eigen::VectorXd> fts(c.nodes());
  for (int i = 0; i < c.nodes(); ++i) {
    const Eigen::VectorXd x = c.x_at(z, i), u = c.u_at(z, i);
    const double t = c.time_at(i, tf);
    F.row(i) = c.prob.dynamics(x, u, t).transpose();
    dynamics_jacobians(c.prob, x, u, t, fxs[i], fus[i], fts[i]);
  }

  auto tf_col = [&](int row, double val) {
    if (c.lay.tf_free) J(row, c.lay.tf_index) += val;
  };

  switch (c.variant) {
    case MethodVariant::LagrangePN: {
      for (int j = 0; j < nx; ++j) {
        for (int i = 0; i <= N; ++i) {
          const int row = j * (N + 1) + i;
          const double w = c.dscale[i];
          for (int k = 0; k <= N; ++k) J(row, c.lay.x_index(k, j)) += w * c.D(i, k);
          for (int l = 0; l < nx; ++l)
            J(row, c.lay.x_index(i, l)) -= w * s * fxs[i](j, l);
          for (int l = 0; l < nu; ++l)
            J(row, c.lay.u_index(i, l)) -= w * s * fus[i](j, l);
          tf_col(row, w * (-0.5 * F(i, j) - s * fts[i][j] * c.dt_dtf(i)));
        }
      }
      break;
    }
    case MethodVariant::BirkhoffA:
    case MethodVariant::BirkhoffB: {
      const bool caseA = (c.variant == MethodVariant::BirkhoffA);
      const int anchor = caseA ? 0 : N;
      for (int j = 0; j < nx; ++j) {
        for (int k = 0; k < N; ++k) {
          const int node = caseA ? k + 1 : k;
          const int row = j * N + k;
          J(row, c.lay.v_index(k, j)) += 1.0;
          for (int l = 0; l < nx; ++l)
            J(row, c.lay.x_index(node, l)) -= s * fxs[node](j, l);
          for (int l = 0; l < nu; ++l)
            J(row, c.lay.u_index(node, l)) -= s * fus[node](j, l);
          tf_col(row, -0.5 * F(node, j) - s * fts[node][j] * c.dt_dtf(node));
        }
        for (int k = 0; k < N; ++k) {
          const int node = caseA ? k + 1 : k;
          const int row = N * nx + j * N + k;
          J(row, c.lay.x_index(node, j)) += 1.0;
          J(row, c.lay.x_index(anchor, j)) -= 1.0;
          for (int q = 0; q < N; ++q) J(row, c.lay.v_index(q, j)) -= c.B(k, q);
        }
        const int row = 2 * N * nx + j;
        for (int q = 0; q < N; ++q)
          J(row, c.lay.v_index(q, j)) += c.anchor_row[q];
        for (int l = 0; l < nx; ++l)
          J(row, c.lay.x_index(anchor, l)) -= s * fxs[anchor](j, l);
        for (int l = 0; l < nu; ++l)
          J(row, c.lay.u_index(anchor, l)) -= s * fus[anchor](j, l);
        tf_col(row, -0.5 * F(anchor, j) - s * fts[anchor][j] * c.dt_dtf(anchor));
      }
      break;
    }
    case MethodVariant::LeftPrecondA: {
      const double w0 = c.dscale[0];
      for (int j = 0; j < nx; ++j) {
        const int row = j;
        for (int k = 0; k <= N; ++k) J(row, c.lay.x_index(k, j)) += w0 * c.D(0, k);
        for (int l = 0; l < nx; ++l)
          J(row, c.lay.x_index(0, l)) -= w0 * s * fxs[0](j, l);
        for (int l = 0; l < nu; ++l)
          J(row, c.lay.u_index(0, l)) -= w0 * s * fus[0](j, l);
        tf_col(row, w0 * (-0.5 * F(0, j) - s * fts[0][j] * c.dt_dtf(0)));
      }
      for (int j = 0; j < nx; ++j) {
        for (int k = 0; k < N; ++k) {
          const int row = nx + j * N + k;
          J(row, c.lay.x_index(k + 1, j)) += 1.0;
          J(row, c.lay.x_index(0, j)) += c.Bl0[k];
          double dtf = 0.0;
          for (int q = 0; q < N; ++q) {
            const double b = c.B(k, q);
            for (int l = 0; l < nx; ++l)
              J(row, c.lay.x_index(q + 1, l)) -= s * b * fxs[q + 1](j, l);
            for (int l = 0; l < nu; ++l)
              J(row, c.lay.u_index(q + 1, l)) -= s * b * fus[q + 1](j, l);
            dtf -= b * (0.5 * F(q + 1, j) + s * fts[q + 1][j] * c.dt_dtf(q + 1));
          }
          tf_col(row, dtf);
        }
      }
      break;
    }
  }

  if (c.prob.nb > 0) {
    // Central differences on the few variables the boundary rows touch.
    Eigen::VectorXd x0 = c.x_at(z, 0), xf = c.x_at(z, N);
    const double t0 = c.lay.time.t0;
    for (int l = 0; l < nx; ++l) {
      const double h = fd_h(x0[l]);
      Eigen::VectorXd xp = x0, xm = x0;
      xp[l] += h;
      xm[l] -= h;
      const Eigen::VectorXd d =
          (c.prob.boundary(xp, xf, t0, tf) - c.prob.boundary(xm, xf, t0, tf)) / (2.0 * h);
      for (int r = 0; r < c.prob.nb; ++r) J(c.dyn_rows + r, c.lay.x_index(0, l)) = d[r];
    }
    for (int l = 0; l < nx; ++l) {
      const double h = fd_h(xf[l]);
      Eigen::VectorXd xp = xf, xm = xf;
      xp[l] += h;
      xm[l] -= h;
      const Eigen::VectorXd d =
          (c.prob.boundary(x0, xp, t0, tf) - c.prob.boundary(x0, xm, t0, tf)) / (2.0 * h);
      for (int r = 0; r < c.prob.nb; ++r) J(c.dyn_rows + r, c.lay.x_index(N, l)) = d[r];
    }
    if (c.lay.tf_free) {
      const double h = fd_h(tf);
      const Eigen::VectorXd d =
          (c.prob.boundary(x0, xf, t0, tf + h) - c.prob.boundary(x0, xf, t0, tf - h)) / (2.0 * h);
      for (int r = 0; r < c.prob.nb; ++r) J(c.dyn_rows + r, c.lay.tf_index) = d[r];
    }
  }

  if (c.prob.nh > 0) {
    for (int i = 0; i <= N; ++i) {
      const Eigen::VectorXd x = c.x_at(z, i), u = c.u_at(z, i);
      const double t = c.time_at(i, tf);
      for (int l = 0; l < nx; ++l) {
        const double h = fd_h(x[l]);
        Eigen::VectorXd xp = x, xm = x;
        xp[l] += h;
        xm[l] -= h;
        const Eigen::VectorXd d = (c.prob.path(xp, u, t) - c.prob.path(xm, u, t)) / (2.0 * h);
        for (int r = 0; r < c.prob.nh; ++r)
          J(c.path_offset + r * (N + 1) + i, c.lay.x_index(i, l)) = d[r];
      }
      for (int l = 0; l < nu; ++l) {
        const double h = fd_h(u[l]);
        Eigen::VectorXd up = u, um = u;
        up[l] += h;
        um[l] -= h;
        const Eigen::VectorXd d = (c.prob.path(x, up, t) - c.prob.path(x, um, t)) / (2.0 * h);
        for (int r = 0; r < c.prob.nh; ++r)
          J(c.path_offset + r * (N + 1) + i, c.lay.u_index(i, l)) = d[r];
      }
      if (c.lay.tf_free) {
        const double h = fd_h(t);
        const Eigen::VectorXd d =
            (c.prob.path(x, u, t + h) - c.prob.path(x, u, t - h)) / (2.0 * h) * c.dt_dtf(i);
        for (int r = 0; r < c.prob.nh; ++r)
          J(c.path_offset + r * (N + 1) + i, c.lay.tf_index) = d[r];
      }
    }
  }
}

double eval_objective(const Ctx& c, const Eigen::VectorXd& z) {
  const int N = c.lay.order;
  const double tf = c.tf_of(z);
  double obj = 0.0;
  if (c.prob.endpoint_cost)
    obj += c.prob.endpoint_cost(c.x_at(z, 0), c.x_at(z, N), c.lay.time.t0, tf);
  if (c.prob.running_cost) {
    const double s = c.scale_of(tf);
    double acc = 0.0;
    for (int i = 0; i <= N; ++i)
      acc += c.qw[i] * c.prob.running_cost(c.x_at(z, i), c.u_at(z, i), c.time_at(i, tf));
    obj += s * acc;
  }
  return obj;
}

Eigen::VectorXd eval_gradient(const Ctx& c, const Eigen::VectorXd& z) {
  const int N = c.lay.order, nx = c.lay.nx, nu = c.lay.nu;
  const double tf = c.tf_of(z);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(c.lay.n_vars);

  if (c.prob.endpoint_cost) {
    Eigen::VectorXd x0 = c.x_at(z, 0), xf = c.x_at(z, N);
    const double t0 = c.lay.time.t0;
    for (int l = 0; l < nx; ++l) {
      const double h = fd_h(x0[l]);
      Eigen::VectorXd xp = x0, xm = x0;
      xp[l] += h;
      xm[l] -= h;
      g[c.lay.x_index(0, l)] +=
          (c.prob.endpoint_cost(xp, xf, t0, tf) - c.prob.endpoint_cost(xm, xf, t0, tf)) / (2.0 * h);
    }
    for (int l = 0; l < nx; ++l) {
      const double h = fd_h(xf[l]);
      Eigen::VectorXd xp = xf, xm = xf;
      xp[l] += h;
      xm[l] -= h;
      g[c.lay.x_index(N, l)] +=
          (c.prob.endpoint_cost(x0, xp, t0, tf) - c.prob.endpoint_cost(x0, xm, t0, tf)) / (2.0 * h);
    }
    if (c.lay.tf_free) {
      const double h = fd_h(tf);
      g[c.lay.tf_index] +=
          (c.prob.endpoint_cost(x0, xf, t0, tf + h) - c.prob.endpoint_cost(x0, xf, t0, tf - h)) / (2.0 * h);
    }
  }

  if (c.prob.running_cost) {
    const double s = c.scale_of(tf);
    double acc = 0.0, acct = 0.0;
    for (int i = 0; i <= N; ++i) {
      const Eigen::VectorXd x = c.x_at(z, i), u = c.u_at(z, i);
      const double t = c.time_at(i, tf);
      const double fi = c.prob.running_cost(x, u, t);
      acc += c.qw[i] * fi;
      for (int l = 0; l < nx; ++l) {
        const double h = fd_h(x[l]);
        Eigen::VectorXd xp = x, xm = x;
        xp[l] += h;
        xm[l] -= h;
        g[c.lay.x_index(i, l)] += s * c.qw[i] *
            (c.prob.running_cost(xp, u, t) - c.prob.running_cost(xm, u, t)) / (2.0 * h);
      }
      for (int l = 0; l < nu; ++l) {
        const double h = fd_h(u[l]);
        Eigen::VectorXd up = u, um = u;
        up[l] += h;
        um[l] -= h;
        g[c.lay.u_index(i, l)] += s * c.qw[i] *
            (c.prob.running_cost(x, up, t) - c.prob.running_cost(x, um, t)) / (2.0 * h);
      }
      if (c.lay.tf_free) {
        const double h = fd_h(t);
        acct += c.qw[i] * c.dt_dtf(i) *
            (c.prob.running_cost(x, u, t + h) - c.prob.running_cost(x, u, t - h)) / (2.0 * h);
      }
    }
    if (c.lay.tf_free) g[c.lay.tf_index] += 0.5 * acc + s * acct;
  }
  return g;
}

void emit_sparsity(const Ctx& c, std::vector<std::pair<int, int>>& sp) {
  const int N = c.lay.order, nx = c.lay.nx, nu = c.lay.nu;
  auto node_cols = [&](int row, int node) {
    for (int l = 0; l < nx; ++l) sp.emplace_back(row, c.lay.x_index(node, l));
    for (int l = 0; l < nu; ++l) sp.emplace_back(row, c.lay.u_index(node, l));
    if (c.lay.tf_free) sp.emplace_back(row, c.lay.tf_index);
  };

  switch (c.variant) {
    case MethodVariant::LagrangePN:
      for (int j = 0; j < nx; ++j)
        for (int i = 0; i <= N; ++i) {
          const int row = j * (N + 1) + i;
          for (int k = 0; k <= N; ++k) sp.emplace_back(row, c.lay.x_index(k, j));
          node_cols(row, i);
        }
      break;
    case MethodVariant::BirkhoffA:
    case MethodVariant::BirkhoffB: {
      const bool caseA = (c.variant == MethodVariant::BirkhoffA);
      const int anchor = caseA ? 0 : N;
      for (int j = 0; j < nx; ++j) {
        for (int k = 0; k < N; ++k) {
          const int row = j * N + k;
          sp.emplace_back(row, c.lay.v_index(k, j));
          node_cols(row, caseA ? k + 1 : k);
        }
        for (int k = 0; k < N; ++k) {
          const int row = N * nx + j * N + k;
          sp.emplace_back(row, c.lay.x_index(caseA ? k + 1 : k, j));
          sp.emplace_back(row, c.lay.x_index(anchor, j));
          for (int q = 0; q < N; ++q) sp.emplace_back(row, c.lay.v_index(q, j));
        }
        const int row = 2 * N * nx + j;
        for (int q = 0; q < N; ++q) sp.emplace_back(row, c.lay.v_index(q, j));
        node_cols(row, anchor);
      }
      break;
    }
    case MethodVariant::LeftPrecondA:
      for (int j = 0; j < nx; ++j) {
        for (int k = 0; k <= N; ++k) sp.emplace_back(j, c.lay.x_index(k, j));
        node_cols(j, 0);
      }
      for (int j = 0; j < nx; ++j)
        for (int k = 0; k < N; ++k) {
          const int row = nx + j * N + k;
          sp.emplace_back(row, c.lay.x_index(0, j));
          for (int q = 0; q <= N; ++q) node_cols(row, q);
        }
      break;
  }
  for (int r = 0; r < c.prob.nb; ++r) {
    const int row = c.dyn_rows + r;
    for (int l = 0; l < nx; ++l) {
      sp.emplace_back(row, c.lay.x_index(0, l));
      sp.emplace_back(row, c.lay.x_index(N, l));
    }
    if (c.lay.tf_free) sp.emplace_back(row, c.lay.tf_index);
  }
  for (int r = 0; r < c.prob.nh; ++r)
    for (int i = 0; i <= N; ++i) node_cols(c.path_offset + r * (N + 1) + i, i);
}

}  // namespace

const char* method_name(MethodVariant m) {
  switch (m) {
    case MethodVariant::LagrangePN: return "lagrange";
    case MethodVariant::BirkhoffA: return "birkhoff-a";
    case MethodVariant::BirkhoffB: return "birkhoff-b";
    case MethodVariant::LeftPrecondA: return "left-precond-a";
  }
  return "?";
}

MethodVariant parse_method(const std::string& name) {
  std::string s;
  for (char ch : name) s.push_back(static_cast<char>(std::tolower(ch)));
  if (s == "lagrange" || s == "pn") return MethodVariant::LagrangePN;
  if (s == "birkhoff-a") return MethodVariant::BirkhoffA;
  if (s == "birkhoff-b") return MethodVariant::BirkhoffB;
  if (s == "left-precond-a") return MethodVariant::LeftPrecondA;
  // Algebraically identical to the case-A form.
  if (s == "right-precond-a") return MethodVariant::BirkhoffA;
  throw std::invalid_argument("unknown method: " + name);
}

Eigen::VectorXd quadrature_weights(const Grid& grid) {
  const int n = grid.order;
  if (grid.kind == GridKind::Cgl) {
    // Weights via the cosine-transform route: integrate each mode exactly.
    Eigen::VectorXd w(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double dk = (k == 0 || k == n) ? 2.0 : 1.0;
      double acc = 0.0;
      for (int m = 0; m <= n; m += 2) {
        const double cm = (m == 0 || m == n) ? 2.0 : 1.0;
        acc += std::cos(m * k * kPi / n) / (cm * (1.0 - m * m));
      }
      // angle index k corresponds to ascending node index n - k
      w[n - k] = 4.0 * acc / (n * dk);
    }
    return w;
  }
  if (grid.kind == GridKind::Lgl) {
    Eigen::VectorXd w(n + 1);
    for (int i = 0; i <= n; ++i) {
      const double p = detail::legendre(n, grid.nodes[i]).p;
      w[i] = 2.0 / (n * (n + 1.0) * p * p);
    }
    return w;
  }
  throw std::invalid_argument(
      std::string("quadrature_weights: no closed rule for ") +
      grid_kind_name(grid.kind) + " grids; use cgl or lgl");
}

Transcription transcribe(const OcpProblem& prob, const Grid& grid,
                         MethodVariant variant) {
  validate_dimensions(prob);
  if (grid.kind != GridKind::Cgl && grid.kind != GridKind::Lgl) {
    if (!is_lobatto(grid.kind))
      throw std::invalid_argument(
          std::string("transcribe: ") + grid_kind_name(grid.kind) +
          " grids lack a node at one horizon end, so boundary conditions and "
          "endpoint costs cannot bind there; use a cgl or lgl grid");
    throw std::invalid_argument(
        std::string("transcribe: ") + grid_kind_name(grid.kind) +
        " grids make high-order interpolation on a finite horizon unstable "
        "(differentiation entries grow geometrically with the order); use a "
        "cgl or lgl grid");
  }

  const int N = grid.order;
  auto ctx = std::make_shared<Ctx>();
  Ctx& c = *ctx;
  c.prob = prob;
  c.variant = variant;

  VariableLayout& lay = c.lay;
  lay.order = N;
  lay.nx = prob.nx;
  lay.nu = prob.nu;
  lay.grid = grid;
  lay.time = prob.time;
  lay.tf_free = prob.time.tf_free;
  lay.has_v = (variant == MethodVariant::BirkhoffA || variant == MethodVariant::BirkhoffB);
  lay.x_offset = 0;
  lay.u_offset = (N + 1) * prob.nx;
  int cursor = lay.u_offset + (N + 1) * prob.nu;
  if (lay.has_v) {
    lay.v_offset = cursor;
    cursor += N * prob.nx;
  }
  if (lay.tf_free) {
    lay.tf_index = cursor;
    cursor += 1;
  }
  lay.n_vars = cursor;

  const LagrangeBasis basis = build_basis(grid);
  const SpectralOperators ops = diff_matrix(basis);
  c.D = ops.D;
  if (variant == MethodVariant::LagrangePN || variant == MethodVariant::LeftPrecondA) {
    c.dscale.resize(N + 1);
    for (int i = 0; i <= N; ++i)
      c.dscale[i] = 1.0 / std::max(1.0, c.D.row(i).cwiseAbs().maxCoeff());
  }
  if (variant != MethodVariant::LagrangePN) {
    const BirkhoffCase bc = (variant == MethodVariant::BirkhoffB) ? BirkhoffCase::B
                                                                  : BirkhoffCase::A;
    const BirkhoffOperators birk = build_birkhoff(basis, bc);
    c.B = birk.B;
    c.anchor_row = birk.boundary_row;
    if (variant == MethodVariant::LeftPrecondA) c.Bl0 = birk.B * ops.l0;
  }
  if (prob.running_cost) c.qw = quadrature_weights(grid);

  c.dyn_rows = lay.has_v ? (2 * N + 1) * prob.nx : (N + 1) * prob.nx;
  c.path_offset = c.dyn_rows + prob.nb;
  c.m = c.path_offset + (N + 1) * prob.nh;

  NlpProblem nlp;
  nlp.n = lay.n_vars;
  nlp.m = c.m;
  nlp.layout = lay;

  // Constraint bounds: dynamics rows are equalities at zero, then the
  // endpoint block, then per-node path rows.
  nlp.c_lower = Eigen::VectorXd::Zero(c.m);
  nlp.c_upper = Eigen::VectorXd::Zero(c.m);
  if (prob.nb > 0) {
    nlp.c_lower.segment(c.dyn_rows, prob.nb) = prob.boundary_lower;
    nlp.c_upper.segment(c.dyn_rows, prob.nb) = prob.boundary_upper;
  }
  for (int r = 0; r < prob.nh; ++r)
    for (int i = 0; i <= N; ++i) {
      nlp.c_lower[c.path_offset + r * (N + 1) + i] = prob.path_lower[r];
      nlp.c_upper[c.path_offset + r * (N + 1) + i] = prob.path_upper[r];
    }

  nlp.x_lower = Eigen::VectorXd::Constant(lay.n_vars, -kInf);
  nlp.x_upper = Eigen::VectorXd::Constant(lay.n_vars, kInf);
  for (int j = 0; j < prob.nx; ++j)
    for (int i = 0; i <= N; ++i) {
      nlp.x_lower[lay.x_index(i, j)] = prob.x_lower[j];
      nlp.x_upper[lay.x_index(i, j)] = prob.x_upper[j];
    }
  for (int j = 0; j < prob.nu; ++j)
    for (int i = 0; i <= N; ++i) {
      nlp.x_lower[lay.u_index(i, j)] = prob.u_lower[j];
      nlp.x_upper[lay.u_index(i, j)] = prob.u_upper[j];
    }
  if (lay.tf_free) {
    nlp.x_lower[lay.tf_index] = prob.time.tf_min;
    nlp.x_upper[lay.tf_index] = prob.time.tf_max;
  }

  nlp.objective = [ctx](const Eigen::VectorXd& z) { return eval_objective(*ctx, z); };
  nlp.gradient = [ctx](const Eigen::VectorXd& z) { return eval_gradient(*ctx, z); };
  nlp.constraints = [ctx](const Eigen::VectorXd& z) { return eval_constraints(*ctx, z); };
  nlp.jacobian = [ctx](const Eigen::VectorXd& z, Eigen::MatrixXd& J) {
    eval_jacobian(*ctx, z, J);
  };
  emit_sparsity(c, nlp.sparsity);

  // Initial guess: states interpolate the boundary hints linearly in tau,
  // controls from the hint or zero, derivative samples from differentiating
  // the state guess. Seeding V with the guess path's own slope starts the
  // iterate on the linear integration rows and leaves the whole defect in
  // the dynamics rows, which keeps the penalty homotopy from deforming the
  // path long before the multipliers settle.
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(lay.n_vars);
  Eigen::VectorXd gx0 = prob.guess_x0.size() == prob.nx ? prob.guess_x0
                                                        : Eigen::VectorXd::Zero(prob.nx);
  Eigen::VectorXd gxf = prob.guess_xf.size() == prob.nx ? prob.guess_xf : gx0;
  double tf0 = lay.tf_free
                   ? std::clamp(prob.guess_tf, prob.time.tf_min, prob.time.tf_max)
                   : prob.time.tf;
  for (int i = 0; i <= N; ++i) {
    const double a = 0.5 * (grid.nodes[i] + 1.0);
    for (int j = 0; j < prob.nx; ++j) {
      const double v = (1.0 - a) * gx0[j] + a * gxf[j];
      z0[lay.x_index(i, j)] = std::clamp(v, prob.x_lower[j], prob.x_upper[j]);
    }
    Eigen::VectorXd u = prob.guess_u ? prob.guess_u(a) : Eigen::VectorXd::Zero(prob.nu);
    for (int j = 0; j < prob.nu; ++j)
      z0[lay.u_index(i, j)] = std::clamp(u[j], prob.u_lower[j], prob.u_upper[j]);
  }
  if (lay.tf_free) z0[lay.tf_index] = tf0;
  if (lay.has_v) {
    Eigen::MatrixXd Xg(N + 1, prob.nx);
    for (int i = 0; i <= N; ++i)
      for (int j = 0; j < prob.nx; ++j) Xg(i, j) = z0[lay.x_index(i, j)];
    const Eigen::MatrixXd DXg = c.D * Xg;
    for (int k = 0; k < N; ++k) {
      const int node = (variant == MethodVariant::BirkhoffB) ? k : k + 1;
      for (int j = 0; j < prob.nx; ++j) z0[lay.v_index(k, j)] = DXg(node, j);
    }
  }

  Transcription out;
  out.nlp = std::move(nlp);
  out.layout = lay;
  out.initial_guess = std::move(z0);
  return out;
}

Trajectory extract_trajectory(const Eigen::VectorXd& z,
                              const VariableLayout& lay) {
  if (z.size() != lay.n_vars)
    throw std::invalid_argument("extract_trajectory: vector length != layout");
  const int N = lay.order;
  Trajectory traj;
  traj.grid = lay.grid;
  traj.t0 = lay.time.t0;
  traj.tf = lay.tf_free ? z[lay.tf_index] : lay.time.tf;
  traj.grid.t0 = traj.t0;
  traj.grid.tf = traj.tf;
  traj.X.resize(N + 1, lay.nx);
  traj.U.resize(N + 1, lay.nu);
  for (int j = 0; j < lay.nx; ++j)
    for (int i = 0; i <= N; ++i) traj.X(i, j) = z[lay.x_index(i, j)];
  for (int j = 0; j < lay.nu; ++j)
    for (int i = 0; i <= N; ++i) traj.U(i, j) = z[lay.u_index(i, j)];
  if (lay.has_v) {
    traj.V.resize(N, lay.nx);
    for (int j = 0; j < lay.nx; ++j)
      for (int k = 0; k < N; ++k) traj.V(k, j) = z[lay.v_index(k, j)];
  }
  return traj;
}

}  // namespace birkps
