#include "birkps/conditioning.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

#include "birkps/birkhoff.hpp"
#include "birkps/interp.hpp"

namespace birkps {

const char* test_matrix_name(TestMatrixKind kind) {
  switch (kind) {
    case TestMatrixKind::InnerD: return "innerd";
    case TestMatrixKind::CLagr: return "clagr";
    case TestMatrixKind::CBirk: return "cbirk";
    case TestMatrixKind::ABirk: return "abirk";
  }
  return "?";
}

TestMatrixKind parse_test_matrix(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(c)));
  if (s == "innerd") return TestMatrixKind::InnerD;
  if (s == "clagr") return TestMatrixKind::CLagr;
  if (s == "cbirk") return TestMatrixKind::CBirk;
  if (s == "abirk") return TestMatrixKind::ABirk;
  throw std::invalid_argument("unknown test matrix kind: " + name);
}

namespace {

bool birkhoff_family(GridKind k) {
  return k == GridKind::Cgl || k == GridKind::Lgl || k == GridKind::Lgr;
}

}  // namespace

Eigen::MatrixXd assemble_test_matrix(const Grid& grid, TestMatrixKind kind) {
  const int n = grid.order;
  const LagrangeBasis basis = build_basis(grid);

  if (kind == TestMatrixKind::InnerD || kind == TestMatrixKind::CLagr) {
    const SpectralOperators ops = diff_matrix(basis);
    if (kind == TestMatrixKind::InnerD) return ops.Da;
    Eigen::MatrixXd m(n, 2 * n);
    m.leftCols(n) = ops.Da;
    m.rightCols(n) = -Eigen::MatrixXd::Identity(n, n);
    return m;
  }

  if (!birkhoff_family(grid.kind))
    throw std::invalid_argument(
        std::string("assemble_test_matrix: integration forms need a cgl, lgl "
                    "or lgr grid, got ") + grid_kind_name(grid.kind));

  const BirkhoffOperators birk = build_birkhoff(basis, BirkhoffCase::A);
  if (kind == TestMatrixKind::CBirk) {
    Eigen::MatrixXd m(n, 2 * n);
    m.leftCols(n) = birk.B;
    m.rightCols(n) = -Eigen::MatrixXd::Identity(n, n);
    return m;
  }
  Eigen::MatrixXd m(n, 2 * n + 1);
  m.leftCols(n) = birk.B;
  m.middleCols(n, n) = -Eigen::MatrixXd::Identity(n, n);
  m.col(2 * n) = birk.boundary_col;
  return m;
}

double cond2(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0)
    throw std::invalid_argument("cond2: empty matrix");
  Eigen::VectorXd sv;
  if (std::min(m.rows(), m.cols()) <= 16) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    sv = svd.singularValues();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    sv = svd.singularValues();
  }
  const double smax = sv[0];
  if (smax == 0.0) return std::numeric_limits<double>::infinity();
  const double smin = sv[sv.size() - 1];
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

CondSweep sweep_and_fit(const std::vector<GridKind>& grids,
                        const std::vector<TestMatrixKind>& matrices,
                        const std::vector<int>& orders) {
  if (orders.empty())
    throw std::invalid_argument("sweep_and_fit: empty order list");

  CondSweep sweep;
  sweep.orders = orders;
  for (GridKind gk : grids) {
    for (TestMatrixKind mk : matrices) {
      CondSeries series;
      series.grid = gk;
      series.matrix = mk;
      const bool needs_birk =
          (mk == TestMatrixKind::CBirk || mk == TestMatrixKind::ABirk);
      if (needs_birk && !birkhoff_family(gk)) {
        series.supported = false;
        sweep.series.push_back(std::move(series));
        continue;
      }
      for (int n : orders) {
        double kappa = std::numeric_limits<double>::quiet_NaN();
        try {
          kappa = cond2(assemble_test_matrix(make_grid(gk, n), mk));
        } catch (const std::exception&) {
          series.partial = true;
          break;
        }
        if (!std::isfinite(kappa)) {
          series.partial = true;
          break;
        }
        series.records.push_back({gk, mk, n, kappa});
      }
      if (series.records.size() >= 2) {
        const int cnt = static_cast<int>(series.records.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const CondRecord& r : series.records) {
          const double x = std::log(static_cast<double>(r.order));
          const double y = std::log(r.kappa);
          sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        series.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
      }
      sweep.series.push_back(std::move(series));
    }
  }
  return sweep;
}

}  // namespace birkps
