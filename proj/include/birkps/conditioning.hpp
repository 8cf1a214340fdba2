#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "birkps/grid.hpp"

namespace birkps {

/// Matrices whose 2-norm conditioning is tracked across grid orders:
/// InnerD  interior block of the differentiation matrix (rows/cols 1..N),
/// CLagr   [D_a, -I] collocation-form constraint matrix,
/// CBirk   [B_a, -I] integration-form constraint matrix,
/// ABirk   [B_a, -I, b0] integration form including the anchor column.
enum class TestMatrixKind { InnerD, CLagr, CBirk, ABirk };

const char* test_matrix_name(TestMatrixKind kind);
TestMatrixKind parse_test_matrix(const std::string& name);

/// Assemble one of the tracked matrices on the given grid. The integration
/// forms need a grid family with the anchor endpoint (cgl, lgl, lgr).
Eigen::MatrixXd assemble_test_matrix(const Grid& grid, TestMatrixKind kind);

/// 2-norm condition number: largest singular value over smallest nonzero
/// one. Returns +inf for an exactly rank-deficient matrix.
double cond2(const Eigen::MatrixXd& m);

struct CondRecord {
  GridKind grid;
  TestMatrixKind matrix;
  int order;
  double kappa;
};

struct CondSeries {
  GridKind grid = GridKind::Cgl;
  TestMatrixKind matrix = TestMatrixKind::InnerD;
  bool supported = true;  // false when the grid/matrix combination is invalid
  bool partial = false;   // true when a kappa failed to evaluate mid-series
  std::vector<CondRecord> records;
  double slope = std::numeric_limits<double>::quiet_NaN();  // log-log LS fit
};

struct CondSweep {
  std::vector<int> orders;
  std::vector<CondSeries> series;
};

/// Evaluate kappa over the order list for every grid/matrix pair and fit
/// log kappa against log N. A failed record truncates its own series and
/// marks it partial; other series are unaffected.
CondSweep sweep_and_fit(const std::vector<GridKind>& grids,
                        const std::vector<TestMatrixKind>& matrices,
                        const std::vector<int>& orders);

}  // namespace birkps
