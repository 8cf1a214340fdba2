#pragma once

#include <Eigen/Core>
#include <string>

namespace birkps {

/// Collocation grid families on [-1,1]. Lobatto families (Cgl, Lgl) contain
/// both endpoints, Lgr contains -1 only, Cg/Lg are interior-point families,
/// Uniform is equispaced including both endpoints.
enum class GridKind { Cgl, Lgl, Lgr, Cg, Lg, Uniform };

/// N+1 strictly increasing nodes on [-1,1] plus an affine map to [t0,tf].
struct Grid {
  GridKind kind = GridKind::Cgl;
  int order = 0;           // N
  Eigen::VectorXd nodes;   // length N+1, ascending
  double t0 = -1.0;
  double tf = 1.0;
};

/// Build a grid of the given family and order. Throws std::invalid_argument
/// for order < 1 or tf <= t0.
Grid make_grid(GridKind kind, int order, double t0 = -1.0, double tf = 1.0);

/// Nodes mapped affinely onto [t0,tf]. Endpoint nodes map to t0/tf exactly.
Eigen::VectorXd to_physical_time(const Grid& grid);

/// True for families that include both endpoints (Cgl, Lgl, Uniform).
bool is_lobatto(GridKind kind);

const char* grid_kind_name(GridKind kind);

/// Parse "cgl", "lgl", "lgr", "cg", "lg", "uniform" (case-insensitive).
GridKind parse_grid_kind(const std::string& name);

}  // namespace birkps
