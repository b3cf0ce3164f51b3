#pragma once

// Tangent charts, the symmetric non-negative weight program and the
// Laplacian variants built from it.

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <iosfwd>
#include <string>
#include <vector>

#include "hemips/pixelgraph.hpp"

namespace hemips::laplacian {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class ChartMethod {
  Pca,     // PCA of the neighbourhood vectors
  LogMap,  // exact logarithm map at the centre, for vectors on a sphere
};

/// Coordinates are relative to the centre, so the centre sits at the origin.
/// coords[i] belongs to graph.neighbors[center][i].
struct TangentChart {
  int center = 0;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();  // centre before the shift
  std::vector<Eigen::Vector2d> coords;
  double radius = 0.0;
  bool degenerate = false;
};

/// Removed nodes and rank-deficient neighbourhoods yield degenerate charts.
std::vector<TangentChart> build_charts(const graph::PixelGraph& g, ChartMethod method = ChartMethod::Pca);

enum class RowSumMode { Constant, InverseRadiusSquared };

struct WeightOptions {
  RowSumMode row_sum = RowSumMode::Constant;
  double tolerance = 1e-10;  // equality residual of the weight program
  int max_newton = 100;      // per regularization level
  bool per_row_only = false;  // skip the coupled program, use the row fallback
};

struct WeightReport {
  bool converged = false;
  bool fallback_used = false;
  int newton_iterations = 0;
  double equality_residual = 0.0;  // max over interior rows, in chart units
  double symmetry_residual = 0.0;
  double min_weight = 0.0;
  std::vector<int> demoted;           // graph nodes dropped as infeasible
  int neumann_rows_kept_plain = 0;    // boundary rows without a feasible reflection
};

/// Weights over graph nodes. Inactive nodes have empty rows and columns.
struct Weights {
  SparseMatrix w;
  std::vector<std::uint8_t> active;
  std::vector<std::uint8_t> boundary;
  std::vector<double> row_sum_target;
  WeightReport report;
};

/// min ||w||^2  s.t.  A w = b,  w >= 0, by a semismooth Newton method on
/// the dual with a regularization mu driven towards zero.
struct QpResult {
  Eigen::VectorXd w;
  Eigen::VectorXd y;  // multipliers, w = max(0, A^T y)
  double residual = 0.0;  // ||A w - b||_inf
  int iterations = 0;
  bool converged = false;
};
QpResult min_norm_nonneg(const SparseMatrix& a, const Eigen::VectorXd& b, double tolerance = 1e-10,
                         int max_newton = 100);

/// Row targets s_p for every node.
std::vector<double> row_sum_targets(const std::vector<TangentChart>& charts, RowSumMode mode);

/// True when the origin lies strictly inside the convex hull of `points`,
/// i.e. a positive combination with zero mean displacement exists.
bool row_feasible(const std::vector<Eigen::Vector2d>& points);

/// The coupled program over interior rows:
///   min sum w^2  s.t.  sum_q w_pq (q - p) = 0,  sum_q w_pq = s_p,  w >= 0,  w = w^T.
/// Interior-boundary weights belong to the interior row; boundary rows are
/// the transposes. Interior rows with no feasible solution are demoted.
/// `boundary` is indexed by graph node.
Weights solve_weights(const graph::PixelGraph& g, const std::vector<TangentChart>& charts,
                      const std::vector<std::uint8_t>& boundary, const WeightOptions& opts = {});

/// Replaces every boundary row by its reflected program, with the reflection
/// axis taken perpendicular to the fitted gradient of `z_dirichlet`
/// (indexed by graph node, zero on the boundary), then symmetrizes.
SparseMatrix solve_neumann_weights(const graph::PixelGraph& g, const std::vector<TangentChart>& charts,
                                   Weights& plain, const Eigen::VectorXd& z_dirichlet,
                                   const WeightOptions& opts = {});

/// Operators over the active nodes, re-indexed in increasing graph order.
struct LaplacianSet {
  std::vector<int> nodes;                // graph node of each local index
  std::vector<std::uint8_t> boundary;    // per local index
  std::vector<int> interior;             // local indices of interior nodes
  SparseMatrix W, L, L_D, W_N, L_N;
  WeightReport report;

  int size() const { return static_cast<int>(nodes.size()); }
  bool has_neumann() const { return L_N.rows() > 0; }
  /// Spreads a vector over interior local indices to all local indices.
  Eigen::VectorXd expand_interior(const Eigen::VectorXd& v) const;
  /// Spreads a vector over local indices to graph nodes (zero elsewhere).
  Eigen::VectorXd to_graph(const Eigen::VectorXd& v, int graph_size) const;
};

/// L = D - W and its interior block L_D.
LaplacianSet assemble(const Weights& plain);

/// Adds W_N and L_N = D_N - W_N, with W_N given over graph nodes.
void assemble_neumann(LaplacianSet& set, const SparseMatrix& w_neumann);

/// Convenience: charts are given, the Dirichlet eigenvector comes from
/// the smallest eigenpair of L_D.
LaplacianSet build(const graph::PixelGraph& g, const std::vector<TangentChart>& charts,
                   const std::vector<std::uint8_t>& boundary, const WeightOptions& opts = {});

/// Per-row and global checks on an assembled set.
struct Diagnostics {
  double linear_precision = 0.0;  // max |sum_q w_pq (q - p)| / r_p over interior rows
  double row_sum = 0.0;           // max |sum_q w_pq - s_p| over interior rows
  double symmetry = 0.0;          // max |W - W^T|
  double min_weight = 0.0;
  double interior_row_of_L = 0.0;  // max |sum_q L_pq| over interior rows
};
Diagnostics diagnose(const graph::PixelGraph& g, const std::vector<TangentChart>& charts,
                     const Weights& plain, const LaplacianSet& set);

/// Matrix Market coordinate format, general real.
void write_matrix_market(const SparseMatrix& m, std::ostream& os);

}  // namespace hemips::laplacian
