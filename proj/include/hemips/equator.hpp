#pragma once

// Equator detection: graph geodesics, tangent flattening, classical MDS to
// the plane and convex-hull peeling.

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

#include "hemips/pixelgraph.hpp"

namespace hemips::equator {

/// All-pairs shortest paths restricted to one connected component.
struct GeodesicTable {
  std::vector<int> nodes;  // graph node of each row
  Eigen::MatrixXd dist;
  double d_max = 0.0;
  bool connected = true;  // false if other components were dropped
  int dropped = 0;

  int size() const { return static_cast<int>(nodes.size()); }
};

/// Dijkstra from every node of the largest component of the retained graph.
GeodesicTable geodesics(const graph::PixelGraph& g);

/// Wraps a precomputed symmetric distance matrix.
GeodesicTable table_from_distances(Eigen::MatrixXd dist);

inline constexpr double kFlattenEpsilon = 0.05;

/// tan(d pi / (2 d_max + eps)) with eps = eps_fraction * d_max.
double flatten(double d, double d_max, double eps_fraction = kFlattenEpsilon);

/// Classical MDS: rows are points in `dims` dimensions. The leading
/// eigenvalues of the centred Gram matrix go to `eigenvalues` when given.
/// Throws NumericalError on a non-finite decomposition.
Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& dist, int dims, Eigen::VectorXd* eigenvalues = nullptr);

/// Hull layers in peeling order; each layer lists point indices.
std::vector<std::vector<int>> peel_layers(const Eigen::MatrixXd& points2d, int min_labeled);

struct Boundary {
  std::vector<int> rows;       // table rows labeled boundary, ascending
  Eigen::MatrixXd embedding;   // 2D MDS coordinates per table row
  int peels = 0;
};

/// Labels hull layers until at least target_fraction of the points are
/// labeled; the last layer is kept whole.
Boundary flatten_and_peel(const GeodesicTable& table, double target_fraction = 0.05,
                          double eps_fraction = kFlattenEpsilon);

/// Boundary flags per graph node.
std::vector<std::uint8_t> boundary_mask(const GeodesicTable& table, const Boundary& b, int graph_size);

/// "pixel,row,col" for every boundary node.
void write_boundary_csv(const graph::PixelGraph& g, const GeodesicTable& table, const Boundary& b,
                        std::ostream& os);

}  // namespace hemips::equator
