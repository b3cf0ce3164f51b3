#pragma once

// Normalized intensity vectors and their mutual k-nearest-neighbour graph.

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

#include "hemips/render.hpp"

namespace hemips::graph {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kDarkEpsilon = 1e-9;

/// One unit-norm row per retained pixel.
struct PixelVectors {
  int width = 0;
  int height = 0;
  std::vector<int> pixel;  // image index (row-major) of each node
  RowMatrix data;          // node x dims
  std::vector<int> dark_pixels;

  int size() const { return static_cast<int>(pixel.size()); }
  int dims() const { return static_cast<int>(data.cols()); }
};

/// Requires >= 3 images. Pixels with ||v_p|| < kDarkEpsilon are listed as
/// dark and skipped; throws InputError if no pixel survives.
PixelVectors build_vectors(const render::ImageStack& stack);

/// Wraps arbitrary per-pixel points (e.g. exact normals) as vectors; rows
/// are normalized.
PixelVectors vectors_from_points(int width, int height, std::vector<int> pixel,
                                 const RowMatrix& points);

struct Neighbor {
  int node = 0;
  double distance = 0.0;
};

struct PixelGraph {
  PixelVectors vectors;
  int k = 0;
  std::vector<std::vector<int>> knn;             // raw k-NN, nearest first
  std::vector<std::vector<Neighbor>> neighbors;  // mutual, sorted by node
  std::vector<std::uint8_t> removed;

  int size() const { return vectors.size(); }
  int retained_count() const;

  /// Marks `nodes` removed and drops their edges.
  PixelGraph without(const std::vector<int>& nodes) const;
  /// Copy restricted to non-removed nodes, re-indexed in increasing order.
  PixelGraph compacted() const;
};

/// ceil(fraction * n) clamped to [3, cap].
int default_k(int node_count, double fraction, int cap);

/// Exact brute-force k-NN under ||v^_p - v^_q||, then mutual-AND.
/// Throws InputError if k < 1 or the graph has fewer than k + 1 nodes.
PixelGraph build_neighborhoods(PixelVectors vectors, int k);

/// Fraction of p's raw k-NN that also list p.
std::vector<double> favor_fractions(const PixelGraph& g);

/// Removes pixels whose favor fraction is below `favor_threshold`.
PixelGraph remove_outliers(const PixelGraph& g, double favor_threshold);

/// "p,q,d" per undirected mutual edge with p < q; p and q are image indices.
void write_edge_csv(const PixelGraph& g, std::ostream& os);

}  // namespace hemips::graph
