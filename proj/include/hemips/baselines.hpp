#pragma once

// Reference embedders (Isomap, chordal Isomap, LLE) and the metrics used to
// compare them: Procrustes point error and mean normal angle error.

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "hemips/equator.hpp"
#include "hemips/pixelgraph.hpp"
#include "hemips/reconstruct.hpp"

namespace hemips::baselines {

struct Embedding3D {
  Eigen::MatrixXd points;  // n x 3
  std::string method;
};

/// sqrt(2 r^2 (1 - cos(d / r))): the chord under an arc of length d on a
/// sphere of radius r.
double chordal_distance(double d, double r);

/// Classical MDS to 3D on geodesic distances. In chordal mode distances
/// are first mapped to chords with r = d_max / pi. Throws NumericalError
/// when fewer than 3 eigenvalues are positive.
Embedding3D isomap_embed(const equator::GeodesicTable& table, bool chordal);

/// Reconstruction weights of one point from its neighbours, rows of
/// `neighbors` are points. Sums to one; `reg` times the trace of the local
/// Gram matrix is added to its diagonal, which matters once k exceeds the
/// data dimension and the Gram matrix is singular.
Eigen::VectorXd lle_weights(const Eigen::RowVectorXd& x, const Eigen::MatrixXd& neighbors, double reg = 1e-3);

/// Standard LLE over the retained nodes using the raw k-NN lists. Row i of
/// the result belongs to the i-th retained node in increasing order.
Embedding3D lle_embed(const graph::PixelGraph& g, int dims = 3, double reg = 1e-3);

struct Alignment {
  Eigen::MatrixXd aligned;
  double mean_error = 0.0;  // mean point-pair distance
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // may be a reflection
  Eigen::RowVector3d translation = Eigen::RowVector3d::Zero();
};

/// Best similarity map (rotation or reflection, uniform scale,
/// translation) of `source` onto `target` in least squares. Throws
/// InputError on size mismatch or fewer than 3 non-collinear points.
Alignment procrustes_align(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target);

/// Mean over the mask of the angle between normals, in degrees. Throws
/// InputError when the masks differ or are empty.
double mean_angle_error(const reconstruct::NormalField& est, const reconstruct::NormalField& truth);

struct ComparisonRow {
  std::string method;
  std::string object;
  double procrustes_error = 0.0;
  double mean_angle_error = 0.0;
};

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& os);

}  // namespace hemips::baselines
