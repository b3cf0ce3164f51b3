#include "hemips/baselines.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "hemips/error.hpp"
#include "hemips/spectral.hpp"

namespace hemips::baselines {

double chordal_distance(double d, double r) {
  return std::sqrt(std::max(0.0, 2.0 * r * r * (1.0 - std::cos(d / r))));
}

Embedding3D isomap_embed(const equator::GeodesicTable& table, bool chordal) {
  if (table.size() < 4) throw InputError("baselines", "Isomap needs at least 4 points");
  Eigen::MatrixXd d = table.dist;
  if (chordal) {
    const double r = table.d_max / std::numbers::pi;
    d = d.unaryExpr([r](double v) { return chordal_distance(v, r); });
  }
  Eigen::VectorXd values;
  Embedding3D e;
  e.points = equator::classical_mds(d, 3, &values);
  e.method = chordal ? "isomap-chordal" : "isomap";
  if (!(values.minCoeff() > 1e-12 * std::max(values.maxCoeff(), 1e-300)))
    throw NumericalError("baselines", "MDS spectrum has fewer than 3 positive eigenvalues");
  return e;
}

Eigen::VectorXd lle_weights(const Eigen::RowVectorXd& x, const Eigen::MatrixXd& neighbors, double reg) {
  const Eigen::Index k = neighbors.rows();
  if (k == 0) throw InputError("baselines", "LLE needs at least one neighbour");
  const Eigen::MatrixXd z = neighbors.rowwise() - x;
  Eigen::MatrixXd c = z * z.transpose();
  const double tr = c.trace();
  if (!(tr > 0.0)) return Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  c.diagonal().array() += reg * tr;
  Eigen::VectorXd w = c.ldlt().solve(Eigen::VectorXd::Ones(k));
  return w / w.sum();
}

Embedding3D lle_embed(const graph::PixelGraph& g, int dims, double reg) {
  std::vector<int> local(g.size(), -1), nodes;
  for (int p = 0; p < g.size(); ++p)
    if (!g.removed[p]) {
      local[p] = static_cast<int>(nodes.size());
      nodes.push_back(p);
    }
  const int n = static_cast<int>(nodes.size());
  if (n < dims + 2) throw InputError("baselines", "too few points for LLE");

  // I - W, then M = (I - W)^T (I - W)
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < n; ++i) {
    const int p = nodes[i];
    std::vector<int> nb;
    for (int q : g.knn[p])
      if (local[q] >= 0) nb.push_back(q);
    trip.emplace_back(i, i, 1.0);
    if (nb.empty()) continue;
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(nb.size()), g.vectors.dims());
    for (std::size_t j = 0; j < nb.size(); ++j) pts.row(static_cast<Eigen::Index>(j)) = g.vectors.data.row(nb[j]);
    const Eigen::VectorXd w = lle_weights(g.vectors.data.row(p), pts, reg);
    for (std::size_t j = 0; j < nb.size(); ++j) trip.emplace_back(i, local[nb[j]], -w[static_cast<Eigen::Index>(j)]);
  }
  spectral::SparseMatrix iw(n, n);
  iw.setFromTriplets(trip.begin(), trip.end());
  spectral::SparseMatrix m = spectral::SparseMatrix(iw.transpose()) * iw;
  m = 0.5 * (m + spectral::SparseMatrix(m.transpose()));
  const auto r = spectral::smallest_eigenpairs(m, dims + 1);

  // The constant vector lies in the bottom space; other near-null
  // directions may mix with it, so project it out and keep the rest.
  Eigen::MatrixXd v = r.vectors;
  v.rowwise() -= v.colwise().mean();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(v, Eigen::ComputeThinU);
  Embedding3D e;
  e.points = svd.matrixU().leftCols(dims) * std::sqrt(static_cast<double>(n));
  e.method = "lle";
  return e;
}

Alignment procrustes_align(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target) {
  if (source.rows() != target.rows() || source.cols() != 3 || target.cols() != 3)
    throw InputError("baselines", "Procrustes needs two n x 3 point sets of equal size");
  const Eigen::RowVector3d ms = source.colwise().mean(), mt = target.colwise().mean();
  const Eigen::MatrixXd a = source.rowwise() - ms;
  const Eigen::MatrixXd b = target.rowwise() - mt;
  const Eigen::JacobiSVD<Eigen::MatrixXd> sv(a);
  if (source.rows() < 3 || !(sv.singularValues()[1] > 1e-12 * sv.singularValues()[0]))
    throw InputError("baselines", "Procrustes needs at least 3 non-collinear points");

  // max trace(R^T A^T B) over orthogonal R, reflections allowed
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(a.transpose() * b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Alignment out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.scale = svd.singularValues().sum() / a.squaredNorm();
  out.translation = mt - out.scale * ms * out.rotation;
  out.aligned = (out.scale * source * out.rotation).rowwise() + out.translation;
  out.mean_error = (out.aligned - target).rowwise().norm().mean();
  return out;
}

double mean_angle_error(const reconstruct::NormalField& est, const reconstruct::NormalField& truth) {
  if (est.mask != truth.mask || est.normals.size() != truth.normals.size())
    throw InputError("baselines", "normal fields cover different masks");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < est.mask.size(); ++i) {
    if (!est.mask[i]) continue;
    const double c = est.normals[i].normalized().dot(truth.normals[i].normalized());
    sum += std::acos(std::clamp(c, -1.0, 1.0));
    ++n;
  }
  if (n == 0) throw InputError("baselines", "normal fields do not overlap");
  return sum / static_cast<double>(n) * 180.0 / std::numbers::pi;
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& os) {
  os << "method,object,procrustes_error,mean_angle_error\n";
  os.precision(10);
  for (const auto& r : rows)
    os << r.method << ',' << r.object << ',' << r.procrustes_error << ',' << r.mean_angle_error << '\n';
}

}  // namespace hemips::baselines
