#include "hemips/equator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <queue>
#include <thread>

#include "hemips/error.hpp"
#include "hemips/spectral.hpp"

namespace hemips::equator {

namespace {

std::vector<int> largest_component(const graph::PixelGraph& g, int& components) {
  const int n = g.size();
  std::vector<int> label(n, -1);
  std::vector<int> best;
  components = 0;
  for (int s = 0; s < n; ++s) {
    if (g.removed[s] || label[s] >= 0) continue;
    std::vector<int> comp{s};
    label[s] = components;
    for (std::size_t i = 0; i < comp.size(); ++i)
      for (const auto& nb : g.neighbors[comp[i]])
        if (label[nb.node] < 0 && !g.removed[nb.node]) {
          label[nb.node] = components;
          comp.push_back(nb.node);
        }
    ++components;
    if (comp.size() > best.size()) best = std::move(comp);
  }
  std::sort(best.begin(), best.end());
  return best;
}

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew's monotone chain; returns hull vertex indices into `ids`.
std::vector<int> hull(const Eigen::MatrixXd& pts, std::vector<int> ids) {
  if (ids.size() < 3) return ids;
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    return pts(a, 0) < pts(b, 0) || (pts(a, 0) == pts(b, 0) && pts(a, 1) < pts(b, 1));
  });
  const auto at = [&](int i) { return Eigen::Vector2d(pts(i, 0), pts(i, 1)); };
  std::vector<int> h(2 * ids.size());
  std::size_t k = 0;
  for (int i : ids) {
    while (k >= 2 && cross(at(h[k - 2]), at(h[k - 1]), at(i)) <= 0) --k;
    h[k++] = i;
  }
  for (std::size_t j = ids.size() - 1, lower = k + 1; j-- > 0;) {
    const int i = ids[j];
    while (k >= lower && cross(at(h[k - 2]), at(h[k - 1]), at(i)) <= 0) --k;
    h[k++] = i;
  }
  h.resize(k - 1);
  return h;
}

}  // namespace

GeodesicTable geodesics(const graph::PixelGraph& g) {
  int components = 0;
  GeodesicTable t;
  t.nodes = largest_component(g, components);
  if (t.nodes.empty()) throw InputError("equator", "graph has no retained nodes");
  t.connected = components == 1;
  t.dropped = g.retained_count() - t.size();

  const int n = t.size();
  std::vector<int> local(g.size(), -1);
  for (int i = 0; i < n; ++i) local[t.nodes[i]] = i;
  t.dist.setConstant(n, n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  // sources write disjoint columns
  const auto run = [&](int first, int stride) {
    for (int s = first; s < n; s += stride) {
      auto row = t.dist.col(s);
      row[s] = 0.0;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      pq.emplace(0.0, s);
      while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > row[u]) continue;
        for (const auto& nb : g.neighbors[t.nodes[u]]) {
          const int v = local[nb.node];
          if (v < 0) continue;
          const double nd = d + nb.distance;
          if (nd < row[v]) {
            row[v] = nd;
            pq.emplace(nd, v);
          }
        }
      }
    }
  };
  const int workers = std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, std::max(1, n / 64));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(run, w, workers);
    run(0, workers);
  }
  t.dist = 0.5 * (t.dist + t.dist.transpose()).eval();
  t.d_max = t.dist.maxCoeff();
  return t;
}

GeodesicTable table_from_distances(Eigen::MatrixXd dist) {
  if (dist.rows() != dist.cols()) throw InputError("equator", "distance matrix must be square");
  GeodesicTable t;
  t.nodes.resize(dist.rows());
  for (int i = 0; i < dist.rows(); ++i) t.nodes[i] = i;
  t.d_max = dist.maxCoeff();
  t.dist = std::move(dist);
  return t;
}

double flatten(double d, double d_max, double eps_fraction) {
  const double eps = eps_fraction * d_max;
  return std::tan(d * std::numbers::pi / (2.0 * d_max + eps));
}

Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& dist, int dims, Eigen::VectorXd* eigenvalues) {
  const Eigen::Index n = dist.rows();
  if (n < dims + 1) throw InputError("equator", "too few points for MDS");
  Eigen::MatrixXd b = dist.array().square().matrix();
  const Eigen::VectorXd row_mean = b.rowwise().mean();
  const Eigen::RowVectorXd col_mean = b.colwise().mean();
  const double all = row_mean.mean();
  b = (-0.5 * ((b.colwise() - row_mean).rowwise() - col_mean).array() - 0.5 * all).matrix();
  if (!b.allFinite()) throw NumericalError("equator", "non-finite MDS Gram matrix");
  const auto r = spectral::largest_eigenpairs(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = b * x; }, static_cast<int>(n), dims);
  if (!r.values.allFinite()) throw NumericalError("equator", "non-finite MDS spectrum");
  if (eigenvalues) *eigenvalues = r.values;
  Eigen::MatrixXd out(n, dims);
  for (int k = 0; k < dims; ++k) out.col(k) = r.vectors.col(k) * std::sqrt(std::max(r.values[k], 0.0));
  return out;
}

std::vector<std::vector<int>> peel_layers(const Eigen::MatrixXd& pts, int min_labeled) {
  std::vector<int> remaining(pts.rows());
  for (int i = 0; i < pts.rows(); ++i) remaining[i] = i;
  std::vector<std::vector<int>> layers;
  int labeled = 0;
  while (labeled < min_labeled && !remaining.empty()) {
    std::vector<int> layer = hull(pts, remaining);
    std::sort(layer.begin(), layer.end());
    std::vector<int> rest;
    std::set_difference(remaining.begin(), remaining.end(), layer.begin(), layer.end(), std::back_inserter(rest));
    remaining = std::move(rest);
    labeled += static_cast<int>(layer.size());
    layers.push_back(std::move(layer));
  }
  return layers;
}

Boundary flatten_and_peel(const GeodesicTable& table, double target_fraction, double eps_fraction) {
  if (!(target_fraction > 0.0 && target_fraction <= 1.0))
    throw InputError("equator", "target fraction must lie in (0, 1]");
  if (!(eps_fraction > 0.0)) throw InputError("equator", "flattening epsilon must be positive");
  const int n = table.size();
  Eigen::MatrixXd flat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) flat(i, j) = flatten(table.dist(i, j), table.d_max, eps_fraction);
  Boundary b;
  b.embedding = classical_mds(flat, 2);
  const int need = static_cast<int>(std::ceil(target_fraction * n - 1e-9));
  const auto layers = peel_layers(b.embedding, need);
  b.peels = static_cast<int>(layers.size());
  for (const auto& l : layers) b.rows.insert(b.rows.end(), l.begin(), l.end());
  std::sort(b.rows.begin(), b.rows.end());
  return b;
}

std::vector<std::uint8_t> boundary_mask(const GeodesicTable& table, const Boundary& b, int graph_size) {
  std::vector<std::uint8_t> mask(graph_size, 0);
  for (int r : b.rows) mask[table.nodes[r]] = 1;
  return mask;
}

void write_boundary_csv(const graph::PixelGraph& g, const GeodesicTable& table, const Boundary& b,
                        std::ostream& os) {
  os << "pixel,row,col\n";
  const int w = g.vectors.width;
  for (int r : b.rows) {
    const int pix = g.vectors.pixel[table.nodes[r]];
    os << pix << ',' << pix / w << ',' << pix % w << '\n';
  }
}

}  // namespace hemips::equator
