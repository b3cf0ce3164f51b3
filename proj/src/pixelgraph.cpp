#include "hemips/pixelgraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "hemips/error.hpp"
#include "hemips/kernels.hpp"

namespace hemips::graph {

PixelVectors build_vectors(const render::ImageStack& stack) {
  const int n = static_cast<int>(stack.images.size());
  if (n < 3) throw InputError("pixelgraph", "need at least 3 images");
  PixelVectors out;
  out.width = stack.width;
  out.height = stack.height;

  std::vector<int> live;
  for (std::size_t i = 0; i < stack.pixel_count(); ++i) {
    if (!stack.mask.empty() && !stack.mask[i]) continue;
    double norm2 = 0.0;
    for (const auto& img : stack.images) norm2 += img[i] * img[i];
    if (std::sqrt(norm2) < kDarkEpsilon) {
      out.dark_pixels.push_back(static_cast<int>(i));
      continue;
    }
    live.push_back(static_cast<int>(i));
  }
  if (live.empty()) throw InputError("pixelgraph", "every pixel is dark");

  out.pixel = live;
  out.data.resize(static_cast<Eigen::Index>(live.size()), n);
  for (std::size_t p = 0; p < live.size(); ++p) {
    for (int k = 0; k < n; ++k) out.data(static_cast<Eigen::Index>(p), k) = stack.images[k][live[p]];
    out.data.row(static_cast<Eigen::Index>(p)).normalize();
  }
  return out;
}

PixelVectors vectors_from_points(int width, int height, std::vector<int> pixel,
                                 const RowMatrix& points) {
  if (static_cast<Eigen::Index>(pixel.size()) != points.rows())
    throw InputError("pixelgraph", "pixel list and point rows differ in length");
  PixelVectors out;
  out.width = width;
  out.height = height;
  out.pixel = std::move(pixel);
  out.data = points;
  for (Eigen::Index r = 0; r < out.data.rows(); ++r) {
    const double nrm = out.data.row(r).norm();
    if (nrm < kDarkEpsilon) throw InputError("pixelgraph", "zero point");
    out.data.row(r) /= nrm;
  }
  return out;
}

int PixelGraph::retained_count() const {
  return static_cast<int>(std::count(removed.begin(), removed.end(), std::uint8_t{0}));
}

namespace {

void rebuild_mutual(PixelGraph& g) {
  const int n = g.size();
  g.neighbors.assign(n, {});
  // membership test via sorted copies of the raw lists
  std::vector<std::vector<int>> sorted(n);
  for (int p = 0; p < n; ++p) {
    sorted[p] = g.knn[p];
    std::sort(sorted[p].begin(), sorted[p].end());
  }
  for (int p = 0; p < n; ++p) {
    if (g.removed[p]) continue;
    for (int q : sorted[p]) {
      if (g.removed[q]) continue;
      if (!std::binary_search(sorted[q].begin(), sorted[q].end(), p)) continue;
      const double d = std::sqrt(kernels::squared_distance(
          {g.vectors.data.row(p).data(), static_cast<std::size_t>(g.vectors.dims())},
          {g.vectors.data.row(q).data(), static_cast<std::size_t>(g.vectors.dims())}));
      g.neighbors[p].push_back({q, d});
    }
  }
}

}  // namespace

PixelGraph PixelGraph::without(const std::vector<int>& nodes) const {
  PixelGraph g = *this;
  for (int v : nodes) {
    if (v < 0 || v >= size()) throw IndexError("pixelgraph", "node out of range");
    g.removed[v] = 1;
  }
  for (int p = 0; p < g.size(); ++p) {
    if (g.removed[p]) {
      g.neighbors[p].clear();
      continue;
    }
    std::erase_if(g.neighbors[p], [&](const Neighbor& nb) { return g.removed[nb.node] != 0; });
  }
  return g;
}

PixelGraph PixelGraph::compacted() const {
  std::vector<int> remap(size(), -1);
  std::vector<int> keep;
  for (int p = 0; p < size(); ++p)
    if (!removed[p]) {
      remap[p] = static_cast<int>(keep.size());
      keep.push_back(p);
    }
  PixelGraph g;
  g.k = k;
  g.vectors.width = vectors.width;
  g.vectors.height = vectors.height;
  g.vectors.dark_pixels = vectors.dark_pixels;
  g.vectors.data.resize(static_cast<Eigen::Index>(keep.size()), vectors.dims());
  g.removed.assign(keep.size(), 0);
  g.knn.resize(keep.size());
  g.neighbors.resize(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const int p = keep[i];
    g.vectors.pixel.push_back(vectors.pixel[p]);
    g.vectors.data.row(static_cast<Eigen::Index>(i)) = vectors.data.row(p);
    for (int q : knn[p])
      if (remap[q] >= 0) g.knn[i].push_back(remap[q]);
    for (const Neighbor& nb : neighbors[p])
      if (remap[nb.node] >= 0) g.neighbors[i].push_back({remap[nb.node], nb.distance});
  }
  return g;
}

int default_k(int node_count, double fraction, int cap) {
  const int k = static_cast<int>(std::ceil(fraction * node_count));
  return std::clamp(k, 3, std::max(3, cap));
}

PixelGraph build_neighborhoods(PixelVectors vectors, int k) {
  const int n = vectors.size();
  if (k < 1) throw InputError("pixelgraph", "k must be positive");
  if (n < k + 1) throw InputError("pixelgraph", "fewer pixels than k + 1");

  PixelGraph g;
  g.vectors = std::move(vectors);
  g.k = k;
  g.removed.assign(n, 0);
  g.knn.resize(n);

  const auto& table = kernels::active();
  const std::size_t dims = static_cast<std::size_t>(g.vectors.dims());
  const double* base = g.vectors.data.data();
  std::vector<double> dist(n);
  std::vector<int> order(n);
  for (int p = 0; p < n; ++p) {
    table.squared_distances_to(base + static_cast<std::size_t>(p) * dims, base, dims, dims,
                               static_cast<std::size_t>(n), dist.data());
    dist[p] = std::numeric_limits<double>::infinity();
    std::iota(order.begin(), order.end(), 0);
    const auto closer = [&](int a, int b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
    std::nth_element(order.begin(), order.begin() + k, order.end(), closer);
    std::sort(order.begin(), order.begin() + k, closer);
    g.knn[p].assign(order.begin(), order.begin() + k);
  }
  rebuild_mutual(g);
  return g;
}

std::vector<double> favor_fractions(const PixelGraph& g) {
  const int n = g.size();
  std::vector<std::vector<int>> sorted(n);
  for (int p = 0; p < n; ++p) {
    sorted[p] = g.knn[p];
    std::sort(sorted[p].begin(), sorted[p].end());
  }
  std::vector<double> out(n, 0.0);
  for (int p = 0; p < n; ++p) {
    if (g.knn[p].empty()) continue;
    int hits = 0;
    for (int q : g.knn[p])
      if (std::binary_search(sorted[q].begin(), sorted[q].end(), p)) ++hits;
    out[p] = static_cast<double>(hits) / static_cast<double>(g.knn[p].size());
  }
  return out;
}

PixelGraph remove_outliers(const PixelGraph& g, double favor_threshold) {
  const std::vector<double> favor = favor_fractions(g);
  std::vector<int> drop;
  for (int p = 0; p < g.size(); ++p)
    if (!g.removed[p] && favor[p] < favor_threshold) drop.push_back(p);
  return g.without(drop);
}

void write_edge_csv(const PixelGraph& g, std::ostream& os) {
  os << "p,q,d\n";
  for (int p = 0; p < g.size(); ++p)
    for (const Neighbor& nb : g.neighbors[p])
      if (p < nb.node)
        os << g.vectors.pixel[p] << ',' << g.vectors.pixel[nb.node] << ',' << nb.distance << '\n';
}

}  // namespace hemips::graph
