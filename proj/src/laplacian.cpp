#include "hemips/laplacian.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "hemips/error.hpp"
#include "hemips/spectral.hpp"

namespace hemips::laplacian {

namespace {

using Triplet = Eigen::Triplet<double>;

constexpr Eigen::Index kDirectLimit = 1500;

// Top-two principal coordinates from a Gram matrix of m points.
bool principal_coords(const Eigen::MatrixXd& gram, Eigen::MatrixXd& coords) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const Eigen::Index m = gram.rows();
  const double l1 = es.eigenvalues()[m - 1];
  const double l2 = es.eigenvalues()[m - 2];
  if (!(l1 > 1e-28) || !(l2 > 1e-14 * l1)) return false;
  coords.resize(m, 2);
  coords.col(0) = es.eigenvectors().col(m - 1) * std::sqrt(l1);
  coords.col(1) = es.eigenvectors().col(m - 2) * std::sqrt(l2);
  return true;
}

int position_of(const std::vector<graph::Neighbor>& nbs, int node) {
  const auto it = std::lower_bound(nbs.begin(), nbs.end(), node,
                                   [](const graph::Neighbor& a, int v) { return a.node < v; });
  return (it != nbs.end() && it->node == node) ? static_cast<int>(it - nbs.begin()) : -1;
}

}  // namespace

std::vector<TangentChart> build_charts(const graph::PixelGraph& g, ChartMethod method) {
  const int n = g.size();
  std::vector<TangentChart> charts(n);
  const auto& x = g.vectors.data;
  for (int p = 0; p < n; ++p) {
    TangentChart& c = charts[p];
    c.center = p;
    const auto& nbs = g.neighbors[p];
    c.coords.assign(nbs.size(), Eigen::Vector2d::Zero());
    if (g.removed[p] || nbs.size() < 2) {
      c.degenerate = true;
      continue;
    }
    const int m = static_cast<int>(nbs.size()) + 1;
    Eigen::MatrixXd pts(m, x.cols());
    pts.row(0) = x.row(p);
    for (int i = 1; i < m; ++i) pts.row(i) = x.row(nbs[i - 1].node);

    if (method == ChartMethod::Pca) {
      pts.rowwise() -= pts.colwise().mean();
    } else {
      const Eigen::RowVectorXd c0 = x.row(p);
      for (int i = 0; i < m; ++i) {
        const double cs = std::clamp(pts.row(i).dot(c0), -1.0, 1.0);
        Eigen::RowVectorXd v = pts.row(i) - cs * c0;
        const double vn = v.norm();
        pts.row(i) = vn > 0.0 ? Eigen::RowVectorXd(v * (std::acos(cs) / vn)) : Eigen::RowVectorXd::Zero(x.cols());
      }
    }
    Eigen::MatrixXd uv;
    if (!principal_coords(pts * pts.transpose(), uv)) {
      c.degenerate = true;
      continue;
    }
    c.origin = uv.row(0).transpose();
    for (int i = 1; i < m; ++i) {
      c.coords[i - 1] = uv.row(i).transpose() - c.origin;
      c.radius = std::max(c.radius, c.coords[i - 1].norm());
    }
    if (!(c.radius > 0.0)) c.degenerate = true;
  }
  return charts;
}

std::vector<double> row_sum_targets(const std::vector<TangentChart>& charts, RowSumMode mode) {
  std::vector<double> s(charts.size(), 1.0);
  if (mode == RowSumMode::InverseRadiusSquared)
    for (std::size_t p = 0; p < charts.size(); ++p)
      s[p] = charts[p].radius > 0.0 ? 1.0 / (charts[p].radius * charts[p].radius) : 0.0;
  return s;
}

bool row_feasible(const std::vector<Eigen::Vector2d>& points) {
  std::vector<double> ang;
  for (const auto& d : points) {
    if (d.norm() == 0.0) return true;
    ang.push_back(std::atan2(d.y(), d.x()));
  }
  if (ang.size() < 2) return false;
  std::sort(ang.begin(), ang.end());
  double gap = ang.front() + 2 * std::numbers::pi - ang.back();
  for (std::size_t i = 1; i < ang.size(); ++i) gap = std::max(gap, ang[i] - ang[i - 1]);
  return gap < std::numbers::pi - 1e-12;
}

QpResult min_norm_nonneg(const SparseMatrix& a_in, const Eigen::VectorXd& b, double tolerance, int max_newton) {
  SparseMatrix a = a_in;
  a.makeCompressed();
  const Eigen::Index m = a.rows();
  const Eigen::Index nv = a.cols();
  if (b.size() != m) throw InputError("laplacian", "right-hand side size mismatch");

  // Lower-triangular pattern of A A^T + I, fixed across Newton steps.
  std::vector<Triplet> trip;
  for (Eigen::Index k = 0; k < m; ++k) trip.emplace_back(k, k, 0.0);
  for (Eigen::Index j = 0; j < nv; ++j)
    for (SparseMatrix::InnerIterator r1(a, j); r1; ++r1)
      for (SparseMatrix::InnerIterator r2(a, j); r2; ++r2)
        if (r1.row() > r2.row()) trip.emplace_back(r1.row(), r2.row(), 0.0);
  SparseMatrix h(m, m);
  h.setFromTriplets(trip.begin(), trip.end());
  h.makeCompressed();
  const auto slot = [&](Eigen::Index row, Eigen::Index col) {
    const int* begin = h.innerIndexPtr() + h.outerIndexPtr()[col];
    const int* end = h.innerIndexPtr() + h.outerIndexPtr()[col + 1];
    return static_cast<int>(std::lower_bound(begin, end, static_cast<int>(row)) - h.innerIndexPtr());
  };
  std::vector<int> diag(m);
  for (Eigen::Index k = 0; k < m; ++k) diag[k] = slot(k, k);
  std::vector<int> col_start(nv + 1, 0);
  std::vector<int> pair_slot;
  for (Eigen::Index j = 0; j < nv; ++j) {
    for (SparseMatrix::InnerIterator r1(a, j); r1; ++r1)
      for (SparseMatrix::InnerIterator r2(a, j); r2; ++r2)
        if (r1.row() >= r2.row()) pair_slot.push_back(slot(r1.row(), r2.row()));
    col_start[j + 1] = static_cast<int>(pair_slot.size());
  }

  // Direct factorization for small systems, preconditioned CG otherwise.
  const bool direct = m <= kDirectLimit;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower, Eigen::IncompleteCholesky<double, Eigen::Lower>> cg;
  if (direct) ldlt.analyzePattern(h);

  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  QpResult res;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd t(nv), w(nv), g(m), d(m);

  const auto phi = [&](const Eigen::VectorXd& yy, double mu) {
    const Eigen::VectorXd tt = (a.transpose() * yy).cwiseMax(0.0);
    return 0.5 * tt.squaredNorm() - b.dot(yy) + 0.5 * mu * yy.squaredNorm();
  };

  const auto grad = [&](const Eigen::VectorXd& yy, double mu) {
    return Eigen::VectorXd(a * (a.transpose() * yy).cwiseMax(0.0) - b + mu * yy);
  };

  double mu = 1e-1;
  double last_level_residual = std::numeric_limits<double>::infinity();
  for (int level = 0; level < 16 && !res.converged; ++level, mu *= 1e-2) {
    for (int it = 0; it < max_newton; ++it) {
      t = a.transpose() * y;
      w = t.cwiseMax(0.0);
      const Eigen::VectorXd r = a * w - b;
      res.residual = r.lpNorm<Eigen::Infinity>();
      if (res.residual <= tolerance * scale) {
        res.converged = true;
        break;
      }
      g = r + mu * y;
      const double gnorm = g.lpNorm<Eigen::Infinity>();
      if (gnorm <= 0.1 * tolerance * scale) break;

      double* hv = h.valuePtr();
      std::fill(hv, hv + h.nonZeros(), 0.0);
      for (Eigen::Index k = 0; k < m; ++k) hv[diag[k]] = mu;
      for (Eigen::Index j = 0; j < nv; ++j) {
        if (t[j] < 0.0) continue;
        int s = col_start[j];
        for (SparseMatrix::InnerIterator r1(a, j); r1; ++r1)
          for (SparseMatrix::InnerIterator r2(a, j); r2; ++r2)
            if (r1.row() >= r2.row()) hv[pair_slot[s++]] += r1.value() * r2.value();
      }
      if (direct) {
        ldlt.factorize(h);
        if (ldlt.info() != Eigen::Success) break;
        d = ldlt.solve(-g);
      } else {
        cg.setTolerance(std::min(1e-2, 1e-3 * gnorm / scale));
        cg.setMaxIterations(static_cast<int>(std::min<Eigen::Index>(m, 5000)));
        cg.compute(h);
        d = cg.solve(-g);
      }
      ++res.iterations;

      // Armijo on phi; once its decrease drowns in rounding, on ||g||.
      const double f0 = phi(y, mu);
      const double slope = g.dot(d);
      const double noise = 1e-13 * (std::abs(f0) + 1.0);
      double step = 1.0;
      bool accepted = false;
      while (step > 1e-10) {
        const Eigen::VectorXd trial = y + step * d;
        const double f1 = phi(trial, mu);
        if (f1 <= f0 + 1e-4 * step * slope) {
          accepted = true;
        } else if (f1 <= f0 + noise && grad(trial, mu).lpNorm<Eigen::Infinity>() < gnorm) {
          accepted = true;
        }
        if (accepted) break;
        step *= 0.5;
      }
      if (!accepted) break;
      y += step * d;
    }
    // A feasible program loses two digits of residual per level; an
    // infeasible one stalls while y grows like 1/mu.
    if (level >= 2 && res.residual > 0.1 * last_level_residual) break;
    last_level_residual = res.residual;
  }
  res.w = (a.transpose() * y).cwiseMax(0.0);
  res.y = y;
  res.residual = (a * res.w - b).lpNorm<Eigen::Infinity>();
  return res;
}

namespace {

struct EdgeVar {
  int p, q;    // p < q
  int ip, iq;  // positions in neighbors[p], neighbors[q]
};

// Demotes interior rows that cannot satisfy the constraints, until stable.
void demote_infeasible(const graph::PixelGraph& g, const std::vector<TangentChart>& charts,
                       Weights& out) {
  const int n = g.size();
  for (int p = 0; p < n; ++p)
    if (out.active[p] && charts[p].degenerate) {
      out.active[p] = 0;
      out.report.demoted.push_back(p);
    }
  bool changed = true;
  while (changed) {
    changed = false;
    for (int p = 0; p < n; ++p) {
      if (!out.active[p] || out.boundary[p]) continue;
      std::vector<Eigen::Vector2d> pts;
      for (std::size_t i = 0; i < g.neighbors[p].size(); ++i)
        if (out.active[g.neighbors[p][i].node]) pts.push_back(charts[p].coords[i]);
      if (!row_feasible(pts)) {
        out.active[p] = 0;
        out.report.demoted.push_back(p);
        changed = true;
      }
    }
  }
  std::sort(out.report.demoted.begin(), out.report.demoted.end());
  out.report.demoted.erase(std::unique(out.report.demoted.begin(), out.report.demoted.end()), out.report.demoted.end());
}

// Per-row programs for interior rows, averaged into a symmetric matrix.
SparseMatrix per_row_weights(const graph::PixelGraph& g, const std::vector<TangentChart>& charts,
                             const Weights& out, const std::vector<EdgeVar>& edges, const WeightOptions& opts,
                             double& worst) {
  const int n = g.size();
  std::vector<std::vector<double>> row_w(n);
  worst = 0.0;
  for (int p = 0; p < n; ++p) {
    if (!out.active[p] || out.boundary[p]) continue;
    const auto& nbs = g.neighbors[p];
    std::vector<Triplet> trip;
    std::vector<int> pos;
    for (std::size_t i = 0; i < nbs.size(); ++i) {
      if (!out.active[nbs[i].node]) continue;
      const int col = static_cast<int>(pos.size());
      pos.push_back(static_cast<int>(i));
      trip.emplace_back(0, col, charts[p].coords[i].x() / charts[p].radius);
      trip.emplace_back(1, col, charts[p].coords[i].y() / charts[p].radius);
      trip.emplace_back(2, col, 1.0);
    }
    SparseMatrix a(3, static_cast<Eigen::Index>(pos.size()));
    a.setFromTriplets(trip.begin(), trip.end());
    const Eigen::Vector3d b(0.0, 0.0, out.row_sum_target[p]);
    const QpResult r = min_norm_nonneg(a, b, opts.tolerance, opts.max_newton);
    worst = std::max(worst, r.residual);
    row_w[p].assign(nbs.size(), 0.0);
    for (std::size_t c = 0; c < pos.size(); ++c) row_w[p][pos[c]] = r.w[static_cast<Eigen::Index>(c)];
  }
  std::vector<Triplet> trip;
  for (const auto& e : edges) {
    const bool ip = !row_w[e.p].empty(), iq = !row_w[e.q].empty();
    const double wp = ip ? row_w[e.p][e.ip] : 0.0;
    const double wq = iq ? row_w[e.q][e.iq] : 0.0;
    const double v = (ip && iq) ? 0.5 * (wp + wq) : wp + wq;
    if (v > 0.0) {
      trip.emplace_back(e.p, e.q, v);
      trip.emplace_back(e.q, e.p, v);
    }
  }
  SparseMatrix w(n, n);
  w.setFromTriplets(trip.begin(), trip.end());
  return w;
}

}  // namespace

Weights solve_weights(const graph::PixelGraph& g, const std::vector<TangentChart>& charts,
                      const std::vector<std::uint8_t>& boundary, const WeightOptions& opts) {
  const int n = g.size();
  if (static_cast<int>(charts.size()) != n || static_cast<int>(boundary.size()) != n)
    throw InputError("laplacian", "charts and boundary must cover every graph node");
  Weights out;
  out.boundary = boundary;
  out.active.assign(n, 0);
  for (int p = 0; p < n; ++p) out.active[p] = !g.removed[p];
  out.row_sum_target = row_sum_targets(charts, opts.row_sum);
  demote_infeasible(g, charts, out);

  std::vector<EdgeVar> edges;
  SparseMatrix w;
  do {
    std::vector<int> row_of(n, -1);
    int rows = 0;
    for (int p = 0; p < n; ++p)
      if (out.active[p] && !boundary[p]) row_of[p] = rows++;
    if (rows == 0) throw NumericalError("laplacian", "no interior row survived the feasibility check");

    edges.clear();
    for (int p = 0; p < n; ++p) {
      if (!out.active[p]) continue;
      const auto& nbs = g.neighbors[p];
      for (std::size_t i = 0; i < nbs.size(); ++i) {
        const int q = nbs[i].node;
        if (q <= p || !out.active[q] || (boundary[p] && boundary[q])) continue;
        const int j = position_of(g.neighbors[q], p);
        if (j < 0) throw InputError("laplacian", "neighbourhoods are not symmetric");
        edges.push_back({p, q, static_cast<int>(i), j});
      }
    }
    if (opts.per_row_only) break;

    std::vector<Triplet> trip;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto add = [&](int p, int i) {
        if (row_of[p] < 0) return;
        const int r = 3 * row_of[p];
        trip.emplace_back(r, e, charts[p].coords[i].x() / charts[p].radius);
        trip.emplace_back(r + 1, e, charts[p].coords[i].y() / charts[p].radius);
        trip.emplace_back(r + 2, e, 1.0);
      };
      add(edges[e].p, edges[e].ip);
      add(edges[e].q, edges[e].iq);
    }
    SparseMatrix a(3 * rows, static_cast<Eigen::Index>(edges.size()));
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(3 * rows);
    for (int p = 0; p < n; ++p)
      if (row_of[p] >= 0) b[3 * row_of[p] + 2] = out.row_sum_target[p];
    const QpResult r = min_norm_nonneg(a, b, opts.tolerance, opts.max_newton);
    out.report.newton_iterations += r.iterations;
    out.report.equality_residual = r.residual;
    out.report.converged = r.converged;
    if (r.converged) {
      trip.clear();
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const double v = r.w[static_cast<Eigen::Index>(e)];
        if (v <= 0.0) continue;
        trip.emplace_back(edges[e].p, edges[e].q, v);
        trip.emplace_back(edges[e].q, edges[e].p, v);
      }
      w.resize(n, n);
      w.setFromTriplets(trip.begin(), trip.end());
      break;
    }
  } while (false);
  if (w.rows() == 0) {
    double worst = 0.0;
    w = per_row_weights(g, charts, out, edges, opts, worst);
    out.report.fallback_used = true;
    out.report.converged = false;
    out.report.equality_residual = worst;
  }
  out.w = w;
  const SparseMatrix asym = SparseMatrix(w.transpose()) - w;
  out.report.symmetry_residual = asym.nonZeros() ? asym.coeffs().cwiseAbs().maxCoeff() : 0.0;
  out.report.min_weight = w.nonZeros() > 0 ? w.coeffs().minCoeff() : 0.0;
  return out;
}

SparseMatrix solve_neumann_weights(const graph::PixelGraph& g, const std::vector<TangentChart>& charts,
                                   Weights& plain, const Eigen::VectorXd& z, const WeightOptions& opts) {
  const int n = g.size();
  if (z.size() != n) throw InputError("laplacian", "Dirichlet vector must cover every graph node");
  std::vector<Triplet> trip;
  for (int p = 0; p < n; ++p) {
    if (!plain.active[p] || plain.boundary[p]) continue;
    for (SparseMatrix::InnerIterator it(plain.w, p); it; ++it) trip.emplace_back(p, it.row(), it.value());
  }
  int kept = 0;
  for (int p = 0; p < n; ++p) {
    if (!plain.active[p] || !plain.boundary[p]) continue;
    const auto& nbs = g.neighbors[p];
    const TangentChart& c = charts[p];
    std::vector<int> pos;
    for (std::size_t i = 0; i < nbs.size(); ++i)
      if (plain.active[nbs[i].node]) pos.push_back(static_cast<int>(i));

    // z ~ c0 + grad . d over the centre and its neighbours
    const Eigen::Index m = static_cast<Eigen::Index>(pos.size()) + 1;
    Eigen::MatrixXd fit(m, 3);
    Eigen::VectorXd rhs(m);
    fit.row(0) << 1.0, 0.0, 0.0;
    rhs[0] = z[p];
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (Eigen::Index k = 1; k < m; ++k) {
      const Eigen::Vector2d& d = c.coords[pos[k - 1]];
      fit.row(k) << 1.0, d.x(), d.y();
      rhs[k] = z[nbs[pos[k - 1]].node];
      mean += d;
    }
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    if (m >= 3) grad = fit.colPivHouseholderQr().solve(rhs).tail<2>();
    const double zscale = rhs.cwiseAbs().maxCoeff() / c.radius;
    if (!(grad.norm() > 1e-12 * std::max(zscale, 1e-300))) grad = -mean;
    const Eigen::Vector2d along = grad.norm() > 0.0 ? Eigen::Vector2d(-grad.y(), grad.x()).normalized()
                                                    : Eigen::Vector2d::UnitX();

    // folded ghosts: sum w (d . along) = 0, sum w = s_p
    std::vector<Triplet> at;
    for (std::size_t k = 0; k < pos.size(); ++k) {
      at.emplace_back(0, k, c.coords[pos[k]].dot(along) / c.radius);
      at.emplace_back(1, k, 1.0);
    }
    SparseMatrix a(2, static_cast<Eigen::Index>(pos.size()));
    a.setFromTriplets(at.begin(), at.end());
    const Eigen::Vector2d b(0.0, plain.row_sum_target[p]);
    QpResult r;
    if (!pos.empty()) r = min_norm_nonneg(a, b, opts.tolerance, opts.max_newton);
    if (!pos.empty() && r.converged) {
      for (std::size_t k = 0; k < pos.size(); ++k)
        if (r.w[static_cast<Eigen::Index>(k)] > 0.0)
          trip.emplace_back(p, nbs[pos[k]].node, r.w[static_cast<Eigen::Index>(k)]);
    } else {
      ++kept;
      for (SparseMatrix::InnerIterator it(plain.w, p); it; ++it) trip.emplace_back(p, it.row(), it.value());
    }
  }
  plain.report.neumann_rows_kept_plain = kept;
  SparseMatrix wn(n, n);
  wn.setFromTriplets(trip.begin(), trip.end());
  return 0.5 * (wn + SparseMatrix(wn.transpose()));
}

namespace {

SparseMatrix laplacian_of(const SparseMatrix& w) {
  const Eigen::VectorXd deg = w * Eigen::VectorXd::Ones(w.cols());
  SparseMatrix l = -w;
  for (Eigen::Index i = 0; i < w.rows(); ++i) l.coeffRef(i, i) += deg[i];
  l.makeCompressed();
  return l;
}

SparseMatrix selector(const std::vector<int>& keep, int cols) {
  std::vector<Triplet> trip;
  for (std::size_t i = 0; i < keep.size(); ++i) trip.emplace_back(static_cast<int>(i), keep[i], 1.0);
  SparseMatrix s(static_cast<Eigen::Index>(keep.size()), cols);
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

}  // namespace

Eigen::VectorXd LaplacianSet::expand_interior(const Eigen::VectorXd& v) const {
  if (v.size() != static_cast<Eigen::Index>(interior.size()))
    throw InputError("laplacian", "vector does not match the interior index set");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  for (std::size_t i = 0; i < interior.size(); ++i) out[interior[i]] = v[static_cast<Eigen::Index>(i)];
  return out;
}

Eigen::VectorXd LaplacianSet::to_graph(const Eigen::VectorXd& v, int graph_size) const {
  if (v.size() != size()) throw InputError("laplacian", "vector does not match the active index set");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(graph_size);
  for (int i = 0; i < size(); ++i) out[nodes[i]] = v[i];
  return out;
}

LaplacianSet assemble(const Weights& plain) {
  const int n = static_cast<int>(plain.active.size());
  LaplacianSet set;
  for (int p = 0; p < n; ++p)
    if (plain.active[p]) {
      if (!plain.boundary[p]) set.interior.push_back(set.size());
      set.boundary.push_back(plain.boundary[p]);
      set.nodes.push_back(p);
    }
  const SparseMatrix s = selector(set.nodes, n);
  set.W = s * plain.w * s.transpose();
  set.L = laplacian_of(set.W);
  const SparseMatrix si = selector(set.interior, set.size());
  set.L_D = si * set.L * si.transpose();
  set.report = plain.report;
  return set;
}

void assemble_neumann(LaplacianSet& set, const SparseMatrix& w_neumann) {
  const SparseMatrix s = selector(set.nodes, static_cast<int>(w_neumann.rows()));
  set.W_N = s * w_neumann * s.transpose();
  set.L_N = laplacian_of(set.W_N);
}

LaplacianSet build(const graph::PixelGraph& g, const std::vector<TangentChart>& charts,
                   const std::vector<std::uint8_t>& boundary, const WeightOptions& opts) {
  Weights plain = solve_weights(g, charts, boundary, opts);
  LaplacianSet set = assemble(plain);
  if (set.interior.empty()) throw NumericalError("laplacian", "no interior nodes");
  const auto zd = spectral::smallest_eigenpairs(set.L_D, 1);
  const Eigen::VectorXd z = set.to_graph(set.expand_interior(zd.vectors.col(0)), g.size());
  const SparseMatrix wn = solve_neumann_weights(g, charts, plain, z, opts);
  assemble_neumann(set, wn);
  set.report = plain.report;
  return set;
}

Diagnostics diagnose(const graph::PixelGraph& g, const std::vector<TangentChart>& charts, const Weights& plain,
                     const LaplacianSet& set) {
  Diagnostics d;
  for (int p = 0; p < g.size(); ++p) {
    if (!plain.active[p] || plain.boundary[p]) continue;
    const auto& nbs = g.neighbors[p];
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    double sum = 0.0;
    for (std::size_t i = 0; i < nbs.size(); ++i) {
      const double v = plain.w.coeff(p, nbs[i].node);
      acc += v * charts[p].coords[i];
      sum += v;
    }
    d.linear_precision = std::max(d.linear_precision, acc.lpNorm<Eigen::Infinity>() / charts[p].radius);
    d.row_sum = std::max(d.row_sum, std::abs(sum - plain.row_sum_target[p]));
  }
  const SparseMatrix diff = SparseMatrix(plain.w.transpose()) - plain.w;
  d.symmetry = diff.nonZeros() ? diff.coeffs().cwiseAbs().maxCoeff() : 0.0;
  d.min_weight = plain.w.nonZeros() ? plain.w.coeffs().minCoeff() : 0.0;
  const Eigen::VectorXd rs = set.L * Eigen::VectorXd::Ones(set.size());
  for (int i : set.interior) d.interior_row_of_L = std::max(d.interior_row_of_L, std::abs(rs[i]));
  return d;
}

void write_matrix_market(const SparseMatrix& m, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  os.precision(17);
  for (Eigen::Index j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it) os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace hemips::laplacian
