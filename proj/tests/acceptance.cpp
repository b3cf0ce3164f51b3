// Acceptance checks. `acceptance N` runs criterion N (1..10) and prints one
// PASS/FAIL line; exit status 0 on PASS. Lines starting with "  note:"
// carry supporting numbers.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "hemips/baselines.hpp"
#include "hemips/equator.hpp"
#include "hemips/laplacian.hpp"
#include "hemips/pipeline.hpp"
#include "hemips/sh_core.hpp"
#include "hemips/spectral.hpp"

using namespace hemips;
using pipeline::PipelineConfig;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

template <class... T>
std::string fmt(const char* f, T... v) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, v...);
  return buf;
}

void note(const std::string& s) { std::cout << "  note: " << s << '\n'; }

// Settings of the end-to-end run shared by criteria 6, 7 and 9.
PipelineConfig desk_config() {
  PipelineConfig c;
  c.resolution = 64;
  c.lights = 90;
  c.seed = 7;
  c.render_mode = "exact";
  c.row_sum_mode = laplacian::RowSumMode::InverseRadiusSquared;
  return c;
}

Outcome criterion1() {
  Timer t;
  PipelineConfig c;
  c.resolution = 64;
  c.lights = 2000;
  c.seed = 7;
  const auto scene = pipeline::make_scene(c);
  const auto d = pipeline::neighbour_distance_ratio(pipeline::render_scene(scene, c), scene, 0.02, 0.2);
  const double secs = t.seconds();
  const auto harmonic = pipeline::kernel_distance_ratio(scene, render::sample_uniform_lights(2000, 7),
                                                        sh::ReflectanceKernel::lambertian(), 0.02, 0.2);
  note(fmt("order-2 harmonic Lambertian rendering gives median %.4f", harmonic.median));
  return {d.median >= 0.91 && d.median <= 0.95 && secs < 60.0,
          fmt("median ratio %.4f over %zu pairs (want [0.91, 0.95]), %.1f s", d.median, d.pairs, secs)};
}

Outcome criterion2() {
  const auto d = sh::predicted_distance_constant(sh::ReflectanceKernel::lambertian());
  const double ea = std::abs(d.a - 127 * kPi / 192), eb = std::abs(d.b - 109 * kPi / 192),
               ec = std::abs(d.c - std::sqrt(109.0 / 127.0));
  return {ea <= 1e-10 && eb <= 1e-10 && ec <= 1e-10,
          fmt("c = %.15f, |da| %.1e |db| %.1e |dc| %.1e (want <= 1e-10)", d.c, ea, eb, ec)};
}

Outcome criterion3() {
  const auto k = sh::kernel_from_samples([](double t) { return std::max(std::cos(t), 0.0); }, 2);
  const double e0 = std::abs(k.zonal[0] - std::sqrt(kPi) / 2), e1 = std::abs(k.zonal[1] - std::sqrt(kPi / 3)),
               e2 = std::abs(k.zonal[2] - std::sqrt(5 * kPi) / 8);
  return {std::max({e0, e1, e2}) <= 1e-6, fmt("zonal errors %.1e %.1e %.1e (want <= 1e-6)", e0, e1, e2)};
}

Outcome criterion4() {
  Timer t;
  const auto h = pipeline::hemisphere_spectrum(2000, 60, laplacian::RowSumMode::Constant);
  const double secs = t.seconds();
  const auto alt = pipeline::hemisphere_spectrum(2000, 60, laplacian::RowSumMode::InverseRadiusSquared);
  note(fmt("inverse-r-squared row sums: Dirichlet %.3f, Neumann %.3f", alt.dirichlet.max_residual,
           alt.neumann.max_residual));
  std::ostringstream v;
  v << "Dirichlet " << h.dirichlet.values.transpose() << " | Neumann " << h.neumann.values.transpose();
  note(v.str());
  return {h.dirichlet.max_residual <= 0.1 && h.neumann.max_residual <= 0.1 && secs < 120.0,
          fmt("max residual Dirichlet %.3f, Neumann %.3f (want <= 0.10), %.1f s", h.dirichlet.max_residual,
              h.neumann.max_residual, secs)};
}

Outcome criterion5() {
  const auto scene = render::make_sphere_scene(64);
  std::vector<int> pix;
  for (std::size_t i = 0; i < scene.pixel_count(); ++i)
    if (scene.mask[i]) pix.push_back(static_cast<int>(i));
  graph::RowMatrix pts(static_cast<Eigen::Index>(pix.size()), 3);
  for (std::size_t j = 0; j < pix.size(); ++j) pts.row(static_cast<Eigen::Index>(j)) = scene.normals[pix[j]].transpose();
  const auto vec = graph::vectors_from_points(scene.width, scene.height, pix, pts);

  PipelineConfig c;
  c.row_sum_mode = laplacian::RowSumMode::InverseRadiusSquared;
  c.chart_method = laplacian::ChartMethod::LogMap;
  const auto r = pipeline::reconstruct_vectors(vec, scene.mask, c);
  const double err = baselines::mean_angle_error(r.normals, pipeline::truth_field(scene));

  PipelineConfig plain;
  const auto rc = pipeline::reconstruct_vectors(vec, scene.mask, plain);
  note(fmt("constant row sums with PCA charts: %.2f deg", baselines::mean_angle_error(rc.normals, pipeline::truth_field(scene))));
  return {err < 2.0, fmt("mean angle error %.3f deg (want < 2), rotation %.2f deg", err, r.rotation.phi * 180 / kPi)};
}

struct DeskRun {
  render::Scene scene;
  pipeline::Reconstruction r;
  double seconds = 0.0;
};

DeskRun desk_run(const PipelineConfig& c, bool keep_geodesics) {
  Timer t;
  DeskRun d;
  d.scene = pipeline::make_scene(c);
  pipeline::RunOptions run;
  run.keep_geodesics = keep_geodesics;
  d.r = pipeline::reconstruct_stack(pipeline::render_scene(d.scene, c), c, run);
  d.seconds = t.seconds();
  return d;
}

Outcome criterion6() {
  const auto d = desk_run(desk_config(), false);
  const double err = baselines::mean_angle_error(d.r.normals, pipeline::truth_field(d.scene));
  const double rmse = pipeline::sphere_depth_rmse(d.r.depth, d.scene);
  const auto plain = desk_run(PipelineConfig{}, false);
  note(fmt("constant row sums: %.2f deg, depth RMSE %.2f%%, %.1f s",
           baselines::mean_angle_error(plain.r.normals, pipeline::truth_field(plain.scene)),
           100 * pipeline::sphere_depth_rmse(plain.r.depth, plain.scene), plain.seconds));
  return {err < 10.0 && rmse < 0.05 && d.seconds < 300.0,
          fmt("mean angle error %.2f deg (want < 10), depth RMSE %.2f%% of radius (want < 5), %.1f s", err,
              100 * rmse, d.seconds)};
}

// Convex hull by monotone chain; indices into `p`, collinear points dropped.
std::vector<int> hull(const Eigen::MatrixXd& p, const std::vector<int>& idx) {
  std::vector<int> s = idx;
  std::sort(s.begin(), s.end(), [&](int a, int b) {
    return p(a, 0) < p(b, 0) || (p(a, 0) == p(b, 0) && p(a, 1) < p(b, 1));
  });
  if (s.size() < 3) return s;
  const auto cross = [&](int o, int a, int b) {
    return (p(a, 0) - p(o, 0)) * (p(b, 1) - p(o, 1)) - (p(a, 1) - p(o, 1)) * (p(b, 0) - p(o, 0));
  };
  std::vector<int> h(2 * s.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], s[i]) <= 0) --k;
    h[k++] = s[i];
  }
  for (std::size_t i = s.size() - 1, lo = k + 1; i > 0; --i) {
    while (k >= lo && cross(h[k - 2], h[k - 1], s[i - 1]) <= 0) --k;
    h[k++] = s[i - 1];
  }
  h.resize(k - 1);
  return h;
}

Outcome criterion7() {
  const PipelineConfig c = desk_config();
  const auto d = desk_run(c, true);
  const auto& table = *d.r.geodesic_table;
  int low = 0;
  for (int pix : d.r.boundary_pixels)
    if (d.scene.normals[pix].z() < 0.3) ++low;
  const double frac_low = static_cast<double>(low) / static_cast<double>(d.r.boundary_pixels.size());

  // independent peeling of the same planar embedding
  const auto b = equator::flatten_and_peel(table, c.boundary_fraction, c.flatten_epsilon);
  const int n = table.size();
  const int need = static_cast<int>(std::ceil(c.boundary_fraction * n - 1e-9));
  std::vector<int> rest(n);
  for (int i = 0; i < n; ++i) rest[i] = i;
  std::vector<int> labeled;
  int before_last = 0, peels = 0;
  while (static_cast<int>(labeled.size()) < need && !rest.empty()) {
    const auto layer = hull(b.embedding, rest);
    before_last = static_cast<int>(labeled.size());
    labeled.insert(labeled.end(), layer.begin(), layer.end());
    std::vector<int> keep;
    for (int i : rest)
      if (std::find(layer.begin(), layer.end(), i) == layer.end()) keep.push_back(i);
    rest = keep;
    ++peels;
  }
  std::sort(labeled.begin(), labeled.end());
  const bool same_set = labeled == b.rows;
  const bool stop_rule = before_last < need && static_cast<int>(b.rows.size()) >= need;
  note(fmt("%d peels, %zu of %d points labeled, need %d, oracle peeling agrees: %s", peels, b.rows.size(), n, need,
           same_set ? "yes" : "no"));
  return {frac_low >= 0.7 && stop_rule && same_set,
          fmt("%.1f%% of boundary pixels have z < 0.3 (want >= 70), stop rule %s", 100 * frac_low,
              stop_rule ? "holds" : "violated")};
}

Outcome criterion8() {
  const auto pts = pipeline::fibonacci_hemisphere(1000);
  const Eigen::MatrixXd truth = pts;
  const Eigen::MatrixXd dots = (truth * truth.transpose()).cwiseMax(-1.0).cwiseMin(1.0);
  const auto table = equator::table_from_distances(dots.unaryExpr([](double v) { return std::acos(v); }));
  Timer t;
  const auto plain = baselines::procrustes_align(baselines::isomap_embed(table, false).points, truth);
  const auto chordal = baselines::procrustes_align(baselines::isomap_embed(table, true).points, truth);
  const double secs = t.seconds();
  return {chordal.mean_error <= plain.mean_error && secs < 30.0,
          fmt("Procrustes error chordal %.5f, plain %.5f, %.2f s", chordal.mean_error, plain.mean_error, secs)};
}

struct InstanceCheck {
  std::string name;
  laplacian::Diagnostics diag;
  double equality = 0.0;
  double neumann_symmetry = 0.0;
  double neumann_min_weight = 0.0;
  double neumann_row = 0.0;
  double lambda_l = 0.0, lambda_n = 0.0;  // smallest eigenvalues, relative to the operator norm
};

double rel_lambda_min(const spectral::SparseMatrix& m) {
  double norm = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    double s = 0.0;
    for (spectral::SparseMatrix::InnerIterator it(m, k); it; ++it) s += std::abs(it.value());
    norm = std::max(norm, s);
  }
  return spectral::smallest_eigenpairs(m, 1).values[0] / norm;
}

InstanceCheck check_instance(const std::string& name, const graph::PixelGraph& g,
                             const std::vector<std::uint8_t>& boundary, const laplacian::WeightOptions& o,
                             laplacian::ChartMethod method) {
  const auto charts = laplacian::build_charts(g, method);
  const auto plain = laplacian::solve_weights(g, charts, boundary, o);
  const auto set = laplacian::build(g, charts, boundary, o);
  InstanceCheck c;
  c.name = name;
  c.diag = laplacian::diagnose(g, charts, plain, set);
  c.equality = set.report.equality_residual;
  const spectral::SparseMatrix wt = set.W_N.transpose();
  c.neumann_symmetry = spectral::SparseMatrix(set.W_N - wt).coeffs().cwiseAbs().maxCoeff();
  c.neumann_min_weight = set.W_N.nonZeros() ? set.W_N.coeffs().minCoeff() : 0.0;
  const Eigen::VectorXd rows = set.L_N * Eigen::VectorXd::Ones(set.L_N.cols());
  c.neumann_row = rows.cwiseAbs().maxCoeff();
  c.lambda_l = rel_lambda_min(set.L);
  c.lambda_n = rel_lambda_min(set.L_N);
  return c;
}

Outcome criterion9() {
  std::vector<InstanceCheck> checks;
  {
    const PipelineConfig c = desk_config();
    const auto d = desk_run(c, true);
    const auto& table = *d.r.geodesic_table;
    const auto b = equator::flatten_and_peel(table, c.boundary_fraction, c.flatten_epsilon);
    laplacian::WeightOptions o;
    o.row_sum = c.row_sum_mode;
    checks.push_back(check_instance("sphere-64", d.r.graph, equator::boundary_mask(table, b, d.r.graph.size()), o,
                                    c.chart_method));
  }
  for (auto mode : {laplacian::RowSumMode::Constant, laplacian::RowSumMode::InverseRadiusSquared}) {
    const int n = 2000;
    std::vector<int> pix(n);
    for (int i = 0; i < n; ++i) pix[i] = i;
    const auto g = graph::build_neighborhoods(graph::vectors_from_points(n, 1, pix, pipeline::fibonacci_hemisphere(n)), 60);
    std::vector<std::uint8_t> boundary(n, 0);
    for (int i = n - n / 20; i < n; ++i) boundary[i] = 1;
    laplacian::WeightOptions o;
    o.row_sum = mode;
    checks.push_back(check_instance(mode == laplacian::RowSumMode::Constant ? "hemisphere-constant" : "hemisphere-inv-r2",
                                    g, boundary, o, laplacian::ChartMethod::LogMap));
  }
  bool ok = true;
  double worst_constraint = 0.0, worst_psd = 0.0;
  for (const auto& c : checks) {
    const double constraint = std::max({c.diag.linear_precision, c.diag.row_sum, c.diag.symmetry, -c.diag.min_weight,
                                        c.diag.interior_row_of_L, c.neumann_symmetry, -c.neumann_min_weight,
                                        c.neumann_row, c.equality});
    const double psd = std::min(c.lambda_l, c.lambda_n);
    note(fmt("%s: linear %.1e rowsum %.1e sym %.1e minw %.1e L-row %.1e | N sym %.1e minw %.1e row %.1e | "
             "lambda_min/|L| %.1e, %.1e",
             c.name.c_str(), c.diag.linear_precision, c.diag.row_sum, c.diag.symmetry, c.diag.min_weight,
             c.diag.interior_row_of_L, c.neumann_symmetry, c.neumann_min_weight, c.neumann_row, c.lambda_l,
             c.lambda_n));
    ok = ok && constraint <= 1e-8 && psd >= -1e-9;
    worst_constraint = std::max(worst_constraint, constraint);
    worst_psd = std::min(worst_psd, psd);
  }
  return {ok, fmt("%zu instances, worst constraint residual %.1e (want <= 1e-8), worst lambda_min/|L| %.1e "
                  "(want >= -1e-9)",
                  checks.size(), worst_constraint, worst_psd)};
}

Outcome criterion10() {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd b(200, 200);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = gauss(rng);
    const Eigen::MatrixXd m = b * b.transpose() / 200.0;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense(m, Eigen::EigenvaluesOnly);
    const auto r = spectral::smallest_eigenpairs(m.sparseView(), 6);
    for (int i = 0; i < 6; ++i) worst = std::max(worst, std::abs(r.values[i] - dense.eigenvalues()[i]));
  }

  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_path = 0.0;
  int graphs = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 100;
    graph::PixelGraph g;
    g.vectors.width = n;
    g.vectors.height = 1;
    g.vectors.data.resize(n, 3);
    for (int i = 0; i < n; ++i) {
      g.vectors.pixel.push_back(i);
      g.vectors.data.row(i) << u(rng), u(rng), 0.2 * u(rng);
    }
    g.neighbors.resize(n);
    g.knn.resize(n);
    g.removed.assign(n, 0);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        const double d = (g.vectors.data.row(p) - g.vectors.data.row(q)).norm();
        if (q != p && d <= 0.3) g.neighbors[p].push_back({q, d});
      }
    const auto t = equator::geodesics(g);
    if (!t.connected) continue;
    ++graphs;
    Eigen::MatrixXd fw = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::infinity());
    for (int p = 0; p < n; ++p) {
      fw(p, p) = 0.0;
      for (const auto& nb : g.neighbors[p]) fw(p, nb.node) = nb.distance;
    }
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) fw(i, j) = std::min(fw(i, j), fw(i, k) + fw(k, j));
    worst_path = std::max(worst_path, (t.dist - fw).cwiseAbs().maxCoeff() / t.d_max);
  }
  return {worst <= 1e-8 && worst_path <= 1e-12 && graphs >= 5,
          fmt("eigenvalues max error %.1e over 50 matrices (want <= 1e-8); shortest paths max relative "
              "difference %.1e over %d graphs",
              worst, worst_path, graphs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= 10; ++i) which.push_back(i);
  bool all = true;
  for (int id : which) {
    if (id < 1 || id > 10) {
      std::cerr << "no criterion " << id << '\n';
      return 2;
    }
    Outcome o;
    try {
      o = criteria[id - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::cout << "criterion " << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
