#include "hemips/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "hemips/error.hpp"
#include "hemips/spectral.hpp"

namespace hemips::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

const char* name_of(laplacian::RowSumMode m) {
  return m == laplacian::RowSumMode::Constant ? "constant" : "inverse-r-squared";
}
const char* name_of(laplacian::ChartMethod m) { return m == laplacian::ChartMethod::Pca ? "pca" : "logmap"; }
const char* name_of(reconstruct::Convexity c) {
  switch (c) {
    case reconstruct::Convexity::Convex: return "convex";
    case reconstruct::Convexity::Concave: return "concave";
    default: return "auto";
  }
}

void require(bool ok, const std::string& key, const std::string& rule) {
  if (!ok) throw InputError("config", key + " must " + rule);
}

spectral::EigenOptions eigen_options(const PipelineConfig& c) {
  spectral::EigenOptions o;
  o.tolerance = c.eigen_tolerance;
  o.max_iterations = c.eigen_max_iterations;
  return o;
}

laplacian::WeightOptions weight_options(const PipelineConfig& c) {
  laplacian::WeightOptions o;
  o.row_sum = c.row_sum_mode;
  o.tolerance = c.weight_tolerance;
  o.max_newton = c.max_newton;
  return o;
}

nlohmann::json fit_json(const EigenFit& f) {
  return {{"values", std::vector<double>(f.values.begin(), f.values.end())},
          {"expected", std::vector<double>(f.expected.begin(), f.expected.end())},
          {"scale", f.scale},
          {"residuals", std::vector<double>(f.residuals.begin(), f.residuals.end())},
          {"max_residual", f.max_residual}};
}

}  // namespace

void PipelineConfig::validate() const {
  require(k_fraction > 0.0 && k_fraction <= 1.0, "k_fraction", "lie in (0, 1]");
  require(k_cap >= 3, "k_cap", "be at least 3");
  require(favor_threshold >= 0.0 && favor_threshold <= 1.0, "favor_threshold", "lie in [0, 1]");
  require(weight_tolerance > 0.0, "weight_tolerance", "be positive");
  require(max_newton >= 1, "max_newton", "be at least 1");
  require(boundary_fraction > 0.0 && boundary_fraction <= 1.0, "boundary_fraction", "lie in (0, 1]");
  require(flatten_epsilon > 0.0, "flatten_epsilon", "be positive");
  require(eigen_tolerance > 0.0, "eigen_tolerance", "be positive");
  require(eigen_max_iterations >= 1, "eigen_max_iterations", "be at least 1");
  require(z_floor >= 0.0 && z_floor < 1.0, "z_floor", "lie in [0, 1)");
  require(depth_tolerance > 0.0, "depth_tolerance", "be positive");
  require(resolution >= 16, "resolution", "be at least 16");
  require(lights >= 1, "lights", "be at least 1");
  require(render_mode == "exact" || render_mode == "sh", "render_mode", "be exact or sh");
  const auto names = sh::ReflectanceKernel::preset_names();
  require(std::find(names.begin(), names.end(), kernel) != names.end(), "kernel", "name a kernel preset");
  require(albedo == "uniform" || albedo == "checker", "albedo", "be uniform or checker");
  require(noise_sigma >= 0.0, "noise_sigma", "be non-negative");
}

nlohmann::json to_json(const PipelineConfig& c) {
  return {{"k_fraction", c.k_fraction},
          {"k_cap", c.k_cap},
          {"favor_threshold", c.favor_threshold},
          {"row_sum_mode", name_of(c.row_sum_mode)},
          {"chart_method", name_of(c.chart_method)},
          {"weight_tolerance", c.weight_tolerance},
          {"max_newton", c.max_newton},
          {"boundary_fraction", c.boundary_fraction},
          {"flatten_epsilon", c.flatten_epsilon},
          {"eigen_tolerance", c.eigen_tolerance},
          {"eigen_max_iterations", c.eigen_max_iterations},
          {"z_floor", c.z_floor},
          {"depth_tolerance", c.depth_tolerance},
          {"convexity", name_of(c.convexity)},
          {"seed", c.seed},
          {"resolution", c.resolution},
          {"lights", c.lights},
          {"render_mode", c.render_mode},
          {"kernel", c.kernel},
          {"albedo", c.albedo},
          {"noise_sigma", c.noise_sigma}};
}

PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig c) {
  if (!j.is_object()) throw InputError("config", "configuration must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "k_fraction") c.k_fraction = v.get<double>();
      else if (key == "k_cap") c.k_cap = v.get<int>();
      else if (key == "favor_threshold") c.favor_threshold = v.get<double>();
      else if (key == "row_sum_mode") {
        const auto s = v.get<std::string>();
        require(s == "constant" || s == "inverse-r-squared", key, "be constant or inverse-r-squared");
        c.row_sum_mode = s == "constant" ? laplacian::RowSumMode::Constant : laplacian::RowSumMode::InverseRadiusSquared;
      } else if (key == "chart_method") {
        const auto s = v.get<std::string>();
        require(s == "pca" || s == "logmap", key, "be pca or logmap");
        c.chart_method = s == "pca" ? laplacian::ChartMethod::Pca : laplacian::ChartMethod::LogMap;
      } else if (key == "weight_tolerance") c.weight_tolerance = v.get<double>();
      else if (key == "max_newton") c.max_newton = v.get<int>();
      else if (key == "boundary_fraction") c.boundary_fraction = v.get<double>();
      else if (key == "flatten_epsilon") c.flatten_epsilon = v.get<double>();
      else if (key == "eigen_tolerance") c.eigen_tolerance = v.get<double>();
      else if (key == "eigen_max_iterations") c.eigen_max_iterations = v.get<int>();
      else if (key == "z_floor") c.z_floor = v.get<double>();
      else if (key == "depth_tolerance") c.depth_tolerance = v.get<double>();
      else if (key == "convexity") {
        const auto s = v.get<std::string>();
        require(s == "convex" || s == "concave" || s == "auto", key, "be convex, concave or auto");
        c.convexity = s == "convex"    ? reconstruct::Convexity::Convex
                      : s == "concave" ? reconstruct::Convexity::Concave
                                       : reconstruct::Convexity::Auto;
      } else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "resolution") c.resolution = v.get<int>();
      else if (key == "lights") c.lights = v.get<int>();
      else if (key == "render_mode") c.render_mode = v.get<std::string>();
      else if (key == "kernel") c.kernel = v.get<std::string>();
      else if (key == "albedo") c.albedo = v.get<std::string>();
      else if (key == "noise_sigma") c.noise_sigma = v.get<double>();
      else throw InputError("config", "unknown key " + key);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config", std::string("bad value type: ") + e.what());
  }
  return c;
}

render::Scene make_scene(const PipelineConfig& c) {
  return render::make_sphere_scene(c.resolution,
                                   c.albedo == "checker" ? render::AlbedoPattern::Checker : render::AlbedoPattern::Uniform);
}

render::ImageStack render_scene(const render::Scene& scene, const PipelineConfig& c) {
  render::RenderOptions opt;
  if (c.render_mode == "sh") {
    opt.mode = render::RenderMode::ShKernel;
    opt.kernel = sh::ReflectanceKernel::preset(c.kernel);
  }
  opt.noise_sigma = c.noise_sigma;
  opt.noise_seed = c.seed + 1;
  return render::render_stack(scene, render::sample_uniform_lights(c.lights, c.seed), opt);
}

EigenFit fit_eigen_pattern(const Eigen::VectorXd& values, const std::vector<double>& expected) {
  if (values.size() != static_cast<Eigen::Index>(expected.size()))
    throw InputError("spectral", "eigenvalue count differs from the pattern");
  EigenFit f;
  f.values = values;
  f.expected = Eigen::Map<const Eigen::VectorXd>(expected.data(), values.size());
  double sum = 0.0;
  int n = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (f.expected[i] > 0.0) {
      sum += values[i] / f.expected[i];
      ++n;
    }
  if (n == 0) throw InputError("spectral", "pattern has no positive entry");
  f.scale = sum / n;
  f.residuals.resize(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i)
    f.residuals[i] = std::abs(values[i] - f.scale * f.expected[i]) / (std::abs(f.scale) * std::max(f.expected[i], 2.0));
  f.max_residual = f.residuals.maxCoeff();
  return f;
}

double Reconstruction::total_seconds() const {
  double t = 0.0;
  for (const auto& s : timings) t += s.seconds;
  return t;
}

Reconstruction reconstruct_vectors(const graph::PixelVectors& vectors, const std::vector<std::uint8_t>& mask,
                                   const PipelineConfig& c, const RunOptions& run) {
  c.validate();
  Reconstruction r;
  r.dark_pixels = static_cast<int>(vectors.dark_pixels.size());

  auto t = Clock::now();
  r.k = graph::default_k(vectors.size(), c.k_fraction, c.k_cap);
  const graph::PixelGraph full = graph::build_neighborhoods(vectors, r.k);
  graph::PixelGraph g = graph::remove_outliers(full, c.favor_threshold).compacted();
  r.outliers = full.size() - g.size();
  r.timings.push_back({"graph", seconds_since(t)});

  t = Clock::now();
  equator::GeodesicTable table = equator::geodesics(g);
  r.geodesic_dropped = table.dropped;
  if (table.dropped > 0) {
    // keep the component the table covers
    std::vector<std::uint8_t> in(g.size(), 0);
    for (int node : table.nodes) in[node] = 1;
    std::vector<int> out;
    for (int p = 0; p < g.size(); ++p)
      if (!in[p]) out.push_back(p);
    g = g.without(out).compacted();
    for (int i = 0; i < table.size(); ++i) table.nodes[i] = i;
  }
  const equator::Boundary b = equator::flatten_and_peel(table, c.boundary_fraction, c.flatten_epsilon);
  const std::vector<std::uint8_t> boundary = equator::boundary_mask(table, b, g.size());
  r.peels = b.peels;
  for (int row : b.rows) r.boundary_pixels.push_back(g.vectors.pixel[table.nodes[row]]);
  if (run.keep_geodesics) r.geodesic_table = std::move(table);
  r.timings.push_back({"equator", seconds_since(t)});

  t = Clock::now();
  const auto charts = laplacian::build_charts(g, c.chart_method);
  const laplacian::LaplacianSet set = laplacian::build(g, charts, boundary, weight_options(c));
  r.weights = set.report;
  r.timings.push_back({"laplacian", seconds_since(t)});

  t = Clock::now();
  const auto eo = eigen_options(c);
  const auto d = spectral::smallest_eigenpairs(set.L_D, std::min<int>(4, static_cast<int>(set.L_D.rows())), eo);
  const auto n = spectral::smallest_eigenpairs(set.L_N, std::min<int>(5, set.size()), eo);
  if (d.values.size() == 4) r.dirichlet = fit_eigen_pattern(d.values, kDirichletPattern);
  if (n.values.size() == 5) r.neumann = fit_eigen_pattern(n.values, kNeumannPattern);
  if (n.values.size() < 3) throw NumericalError("spectral", "too few nodes for the Neumann eigenvectors");
  r.timings.push_back({"eigen", seconds_since(t)});

  t = Clock::now();
  for (int node : set.nodes) r.active_pixels.push_back(g.vectors.pixel[node]);
  const Eigen::VectorXd z = set.expand_interior(d.vectors.col(0));
  r.normals = reconstruct::assemble_normals(vectors.width, vectors.height, mask, r.active_pixels, z, n.vectors.col(1),
                                            n.vectors.col(2), c.z_floor);
  r.rotation = reconstruct::resolve_rotation(r.normals);
  r.timings.push_back({"normals", seconds_since(t)});

  t = Clock::now();
  r.depth = reconstruct::integrate_depth(r.normals, c.convexity, c.depth_tolerance);
  r.timings.push_back({"depth", seconds_since(t)});
  r.graph = std::move(g);
  return r;
}

Reconstruction reconstruct_stack(const render::ImageStack& stack, const PipelineConfig& c, const RunOptions& run) {
  if (stack.images.size() < 3) throw InputError("pixelgraph", "at least 3 images are required");
  const auto t = Clock::now();
  const graph::PixelVectors v = graph::build_vectors(stack);
  const double vt = seconds_since(t);
  Reconstruction r = reconstruct_vectors(v, stack.mask, c, run);
  r.timings.insert(r.timings.begin(), {"vectors", vt});
  return r;
}

nlohmann::json report_json(const Reconstruction& r, const PipelineConfig& c) {
  nlohmann::json j;
  j["config"] = to_json(c);
  j["tolerances"] = {{"weight_equality", c.weight_tolerance},
                     {"eigen_relative_residual", c.eigen_tolerance},
                     {"depth_cg", c.depth_tolerance},
                     {"z_floor", c.z_floor},
                     {"flatten_epsilon", c.flatten_epsilon}};
  j["graph"] = {{"k", r.k},
                {"dark_pixels", r.dark_pixels},
                {"outliers", r.outliers},
                {"retained", r.graph.size()},
                {"geodesic_dropped", r.geodesic_dropped}};
  j["boundary"] = {{"count", r.boundary_pixels.size()}, {"peels", r.peels}};
  const auto& w = r.weights;
  j["weights"] = {{"converged", w.converged},
                  {"fallback_used", w.fallback_used},
                  {"newton_iterations", w.newton_iterations},
                  {"equality_residual", w.equality_residual},
                  {"symmetry_residual", w.symmetry_residual},
                  {"min_weight", w.min_weight},
                  {"demoted", w.demoted.size()},
                  {"neumann_rows_kept_plain", w.neumann_rows_kept_plain}};
  j["eigenvalues"] = {{"dirichlet", fit_json(r.dirichlet)}, {"neumann", fit_json(r.neumann)}};
  j["rotation"] = {{"phi_degrees", r.rotation.phi * 180.0 / std::numbers::pi},
                   {"reflected", r.rotation.reflected},
                   {"residual_before", r.rotation.residual_before},
                   {"residual_after", r.rotation.residual_after}};
  j["depth"] = {{"convex", r.depth.convex},
                {"flipped", r.depth.flipped},
                {"cg_iterations", r.depth.cg_iterations},
                {"cg_error", r.depth.cg_error},
                {"gradient_residual", r.depth.gradient_residual}};
  nlohmann::json times = nlohmann::json::object();
  for (const auto& s : r.timings) times[s.stage] = s.seconds;
  times["total"] = r.total_seconds();
  j["timings_seconds"] = times;
  return j;
}

reconstruct::NormalField truth_field(const render::Scene& scene) {
  reconstruct::NormalField f;
  f.width = scene.width;
  f.height = scene.height;
  f.mask = scene.mask;
  f.normals = scene.normals;
  f.interpolated.assign(scene.pixel_count(), 0);
  return f;
}

double sphere_depth_rmse(const reconstruct::DepthMap& depth, const render::Scene& scene) {
  const double radius = scene.width / 2.0;
  double offset = 0.0, n = 0.0;
  for (std::size_t i = 0; i < scene.pixel_count(); ++i)
    if (scene.mask[i]) {
      offset += depth.depth[i] - radius * scene.normals[i].z();
      n += 1.0;
    }
  if (n == 0.0) throw InputError("reconstruct", "empty mask");
  offset /= n;
  double err = 0.0;
  for (std::size_t i = 0; i < scene.pixel_count(); ++i)
    if (scene.mask[i]) err += std::pow(depth.depth[i] - offset - radius * scene.normals[i].z(), 2);
  return std::sqrt(err / n) / radius;
}

namespace {

// rows of `v` are unit vectors for the pixels in `pixel`
DistanceRatio pair_ratio(const graph::RowMatrix& v, const std::vector<int>& pixel, const render::Scene& scene,
                         double theta_min, double theta_max, int window) {
  std::vector<int> node_of(scene.pixel_count(), -1);
  for (std::size_t i = 0; i < pixel.size(); ++i) node_of[pixel[i]] = static_cast<int>(i);
  std::vector<double> ratios;
  for (std::size_t p = 0; p < pixel.size(); ++p) {
    const int pr = pixel[p] / scene.width, pc = pixel[p] % scene.width;
    for (int dr = 0; dr <= window; ++dr)
      for (int dc = -window; dc <= window; ++dc) {
        if (dr == 0 && dc <= 0) continue;
        const int r = pr + dr, cc = pc + dc;
        if (r >= scene.height || cc < 0 || cc >= scene.width) continue;
        const int q = node_of[static_cast<std::size_t>(r) * scene.width + cc];
        if (q < 0) continue;
        const double cs = scene.normals[pixel[p]].dot(scene.normals[pixel[q]]);
        const double theta = std::acos(std::clamp(cs, -1.0, 1.0));
        if (theta < theta_min || theta > theta_max) continue;
        ratios.push_back((v.row(static_cast<Eigen::Index>(p)) - v.row(q)).norm() / theta);
      }
  }
  if (ratios.empty()) throw InputError("pixelgraph", "no pixel pairs in the angle range");
  std::sort(ratios.begin(), ratios.end());
  DistanceRatio out;
  out.pairs = ratios.size();
  const std::size_t h = ratios.size() / 2;
  out.median = ratios.size() % 2 ? ratios[h] : 0.5 * (ratios[h - 1] + ratios[h]);
  out.ratios = std::move(ratios);
  return out;
}

}  // namespace

double DistanceRatio::fraction_within(double lo, double hi) const {
  if (ratios.empty()) return 0.0;
  const auto a = std::lower_bound(ratios.begin(), ratios.end(), lo);
  const auto b = std::upper_bound(ratios.begin(), ratios.end(), hi);
  return static_cast<double>(b - a) / static_cast<double>(ratios.size());
}

DistanceRatio neighbour_distance_ratio(const render::ImageStack& stack, const render::Scene& scene,
                                       double theta_min, double theta_max, int window) {
  if (stack.width != scene.width || stack.height != scene.height)
    throw InputError("pixelgraph", "stack and scene sizes differ");
  const graph::PixelVectors v = graph::build_vectors(stack);
  return pair_ratio(v.data, v.pixel, scene, theta_min, theta_max, window);
}

DistanceRatio kernel_distance_ratio(const render::Scene& scene, const std::vector<sh::Direction>& lights,
                                    const sh::ReflectanceKernel& kernel, double theta_min, double theta_max,
                                    int window) {
  if (lights.empty()) throw InputError("render", "no lights");
  std::vector<sh::LightingCoeffs> coeffs;
  for (const auto& l : lights) coeffs.push_back(sh::LightingCoeffs::directional(l, kernel.max_order));
  std::vector<int> pixel;
  for (std::size_t i = 0; i < scene.pixel_count(); ++i)
    if (scene.mask[i]) pixel.push_back(static_cast<int>(i));
  graph::RowMatrix v(static_cast<Eigen::Index>(pixel.size()), static_cast<Eigen::Index>(lights.size()));
  for (std::size_t p = 0; p < pixel.size(); ++p) {
    const auto n = sh::Direction::normalized(scene.normals[pixel[p]]);
    for (std::size_t j = 0; j < lights.size(); ++j)
      v(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) = sh::intensity(n, 1.0, kernel, coeffs[j]);
    v.row(static_cast<Eigen::Index>(p)).normalize();
  }
  return pair_ratio(v, pixel, scene, theta_min, theta_max, window);
}

graph::RowMatrix fibonacci_hemisphere(int n) {
  if (n < 1) throw InputError("pipeline", "sample count must be positive");
  graph::RowMatrix pts(n, 3);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (i + 0.5) / n;
    const double r = std::sqrt(1.0 - z * z);
    pts.row(i) << r * std::cos(golden * i), r * std::sin(golden * i), z;
  }
  return pts;
}

HemisphereSpectrum hemisphere_spectrum(int samples, int k, laplacian::RowSumMode mode, double boundary_fraction) {
  const auto t = Clock::now();
  std::vector<int> pix(samples);
  for (int i = 0; i < samples; ++i) pix[i] = i;
  const auto g = graph::build_neighborhoods(graph::vectors_from_points(samples, 1, pix, fibonacci_hemisphere(samples)), k);
  const auto charts = laplacian::build_charts(g, laplacian::ChartMethod::LogMap);
  // samples are ordered by decreasing z
  const int first_boundary = samples - static_cast<int>(std::ceil(boundary_fraction * samples));
  std::vector<std::uint8_t> boundary(samples, 0);
  for (int i = first_boundary; i < samples; ++i) boundary[i] = 1;
  laplacian::WeightOptions o;
  o.row_sum = mode;
  const auto set = laplacian::build(g, charts, boundary, o);
  HemisphereSpectrum h;
  h.weights = set.report;
  h.dirichlet = fit_eigen_pattern(spectral::smallest_eigenpairs(set.L_D, 4).values, kDirichletPattern);
  h.neumann = fit_eigen_pattern(spectral::smallest_eigenpairs(set.L_N, 5).values, kNeumannPattern);
  h.seconds = seconds_since(t);
  return h;
}

std::vector<baselines::ComparisonRow> compare_embedders(const PipelineConfig& c, bool exact_distances) {
  const render::Scene scene = make_scene(c);
  const render::ImageStack stack = render_scene(scene, c);
  RunOptions run;
  run.keep_geodesics = true;
  Reconstruction r = reconstruct_stack(stack, c, run);
  equator::GeodesicTable table = std::move(*r.geodesic_table);
  const Eigen::Index n = table.size();

  Eigen::MatrixXd truth(n, 3), ours(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int pix = r.graph.vectors.pixel[table.nodes[i]];
    truth.row(i) = scene.normals[pix].transpose();
    ours.row(i) = r.normals.normals[pix].transpose();
  }
  if (exact_distances) {
    const Eigen::MatrixXd dots = (truth * truth.transpose()).cwiseMax(-1.0).cwiseMin(1.0);
    table = equator::table_from_distances(dots.unaryExpr([](double v) { return std::acos(v); }));
  }
  const auto angle = [&](const Eigen::MatrixXd& pts) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double cs = pts.row(i).normalized().dot(truth.row(i));
      sum += std::acos(std::clamp(cs, -1.0, 1.0));
    }
    return sum / static_cast<double>(n) * 180.0 / std::numbers::pi;
  };
  const std::string object = std::string(exact_distances ? "sphere-exact" : "sphere") + "-s" + std::to_string(c.seed);

  std::vector<baselines::ComparisonRow> rows;
  rows.push_back({"ours", object, baselines::procrustes_align(ours, truth).mean_error, angle(ours)});
  for (bool chordal : {false, true}) {
    const auto e = baselines::isomap_embed(table, chordal);
    const auto a = baselines::procrustes_align(e.points, truth);
    rows.push_back({e.method, object, a.mean_error, angle(a.aligned)});
  }
  const auto lle = baselines::lle_embed(r.graph, 3);
  Eigen::MatrixXd lle_pts(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) lle_pts.row(i) = lle.points.row(table.nodes[i]);
  const auto a = baselines::procrustes_align(lle_pts, truth);
  rows.push_back({"lle", object, a.mean_error, angle(a.aligned)});
  return rows;
}

}  // namespace hemips::pipeline
