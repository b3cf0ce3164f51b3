#pragma once

// End-to-end orchestration: configuration, the reconstruction stages, the
// eigenvalue pattern check and the claim measurements used by the CLI.

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hemips/baselines.hpp"
#include "hemips/equator.hpp"
#include "hemips/laplacian.hpp"
#include "hemips/pixelgraph.hpp"
#include "hemips/reconstruct.hpp"
#include "hemips/render.hpp"
#include "json.hpp"

namespace hemips::pipeline {

struct PipelineConfig {
  // graph
  double k_fraction = 0.05;
  int k_cap = 60;
  double favor_threshold = 0.2;  // minimum reciprocated fraction
  // weights
  laplacian::RowSumMode row_sum_mode = laplacian::RowSumMode::Constant;
  laplacian::ChartMethod chart_method = laplacian::ChartMethod::Pca;
  double weight_tolerance = 1e-10;
  int max_newton = 100;
  // equator
  double boundary_fraction = 0.05;
  double flatten_epsilon = equator::kFlattenEpsilon;
  // eigen
  double eigen_tolerance = 1e-9;
  int eigen_max_iterations = 10000;
  // normals and depth
  double z_floor = reconstruct::kZFloor;
  double depth_tolerance = 1e-10;
  reconstruct::Convexity convexity = reconstruct::Convexity::Auto;
  // synthetic scenes
  std::uint64_t seed = 7;
  int resolution = 64;
  int lights = 90;
  std::string render_mode = "exact";  // exact | sh
  std::string kernel = "lambertian";  // lambertian | constant | cosine-unclamped
  std::string albedo = "uniform";     // uniform | checker
  double noise_sigma = 0.0;

  /// Throws InputError naming the offending key.
  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& c);
/// Keys absent from `j` keep the values of `base`; unknown keys are errors.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});

/// Sphere scene, uniform lights and the rendered stack for a config.
render::Scene make_scene(const PipelineConfig& c);
render::ImageStack render_scene(const render::Scene& scene, const PipelineConfig& c);

/// Eigenvalues against an expected pattern after one global scale:
/// scale = mean(lambda / e) over e > 0, residual_i = |lambda_i - scale e_i|
/// / (scale max(e_i, 2)).
struct EigenFit {
  Eigen::VectorXd values;
  Eigen::VectorXd expected;
  Eigen::VectorXd residuals;
  double scale = 0.0;
  double max_residual = 0.0;
};
EigenFit fit_eigen_pattern(const Eigen::VectorXd& values, const std::vector<double>& expected);

inline const std::vector<double> kDirichletPattern{2, 6, 6, 12};
inline const std::vector<double> kNeumannPattern{0, 2, 2, 6, 6};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct Reconstruction {
  reconstruct::NormalField normals;
  reconstruct::DepthMap depth;
  reconstruct::Rotation rotation;
  graph::PixelGraph graph;  // retained nodes only
  int k = 0;
  int dark_pixels = 0;
  int outliers = 0;
  int geodesic_dropped = 0;
  std::vector<int> boundary_pixels;
  int peels = 0;
  std::vector<int> active_pixels;  // pixels with a Laplacian row
  laplacian::WeightReport weights;
  EigenFit dirichlet;
  EigenFit neumann;
  std::optional<equator::GeodesicTable> geodesic_table;
  std::vector<StageTiming> timings;

  double total_seconds() const;
};

struct RunOptions {
  bool keep_geodesics = false;
};

/// All stages from normalized vectors on. `mask` is the object mask of
/// the image grid the vectors come from.
Reconstruction reconstruct_vectors(const graph::PixelVectors& vectors, const std::vector<std::uint8_t>& mask,
                                   const PipelineConfig& c, const RunOptions& run = {});

/// build_vectors followed by reconstruct_vectors. Errors keep the stage
/// name of the step that raised them.
Reconstruction reconstruct_stack(const render::ImageStack& stack, const PipelineConfig& c,
                                 const RunOptions& run = {});

/// report.json content: eigenvalues, fits, residuals, boundary, rotation,
/// timings and every tolerance used.
nlohmann::json report_json(const Reconstruction& r, const PipelineConfig& c);

/// Normal field of a scene in NormalField form.
reconstruct::NormalField truth_field(const render::Scene& scene);

/// Depth RMSE against the sphere's true depth, in units of its radius,
/// after removing the mean offset.
double sphere_depth_rmse(const reconstruct::DepthMap& depth, const render::Scene& scene);

// Claim measurements.

/// Median of ||v^_p - v^_q|| / theta over pixel pairs within `window`
/// pixels whose true normal angle theta lies in [theta_min, theta_max].
struct DistanceRatio {
  double median = 0.0;
  std::size_t pairs = 0;
  std::vector<double> ratios;  // ascending

  /// Fraction of pairs with lo <= ratio <= hi.
  double fraction_within(double lo, double hi) const;
};
DistanceRatio neighbour_distance_ratio(const render::ImageStack& stack, const render::Scene& scene,
                                       double theta_min = 0.02, double theta_max = 0.2, int window = 6);

/// The same ratio for intensities formed by a harmonic kernel without
/// clamping, so truncated kernels are measured exactly as expanded.
DistanceRatio kernel_distance_ratio(const render::Scene& scene, const std::vector<sh::Direction>& lights,
                                    const sh::ReflectanceKernel& kernel, double theta_min = 0.02,
                                    double theta_max = 0.2, int window = 6);

/// Fibonacci samples of the upper hemisphere.
graph::RowMatrix fibonacci_hemisphere(int n);

/// Eigenvalue check on exact hemisphere samples: geodesic charts, the
/// lowest 5% of samples as boundary.
struct HemisphereSpectrum {
  EigenFit dirichlet;
  EigenFit neumann;
  laplacian::WeightReport weights;
  double seconds = 0.0;
};
HemisphereSpectrum hemisphere_spectrum(int samples, int k, laplacian::RowSumMode mode,
                                       double boundary_fraction = 0.05);

/// One row per method for a rendered sphere: ours, Isomap, chordal
/// Isomap and LLE. Embeddings are aligned to the true normals by
/// Procrustes (oracle alignment); ours is also scored without alignment.
/// With `exact_distances` the Isomap variants use true arc lengths.
std::vector<baselines::ComparisonRow> compare_embedders(const PipelineConfig& c, bool exact_distances = false);

}  // namespace hemips::pipeline
