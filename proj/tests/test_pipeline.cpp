#include <cmath>

#include "doctest.h"
#include "hemips/baselines.hpp"
#include "hemips/error.hpp"
#include "hemips/pipeline.hpp"

using namespace hemips;
using namespace hemips::pipeline;

TEST_CASE("config survives a json round trip") {
  PipelineConfig c;
  c.k_cap = 41;
  c.row_sum_mode = laplacian::RowSumMode::InverseRadiusSquared;
  c.chart_method = laplacian::ChartMethod::LogMap;
  c.convexity = reconstruct::Convexity::Concave;
  c.kernel = "constant";
  c.render_mode = "sh";
  c.noise_sigma = 0.01;
  const PipelineConfig back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("config rejects unknown keys, bad types and out of range values") {
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"k_kap", 3}}), InputError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"k_cap", "many"}}), InputError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"row_sum_mode", "harmonic"}}), InputError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), InputError);
  for (const auto& bad : {nlohmann::json{{"k_fraction", 0.0}}, nlohmann::json{{"lights", 0}},
                          nlohmann::json{{"z_floor", 1.0}}, nlohmann::json{{"kernel", "phong"}},
                          nlohmann::json{{"noise_sigma", -0.1}}, nlohmann::json{{"resolution", 8}}})
    CHECK_THROWS_AS(config_from_json(bad).validate(), InputError);
  CHECK_NOTHROW(PipelineConfig{}.validate());
}

TEST_CASE("partial config keeps base values") {
  PipelineConfig base;
  base.seed = 99;
  const auto c = config_from_json(nlohmann::json{{"lights", 12}}, base);
  CHECK(c.seed == 99);
  CHECK(c.lights == 12);
}

TEST_CASE("eigen fit of a scaled pattern has zero residual") {
  Eigen::VectorXd v(5);
  v << 0.0, 2.0, 2.0, 6.0, 6.0;
  const auto f = fit_eigen_pattern(3.5 * v, kNeumannPattern);
  CHECK(f.scale == doctest::Approx(3.5));
  CHECK(f.max_residual < 1e-14);
}

TEST_CASE("eigen fit residual matches a hand computation") {
  Eigen::VectorXd v(4);
  v << 2.2, 6.0, 6.0, 12.0;
  const auto f = fit_eigen_pattern(v, kDirichletPattern);
  // scale = (1.1 + 1 + 1 + 1) / 4
  CHECK(f.scale == doctest::Approx(1.025));
  CHECK(f.residuals[0] == doctest::Approx(std::abs(2.2 - 2.05) / (1.025 * 2.0)));
  CHECK(f.residuals[3] == doctest::Approx(std::abs(12.0 - 12.3) / (1.025 * 12.0)));
  CHECK_THROWS_AS(fit_eigen_pattern(v, kNeumannPattern), InputError);
}

TEST_CASE("fibonacci samples lie on the upper unit hemisphere") {
  const auto p = fibonacci_hemisphere(500);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    CHECK(p.row(i).norm() == doctest::Approx(1.0));
    CHECK(p(i, 2) > 0.0);
  }
}

TEST_CASE("small sphere reconstructs end to end") {
  PipelineConfig c;
  c.resolution = 32;
  c.lights = 40;
  const auto scene = make_scene(c);
  const auto stack = render_scene(scene, c);
  RunOptions run;
  run.keep_geodesics = true;
  const auto r = reconstruct_stack(stack, c, run);

  const double err = baselines::mean_angle_error(r.normals, truth_field(scene));
  MESSAGE("mean angle error " << err << " deg, depth rmse " << sphere_depth_rmse(r.depth, scene));
  CHECK(err < 15.0);
  CHECK(sphere_depth_rmse(r.depth, scene) < 0.2);
  CHECK(r.depth.convex);
  CHECK(!r.boundary_pixels.empty());
  CHECK(r.geodesic_table.has_value());
  CHECK(r.dirichlet.values.size() == 4);
  CHECK(r.neumann.values.size() == 5);

  const auto j = report_json(r, c);
  for (const char* key : {"config", "tolerances", "graph", "boundary", "weights", "eigenvalues", "rotation", "depth",
                          "timings_seconds"})
    CHECK(j.contains(key));
  CHECK(j["timings_seconds"]["total"].get<double>() == doctest::Approx(r.total_seconds()));
}

TEST_CASE("too few images is an input error") {
  PipelineConfig c;
  c.resolution = 16;
  c.lights = 2;
  const auto scene = make_scene(c);
  CHECK_THROWS_AS(reconstruct_stack(render_scene(scene, c), c), InputError);
}

TEST_CASE("neighbour distance ratio is near one for lambertian spheres") {
  PipelineConfig c;
  c.resolution = 32;
  c.lights = 90;
  const auto scene = make_scene(c);
  const auto d = neighbour_distance_ratio(render_scene(scene, c), scene);
  CHECK(d.pairs > 100);
  CHECK(d.median > 0.5);
  CHECK(d.median < 1.5);
}

TEST_CASE("exact sphere depth scores zero rmse") {
  PipelineConfig c;
  c.resolution = 24;
  const auto scene = make_scene(c);
  reconstruct::DepthMap d;
  d.width = scene.width;
  d.height = scene.height;
  d.depth.assign(scene.pixel_count(), 0.0);
  for (std::size_t i = 0; i < scene.pixel_count(); ++i)
    if (scene.mask[i]) d.depth[i] = 5.0 + scene.normals[i].z() * scene.width / 2.0;
  CHECK(sphere_depth_rmse(d, scene) < 1e-12);
}

TEST_CASE("distance ratio band on a sphere") {
  PipelineConfig c;
  c.resolution = 32;
  c.lights = 2000;
  const auto scene = make_scene(c);
  // harmonic Lambertian: the small-angle constant sqrt(109/127). The band
  // width is light-sampling noise; 2000 lights leave ~18% of pairs outside.
  const auto few = kernel_distance_ratio(scene, render::sample_uniform_lights(2000, c.seed),
                                         sh::ReflectanceKernel::lambertian());
  MESSAGE("2000 lights: median " << few.median << ", fraction in 0.93 +- 0.03: " << few.fraction_within(0.90, 0.96));
  CHECK(few.median == doctest::Approx(std::sqrt(109.0 / 127.0)).epsilon(0.01));
  const auto many = kernel_distance_ratio(scene, render::sample_uniform_lights(10000, c.seed),
                                          sh::ReflectanceKernel::lambertian());
  CHECK(many.fraction_within(0.90, 0.96) >= 0.9);
  CHECK(many.median == doctest::Approx(std::sqrt(109.0 / 127.0)).epsilon(0.01));
  // exact clamped rendering sits near 0.98 instead
  const auto e = neighbour_distance_ratio(render_scene(scene, c), scene);
  MESSAGE("exact rendering: median " << e.median << ", fraction in 0.93 +- 0.03: " << e.fraction_within(0.90, 0.96));
  CHECK(e.median > 0.96);
  CHECK(e.median < 1.0);
}

TEST_CASE("pure order-1 kernel gives ratio one") {
  PipelineConfig c;
  c.resolution = 32;
  const auto scene = make_scene(c);
  const auto d = kernel_distance_ratio(scene, render::sample_uniform_lights(2000, 3),
                                       sh::ReflectanceKernel::preset("cosine-unclamped"));
  CHECK(d.median == doctest::Approx(1.0).epsilon(0.02));
}
