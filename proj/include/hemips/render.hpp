#pragma once

// Synthetic scenes and multi-illumination image stacks.

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "hemips/sh_core.hpp"

namespace hemips::render {

enum class AlbedoPattern { Uniform, Checker };
enum class RenderMode { ExactLambertian, ShKernel };

/// Orthographic view; pixel (row, col) has camera coordinates
/// x = right, y = up, z = towards the viewer. Storage is row-major, row 0 on top.
struct Scene {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;        // 1 = object pixel
  std::vector<Eigen::Vector3d> normals;  // zero vector on masked-out pixels
  std::vector<double> albedo;

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::size_t object_count() const;
};

struct ImageStack {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;
  std::vector<std::vector<double>> images;  // each width*height, non-negative
  std::vector<sh::Direction> lights;        // may be empty for captured data

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

/// Sphere inscribed in a resolution x resolution image. Throws InputError
/// for resolution < 16.
Scene make_sphere_scene(int resolution, AlbedoPattern pattern = AlbedoPattern::Uniform);

/// I.i.d. uniform directions on the full sphere; deterministic per seed.
std::vector<sh::Direction> sample_uniform_lights(int count, std::uint64_t seed);

struct RenderOptions {
  RenderMode mode = RenderMode::ExactLambertian;
  std::optional<sh::ReflectanceKernel> kernel;  // required for ShKernel
  double noise_sigma = 0.0;                     // additive Gaussian, clamped at 0
  std::uint64_t noise_seed = 0;
};

/// Exact mode: I = rho * max(l.n, 0). ShKernel mode: harmonic image formation
/// with Dirac lighting, negative truncation ripple clamped to 0.
ImageStack render_stack(const Scene& scene, const std::vector<sh::Direction>& lights,
                        const RenderOptions& options = {});

/// Image-grid rotation by 90 degrees counter-clockwise (used by equivariance
/// tests): pixel (r, c) moves to (W - 1 - c, r).
ImageStack rotate90(const ImageStack& stack);

}  // namespace hemips::render
