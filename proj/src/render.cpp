#include "hemips/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hemips/error.hpp"

namespace hemips::render {

std::size_t Scene::object_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

Scene make_sphere_scene(int resolution, AlbedoPattern pattern) {
  if (resolution < 16) throw InputError("render", "sphere resolution must be >= 16");
  Scene s;
  s.width = s.height = resolution;
  s.mask.assign(s.pixel_count(), 0);
  s.normals.assign(s.pixel_count(), Eigen::Vector3d::Zero());
  s.albedo.assign(s.pixel_count(), 0.0);
  const double half = resolution / 2.0;
  const int cell = std::max(1, resolution / 8);
  for (int r = 0; r < resolution; ++r) {
    for (int c = 0; c < resolution; ++c) {
      const double x = (c + 0.5 - half) / half;
      const double y = (half - (r + 0.5)) / half;
      const double rho2 = x * x + y * y;
      if (rho2 >= 1.0) continue;
      const std::size_t i = static_cast<std::size_t>(r) * resolution + c;
      s.mask[i] = 1;
      s.normals[i] = Eigen::Vector3d(x, y, std::sqrt(1.0 - rho2)).normalized();
      const bool dark = ((r / cell) + (c / cell)) % 2 == 1;
      s.albedo[i] = (pattern == AlbedoPattern::Checker && dark) ? 0.35 : 1.0;
    }
  }
  return s;
}

std::vector<sh::Direction> sample_uniform_lights(int count, std::uint64_t seed) {
  if (count < 1) throw InputError("render", "need at least one light");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<sh::Direction> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double z = 2.0 * unit(rng) - 1.0;
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
    out.push_back(sh::Direction::normalized(rxy * std::cos(phi), rxy * std::sin(phi), z));
  }
  return out;
}

ImageStack render_stack(const Scene& scene, const std::vector<sh::Direction>& lights,
                        const RenderOptions& options) {
  if (lights.empty()) throw InputError("render", "empty light list");
  if (options.mode == RenderMode::ShKernel && !options.kernel)
    throw InputError("render", "sh-kernel rendering needs a reflectance kernel");

  ImageStack st;
  st.width = scene.width;
  st.height = scene.height;
  st.mask = scene.mask;
  st.lights = lights;
  st.images.assign(lights.size(), std::vector<double>(scene.pixel_count(), 0.0));

  std::mt19937_64 rng(options.noise_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (std::size_t k = 0; k < lights.size(); ++k) {
    const Eigen::Vector3d l = lights[k].vec();
    std::optional<sh::LightingCoeffs> coeffs;
    if (options.mode == RenderMode::ShKernel)
      coeffs = sh::LightingCoeffs::directional(lights[k], options.kernel->max_order);
    auto& img = st.images[k];
    for (std::size_t i = 0; i < scene.pixel_count(); ++i) {
      if (!scene.mask[i]) continue;
      double v = 0.0;
      if (options.mode == RenderMode::ExactLambertian) {
        v = scene.albedo[i] * std::max(0.0, l.dot(scene.normals[i]));
      } else {
        v = std::max(0.0, sh::intensity(sh::Direction::normalized(scene.normals[i]),
                                         scene.albedo[i], *options.kernel, *coeffs));
      }
      if (options.noise_sigma > 0.0) v = std::max(0.0, v + options.noise_sigma * gauss(rng));
      img[i] = v;
    }
  }
  return st;
}

ImageStack rotate90(const ImageStack& stack) {
  ImageStack out;
  out.width = stack.height;
  out.height = stack.width;
  out.lights = stack.lights;
  const auto remap = [&](const auto& src, auto& dst) {
    for (int r = 0; r < stack.height; ++r)
      for (int c = 0; c < stack.width; ++c) {
        const int nr = stack.width - 1 - c;
        const int nc = r;
        dst[static_cast<std::size_t>(nr) * out.width + nc] =
            src[static_cast<std::size_t>(r) * stack.width + c];
      }
  };
  out.mask.assign(stack.mask.size(), 0);
  remap(stack.mask, out.mask);
  for (const auto& img : stack.images) {
    std::vector<double> rotated(img.size(), 0.0);
    remap(img, rotated);
    out.images.push_back(std::move(rotated));
  }
  return out;
}

}  // namespace hemips::render
