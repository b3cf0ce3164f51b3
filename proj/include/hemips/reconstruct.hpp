#pragma once

// Normals from eigenvectors, in-plane rotation by integrability, and depth
// by least-squares integration on the mask.

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace hemips::reconstruct {

inline constexpr double kZFloor = 0.15;

/// Camera frame: x to the right, y up, z towards the viewer. Image row r
/// grows downwards.
struct NormalField {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;
  std::vector<Eigen::Vector3d> normals;    // zero outside the mask
  std::vector<std::uint8_t> interpolated;  // filled from image neighbours

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

/// z, x, y are eigenvector samples at image indices `pixels`. The z sign is
/// fixed to a positive mean, the xy and z scales are fitted so the vectors
/// are unit on average, z is shifted so its minimum equals z_floor, vectors
/// are normalized and masked pixels without a sample are filled.
/// Throws InputError on size mismatch, NumericalError when z is constant.
NormalField assemble_normals(int width, int height, const std::vector<std::uint8_t>& mask,
                             const std::vector<int>& pixels, const Eigen::VectorXd& z, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& y, double z_floor = kZFloor);

/// Averages valid 4-neighbours into unset masked pixels until all are set.
void fill_missing(NormalField& field, std::vector<std::uint8_t>& valid, double z_floor = kZFloor);

/// Sum over interior mask pixels of (dp/dy - dq/dx)^2 with p = -nx/nz,
/// q = -ny/nz and central differences.
double integrability_residual(const NormalField& field);

struct Rotation {
  double phi = 0.0;  // radians in [0, 2 pi)
  bool reflected = false;
  double residual_before = 0.0;
  double residual_after = 0.0;
};

/// (nx, ny) -> R(phi) * (nx, reflected ? -ny : ny).
NormalField apply_rotation(const NormalField& field, double phi, bool reflected);

/// 1 degree grid over phi and the reflection flag, then golden-section
/// refinement to 0.01 degree. phi and phi + pi tie; the smaller wins.
Rotation resolve_rotation(NormalField& field);

enum class Convexity { Convex, Concave, Auto };

struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;
  std::vector<double> depth;  // pixel units, zero mean over the mask
  bool convex = true;
  bool flipped = false;  // xy of the field were negated
  int cg_iterations = 0;
  double cg_error = 0.0;
  double gradient_residual = 0.0;  // RMS of grad z - (p, q) over edges
};

/// Least squares min sum (grad z - (p, q))^2 over mask edges, solved by
/// conjugate gradients. Auto behaves as Convex: the centre region ends up
/// nearer the camera than the boundary ring. Flipping negates nx, ny of
/// `field` in place. Throws NumericalError if CG does not converge.
DepthMap integrate_depth(NormalField& field, Convexity convexity = Convexity::Auto, double tolerance = 1e-10);

}  // namespace hemips::reconstruct
