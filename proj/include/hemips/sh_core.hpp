#pragma once

// Real spherical harmonics, isotropic reflectance kernels and the
// harmonic image-formation model.

#include <Eigen/Core>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace hemips::sh {

inline constexpr int kMaxOrder = 8;

/// Point on the unit sphere.
class Direction {
 public:
  Direction() = default;

  /// Throws InputError unless |(x,y,z)| = 1 within 1e-12.
  Direction(double x, double y, double z);

  /// Normalizes; throws InputError on a zero or non-finite vector.
  static Direction normalized(double x, double y, double z);
  static Direction normalized(const Eigen::Vector3d& v) { return normalized(v.x(), v.y(), v.z()); }
  static Direction from_spherical(double theta, double phi);

  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  Eigen::Vector3d vec() const { return {x_, y_, z_}; }

 private:
  double x_ = 0.0, y_ = 0.0, z_ = 1.0;
};

enum class Parity { Even, Odd };

/// (n, m, parity) with 0 <= m <= n; odd parity needs m >= 1.
struct HarmonicIndex {
  int n = 0;
  int m = 0;
  Parity parity = Parity::Even;

  bool valid() const;
  /// 0-based position in the ordering Y00, Y10, Y11e, Y11o, Y20, Y21e, ...
  int flat() const;
  static HarmonicIndex from_flat(int s);
  static int count(int max_order) { return (max_order + 1) * (max_order + 1); }
};

/// Coefficients c_r of Q with P_nm(z) = (1 - z^2)^(m/2) * sum_r c_r z^r,
/// using Rodrigues' formula without the Condon-Shortley phase.
std::vector<double> associated_legendre_poly(int n, int m);
double associated_legendre(int n, int m, double z);

/// Orthonormal real harmonic; m >= 1 terms carry the sqrt(2) factor.
/// Throws IndexError for an invalid index.
double eval_real_sh(const HarmonicIndex& idx, const Direction& d);
/// All harmonics up to `max_order` in flat order.
Eigen::VectorXd eval_all(int max_order, const Direction& d);

/// Isotropic kernel k(theta) as zonal coefficients k_(n) plus the per-order
/// convolution constants alpha_(n) = sqrt(4 pi / (2n + 1)) * k_(n).
struct ReflectanceKernel {
  std::string name;
  int max_order = 0;
  std::vector<double> zonal;       // k_(n)
  std::vector<double> funk_hecke;  // alpha_(n)
  bool single_lobe = true;

  /// Closed-form Lambertian coefficients up to order 2.
  static ReflectanceKernel lambertian();
  /// "lambertian", "constant" or "cosine-unclamped".
  static ReflectanceKernel preset(std::string_view name);
  static std::vector<std::string> preset_names();
};

/// Projects k(theta) onto Y_n0 by composite Gauss-Legendre quadrature in
/// cos(theta). Also sets `single_lobe` by checking that k is non-increasing.
ReflectanceKernel kernel_from_samples(const std::function<double(double)>& k, int max_order,
                                      std::string name = "sampled");

struct LightingCoeffs {
  int max_order = 0;
  Eigen::VectorXd coeffs;  // flat order, length (max_order + 1)^2

  /// Unit directional source: l_s = Y_s(l).
  static LightingCoeffs directional(const Direction& l, int max_order);
  static LightingCoeffs zero(int max_order);
};

/// rho * sum_s alpha_(n(s)) * l_s * Y_s(n), truncated to the smaller order.
double intensity(const Direction& n, double albedo, const ReflectanceKernel& kernel,
                 const LightingCoeffs& light);

struct DistanceConstant {
  double a = 0.0;  // v_p . v_p
  double b = 0.0;  // -2 d/d(theta^2) of v_p . v_q at theta = 0
  double c = 0.0;  // sqrt(b / a)
};

/// Small-angle ratio ||v^_p - v^_q|| / theta under uniform lighting, from
/// the exact cos(theta) polynomial expansion of each harmonic term.
/// Throws NumericalError when a <= 0 or b < 0.
DistanceConstant predicted_distance_constant(const ReflectanceKernel& kernel);

}  // namespace hemips::sh
