#include "hemips/sh_core.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "hemips/error.hpp"

namespace hemips::sh {
namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double sh_norm(int n, int m) {
  return std::sqrt((2.0 * n + 1.0) / (4.0 * kPi) * factorial(n - m) / factorial(n + m));
}

double eval_poly(const std::vector<double>& c, double z) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

}  // namespace

Direction::Direction(double x, double y, double z) : x_(x), y_(y), z_(z) {
  const double n2 = x * x + y * y + z * z;
  if (!std::isfinite(n2) || std::abs(n2 - 1.0) > 2e-12)
    throw InputError("sh_core", "direction is not unit length");
}

Direction Direction::normalized(double x, double y, double z) {
  const double n = std::sqrt(x * x + y * y + z * z);
  if (!std::isfinite(n) || n == 0.0) throw InputError("sh_core", "cannot normalize zero vector");
  Direction d;
  d.x_ = x / n;
  d.y_ = y / n;
  d.z_ = z / n;
  return d;
}

Direction Direction::from_spherical(double theta, double phi) {
  return normalized(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                    std::cos(theta));
}

bool HarmonicIndex::valid() const {
  if (n < 0 || m < 0 || m > n) return false;
  return !(parity == Parity::Odd && m == 0);
}

int HarmonicIndex::flat() const {
  if (!valid()) throw IndexError("sh_core", "invalid harmonic index");
  if (m == 0) return n * n;
  return n * n + 2 * m - 1 + (parity == Parity::Odd ? 1 : 0);
}

HarmonicIndex HarmonicIndex::from_flat(int s) {
  if (s < 0) throw IndexError("sh_core", "negative flat index");
  const int n = static_cast<int>(std::sqrt(static_cast<double>(s)));
  const int r = s - n * n;
  if (r == 0) return {n, 0, Parity::Even};
  return {n, (r + 1) / 2, (r % 2 == 1) ? Parity::Even : Parity::Odd};
}

std::vector<double> associated_legendre_poly(int n, int m) {
  if (n < 0 || m < 0 || m > n) throw IndexError("sh_core", "invalid Legendre index");
  // (z^2 - 1)^n = sum_j C(n,j) (-1)^(n-j) z^(2j)
  std::vector<double> p(2 * n + 1, 0.0);
  double binom = 1.0;
  for (int j = 0; j <= n; ++j) {
    p[2 * j] = ((n - j) % 2 == 0 ? 1.0 : -1.0) * binom;
    binom = binom * (n - j) / (j + 1);
  }
  for (int d = 0; d < n + m; ++d) {
    std::vector<double> q(p.size() > 1 ? p.size() - 1 : 1, 0.0);
    for (std::size_t r = 1; r < p.size(); ++r) q[r - 1] = p[r] * static_cast<double>(r);
    p = std::move(q);
  }
  const double scale = 1.0 / (std::pow(2.0, n) * factorial(n));
  for (double& c : p) c *= scale;
  return p;
}

double associated_legendre(int n, int m, double z) {
  const double base = eval_poly(associated_legendre_poly(n, m), z);
  if (m == 0) return base;
  return std::pow(std::max(0.0, 1.0 - z * z), 0.5 * m) * base;
}

double eval_real_sh(const HarmonicIndex& idx, const Direction& d) {
  if (!idx.valid()) throw IndexError("sh_core", "invalid harmonic index");
  const double z = std::clamp(d.z(), -1.0, 1.0);
  const double legendre = associated_legendre(idx.n, idx.m, z);
  const double norm = sh_norm(idx.n, idx.m);
  if (idx.m == 0) return norm * legendre;
  const double phi = std::atan2(d.y(), d.x());
  const double trig =
      idx.parity == Parity::Even ? std::cos(idx.m * phi) : std::sin(idx.m * phi);
  return std::numbers::sqrt2 * norm * legendre * trig;
}

Eigen::VectorXd eval_all(int max_order, const Direction& d) {
  if (max_order < 0 || max_order > kMaxOrder) throw IndexError("sh_core", "order out of range");
  Eigen::VectorXd out(HarmonicIndex::count(max_order));
  for (int s = 0; s < out.size(); ++s) out[s] = eval_real_sh(HarmonicIndex::from_flat(s), d);
  return out;
}

ReflectanceKernel ReflectanceKernel::lambertian() {
  ReflectanceKernel k;
  k.name = "lambertian";
  k.max_order = 2;
  k.zonal = {std::sqrt(kPi) / 2.0, std::sqrt(kPi / 3.0), std::sqrt(5.0 * kPi) / 8.0};
  k.funk_hecke = {kPi, 2.0 * kPi / 3.0, kPi / 4.0};
  return k;
}

ReflectanceKernel ReflectanceKernel::preset(std::string_view name) {
  if (name == "lambertian") return lambertian();
  if (name == "constant") return kernel_from_samples([](double) { return 1.0; }, 2, "constant");
  if (name == "cosine-unclamped")
    return kernel_from_samples([](double t) { return std::cos(t); }, 2, "cosine-unclamped");
  throw InputError("sh_core", "unknown kernel preset '" + std::string(name) + "'");
}

std::vector<std::string> ReflectanceKernel::preset_names() {
  return {"lambertian", "constant", "cosine-unclamped"};
}

ReflectanceKernel kernel_from_samples(const std::function<double(double)>& k, int max_order,
                                      std::string name) {
  if (max_order < 0 || max_order > kMaxOrder)
    throw InputError("sh_core", "kernel order out of range");

  // 32 panels of 16-point Gauss-Legendre in z = cos(theta); panel edges fall
  // on z = 0 so kernels clamped at the horizon integrate exactly.
  constexpr int kPanels = 32;
  using Rule = boost::math::quadrature::gauss<double, 16>;
  ReflectanceKernel out;
  out.name = std::move(name);
  out.max_order = max_order;
  out.zonal.assign(max_order + 1, 0.0);
  out.funk_hecke.assign(max_order + 1, 0.0);
  bool finite = true;
  for (int n = 0; n <= max_order; ++n) {
    const double yn = sh_norm(n, 0);
    double sum = 0.0;
    for (int p = 0; p < kPanels; ++p) {
      const double lo = -1.0 + 2.0 * p / kPanels;
      const double hi = -1.0 + 2.0 * (p + 1) / kPanels;
      sum += Rule::integrate(
          [&](double z) {
            const double v = k(std::acos(std::clamp(z, -1.0, 1.0)));
            if (!std::isfinite(v)) finite = false;
            return v * yn * associated_legendre(n, 0, z);
          },
          lo, hi);
    }
    if (!finite) throw InputError("sh_core", "kernel samples are not finite");
    out.zonal[n] = 2.0 * kPi * sum;
    out.funk_hecke[n] = std::sqrt(4.0 * kPi / (2.0 * n + 1.0)) * out.zonal[n];
  }

  constexpr int kChecks = 1000;
  double prev = k(0.0);
  for (int i = 1; i <= kChecks; ++i) {
    const double v = k(kPi * i / kChecks);
    if (v > prev + 1e-12 * std::max(1.0, std::abs(prev))) out.single_lobe = false;
    prev = v;
  }
  return out;
}

LightingCoeffs LightingCoeffs::directional(const Direction& l, int max_order) {
  return {max_order, eval_all(max_order, l)};
}

LightingCoeffs LightingCoeffs::zero(int max_order) {
  return {max_order, Eigen::VectorXd::Zero(HarmonicIndex::count(max_order))};
}

double intensity(const Direction& n, double albedo, const ReflectanceKernel& kernel,
                 const LightingCoeffs& light) {
  const int order = std::min(kernel.max_order, light.max_order);
  double acc = 0.0;
  for (int s = 0; s < HarmonicIndex::count(order); ++s) {
    const HarmonicIndex idx = HarmonicIndex::from_flat(s);
    const double ls = light.coeffs[s];
    if (ls == 0.0) continue;
    acc += kernel.funk_hecke[idx.n] * ls * eval_real_sh(idx, n);
  }
  return albedo * acc;
}

DistanceConstant predicted_distance_constant(const ReflectanceKernel& kernel) {
  // n_p = (0,0,1), n_q = (sin t, 0, cos t). Only zonal terms survive at the
  // pole, and Y_n0(n_q) is a polynomial in z = cos t, so
  // N_s(z) = alpha_n^2 Y_n0(pole) * norm * P_n(z) = sum_r a_r z^r.
  // With z ~ 1 - t^2/2: a_s = sum_r a_r, b_s = sum_r r a_r.
  DistanceConstant dc;
  for (int n = 0; n <= kernel.max_order; ++n) {
    const double alpha = kernel.funk_hecke[n];
    if (alpha == 0.0) continue;
    const double norm = sh_norm(n, 0);
    const double y_pole = norm * associated_legendre(n, 0, 1.0);
    const std::vector<double> poly = associated_legendre_poly(n, 0);
    for (std::size_t r = 0; r < poly.size(); ++r) {
      const double coef = alpha * alpha * y_pole * norm * poly[r];
      dc.a += coef;
      dc.b += static_cast<double>(r) * coef;
    }
  }
  if (!(dc.a > 0.0) || dc.b < -1e-14 * dc.a)
    throw NumericalError("sh_core", "kernel is not single lobe (a <= 0 or b < 0)");
  dc.b = std::max(dc.b, 0.0);
  dc.c = std::sqrt(dc.b / dc.a);
  return dc;
}

}  // namespace hemips::sh
