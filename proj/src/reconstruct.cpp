#include "hemips/reconstruct.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/QR>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "hemips/error.hpp"

namespace hemips::reconstruct {

namespace {

constexpr double kPi = std::numbers::pi;

// Raises nz to the floor while keeping the vector unit.
Eigen::Vector3d lift(Eigen::Vector3d n, double z_floor) {
  n.normalize();
  if (n.z() < z_floor) {
    const double xy = std::hypot(n.x(), n.y());
    const double s = xy > 0.0 ? std::sqrt(1.0 - z_floor * z_floor) / xy : 0.0;
    n = Eigen::Vector3d(n.x() * s, n.y() * s, z_floor);
    if (xy == 0.0) n = Eigen::Vector3d::UnitZ();
  }
  return n;
}

bool inside(const NormalField& f, int r, int c) {
  return r >= 0 && c >= 0 && r < f.height && c < f.width && f.mask[static_cast<std::size_t>(r) * f.width + c];
}

struct Curl {
  double aa = 0.0, ab = 0.0, bb = 0.0;  // residual(phi) = c^2 aa - 2 c s ab + s^2 bb
};

// A = p_y - q_x, B = q_y + p_x of the (optionally reflected) field.
Curl curl_form(const NormalField& f, bool reflected) {
  const std::size_t n = f.pixel_count();
  std::vector<double> p(n, 0.0), q(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!f.mask[i]) continue;
    const auto& v = f.normals[i];
    p[i] = -v.x() / v.z();
    q[i] = -(reflected ? -v.y() : v.y()) / v.z();
  }
  Curl k;
  for (int r = 1; r + 1 < f.height; ++r)
    for (int c = 1; c + 1 < f.width; ++c) {
      if (!inside(f, r, c) || !inside(f, r - 1, c) || !inside(f, r + 1, c) || !inside(f, r, c - 1) ||
          !inside(f, r, c + 1))
        continue;
      const std::size_t i = static_cast<std::size_t>(r) * f.width + c;
      const std::size_t up = i - f.width, down = i + f.width;
      const double py = 0.5 * (p[up] - p[down]);
      const double qy = 0.5 * (q[up] - q[down]);
      const double px = 0.5 * (p[i + 1] - p[i - 1]);
      const double qx = 0.5 * (q[i + 1] - q[i - 1]);
      const double a = py - qx, b = qy + px;
      k.aa += a * a;
      k.ab += a * b;
      k.bb += b * b;
    }
  return k;
}

double eval(const Curl& k, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return c * c * k.aa - 2 * c * s * k.ab + s * s * k.bb;
}

}  // namespace

NormalField assemble_normals(int width, int height, const std::vector<std::uint8_t>& mask,
                             const std::vector<int>& pixels, const Eigen::VectorXd& z_in, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& y, double z_floor) {
  const Eigen::Index m = static_cast<Eigen::Index>(pixels.size());
  if (z_in.size() != m || x.size() != m || y.size() != m)
    throw InputError("reconstruct", "eigenvectors and pixel list differ in length");
  if (mask.size() != static_cast<std::size_t>(width) * height)
    throw InputError("reconstruct", "mask does not match the image size");
  if (m == 0) throw InputError("reconstruct", "no samples");
  if (!(z_floor >= 0.0 && z_floor < 1.0)) throw InputError("reconstruct", "z floor must lie in [0, 1)");

  Eigen::VectorXd z = z_in.sum() < 0.0 ? Eigen::VectorXd(-z_in) : z_in;
  const double zmax = z.cwiseAbs().maxCoeff();
  if (!(zmax > 0.0) || z.maxCoeff() - z.minCoeff() <= 1e-12 * zmax)
    throw NumericalError("reconstruct", "Dirichlet vector is constant; no equator structure");

  // alpha (x^2 + y^2) + beta z^2 ~ 1 in least squares
  Eigen::MatrixXd a(m, 2);
  a.col(0) = x.array().square() + y.array().square();
  a.col(1) = z.array().square();
  Eigen::Vector2d ab = a.colPivHouseholderQr().solve(Eigen::VectorXd::Ones(m));
  if (!(ab[0] > 0.0) || !(ab[1] > 0.0) || !ab.allFinite())
    ab = Eigen::Vector2d(0.5 / a.col(0).mean(), 0.5 / a.col(1).mean());
  const double sxy = std::sqrt(ab[0]), sz = std::sqrt(ab[1]);
  z *= sz;
  const double shift = z_floor - z.minCoeff();

  NormalField f;
  f.width = width;
  f.height = height;
  f.mask = mask;
  f.normals.assign(f.pixel_count(), Eigen::Vector3d::Zero());
  f.interpolated.assign(f.pixel_count(), 0);
  std::vector<std::uint8_t> valid(f.pixel_count(), 0);
  for (Eigen::Index i = 0; i < m; ++i) {
    const int pix = pixels[static_cast<std::size_t>(i)];
    if (pix < 0 || static_cast<std::size_t>(pix) >= f.pixel_count() || !mask[pix])
      throw InputError("reconstruct", "sample pixel outside the mask");
    f.normals[pix] = lift(Eigen::Vector3d(sxy * x[i], sxy * y[i], z[i] + shift), z_floor);
    valid[pix] = 1;
  }
  fill_missing(f, valid, z_floor);
  return f;
}

void fill_missing(NormalField& f, std::vector<std::uint8_t>& valid, double z_floor) {
  const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
  bool pending = true;
  while (pending) {
    pending = false;
    std::vector<std::pair<std::size_t, Eigen::Vector3d>> updates;
    for (int r = 0; r < f.height; ++r)
      for (int c = 0; c < f.width; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * f.width + c;
        if (!f.mask[i] || valid[i]) continue;
        Eigen::Vector3d acc = Eigen::Vector3d::Zero();
        int cnt = 0;
        for (int k = 0; k < 4; ++k) {
          const int rr = r + dr[k], cc = c + dc[k];
          if (!inside(f, rr, cc)) continue;
          const std::size_t j = static_cast<std::size_t>(rr) * f.width + cc;
          if (valid[j]) {
            acc += f.normals[j];
            ++cnt;
          }
        }
        if (cnt > 0) updates.emplace_back(i, acc.norm() > 0.0 ? acc : Eigen::Vector3d::UnitZ());
        else pending = true;
      }
    if (updates.empty()) {
      // isolated masked islands without any sample
      for (std::size_t i = 0; i < f.pixel_count(); ++i)
        if (f.mask[i] && !valid[i]) updates.emplace_back(i, Eigen::Vector3d::UnitZ());
      pending = false;
    }
    for (const auto& [i, v] : updates) {
      f.normals[i] = lift(v, z_floor);
      f.interpolated[i] = 1;
      valid[i] = 1;
    }
  }
}

double integrability_residual(const NormalField& field) {
  return curl_form(field, false).aa;
}

NormalField apply_rotation(const NormalField& field, double phi, bool reflected) {
  NormalField out = field;
  const double c = std::cos(phi), s = std::sin(phi);
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    if (!out.mask[i]) continue;
    const double nx = field.normals[i].x();
    const double ny = reflected ? -field.normals[i].y() : field.normals[i].y();
    out.normals[i].x() = c * nx - s * ny;
    out.normals[i].y() = s * nx + c * ny;
  }
  return out;
}

Rotation resolve_rotation(NormalField& field) {
  const Curl forms[2] = {curl_form(field, false), curl_form(field, true)};
  Rotation best;
  best.residual_before = forms[0].aa;
  double best_val = std::numeric_limits<double>::infinity();
  constexpr double deg = kPi / 180.0;
  for (int refl = 0; refl < 2; ++refl)
    for (int k = 0; k < 360; ++k) {
      const double v = eval(forms[refl], k * deg);
      if (v < best_val * (1.0 - 1e-12)) {
        best_val = v;
        best.phi = k * deg;
        best.reflected = refl == 1;
      }
    }
  const Curl& f = forms[best.reflected ? 1 : 0];
  double lo = best.phi - deg, hi = best.phi + deg;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = eval(f, x1), f2 = eval(f, x2);
  while (hi - lo > 0.01 * deg) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = eval(f, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = eval(f, x2);
    }
  }
  const double refined = 0.5 * (lo + hi);
  if (eval(f, refined) < best_val) best.phi = refined;
  best.phi = std::fmod(best.phi + 2 * kPi, 2 * kPi);
  best.residual_after = eval(f, best.phi);
  field = apply_rotation(field, best.phi, best.reflected);
  return best;
}

DepthMap integrate_depth(NormalField& field, Convexity convexity, double tolerance) {
  const int w = field.width, h = field.height;
  std::vector<int> var(field.pixel_count(), -1);
  int n = 0;
  for (std::size_t i = 0; i < field.pixel_count(); ++i)
    if (field.mask[i]) var[i] = n++;
  if (n == 0) throw InputError("reconstruct", "empty mask");

  std::vector<double> p(field.pixel_count(), 0.0), q(field.pixel_count(), 0.0);
  for (std::size_t i = 0; i < field.pixel_count(); ++i) {
    if (!field.mask[i]) continue;
    const auto& v = field.normals[i];
    if (!(v.z() > 0.0)) throw InputError("reconstruct", "normals must face the camera");
    p[i] = -v.x() / v.z();
    q[i] = -v.y() / v.z();
  }

  // Each edge: z_j - z_i = g. Rows grow downwards, so a step down is -dy.
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> trip;
  std::vector<double> rhs;
  const auto edge = [&](std::size_t i, std::size_t j, double g) {
    const int e = static_cast<int>(rhs.size());
    trip.emplace_back(e, var[j], 1.0);
    trip.emplace_back(e, var[i], -1.0);
    rhs.push_back(g);
  };
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      if (!field.mask[i]) continue;
      if (c + 1 < w && field.mask[i + 1]) edge(i, i + 1, 0.5 * (p[i] + p[i + 1]));
      if (r + 1 < h && field.mask[i + w]) edge(i, i + w, -0.5 * (q[i] + q[i + w]));
    }
  Eigen::SparseMatrix<double> g(static_cast<Eigen::Index>(rhs.size()), n);
  g.setFromTriplets(trip.begin(), trip.end());
  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));

  Eigen::SparseMatrix<double> nrm = g.transpose() * g;
  for (int i = 0; i < n; ++i) nrm.coeffRef(i, i) += 1e-9;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tolerance);
  cg.setMaxIterations(std::max(1000, 20 * n));
  cg.compute(nrm);
  const Eigen::VectorXd rhs_n = g.transpose() * b;
  Eigen::VectorXd z = cg.solve(rhs_n);
  if (cg.info() != Eigen::Success)
    throw NumericalError("reconstruct", "depth CG did not converge, relative residual " + std::to_string(cg.error()));
  z.array() -= z.mean();

  DepthMap d;
  d.width = w;
  d.height = h;
  d.mask = field.mask;
  d.cg_iterations = static_cast<int>(cg.iterations());
  d.cg_error = cg.error();
  d.gradient_residual = rhs.empty() ? 0.0 : std::sqrt((g * z - b).squaredNorm() / static_cast<double>(rhs.size()));

  // centre region: within a quarter of the largest centroid distance;
  // boundary ring: masked pixels with an unmasked 4-neighbour
  double cr = 0.0, cc = 0.0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (field.mask[static_cast<std::size_t>(r) * w + c]) {
        cr += r;
        cc += c;
      }
  cr /= n;
  cc /= n;
  double rmax = 0.0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (field.mask[static_cast<std::size_t>(r) * w + c]) rmax = std::max(rmax, std::hypot(r - cr, c - cc));
  double centre = 0.0, ring = 0.0;
  int nc = 0, nr = 0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      if (!field.mask[i]) continue;
      if (std::hypot(r - cr, c - cc) <= 0.25 * rmax) {
        centre += z[var[i]];
        ++nc;
      }
      if (!inside(field, r - 1, c) || !inside(field, r + 1, c) || !inside(field, r, c - 1) || !inside(field, r, c + 1)) {
        ring += z[var[i]];
        ++nr;
      }
    }
  const bool is_convex = nc == 0 || nr == 0 || centre / nc >= ring / nr;
  const bool want_convex = convexity != Convexity::Concave;
  d.flipped = is_convex != want_convex;
  d.convex = want_convex;
  if (d.flipped) {
    z = -z;
    for (std::size_t i = 0; i < field.pixel_count(); ++i)
      if (field.mask[i]) {
        field.normals[i].x() = -field.normals[i].x();
        field.normals[i].y() = -field.normals[i].y();
      }
  }
  d.depth.assign(field.pixel_count(), 0.0);
  for (std::size_t i = 0; i < field.pixel_count(); ++i)
    if (var[i] >= 0) d.depth[i] = z[var[i]];
  return d;
}

}  // namespace hemips::reconstruct
