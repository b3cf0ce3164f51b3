#include "hemips/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "hemips/error.hpp"

namespace hemips::spectral {
namespace {

struct RitzPair {
  double value;
  Eigen::VectorXd vector;
};

void orthogonalize(Eigen::VectorXd& w, const Eigen::MatrixXd& basis, Eigen::Index cols) {
  // classical Gram-Schmidt, applied twice
  for (int pass = 0; pass < 2; ++pass) {
    if (cols == 0) return;
    const auto b = basis.leftCols(cols);
    w -= b * (b.transpose() * w);
  }
}

Eigen::VectorXd random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v.normalized();
}

/// One Lanczos pass for the largest eigenvalue of `op` on the complement of
/// `locked`. Returns converged Ritz pairs sorted descending; the first entry
/// is always converged on success.
std::vector<RitzPair> lanczos_pass(const Operator& op, int n, const Eigen::MatrixXd& locked,
                                   Eigen::Index locked_cols, const EigenOptions& opts,
                                   std::mt19937_64& rng, int& matvecs) {
  const int free_dim = n - static_cast<int>(locked_cols);
  const int max_basis = std::max(1, std::min(opts.max_basis, free_dim));

  Eigen::VectorXd start = random_unit(n, rng);
  orthogonalize(start, locked, locked_cols);
  if (start.norm() < 1e-12) return {};
  start.normalize();

  for (;;) {
    Eigen::MatrixXd basis(n, max_basis);
    std::vector<double> alpha, beta;
    basis.col(0) = start;
    Eigen::Index used = 1;
    Eigen::VectorXd w(n);
    double scale = 0.0;
    bool exhausted = false;

    for (Eigen::Index j = 0;; ++j) {
      op(basis.col(j), w);
      ++matvecs;
      const double a = basis.col(j).dot(w);
      alpha.push_back(a);
      orthogonalize(w, locked, locked_cols);
      const auto v = basis.leftCols(used);
      w -= v * (v.transpose() * w);
      w -= v * (v.transpose() * w);
      double b = w.norm();
      scale = std::max({scale, std::abs(a), b});

      const bool breakdown = b <= 1e-13 * std::max(scale, 1e-300);
      if (breakdown) {
        // invariant subspace: continue with a fresh direction so repeated
        // eigenvalues are still reachable
        if (used >= max_basis || used >= free_dim) {
          exhausted = true;
        } else {
          Eigen::VectorXd fresh = random_unit(n, rng);
          orthogonalize(fresh, locked, locked_cols);
          fresh -= v * (v.transpose() * fresh);
          fresh -= v * (v.transpose() * fresh);
          if (fresh.norm() < 1e-10) {
            exhausted = true;
          } else {
            w = fresh.normalized();
            b = 0.0;
          }
        }
      }

      const bool full = used >= max_basis || used >= free_dim;
      const bool check = exhausted || full || (j % 5 == 4) || matvecs >= opts.max_iterations;
      if (check) {
        const Eigen::Index m = used;
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
          t(i, i) = alpha[i];
          if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const Eigen::VectorXd& theta = es.eigenvalues();
        const Eigen::MatrixXd& s = es.eigenvectors();
        const double tscale = std::max(theta.cwiseAbs().maxCoeff(), 1e-300);
        const bool exact = exhausted || (used >= free_dim);
        std::vector<RitzPair> out;
        // descending order; stop at the first unconverged value
        for (Eigen::Index i = m - 1; i >= 0; --i) {
          const double res = std::abs(b * s(m - 1, i));
          if (!exact && res > opts.tolerance * tscale) break;
          out.push_back({theta[i], basis.leftCols(m) * s.col(i)});
        }
        if (!out.empty()) {
          for (auto& rp : out) rp.vector.normalize();
          return out;
        }
        if (matvecs >= opts.max_iterations) return {};
        if (full) {
          // explicit restart from the leading Ritz vector
          start = (basis.leftCols(m) * s.col(m - 1)).normalized();
          break;
        }
      }
      beta.push_back(b);
      basis.col(used++) = w / (b > 0.0 ? b : 1.0);
    }
  }
}

void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v[idx] < 0.0) v = -v;
}

EigenResult run_locked(const Operator& op, int n, int count, const EigenOptions& opts) {
  if (count < 1 || count > n) throw InputError("spectral", "eigenpair count out of range");
  std::mt19937_64 rng(opts.seed);
  Eigen::MatrixXd locked(n, std::min(n, count + 8));
  std::vector<double> values;
  Eigen::Index cols = 0;
  int matvecs = 0;

  const auto lock = [&](const RitzPair& rp) {
    if (cols == locked.cols()) locked.conservativeResize(Eigen::NoChange, std::min<Eigen::Index>(n, cols + 8));
    Eigen::VectorXd v = rp.vector;
    orthogonalize(v, locked, cols);
    v.normalize();
    locked.col(cols++) = v;
    values.push_back(rp.value);
  };

  while (static_cast<int>(cols) < count) {
    auto pairs = lanczos_pass(op, n, locked, cols, opts, rng, matvecs);
    if (pairs.empty())
      throw NumericalError("spectral", "Lanczos did not converge after " + std::to_string(matvecs) +
                                           " operator applications");
    for (const auto& rp : pairs) {
      if (static_cast<int>(cols) >= count) break;
      lock(rp);
    }
  }
  // A single Krylov sequence can miss copies of a repeated eigenvalue; keep
  // probing the complement until nothing above the current cut remains.
  for (int guard = 0; guard < n && static_cast<int>(cols) < n; ++guard) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double cut = sorted[count - 1];
    const double scale = std::max(std::abs(sorted.front()), 1e-300);
    auto pairs = lanczos_pass(op, n, locked, cols, opts, rng, matvecs);
    if (pairs.empty()) break;
    if (pairs.front().value <= cut + 1e2 * opts.tolerance * scale) break;
    lock(pairs.front());
  }

  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] > values[b]; });
  EigenResult r;
  r.values.resize(count);
  r.vectors.resize(n, count);
  r.residuals.resize(count);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd v = locked.col(order[i]);
    fix_sign(v);
    r.vectors.col(i) = v;
    r.values[i] = values[order[i]];
  }
  return r;
}

}  // namespace

EigenResult largest_eigenpairs(const Operator& op, int n, int count, const EigenOptions& opts) {
  EigenResult r = run_locked(op, n, count, opts);
  Eigen::VectorXd av(n);
  for (int i = 0; i < count; ++i) {
    op(r.vectors.col(i), av);
    r.values[i] = r.vectors.col(i).dot(av);
    r.residuals[i] = (av - r.values[i] * r.vectors.col(i)).norm();
  }
  return r;
}

EigenResult smallest_eigenpairs(const SparseMatrix& m, int count, const EigenOptions& opts) {
  const int n = static_cast<int>(m.rows());
  if (m.rows() != m.cols()) throw InputError("spectral", "matrix is not square");
  if (count < 1 || count > n) throw InputError("spectral", "eigenpair count out of range");
  const SparseMatrix mt = m.transpose();
  const double asym = n == 0 ? 0.0 : SparseMatrix(m - mt).coeffs().cwiseAbs().maxCoeff();
  if (asym > 1e-8) throw InputError("spectral", "matrix is not symmetric");

  double norm_inf = 0.0;
  double gersh_lo = std::numeric_limits<double>::infinity();
  {
    Eigen::VectorXd rowabs = Eigen::VectorXd::Zero(n), diag = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
        rowabs[it.row()] += std::abs(it.value());
        if (it.row() == it.col()) diag[it.row()] += it.value();
      }
    for (int i = 0; i < n; ++i) {
      norm_inf = std::max(norm_inf, rowabs[i]);
      gersh_lo = std::min(gersh_lo, 2.0 * diag[i] - rowabs[i]);
    }
  }
  if (norm_inf == 0.0) {
    EigenResult r;
    r.values = Eigen::VectorXd::Zero(count);
    r.vectors = Eigen::MatrixXd::Identity(n, count);
    r.residuals = Eigen::VectorXd::Zero(count);
    return r;
  }

  // sigma below the spectrum so that (M - sigma I) is SPD; try a small shift
  // first and fall back to the Gershgorin bound for indefinite input.
  const double delta = 1e-3 * norm_inf;
  SparseMatrix eye(n, n);
  eye.setIdentity();
  double sigma = -delta;
  Eigen::SimplicialLLT<SparseMatrix> llt;
  llt.compute(m - sigma * eye);
  if (llt.info() != Eigen::Success) {
    sigma = std::min(gersh_lo, 0.0) - delta;
    llt.compute(m - sigma * eye);
    if (llt.info() != Eigen::Success)
      throw NumericalError("spectral", "shifted factorization failed");
  }

  const Operator inv = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = llt.solve(x); };
  EigenResult r = run_locked(inv, n, count, opts);
  Eigen::VectorXd mv(n);
  for (int i = 0; i < count; ++i) {
    mv = m * r.vectors.col(i);
    r.values[i] = r.vectors.col(i).dot(mv);
    r.residuals[i] = (mv - r.values[i] * r.vectors.col(i)).norm();
  }
  // values came out in descending 1/(lambda - sigma) order, i.e. ascending lambda
  const double limit = std::max(1e-6, 1e3 * opts.tolerance) * norm_inf;
  for (int i = 0; i < count; ++i)
    if (r.residuals[i] > limit)
      throw NumericalError("spectral", "residual " + std::to_string(r.residuals[i]) +
                                           " above tolerance for eigenpair " + std::to_string(i));
  return r;
}

}  // namespace hemips::spectral
