#pragma once

// Extreme eigenpairs of symmetric operators by Lanczos with full
// reorthogonalization, explicit restarts and locking.

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>
#include <functional>

namespace hemips::spectral {

using SparseMatrix = Eigen::SparseMatrix<double>;
/// y = A x for a symmetric A.
using Operator = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& y)>;

struct EigenOptions {
  double tolerance = 1e-9;  // relative residual
  int max_iterations = 10000;
  int max_basis = 400;  // Krylov dimension before an explicit restart
  std::uint64_t seed = 0x5eed;
};

struct EigenResult {
  Eigen::VectorXd values;     // ascending for smallest_*, descending for largest_*
  Eigen::MatrixXd vectors;    // unit columns
  Eigen::VectorXd residuals;  // ||A v - lambda v||
};

/// `count` largest eigenpairs of a symmetric operator of size n.
EigenResult largest_eigenpairs(const Operator& op, int n, int count, const EigenOptions& opts = {});

/// `count` algebraically smallest eigenpairs by shift-invert Lanczos.
/// Throws InputError if M is not symmetric within 1e-8 or count is out of
/// range, NumericalError when the iteration does not converge.
EigenResult smallest_eigenpairs(const SparseMatrix& m, int count, const EigenOptions& opts = {});

}  // namespace hemips::spectral
