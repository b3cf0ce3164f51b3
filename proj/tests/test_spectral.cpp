#include <Eigen/Eigenvalues>
#include <random>

#include "doctest.h"
#include "hemips/error.hpp"
#include "hemips/spectral.hpp"

using namespace hemips;
using namespace hemips::spectral;

namespace {

Eigen::MatrixXd random_psd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return a * a.transpose() / n;
}

}  // namespace

TEST_CASE("path graph Laplacian") {
  Eigen::MatrixXd d(3, 3);
  d << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  const auto r = smallest_eigenpairs(d.sparseView(), 3);
  CHECK(std::abs(r.values[0]) < 1e-10);
  CHECK(r.values[1] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.values[2] == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("identity has a repeated eigenvalue") {
  SparseMatrix eye(10, 10);
  eye.setIdentity();
  const auto r = smallest_eigenpairs(eye, 2);
  CHECK(r.values[0] == doctest::Approx(1.0));
  CHECK(r.values[1] == doctest::Approx(1.0));
  CHECK(std::abs(r.vectors.col(0).dot(r.vectors.col(1))) < 1e-10);
}

TEST_CASE("matches the dense eigensolver on a 500x500 PSD matrix") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd a = random_psd(500, rng);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(a);
  const auto r = smallest_eigenpairs(a.sparseView(), 6);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(r.values[i] - oracle.eigenvalues()[i]) < 1e-8);
  const Eigen::MatrixXd gram = r.vectors.transpose() * r.vectors;
  CHECK((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
  for (int i = 0; i < 6; ++i) CHECK(r.residuals[i] < 1e-7);
}

TEST_CASE("scaling the matrix scales eigenvalues and keeps eigenspaces") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd a = random_psd(60, rng);
  const auto r1 = smallest_eigenpairs(a.sparseView(), 3);
  const auto r2 = smallest_eigenpairs((3.5 * a).sparseView(), 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(r2.values[i] == doctest::Approx(3.5 * r1.values[i]).epsilon(1e-8));
    CHECK(std::abs(std::abs(r1.vectors.col(i).dot(r2.vectors.col(i))) - 1.0) < 1e-7);
  }
}

TEST_CASE("indefinite input still returns the algebraically smallest values") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(5, 5);
  d.diagonal() << -3, 4, -1, 2, 0.5;
  const auto r = smallest_eigenpairs(d.sparseView(), 2);
  CHECK(r.values[0] == doctest::Approx(-3.0));
  CHECK(r.values[1] == doctest::Approx(-1.0));
}

TEST_CASE("largest eigenpairs of a dense operator") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd a = random_psd(120, rng);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(a);
  const auto r = largest_eigenpairs([&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = a * x; }, 120, 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(r.values[i] - oracle.eigenvalues()[119 - i]) < 1e-8);
}

TEST_CASE("input validation") {
  Eigen::MatrixXd ns(2, 2);
  ns << 1, 2, 0, 1;
  CHECK_THROWS_AS(smallest_eigenpairs(ns.sparseView(), 1), InputError);
  SparseMatrix eye(3, 3);
  eye.setIdentity();
  CHECK_THROWS_AS(smallest_eigenpairs(eye, 4), InputError);
  CHECK_THROWS_AS(smallest_eigenpairs(eye, 0), InputError);
}
