#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "kfp/assembly.hpp"
#include "kfp/estimates.hpp"
#include "kfp/pencil.hpp"

using namespace kfp;

namespace {

MatrixXc random_matrix(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXc a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return a;
}

SparseMatrixC sparse(const MatrixXc& a) { return a.sparseView(); }

}  // namespace

TEST_CASE("Lanczos agrees with the dense generalized solver") {
  std::mt19937_64 rng(99);
  for (Index n : {20, 120, 400}) {
    const MatrixXc a = random_matrix(n, rng), c = random_matrix(n, rng);
    const MatrixXc M = a.adjoint() * a;
    const MatrixXc G = c.adjoint() * c / double(n) + MatrixXc::Identity(n, n);
    const double ref = Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXc>(M, G, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    const PencilResult r = largest_generalized_eigenpair(sparse(M), sparse(G));
    CHECK(r.converged);
    CHECK(std::abs(r.value - ref) <= 1e-8 * ref);
    CHECK(std::abs(dense_largest_generalized(M, G) - ref) <= 1e-12 * ref);
    // Rayleigh quotient of the returned vector.
    const Complex num = r.vector.dot(M * r.vector), den = r.vector.dot(G * r.vector);
    CHECK(std::abs(num.real() / den.real() - ref) <= 1e-8 * ref);
  }
}

TEST_CASE("smallest singular value agrees with the dense SVD") {
  std::mt19937_64 rng(5);
  const MatrixXc a = random_matrix(150, rng) + 20.0 * MatrixXc::Identity(150, 150);
  const double ref = Eigen::JacobiSVD<MatrixXc>(a).singularValues().minCoeff();
  const SingularResult s = smallest_singular_value(sparse(a));
  CHECK(s.converged);
  CHECK(std::abs(s.sigma - ref) <= 1e-8 * ref);
  CHECK(std::abs(dense_smallest_singular_value(a) - ref) <= 1e-12 * ref);
  CHECK(std::abs((a * s.vector).norm() - ref) <= 1e-6 * ref);
}

TEST_CASE("closed-form pencils") {
  const BasisSpec b(2, 12);
  const SparseMatrixC K = assemble_hat(ModelParams{}, b).matrix();
  const EstimateReport half = estimate_constant(K, identity(b.size()), b);
  CHECK(half.converged);
  CHECK(std::abs(half.C_est - 0.5) <= 1e-10);
  CHECK(half.certificate_ok);
  const SparseMatrixC G = SparseMatrixC(K.adjoint()) * K + identity(b.size());
  const EstimateReport one = estimate_constant(K, G, b);
  CHECK(std::abs(one.C_est - 1.0) <= 1e-10);
  const SingularResult s = sigma_min_interior(K, b);
  CHECK(std::abs(s.sigma - 1.0) <= 1e-10);
}

TEST_CASE("Krylov exhaustion on tiny pencils") {
  const Index n = 5;
  Eigen::VectorXd d(n);
  d << 3, 1, 4, 1, 5;
  const SparseMatrixC M = sparse(MatrixXc(d.cast<Complex>().asDiagonal()));
  const PencilResult r = largest_generalized_eigenpair(M, identity(n));
  CHECK(r.converged);
  CHECK(std::abs(r.value - 5.0) <= 1e-12);
}

TEST_CASE("iteration cap is reported, not hidden") {
  std::mt19937_64 rng(1);
  const MatrixXc a = random_matrix(300, rng);
  PencilOptions o;
  o.max_iterations = 1;
  o.krylov_dim = 4;
  o.keep = 2;
  const PencilResult r = largest_generalized_eigenpair(sparse(MatrixXc(a.adjoint() * a)), identity(300), o);
  CHECK(r.iterations <= 1);
  CHECK_FALSE(r.converged);
}

TEST_CASE("pencil input validation") {
  CHECK_THROWS_AS(largest_generalized_eigenpair(identity(3), identity(4)), DimensionError);
}
