#pragma once

#include <cstdint>

#include "kfp/types.hpp"

namespace kfp {

struct PencilOptions {
  double tol = 1e-8;            // relative change of the top Ritz value between restarts
  double residual_tol = 1e-6;   // ||G^-1 M x - theta x||_G / |theta|
  int max_iterations = 500;     // restart cycles
  int krylov_dim = 30;
  int keep = 8;
  std::uint64_t seed = 0x5eed;
};

struct PencilResult {
  double value = 0.0;
  VectorXc vector;      // G-normalised
  int iterations = 0;   // restart cycles used
  int applications = 0; // solves with G
  bool converged = false;
  double residual = 0.0;
};

/// Largest lambda with M x = lambda G x for Hermitian PSD M and Hermitian
/// positive definite G. Thick-restart Lanczos in the G inner product with
/// full reorthogonalisation; G is factored once (sparse LDL^T).
/// Does not throw on non-convergence: check `converged`.
PencilResult largest_generalized_eigenpair(const SparseMatrixC& M, const SparseMatrixC& G,
                                           const PencilOptions& options = {});

struct SingularResult {
  double sigma = 0.0;
  VectorXc vector;  // right singular vector, unit norm
  int iterations = 0;
  bool converged = false;
};

/// Smallest singular value of a tall (or square) sparse matrix via the
/// pencil (I, A^H A): sigma_min = 1 / sqrt(lambda_max).
SingularResult smallest_singular_value(const SparseMatrixC& A, const PencilOptions& options = {});

/// Dense reference: largest generalized eigenvalue of (M, G).
double dense_largest_generalized(const MatrixXc& M, const MatrixXc& G);
/// Dense reference: smallest singular value.
double dense_smallest_singular_value(const MatrixXc& A);

}  // namespace kfp
