#include "kfp/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "kfp/hermite.hpp"

namespace kfp {

namespace {

class Lanczos {
 public:
  Lanczos(const SparseMatrixC& M, const SparseMatrixC& G, const PencilOptions& opt)
      : M_(M), G_(G), opt_(opt), n_(M.rows()), rng_(opt.seed) {
    m_ = std::min<Index>(std::max(opt.krylov_dim, 2), n_);
    keep_ = std::clamp<Index>(opt.keep, 1, std::max<Index>(m_ - 1, 1));
    V_.resize(n_, m_);
    MV_.resize(n_, m_);
    GV_.resize(n_, m_);
    ldlt_.compute(G_);
    if (ldlt_.info() != Eigen::Success) throw ConvergenceError("estimates", "factorisation of the pencil matrix failed");
    if ((ldlt_.vectorD().real().array() <= 0.0).any())
      throw ConvergenceError("estimates", "pencil matrix is not positive definite");
  }

  PencilResult run() {
    PencilResult res;
    append(random_vector());
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (int cycle = 1; cycle <= opt_.max_iterations; ++cycle) {
      bool exhausted = false;
      while (j_ < m_) {
        VectorXc y = ldlt_.solve(VectorXc(MV_.col(j_ - 1)));
        ++res.applications;
        if (!append(std::move(y)) && !append(random_vector())) {
          exhausted = true;
          break;
        }
      }
      if (j_ == n_) exhausted = true;

      MatrixXc h = V_.leftCols(j_).adjoint() * MV_.leftCols(j_);
      h = 0.5 * (h + h.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<MatrixXc> es(h);
      const MatrixXc& s = es.eigenvectors();
      const double theta = es.eigenvalues()(j_ - 1);
      const VectorXc u = V_.leftCols(j_) * s.col(j_ - 1);
      const VectorXc mu = MV_.leftCols(j_) * s.col(j_ - 1);
      const VectorXc r = ldlt_.solve(mu) - theta * u;
      ++res.applications;
      const double rnorm = std::sqrt(std::max(0.0, r.dot(G_ * r).real()));
      const double scale = std::abs(theta) > 0.0 ? std::abs(theta) : 1.0;

      res.value = theta;
      res.vector = u;
      res.iterations = cycle;
      res.residual = rnorm / scale;
      const bool settled = std::abs(theta - previous) <= opt_.tol * scale;
      if (exhausted || (res.residual <= opt_.residual_tol && settled)) {
        res.converged = true;
        return res;
      }
      previous = theta;

      // Thick restart: top Ritz vectors plus the Ritz residual, which is the
      // Krylov continuation direction for all of them.
      VectorXc next = r;
      const Index k = std::min(keep_, j_);
      const MatrixXc sk = s.rightCols(k);
      const MatrixXc v = V_.leftCols(j_) * sk;
      const MatrixXc mv = MV_.leftCols(j_) * sk;
      const MatrixXc gv = GV_.leftCols(j_) * sk;
      V_.leftCols(k) = v;
      MV_.leftCols(k) = mv;
      GV_.leftCols(k) = gv;
      j_ = k;
      if (!append(std::move(next))) append(random_vector());
    }
    return res;
  }

 private:
  VectorXc random_vector() {
    std::normal_distribution<double> nd;
    VectorXc x(n_);
    for (Index i = 0; i < n_; ++i) x(i) = Complex(nd(rng_), nd(rng_));
    return x;
  }

  // G-orthogonalise against the current basis (twice) and append; false on breakdown.
  bool append(VectorXc x) {
    if (j_ >= n_) return false;
    const double before = std::sqrt(std::max(0.0, x.dot(G_ * x).real()));
    if (!(before > 0.0)) return false;
    for (int pass = 0; pass < 2 && j_ > 0; ++pass) {
      const VectorXc c = GV_.leftCols(j_).adjoint() * x;
      x -= V_.leftCols(j_) * c;
    }
    VectorXc gx = G_ * x;
    const double after = std::sqrt(std::max(0.0, x.dot(gx).real()));
    if (!(after > 1e-10 * before)) return false;
    V_.col(j_) = x / after;
    GV_.col(j_) = gx / after;
    MV_.col(j_) = M_ * V_.col(j_);
    ++j_;
    return true;
  }

  const SparseMatrixC& M_;
  const SparseMatrixC& G_;
  PencilOptions opt_;
  Index n_;
  Index m_ = 0;
  Index keep_ = 1;
  Index j_ = 0;
  MatrixXc V_, MV_, GV_;
  Eigen::SimplicialLDLT<SparseMatrixC> ldlt_;
  std::mt19937_64 rng_;
};

}  // namespace

PencilResult largest_generalized_eigenpair(const SparseMatrixC& M, const SparseMatrixC& G,
                                           const PencilOptions& options) {
  if (M.rows() != M.cols() || G.rows() != G.cols() || M.rows() != G.rows())
    throw DimensionError("estimates", "pencil matrices must be square and of equal size");
  if (M.rows() == 0) throw DimensionError("estimates", "empty pencil");
  return Lanczos(M, G, options).run();
}

SingularResult smallest_singular_value(const SparseMatrixC& A, const PencilOptions& options) {
  const SparseMatrixC gram = A.adjoint() * A;
  SingularResult out;
  try {
    const PencilResult r = largest_generalized_eigenpair(identity(A.cols()), gram, options);
    out.sigma = 1.0 / std::sqrt(r.value);
    out.vector = r.vector.normalized();
    out.iterations = r.iterations;
    out.converged = r.converged;
  } catch (const ConvergenceError&) {
    // A^H A is numerically singular.
    out.sigma = 0.0;
    out.converged = true;
  }
  return out;
}

double dense_largest_generalized(const MatrixXc& M, const MatrixXc& G) {
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXc> es(M, G);
  if (es.info() != Eigen::Success) throw ConvergenceError("estimates", "dense generalized eigensolver failed");
  return es.eigenvalues().maxCoeff();
}

double dense_smallest_singular_value(const MatrixXc& A) {
  Eigen::BDCSVD<MatrixXc> svd(A);
  return svd.singularValues().minCoeff();
}

}  // namespace kfp
