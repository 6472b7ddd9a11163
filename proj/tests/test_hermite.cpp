#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "kfp/hermite.hpp"

using namespace kfp;

namespace {

// Independent reference: Hermite functions psi_n(v) = He_n(v) exp(-v^2/4) / sqrt(sqrt(2 pi) n!)
// and their exact derivatives, tabulated on a fine grid; matrix elements by
// trapezoidal quadrature (spectrally accurate for these decaying integrands).
struct Quadrature {
  Eigen::VectorXd v, w;
  Eigen::MatrixXd psi, dpsi;  // rows: grid points, cols: levels

  explicit Quadrature(int levels) {
    const int n = 4001;
    const double L = 30.0;
    v = Eigen::VectorXd::LinSpaced(n, -L, L);
    const double h = 2 * L / (n - 1);
    w = Eigen::VectorXd::Constant(n, h);
    psi.resize(n, levels + 1);
    dpsi.resize(n, levels);
    for (int i = 0; i < n; ++i) {
      const double x = v(i);
      std::vector<double> he(static_cast<std::size_t>(levels + 1));
      he[0] = 1.0;
      if (levels >= 1) he[1] = x;
      for (int k = 1; k < levels; ++k) he[static_cast<std::size_t>(k + 1)] = x * he[static_cast<std::size_t>(k)] - k * he[static_cast<std::size_t>(k - 1)];
      const double g = std::exp(-x * x / 4);
      double fact = 1.0;
      for (int k = 0; k <= levels; ++k) {
        if (k > 0) fact *= k;
        const double c = 1.0 / std::sqrt(std::sqrt(2 * M_PI) * fact);
        psi(i, k) = c * he[static_cast<std::size_t>(k)] * g;
        if (k < levels) {
          const double dhe = k > 0 ? k * he[static_cast<std::size_t>(k - 1)] : 0.0;
          dpsi(i, k) = c * (dhe - 0.5 * x * he[static_cast<std::size_t>(k)]) * g;
        }
      }
    }
  }

  // <psi_m, f psi_n> with f applied pointwise
  Eigen::MatrixXd position(int N) const {
    const Eigen::MatrixXd p = psi.leftCols(N);
    return p.transpose() * (w.cwiseProduct(v)).asDiagonal() * p;
  }
  Eigen::MatrixXd derivative(int N) const {
    const Eigen::MatrixXd p = psi.leftCols(N);
    return p.transpose() * w.asDiagonal() * dpsi.leftCols(N);
  }
  Eigen::MatrixXd gram(int N) const {
    const Eigen::MatrixXd p = psi.leftCols(N);
    return p.transpose() * w.asDiagonal() * p;
  }
};

Eigen::MatrixXd dense(const SparseMatrixR& m) { return Eigen::MatrixXd(m); }
MatrixXc dense(const SparseMatrixC& m) { return MatrixXc(m); }

double max_abs(const MatrixXc& m) { return m.cwiseAbs().maxCoeff(); }

MatrixXc interior_block(const SparseMatrixC& m, const BasisSpec& b, int margin) {
  const auto idx = InteriorProjector{margin}.indices(b);
  return dense(submatrix(m, idx, idx));
}

}  // namespace

TEST_CASE("ladder action") {
  const Ladder l = ladder(3);
  const Eigen::MatrixXd a = dense(l.lower), ad = dense(l.raise);
  Eigen::VectorXd e0 = Eigen::VectorXd::Unit(3, 0), e1 = Eigen::VectorXd::Unit(3, 1), e2 = Eigen::VectorXd::Unit(3, 2);
  CHECK((a * e1 - e0).norm() == 0.0);
  CHECK((ad * e1 - std::sqrt(2.0) * e2).norm() == 0.0);
  CHECK((a * e0).norm() == 0.0);
  CHECK(ad == a.transpose());
  CHECK_THROWS_AS(ladder(1), ArgumentError);
}

TEST_CASE("canonical commutator fails only at the top level") {
  const int N = 8;
  const Ladder l = ladder(N);
  const Eigen::MatrixXd c = dense(l.lower) * dense(l.raise) - dense(l.raise) * dense(l.lower);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == N - 1 && j == N - 1) continue;
      CHECK(std::abs(c(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-14 * N);
    }
  CHECK(c(N - 1, N - 1) == doctest::Approx(-(N - 1.0)));
}

TEST_CASE("one-dimensional matrices against the quadrature oracle") {
  const int N = 12;
  const Quadrature q(N + 2);
  CHECK((q.gram(N) - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff() < 1e-12);
  // v couples n to n+1, so the top row/column is truncated; compare the first N-1 columns.
  const Eigen::MatrixXd x = q.position(N + 1).topLeftCorner(N, N);
  const Eigen::MatrixXd d = q.derivative(N + 1).topLeftCorner(N, N);
  CHECK((dense(position_1d(N)) - x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((dense(derivative_1d(N)) - d).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("oscillator eigenvalues") {
  const BasisSpec b2(2, 4), b3(3, 4);
  const SparseOperator h2 = oscillator(b2), h3 = oscillator(b3);
  const std::array<int, 2> n00{0, 0}, n12{1, 2};
  CHECK(h2.matrix.coeff(b2.velocity_index(n00), b2.velocity_index(n00)) == Complex(1.0));
  CHECK(h2.matrix.coeff(b2.velocity_index(n12), b2.velocity_index(n12)) == Complex(4.0));
  CHECK(h3.matrix.coeff(0, 0) == Complex(1.5));
  CHECK(h2.symmetry == Symmetry::hermitian);
  CHECK(h2.symmetry_holds());
  CHECK(h2.matrix.nonZeros() == b2.size());
}

TEST_CASE("angular momentum") {
  const BasisSpec b(2, 6);
  const SparseOperator L = angular_momentum(0, 1, b);
  CHECK(L.symmetry == Symmetry::skew_hermitian);
  CHECK(L.symmetry_holds());
  const std::array<int, 2> n10{1, 0}, n01{0, 1}, n00{0, 0};
  VectorXc e10 = VectorXc::Unit(b.size(), b.velocity_index(n10));
  VectorXc e01 = VectorXc::Unit(b.size(), b.velocity_index(n01));
  VectorXc e00 = VectorXc::Unit(b.size(), b.velocity_index(n00));
  CHECK((L.matrix * e10 + e01).norm() < 1e-15);
  CHECK((L.matrix * e00).norm() == 0.0);
  CHECK_THROWS_AS(angular_momentum(0, 0, b), ArgumentError);
  CHECK_THROWS_AS(angular_momentum(0, 2, b), ArgumentError);

  // Quadrature oracle: L = v1 d2 - v2 d1 from tensor products of the 1-d quadrature matrices.
  const int N = 6;
  const Quadrature q(N + 2);
  const Eigen::MatrixXd X = q.position(N + 1).topLeftCorner(N, N), D = q.derivative(N + 1).topLeftCorner(N, N);
  Eigen::MatrixXd Lq(N * N, N * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int m = 0; m < N; ++m)
          Lq(i * N + j, k * N + m) = X(i, k) * D(j, m) - D(i, k) * X(j, m);
  const MatrixXc Ld = dense(L.matrix);
  const auto idx = InteriorProjector{1}.indices(b);
  for (Index r : idx)
    for (Index c : idx) CHECK(std::abs(Ld(r, c) - Lq(r, c)) < 1e-12);
}

TEST_CASE("monomial operators") {
  const BasisSpec b(2, 6);
  const std::array<int, 2> z{0, 0}, one0{1, 0};
  CHECK(max_abs(dense(monomial_op(z, z, b).matrix) - MatrixXc::Identity(b.size(), b.size())) == 0.0);
  const std::array<int, 2> n00{0, 0}, n10{1, 0}, n20{2, 0};
  const VectorXc e00 = VectorXc::Unit(b.size(), b.velocity_index(n00));
  const VectorXc e10 = VectorXc::Unit(b.size(), b.velocity_index(n10));
  const VectorXc e20 = VectorXc::Unit(b.size(), b.velocity_index(n20));
  CHECK((monomial_op(one0, z, b).matrix * e00 - e10).norm() < 1e-15);
  CHECK((monomial_op(z, one0, b).matrix * e10 - 0.5 * (e00 - std::sqrt(2.0) * e20)).norm() < 1e-15);
  const std::array<int, 2> a21{2, 1};
  CHECK_THROWS_AS(monomial_op(a21, z, b), ArgumentError);
  CHECK(monomial_indices(2, 2).size() == 15);
  CHECK(monomial_indices(3, 2).size() == 28);
}

TEST_CASE("ordering: derivatives act first") {
  const BasisSpec b(2, 8);
  const std::array<int, 2> a{1, 0}, be{1, 0}, z{0, 0};
  const SparseMatrixC vd = monomial_op(a, be, b).matrix;
  const SparseMatrixC expected = monomial_op(a, z, b).matrix * monomial_op(z, be, b).matrix;
  CHECK(max_abs(dense(SparseMatrixC(vd - expected))) == 0.0);
}

TEST_CASE("canonical relations on the interior block") {
  const BasisSpec b(2, 10);
  std::vector<SparseMatrixC> X, D;
  for (int k = 0; k < 2; ++k) {
    X.push_back(position(k, b));
    D.push_back(derivative(k, b));
  }
  const MatrixXc I = MatrixXc::Identity(b.size(), b.size());
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      const SparseMatrixC dx = D[j] * X[k] - X[k] * D[j];
      const SparseMatrixC xx = X[j] * X[k] - X[k] * X[j];
      const SparseMatrixC dd = D[j] * D[k] - D[k] * D[j];
      const auto idx = InteriorProjector{2}.indices(b);
      const MatrixXc Ii = MatrixXc::Identity(static_cast<Index>(idx.size()), static_cast<Index>(idx.size()));
      CHECK(max_abs(interior_block(dx, b, 2) - (j == k ? 1.0 : 0.0) * Ii) <= 1e-14);
      CHECK(max_abs(interior_block(xx, b, 2)) <= 1e-14);
      CHECK(max_abs(interior_block(dd, b, 2)) <= 1e-14);
    }
  (void)I;
}

TEST_CASE("oscillator from monomials matches the diagonal on the interior") {
  const BasisSpec b(2, 10);
  SparseMatrixC h(b.size(), b.size());
  for (int k = 0; k < 2; ++k) {
    std::array<int, 2> a2{0, 0}, z{0, 0};
    a2[static_cast<std::size_t>(k)] = 2;
    h += 0.25 * monomial_op(a2, z, b).matrix - monomial_op(z, a2, b).matrix;
  }
  CHECK(max_abs(interior_block(SparseMatrixC(h - oscillator(b).matrix), b, 2)) <= 1e-12);
}

TEST_CASE("interior projector") {
  const BasisSpec b(std::vector<int>{5, 7}, TorusFactor{2, 3, 1.0});
  const SparseMatrixC p = InteriorProjector{2}.matrix(b);
  CHECK(max_abs(dense(SparseMatrixC(p * p - p))) == 0.0);
  CHECK(InteriorProjector{2}.indices(b).size() == 3u * 5u * 9u);
  CHECK(b.size() == 5 * 7 * 9);
}

TEST_CASE("basis invariants") {
  CHECK_THROWS_AS(BasisSpec(2, 3), ArgumentError);
  CHECK_THROWS_AS(BasisSpec(0, 8), ArgumentError);
  const BasisSpec b(std::vector<int>{4, 6});
  for (Index i = 0; i < b.velocity_size(); ++i) CHECK(b.velocity_index(b.multi_index(i)) == i);
  CHECK(b.refined(1.5).levels() == std::vector<int>{6, 9});
}

TEST_CASE("velocity polynomial symbol and realisation") {
  const BasisSpec b(2, 10);
  VelocityPolynomial p;
  p.add(kI, {pos(0)}).add(-1.0, {der(1)}).add(2.0, {pos(0), der(1)}).add_oscillator(1.0);
  const std::array<double, 2> v{1.0, 0.5}, eta{0.0, 2.0};
  // i v1 - i eta2 + 2 v1 i eta2 + |eta|^2 + |v|^2/4
  const Complex expected = kI * 1.0 - kI * 2.0 + 2.0 * 1.0 * kI * 2.0 + 4.0 + 0.25 * 1.25;
  CHECK(std::abs(p.left_symbol(v, eta) - expected) < 1e-15);
  const SparseMatrixC m = p.realize(b);
  const SparseMatrixC ref = kI * position(0, b) - derivative(1, b) + 2.0 * SparseMatrixC(position(0, b) * derivative(1, b)) +
                            oscillator(b).matrix;
  CHECK(max_abs(dense(SparseMatrixC(m - ref))) <= 1e-15);
}
