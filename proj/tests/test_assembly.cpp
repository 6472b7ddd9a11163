#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "kfp/assembly.hpp"
#include "kfp/io.hpp"

using namespace kfp;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

MatrixXc dense(const SparseMatrixC& m) { return MatrixXc(m); }
double max_abs(const SparseMatrixC& m) { return m.nonZeros() ? dense(m).cwiseAbs().maxCoeff() : 0.0; }

std::vector<FieldSpec> catalog() {
  return {
      FieldSpec::from_strings(2, "0", {"0"}, kTwoPi),
      FieldSpec::from_strings(2, "cos(x1)+cos(x2)", {"0"}, kTwoPi),
      FieldSpec::from_strings(2, "cos(x1)*sin(x2)", {"1+0.5*cos(x1)"}, kTwoPi),
      FieldSpec::from_strings(2, "sin(x1)+0.3*cos(2*x2)", {"-0.7+sin(x2)"}, kTwoPi),
  };
}

VectorXc random_interior(const BasisSpec& basis, int margin, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  VectorXc u = VectorXc::Zero(basis.size());
  for (Index i : InteriorProjector{margin}.indices(basis)) u(i) = Complex(n(rng), n(rng));
  return u;
}

// |grad_v u|^2 + |v u|^2 / 4 via the one-coordinate operators.
double form_identity(const VectorXc& u, const BasisSpec& basis) {
  const BasisSpec vb(basis.levels());
  double s = 0.0;
  for (int k = 0; k < basis.velocity_dim(); ++k) {
    const SparseMatrixC dk = kron(identity(basis.space_size()), derivative(k, vb));
    const SparseMatrixC vk = kron(identity(basis.space_size()), position(k, vb));
    s += (dk * u).squaredNorm() + 0.25 * (vk * u).squaredNorm();
  }
  return s;
}

}  // namespace

TEST_CASE("Fourier differentiation matrix") {
  for (int M : {8, 9, 16}) {
    const double L = 3.0;
    const Eigen::MatrixXd D = fourier_derivative(M, L);
    CHECK((D + D.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::VectorXd f(M), df(M);
    for (int j = 0; j < M; ++j) {
      const double x = L * j / M;
      f(j) = std::sin(kTwoPi * x / L) + std::cos(2 * kTwoPi * x / L);
      df(j) = kTwoPi / L * (std::cos(kTwoPi * x / L) - 2 * std::sin(2 * kTwoPi * x / L));
    }
    CHECK((D * f - df).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("zero field: zero Fourier mode is the shifted oscillator") {
  const FieldSpec f = FieldSpec::from_strings(2, "0", {"0"}, kTwoPi);
  const BasisSpec b(2, 6, TorusFactor{2, 4, kTwoPi});
  const DiscretizedOperator K = assemble_full(f, b);
  // Constant-in-x vectors: average over the grid.
  const Index ns = b.space_size(), nv = b.velocity_size();
  SparseMatrixC avg(b.size(), nv);
  std::vector<Eigen::Triplet<Complex>> t;
  for (Index s = 0; s < ns; ++s)
    for (Index i = 0; i < nv; ++i) t.emplace_back(s * nv + i, i, 1.0 / std::sqrt(double(ns)));
  avg.setFromTriplets(t.begin(), t.end());
  const MatrixXc k0 = dense(SparseMatrixC(avg.adjoint() * K.matrix() * avg));
  for (Index i = 0; i < nv; ++i)
    for (Index j = 0; j < nv; ++j) {
      const auto n = b.multi_index(i);
      const double expected = i == j ? double(n[0] + n[1]) : 0.0;
      CHECK(std::abs(k0(i, j) - expected) < 1e-13);
    }
}

TEST_CASE("kernel vector: continuum oracle and discrete residual") {
  // Oracle: f(x, v) = exp(-V(x)/2 - |v|^2/4) solves K f = 0 pointwise (B = 0).
  const Expression f = parse("exp(-(cos(x1)+cos(x2))/2-(x3^2+x4^2)/4)", 4);
  const Expression V = parse("cos(x1)+cos(x2)", 2);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int n = 0; n < 50; ++n) {
    Eigen::VectorXd z(4);
    for (int k = 0; k < 4; ++k) z(k) = u(rng);
    const Derivatives d = eval_with_derivatives(f, z);
    const Derivatives dv = eval_with_derivatives(V, z.head(2));
    double kf = 0.0;
    for (int k = 0; k < 2; ++k) {
      kf += z(2 + k) * d.gradient(k);             // v . grad_x
      kf -= dv.gradient(k) * d.gradient(2 + k);   // - grad V . grad_v
      kf -= d.hessian(2 + k, 2 + k);              // - Delta_v
      kf += 0.25 * z(2 + k) * z(2 + k) * d.value; // v^2 / 4
    }
    kf -= d.value;  // - d/2
    CHECK(std::abs(kf) < 1e-14 * std::max(1.0, std::abs(d.value)) + 1e-15);
  }

  const FieldSpec field = FieldSpec::from_strings(2, "cos(x1)+cos(x2)", {"0"}, kTwoPi);
  const BasisSpec b(2, 24, TorusFactor{2, 32, kTwoPi});
  const DiscretizedOperator K = assemble_full(field, b);
  const Eigen::MatrixXd nodes = torus_nodes(*b.torus());
  VectorXc u0 = VectorXc::Zero(b.size());
  for (Index s = 0; s < b.space_size(); ++s)
    u0(s * b.velocity_size()) = std::exp(-0.5 * (std::cos(nodes(s, 0)) + std::cos(nodes(s, 1))));
  CHECK((K.matrix() * u0).norm() / u0.norm() <= 1e-6);
}

TEST_CASE("adjoint equals the conjugate transpose for the catalog") {
  for (const FieldSpec& f : catalog()) {
    const BasisSpec b(2, 8, TorusFactor{2, 6, kTwoPi});
    const SparseMatrixC K = assemble_full(f, b).matrix();
    const SparseMatrixC Ks = assemble_adjoint(f, b).matrix();
    const auto idx = InteriorProjector{2}.indices(b);
    CHECK(max_abs(submatrix(SparseMatrixC(Ks - SparseMatrixC(K.adjoint())), idx, idx)) <= 1e-13);
  }
}

TEST_CASE("zero field adjoint flips only the transport term") {
  const FieldSpec f = FieldSpec::from_strings(2, "0", {"0"}, kTwoPi);
  const BasisSpec b(2, 6, TorusFactor{2, 5, kTwoPi});
  const BasisSpec vb(b.levels());
  const SparseMatrixC K = assemble_full(f, b).matrix();
  const SparseMatrixC Ks = assemble_adjoint(f, b).matrix();
  SparseMatrixC transport(b.size(), b.size());
  const Eigen::MatrixXd D = fourier_derivative(5, kTwoPi);
  SparseMatrixC Ds = D.cast<Complex>().sparseView();
  transport += kron(kron(Ds, identity(5)), position(0, vb));
  transport += kron(kron(identity(5), Ds), position(1, vb));
  CHECK(max_abs(SparseMatrixC(Ks - (K - 2.0 * transport))) <= 1e-14);
}

TEST_CASE("adjoint decomposes through P0") {
  for (const FieldSpec& f : catalog()) {
    const BasisSpec b(2, 8, TorusFactor{2, 6, kTwoPi});
    const BasisSpec vb(b.levels());
    const SparseMatrixC Ks = assemble_adjoint(f, b).matrix();
    const SparseMatrixC P0 = assemble_P0(b).matrix();
    // (v ^ B + grad V) . grad_v + v^2/4 - d/2, termwise.
    const Eigen::MatrixXd nodes = torus_nodes(*b.torus());
    SparseMatrixC rest(b.size(), b.size());
    for (Index s = 0; s < b.space_size(); ++s) {
      SparseMatrixC e(b.space_size(), b.space_size());
      e.insert(s, s) = 1.0;
      const Eigen::VectorXd x = nodes.row(s).transpose();
      const Eigen::VectorXd g = f.gradient(x);
      const double bb = f.magnetic_at(x)(0);
      SparseMatrixC local = bb * angular_momentum(0, 1, vb).matrix;
      for (int k = 0; k < 2; ++k) {
        local += g(k) * derivative(k, vb);
        local += 0.25 * SparseMatrixC(position(k, vb) * position(k, vb));
      }
      local -= identity(vb.size());
      rest += kron(e, local);
    }
    const auto idx = InteriorProjector{2}.indices(b);
    CHECK(max_abs(submatrix(SparseMatrixC(Ks - P0 - rest), idx, idx)) <= 1e-13);
  }
}

TEST_CASE("P0 properties") {
  const BasisSpec b(2, 8, TorusFactor{2, 4, kTwoPi});
  const SparseMatrixC P0 = assemble_P0(b).matrix();
  const BasisSpec vb(b.levels());
  // Skew part is the transport term; Hermitian part is -Delta_v.
  const SparseMatrixC herm = 0.5 * (P0 + SparseMatrixC(P0.adjoint()));
  SparseMatrixC lap(vb.size(), vb.size());
  for (int k = 0; k < 2; ++k) lap -= derivative(k, vb) * derivative(k, vb);
  CHECK(max_abs(SparseMatrixC(herm - kron(identity(b.space_size()), lap))) <= 1e-14);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<MatrixXc>(dense(lap)).eigenvalues();
  CHECK(ev.minCoeff() >= -1e-12);
  std::mt19937_64 rng(2);
  for (int n = 0; n < 20; ++n) {
    const VectorXc u = random_interior(b, 1, rng);
    double grad = 0.0;
    for (int k = 0; k < 2; ++k) grad += (kron(identity(b.space_size()), derivative(k, vb)) * u).squaredNorm();
    CHECK(std::abs(u.dot(P0 * u).real() - grad) <= 1e-10 * u.squaredNorm());
  }
}

TEST_CASE("accretivity identity for full and model assemblies") {
  std::mt19937_64 rng(17);
  for (const FieldSpec& f : catalog()) {
    const BasisSpec b(2, 8, TorusFactor{2, 6, kTwoPi});
    const SparseMatrixC K = assemble_full(f, b, Shift::Kcheck).matrix();
    for (int n = 0; n < 10; ++n) {
      const VectorXc u = random_interior(b, 2, rng);
      const double re = u.dot(K * u).real();
      CHECK(std::abs(re - form_identity(u, b)) <= 1e-10 * u.squaredNorm());
    }
  }
  const BasisSpec b(2, 12);
  std::uniform_real_distribution<double> uni(-3, 3);
  for (int n = 0; n < 20; ++n) {
    ModelParams p;
    p.w = Eigen::Vector2d(uni(rng), uni(rng));
    p.xi = Eigen::Vector2d(uni(rng), uni(rng));
    p.b = uni(rng);
    p.rho = p.xi.cwiseAbs();
    p.bprime = Eigen::Vector2d(uni(rng), uni(rng));
    const VectorXc u = random_interior(b, 2, rng);
    for (const SparseMatrixC& K : {assemble_hat(p, b).matrix(), assemble_check(p, b).matrix(),
                                   assemble_transported(p, b).matrix()})
      CHECK(std::abs(u.dot(K * u).real() - form_identity(u, b)) <= 1e-10 * u.squaredNorm());
  }
}

TEST_CASE("K is accretive on random interior vectors") {
  std::mt19937_64 rng(23);
  for (const FieldSpec& f : catalog()) {
    const BasisSpec b(2, 8, TorusFactor{2, 6, kTwoPi});
    const SparseMatrixC K = assemble_full(f, b).matrix();
    for (int n = 0; n < 25; ++n) {
      const VectorXc u = random_interior(b, 2, rng);
      CHECK(u.dot(K * u).real() >= -1e-12 * u.squaredNorm());
    }
  }
}

TEST_CASE("model families") {
  const BasisSpec b(2, 10);
  {
    const SparseMatrixC K = assemble_hat(ModelParams{}, b).matrix();
    CHECK(max_abs(SparseMatrixC(K - oscillator(b).matrix)) == 0.0);
    CHECK(std::abs(dense(K).diagonal().real().minCoeff() - 1.0) == 0.0);
    CHECK(max_abs(SparseMatrixC(assemble_check(ModelParams{}, b).matrix() - K)) == 0.0);
  }
  {
    ModelParams p;
    p.rho = Eigen::Vector2d(1.3, 0.4);
    p.bprime = Eigen::Vector2d(-0.8, 0.0);
    ModelParams q;
    q.xi = p.rho;
    q.b = p.bprime(0);
    CHECK(max_abs(SparseMatrixC(assemble_check(p, b).matrix() - assemble_hat(q, b).matrix())) <= 1e-15);
  }
  CHECK_THROWS_AS(assemble_hat(ModelParams{}, BasisSpec(3, 6)), ArgumentError);
  ModelParams neg;
  neg.rho = Eigen::Vector2d(-1, 0);
  CHECK_THROWS_AS(assemble_check(neg, b), ArgumentError);
  // Shift convention.
  const SparseMatrixC k1 = assemble_hat(ModelParams{}, b, Shift::K).matrix();
  CHECK(std::abs(dense(k1)(0, 0) - 0.0) == 0.0);
}

TEST_CASE("symbol of the hat family") {
  ModelParams p;
  p.w = Eigen::Vector2d(1, 1);
  p.b = 2;
  p.xi = Eigen::Vector2d(1, 0);
  const std::array<double, 2> v{1, 0}, eta{0, 1};
  // i xi.v - i w.eta - i b (v1 eta2 - v2 eta1) + |eta|^2 + |v|^2/4 = i - i - 2i + 1 + 1/4
  CHECK(std::abs(hat_polynomial(p).left_symbol(v, eta) - Complex(1.25, -2.0)) < 1e-15);
  const BasisSpec b(2, 10);
  const auto idx = InteriorProjector{2}.indices(b);
  CHECK(max_abs(submatrix(SparseMatrixC(hat_polynomial(p).realize(b) - assemble_hat(p, b).matrix()), idx, idx)) <=
        1e-14);
}

TEST_CASE("provenance determinism and triplet round trip") {
  const FieldSpec f = FieldSpec::from_strings(2, "cos(x1)*sin(x2)", {"1+0.5*cos(x1)"}, kTwoPi);
  const BasisSpec b(2, 6, TorusFactor{2, 5, kTwoPi});
  const DiscretizedOperator K = assemble_full(f, b);
  const DiscretizedOperator K2 = reassemble(K.provenance);
  CHECK(max_abs(SparseMatrixC(K.matrix() - K2.matrix())) == 0.0);
  std::stringstream ss;
  write_triplets(ss, K);
  const TripletFile t = read_triplets(ss);
  CHECK(t.shift == "K");
  CHECK(t.provenance == K.provenance.describe());
  CHECK(max_abs(SparseMatrixC(t.matrix - K.matrix())) == 0.0);
  std::stringstream bad("# dims 2 2\n0 5 1 0\n");
  CHECK_THROWS_AS(read_triplets(bad), ArgumentError);
}

TEST_CASE("basis and field mismatches") {
  const FieldSpec f = FieldSpec::from_strings(2, "cos(x1)", {"0"}, kTwoPi);
  CHECK_THROWS_AS(assemble_full(f, BasisSpec(2, 6)), ArgumentError);
  CHECK_THROWS_AS(assemble_full(f, BasisSpec(2, 6, TorusFactor{2, 4, 1.0})), ArgumentError);
  const FieldSpec open = FieldSpec::from_strings(2, "x1^2", {"0"});
  CHECK_THROWS_AS(assemble_full(open, BasisSpec(2, 6, TorusFactor{2, 4, kTwoPi})), ArgumentError);
  const FieldSpec f3 = FieldSpec::from_strings(3, "cos(x3)", {"1", "0", "sin(x1)"}, kTwoPi);
  const BasisSpec b3(3, 4, TorusFactor{3, 3, kTwoPi});
  const SparseMatrixC K3 = assemble_full(f3, b3).matrix();
  const SparseMatrixC K3s = assemble_adjoint(f3, b3).matrix();
  CHECK(max_abs(SparseMatrixC(K3s - SparseMatrixC(K3.adjoint()))) <= 1e-13);
}
