#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <json.hpp>

#include "kfp/assembly.hpp"
#include "kfp/nilpotent.hpp"
#include "kfp/pencil.hpp"

using namespace kfp;

namespace {

double interior_max(const SparseMatrixC& m, const BasisSpec& b, int margin = 2) {
  const auto idx = InteriorProjector{margin}.indices(b);
  const SparseMatrixC s = submatrix(m, idx, idx);
  return s.nonZeros() ? MatrixXc(s).cwiseAbs().maxCoeff() : 0.0;
}

AlgebraVector zero() { return AlgebraVector{}; }

}  // namespace

TEST_CASE("bracket table") {
  const GradedLieAlgebra g;
  CHECK(g.bracket(Yp11, Ypp11) == basis_vector(Y22));
  CHECK(g.bracket(Yp21, Ypp21) == basis_vector(Y22));
  CHECK(g.bracket(Y12, Yp11) == basis_vector(Y13));
  CHECK(g.bracket(Y12, Yp21) == basis_vector(Y23));
  CHECK(g.bracket(Yp11, Yp21) == zero());
  CHECK(g.bracket(Ypp11, Ypp21) == zero());
  CHECK(g.bracket(Y22, Y13) == zero());
  int nonzero = 0;
  for (int i = 0; i < kAlgebraDim; ++i)
    for (int j = 0; j < kAlgebraDim; ++j) {
      AlgebraVector sum = g.bracket(i, j);
      const AlgebraVector other = g.bracket(j, i);
      for (int k = 0; k < kAlgebraDim; ++k) sum[static_cast<std::size_t>(k)] += other[static_cast<std::size_t>(k)];
      CHECK(sum == zero());
      if (i < j && g.bracket(i, j) != zero()) ++nonzero;
    }
  CHECK(nonzero == 4);
}

TEST_CASE("labels and degrees") {
  const std::array<int, 8> degrees{1, 1, 1, 1, 2, 2, 3, 3};
  for (int i = 0; i < kAlgebraDim; ++i) {
    CHECK(GradedLieAlgebra::degree(i) == degrees[static_cast<std::size_t>(i)]);
    CHECK(GradedLieAlgebra::index_of(GradedLieAlgebra::label(i)) == i);
  }
  CHECK(GradedLieAlgebra::index_of("Y''21") == Ypp21);
  CHECK_THROWS_AS(GradedLieAlgebra::index_of("Y99"), ArgumentError);
}

TEST_CASE("Jacobi identity by direct expansion") {
  const GradedLieAlgebra g;
  // [X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]] for X = Y'11, Y = Y''11, Z = Y12.
  const auto x = basis_vector(Yp11), y = basis_vector(Ypp11), z = basis_vector(Y12);
  AlgebraVector s = g.bracket(x, g.bracket(y, z));
  const AlgebraVector s2 = g.bracket(y, g.bracket(z, x));
  const AlgebraVector s3 = g.bracket(z, g.bracket(x, y));
  for (std::size_t k = 0; k < 8; ++k) s[k] += s2[k] + s3[k];
  CHECK(s == zero());

  const AlgebraReport r = verify_algebra(g);
  CHECK(r.jacobi.size() == 56);
  for (const auto& e : r.jacobi) CHECK(e.residual == zero());
  CHECK(r.antisymmetric);
  CHECK(r.grading_ok);
  CHECK(r.functional_ok);
  CHECK(r.generated_dimension == 8);
  CHECK(r.passed());
  CHECK(generated_dimension(g, {Yp11, Yp21, Ypp11, Ypp21, Y12}) == 8);
  CHECK(generated_dimension(g, {Yp11, Yp21, Ypp11, Ypp21}) == 5);
  CHECK(generated_dimension(g, {Yp11, Ypp21}) == 2);
}

TEST_CASE("induced functional") {
  const GradedLieAlgebra g;
  const InducedFunctional l = InducedFunctional::for_rho({1.5, 2.5});
  CHECK(l(basis_vector(Y22)) == 1.0);
  CHECK(l(basis_vector(Y13)) == -1.5);
  CHECK(l(basis_vector(Y23)) == -2.5);
  CHECK(l(basis_vector(Yp11)) == 0.0);
  CHECK(l.subalgebra == std::vector<int>{Ypp11, Ypp21, Y12, Y22, Y13, Y23});
  CHECK(l.subalgebra_closed(g));
  CHECK(l.vanishes_on_brackets(g));
}

TEST_CASE("the element F") {
  const UEAElement f0 = build_F({0, 0});
  CHECK(f0.words().size() == 5);
  CHECK(f0.coefficient({Y12}) == Complex(1));
  CHECK(f0.coefficient({Yp11, Yp11}) == Complex(-1));
  CHECK(f0.coefficient({Yp21, Yp21}) == Complex(-1));
  CHECK(f0.coefficient({Ypp11, Ypp11}) == Complex(-0.25));
  CHECK(f0.coefficient({Ypp21, Ypp21}) == Complex(-0.25));
  const UEAElement f = build_F({0.3, -0.7});
  CHECK(f.words().size() == 9);
  CHECK(f.coefficient({Yp11, Ypp21}) == Complex(0, -0.3));
  CHECK(f.coefficient({Yp21, Ypp11}) == Complex(0, 0.3));
  CHECK(f.coefficient({Ypp11, Ypp21}) == Complex(0, 0.7));
  CHECK(f.coefficient({Yp11, Yp21}) == Complex(0, 0.7));
  CHECK(build_F({0.3, 0}).words().size() == 7);
}

TEST_CASE("representation examples") {
  const BasisSpec b(2, 16);
  const Eigen::Vector2d rho(0.8, 1.7);
  const SparseMatrixC I = identity(b.size());
  const SparseMatrixC x1 = represent(Yp11, rho, b), y1 = represent(Ypp11, rho, b);
  CHECK(interior_max(SparseMatrixC(x1 - derivative(0, b)), b) == 0.0);
  CHECK(interior_max(SparseMatrixC(y1 - kI * position(0, b)), b) == 0.0);
  CHECK(interior_max(SparseMatrixC(represent(Y22, rho, b) - kI * I), b) == 0.0);
  CHECK(interior_max(SparseMatrixC(SparseMatrixC(x1 * y1 - y1 * x1) - kI * I), b) <= 1e-13);
  CHECK(interior_max(SparseMatrixC(represent(Y13, rho, b) + (kI * rho(0)) * I), b) == 0.0);
  CHECK(interior_max(SparseMatrixC(represent(Y23, rho, b) + (kI * rho(1)) * I), b) == 0.0);
}

TEST_CASE("homomorphism on all basis pairs") {
  const GradedLieAlgebra g;
  const BasisSpec b(2, 14);
  const Eigen::Vector2d rho(1.3, 0.6);
  int pairs = 0;
  for (int i = 0; i < kAlgebraDim; ++i)
    for (int j = i + 1; j < kAlgebraDim; ++j) {
      const SparseMatrixC a = represent(i, rho, b), c = represent(j, rho, b);
      const SparseMatrixC lhs = represent(g.bracket(i, j), rho, b);
      CHECK(interior_max(SparseMatrixC(lhs - SparseMatrixC(a * c - c * a)), b) <= 1e-13);
      ++pairs;
    }
  CHECK(pairs == 28);
}

TEST_CASE("represent(F) is the check operator") {
  const BasisSpec b(2, 14);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 5), s(-2, 2);
  for (int n = 0; n < 20; ++n) {
    ModelParams p;
    p.rho = Eigen::Vector2d(u(rng), u(rng));
    p.bprime = Eigen::Vector2d(s(rng), s(rng));
    const SparseMatrixC f = represent(build_F(p.bprime), p.rho, b);
    CHECK(interior_max(SparseMatrixC(f - assemble_check(p, b).matrix()), b) <= 1e-13);
  }
}

TEST_CASE("Rockland probe") {
  const BasisSpec b(2, 24);
  CHECK(rockland_probe({0, 0}, {1, 0}, b).sigma_min >= 1 - 1e-6);
  const RocklandPoint p = rockland_probe({0.5, 0.5}, {10, 10}, b);
  CHECK(p.converged);
  CHECK(p.sigma_min >= 1 - 1e-6);

  // Complex conjugation composed with full parity maps b'_2 to -b'_2.
  const BasisSpec small(2, 10);
  const Eigen::Vector2d rho(0.7, 1.9);
  const SparseMatrixC a = represent(build_F({0.4, 0.9}), rho, small);
  const SparseMatrixC c = represent(build_F({0.4, -0.9}), rho, small);
  Eigen::VectorXd parity(small.size());
  for (Index i = 0; i < small.size(); ++i) {
    const auto n = small.multi_index(i);
    parity(i) = (n[0] + n[1]) % 2 ? -1.0 : 1.0;
  }
  const MatrixXc pa = parity.asDiagonal() * MatrixXc(a).conjugate() * parity.asDiagonal();
  CHECK((pa - MatrixXc(c)).cwiseAbs().maxCoeff() <= 1e-14);
  const double s1 = rockland_probe({0.4, 0.9}, rho, b).sigma_min;
  const double s2 = rockland_probe({0.4, -0.9}, rho, b).sigma_min;
  CHECK(std::abs(s1 - s2) <= 1e-6 * s1);
}

TEST_CASE("structure constants JSON") {
  const auto j = nlohmann::json::parse(structure_constants_json(GradedLieAlgebra{}));
  CHECK(j["schema_version"] == 1);
  CHECK(j["labels"].size() == 8);
  CHECK(j["degrees"][6] == 3);
  CHECK(j["brackets"].size() == 4);
  CHECK(j["structure_constants"][Yp11][Ypp11][Y22] == 1);
  CHECK(j["structure_constants"][Ypp11][Yp11][Y22] == -1);
}
