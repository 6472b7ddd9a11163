#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "kfp/hermite.hpp"

namespace kfp {

/// Basis of the 8-dimensional graded algebra, in table order.
enum Gen : int { Yp11 = 0, Yp21, Ypp11, Ypp21, Y12, Y22, Y13, Y23 };
inline constexpr int kAlgebraDim = 8;

/// Integer coordinates of an algebra element in the basis above.
using AlgebraVector = std::array<int, kAlgebraDim>;

class GradedLieAlgebra {
 public:
  /// The algebra with brackets [Y'11,Y''11] = [Y'21,Y''21] = Y22,
  /// [Y12,Y'11] = Y13, [Y12,Y'21] = Y23, all other basis brackets zero.
  GradedLieAlgebra();

  static std::string_view label(int i);
  static int degree(int i);
  /// Index of a label such as "Y'11", "Y''21", "Y12"; throws ArgumentError.
  static int index_of(std::string_view label);

  /// c_{ij}^k
  int structure_constant(int i, int j, int k) const { return c_[static_cast<std::size_t>((i * 8 + j) * 8 + k)]; }
  AlgebraVector bracket(int i, int j) const;
  AlgebraVector bracket(const AlgebraVector& x, const AlgebraVector& y) const;

 private:
  void set(int i, int j, int k, int value);
  std::array<int, 512> c_{};
};

AlgebraVector basis_vector(int i);

struct JacobiEntry {
  std::array<int, 3> triple;
  AlgebraVector residual;
};

struct AlgebraReport {
  bool antisymmetric = true;
  std::vector<JacobiEntry> jacobi;  // all 56 unordered triples
  bool jacobi_ok = true;
  bool grading_ok = true;           // [G_i, G_j] in G_{i+j}, zero beyond degree 3
  int generated_dimension = 0;      // span generated by degree-1 layer and Y12
  bool functional_ok = true;        // ell_rho vanishes on [H, H] and H is closed

  bool passed() const { return antisymmetric && jacobi_ok && grading_ok && generated_dimension == kAlgebraDim && functional_ok; }
};

AlgebraReport verify_algebra(const GradedLieAlgebra& g);

/// Dimension of the subalgebra generated by the given basis elements
/// (closure under brackets, rank computed exactly).
int generated_dimension(const GradedLieAlgebra& g, const std::vector<int>& generators);

/// Formal complex combination of words; in a word the leftmost letter is applied last.
class UEAElement {
 public:
  struct Word {
    Complex coefficient;
    std::vector<int> letters;
  };

  static UEAElement generator(int i);
  UEAElement& add(Complex coefficient, std::vector<int> letters);
  const std::vector<Word>& words() const { return words_; }
  /// Coefficient of an exact word (0 if absent).
  Complex coefficient(const std::vector<int>& letters) const;

 private:
  std::vector<Word> words_;
};

/// Y12 - sum_k (Y'k1^2 + Y''k1^2 / 4) - i b'_1 (Y'11 Y''21 - Y'21 Y''11) - i b'_2 (Y''11 Y''21 + Y'11 Y'21),
/// with words of zero coefficient dropped.
UEAElement build_F(const Eigen::Vector2d& bprime);

struct InducedFunctional {
  Eigen::Matrix<double, kAlgebraDim, 1> ell = Eigen::Matrix<double, kAlgebraDim, 1>::Zero();
  std::vector<int> subalgebra;  // basis indices spanning H

  /// ell(Y22) = 1, ell(Y13) = -rho_1, ell(Y23) = -rho_2; H = span(Y''11, Y''21, Y12, Y22, Y13, Y23).
  static InducedFunctional for_rho(const Eigen::Vector2d& rho);

  double operator()(const AlgebraVector& x) const;
  bool subalgebra_closed(const GradedLieAlgebra& g) const;
  bool vanishes_on_brackets(const GradedLieAlgebra& g) const;
};

/// pi(Y'k1) = d/dv_k, pi(Y''k1) = i v_k, pi(Y12) = i v.rho, and central
/// elements map to i ell_rho(Y) times the identity.
SparseMatrixC represent(int generator, const Eigen::Vector2d& rho, const BasisSpec& basis);
SparseMatrixC represent(const UEAElement& e, const Eigen::Vector2d& rho, const BasisSpec& basis);
/// Linear extension to an algebra vector.
SparseMatrixC represent(const AlgebraVector& x, const Eigen::Vector2d& rho, const BasisSpec& basis);

struct RocklandPoint {
  Eigen::Vector2d bprime;
  Eigen::Vector2d rho;
  double sigma_min = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Smallest singular value of pi(F_b') restricted to interior columns.
RocklandPoint rockland_probe(const Eigen::Vector2d& bprime, const Eigen::Vector2d& rho, const BasisSpec& basis,
                             int margin = 2);

/// Structure constants and grading as a JSON document.
std::string structure_constants_json(const GradedLieAlgebra& g);

}  // namespace kfp
