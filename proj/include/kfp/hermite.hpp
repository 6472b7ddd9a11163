#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "kfp/types.hpp"

namespace kfp {

/// Collocation grid on the torus (R / L Z)^dimension with `points` nodes per axis.
struct TorusFactor {
  int dimension = 2;
  int points = 16;
  double period = 2.0 * 3.14159265358979323846;

  bool operator==(const TorusFactor&) const = default;
};

/// Tensor basis: (optional) torus collocation grid  x  Hermite functions in
/// each velocity coordinate. Hermite functions are the L^2-normalised
/// eigenfunctions of -d^2/dv^2 + v^2/4, truncated to levels 0..N_k-1.
///
/// Flattened index = space_index * velocity_size() + velocity_index, where the
/// last velocity coordinate varies fastest.
class BasisSpec {
 public:
  BasisSpec(int velocity_dim, int levels, std::optional<TorusFactor> torus = std::nullopt);
  explicit BasisSpec(std::vector<int> levels, std::optional<TorusFactor> torus = std::nullopt);

  int velocity_dim() const { return static_cast<int>(levels_.size()); }
  int levels(int k) const { return levels_.at(static_cast<std::size_t>(k)); }
  const std::vector<int>& levels() const { return levels_; }
  const std::optional<TorusFactor>& torus() const { return torus_; }

  Index velocity_size() const;
  Index space_size() const;
  Index size() const { return velocity_size() * space_size(); }

  std::vector<int> multi_index(Index velocity_index) const;
  Index velocity_index(std::span<const int> n) const;

  /// Same basis with every Hermite truncation multiplied by `factor` (rounded up).
  BasisSpec refined(double factor) const;

  std::string describe() const;

  bool operator==(const BasisSpec&) const = default;

 private:
  std::vector<int> levels_;
  std::optional<TorusFactor> torus_;
};

enum class Symmetry { hermitian, skew_hermitian, none };

const char* to_string(Symmetry s);

/// Square complex sparse matrix over a BasisSpec with a symmetry tag.
struct SparseOperator {
  SparseMatrixC matrix;
  Symmetry symmetry = Symmetry::none;

  Index size() const { return matrix.rows(); }
  /// Exact check of the tag: max |A - A^H| (or |A + A^H|) must be 0.
  bool symmetry_holds() const;
};

/// Diagonal 0/1 projector that removes the top `margin` Hermite levels of
/// every velocity coordinate. Discrete identities of order <= margin hold
/// exactly on its range.
struct InteriorProjector {
  int margin = 2;

  std::vector<Index> indices(const BasisSpec& basis) const;
  SparseMatrixC matrix(const BasisSpec& basis) const;
};

/// Rows and columns of `a` restricted to `rows` x `cols` (both sorted).
SparseMatrixC submatrix(const SparseMatrixC& a, std::span<const Index> rows, std::span<const Index> cols);
/// Columns of `a` restricted to `cols` (sorted); all rows kept.
SparseMatrixC column_block(const SparseMatrixC& a, std::span<const Index> cols);

SparseMatrixC kron(const SparseMatrixC& a, const SparseMatrixC& b);
SparseMatrixC identity(Index n);

struct Ladder {
  SparseMatrixR lower;  // a:  a e_n = sqrt(n) e_{n-1}
  SparseMatrixR raise;  // a^dagger = a^T
};

/// a = d/dv + v/2 and a^dagger = -d/dv + v/2 on levels 0..N-1 (N >= 2).
Ladder ladder(int N);
/// Multiplication by v = a + a^dagger.
SparseMatrixR position_1d(int N);
/// d/dv = (a - a^dagger)/2.
SparseMatrixR derivative_1d(int N);

/// One-coordinate operator placed in slot `k` of the full basis (identity elsewhere).
SparseMatrixC velocity_factor(const SparseMatrixR& op, int k, const BasisSpec& basis);
SparseMatrixC position(int k, const BasisSpec& basis);
SparseMatrixC derivative(int k, const BasisSpec& basis);

/// -Delta_v + v^2/4 (unshifted), diagonal with entries sum_k (n_k + 1/2).
SparseOperator oscillator(const BasisSpec& basis);

/// v_j d/dv_k - v_k d/dv_j  ( = a_j^dagger a_k - a_j a_k^dagger ), skew-Hermitian.
/// Coordinates are zero-based.
SparseOperator angular_momentum(int j, int k, const BasisSpec& basis);

/// v^alpha d_v^beta with |alpha| + |beta| <= 2; derivative factors are applied
/// first, position factors after.
SparseOperator monomial_op(std::span<const int> alpha, std::span<const int> beta, const BasisSpec& basis);

/// All (alpha, beta) multi-index pairs with |alpha| + |beta| <= order, in a
/// fixed deterministic order.
std::vector<std::pair<std::vector<int>, std::vector<int>>> monomial_indices(int velocity_dim, int order);

/// Noncommutative polynomial in v_k and d/dv_k plus a multiple of the
/// oscillator -Delta_v + v^2/4. Words are applied right to left.
class VelocityPolynomial {
 public:
  struct Factor {
    enum Kind { position, derivative } kind;
    int coordinate;
  };
  struct Term {
    Complex coefficient;
    std::vector<Factor> factors;
  };

  VelocityPolynomial& add(Complex coefficient, std::vector<Factor> factors);
  VelocityPolynomial& add_oscillator(double weight);

  const std::vector<Term>& terms() const { return terms_; }
  double oscillator_weight() const { return oscillator_weight_; }

  /// Left (standard) symbol: v_k -> v_k, d/dv_k -> i eta_k, oscillator -> |eta|^2 + |v|^2/4.
  /// Exact for normal-ordered words (positions to the left of derivatives).
  Complex left_symbol(std::span<const double> v, std::span<const double> eta) const;

  SparseMatrixC realize(const BasisSpec& basis) const;

 private:
  std::vector<Term> terms_;
  double oscillator_weight_ = 0.0;
};

inline VelocityPolynomial::Factor pos(int k) { return {VelocityPolynomial::Factor::position, k}; }
inline VelocityPolynomial::Factor der(int k) { return {VelocityPolynomial::Factor::derivative, k}; }

}  // namespace kfp
