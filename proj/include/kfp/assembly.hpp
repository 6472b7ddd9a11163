#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "kfp/field.hpp"
#include "kfp/hermite.hpp"

namespace kfp {

/// Frozen-coefficient parameters of the d = 2 model operators.
struct ModelParams {
  Eigen::Vector2d w = Eigen::Vector2d::Zero();       // frozen grad V
  double b = 0.0;                                     // frozen magnetic field
  Eigen::Vector2d xi = Eigen::Vector2d::Zero();      // Fourier covariable
  Eigen::Vector2d rho = Eigen::Vector2d::Zero();     // reduced covariable, rho_k >= 0
  Eigen::Vector2d bprime = Eigen::Vector2d::Zero();  // rotated magnetic pair

  bool operator==(const ModelParams&) const = default;
};

/// K carries the constant -d/2; Kcheck = K + d/2 does not.
enum class Shift { K, Kcheck };

enum class Family { full, adjoint, kolmogorov, hat, check, transported };

const char* to_string(Shift s);
const char* to_string(Family f);

struct Provenance {
  Family family = Family::full;
  Shift shift = Shift::K;
  BasisSpec basis{2, 4};
  std::optional<FieldSpec> field;  // full / adjoint only
  ModelParams params;              // model families only

  std::string describe() const;
};

struct DiscretizedOperator {
  SparseOperator op;
  Provenance provenance;

  const SparseMatrixC& matrix() const { return op.matrix; }
};

/// Spectral (Fourier collocation) differentiation matrix on M equispaced
/// nodes x_j = j L / M. Real and antisymmetric.
Eigen::MatrixXd fourier_derivative(int M, double period);

/// Collocation nodes of the torus factor, row-major (last coordinate fastest).
Eigen::MatrixXd torus_nodes(const TorusFactor& torus);

/// -(v ^ B) . grad_v written as  -sum_c b_c L_c  with  (L_c) = (L_23, L_31, L_12)
/// for d = 3 and L_12 for d = 2. Returned matrices are over the velocity part only.
std::vector<SparseMatrixC> magnetic_generators(const BasisSpec& velocity_basis);

/// K = v.grad_x - grad V.grad_v - (v ^ B).grad_v - Delta_v + v^2/4 - d/2 on the torus.
DiscretizedOperator assemble_full(const FieldSpec& field, const BasisSpec& basis, Shift shift = Shift::K);
/// K* = -v.grad_x - Delta_v + (v ^ B + grad V).grad_v + v^2/4 - d/2, built term by term.
DiscretizedOperator assemble_adjoint(const FieldSpec& field, const BasisSpec& basis, Shift shift = Shift::K);
/// P0 = -v.grad_x - Delta_v, with -Delta_v from truncated products of d/dv.
DiscretizedOperator assemble_P0(const BasisSpec& basis);

/// i v.xi - w.grad_v - b L_12 - Delta_v + v^2/4   (velocity basis, d = 2).
DiscretizedOperator assemble_hat(const ModelParams& p, const BasisSpec& basis, Shift shift = Shift::Kcheck);
/// i v.rho - b'_1 L_12 + i b'_2 (v_1 v_2 - d_1 d_2) - Delta_v + v^2/4.
DiscretizedOperator assemble_check(const ModelParams& p, const BasisSpec& basis, Shift shift = Shift::Kcheck);
/// i v.xi - w.grad_v - b'_1 L_12 + i b'_2 S - Delta_v + v^2/4 with the
/// mixing generator S = a_1^dagger a_2 + a_2^dagger a_1 = v_1 v_2 / 2 - 2 d_1 d_2.
/// This is the family closed under the coordinate-wise harmonic rotations.
DiscretizedOperator assemble_transported(const ModelParams& p, const BasisSpec& basis, Shift shift = Shift::Kcheck);

/// S = a_1^dagger a_2 + a_2^dagger a_1 (Hermitian).
SparseOperator mixing_generator(const BasisSpec& basis);

/// The hat family as a velocity polynomial, for symbol evaluation.
VelocityPolynomial hat_polynomial(const ModelParams& p);

/// Rebuilds the operator from its provenance record.
DiscretizedOperator reassemble(const Provenance& p);

}  // namespace kfp
