#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kfp/expr.hpp"

namespace kfp {

/// Electric potential V and magnetic field B_e on R^d (d = 2 or 3), either on
/// all of R^d or on the torus (R / L Z)^d.
struct FieldSpec {
  int dimension = 2;
  Expression potential;
  std::vector<Expression> magnetic;   // d(d-1)/2 components
  std::optional<double> torus_period; // empty: unbounded space

  /// Parses the expressions; throws ParseError / DimensionError / ArgumentError.
  static FieldSpec from_strings(int dimension, const std::string& potential,
                                const std::vector<std::string>& magnetic,
                                std::optional<double> torus_period = std::nullopt);

  /// Checks the component count and, on a torus, L-periodicity of every
  /// expression on a probe grid (|f(x) - f(x + L e_k)| <= 1e-10).
  void validate() const;

  int magnetic_components() const { return dimension * (dimension - 1) / 2; }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;
  Eigen::VectorXd magnetic_at(const Eigen::VectorXd& x) const;
};

/// <grad V(x)> = sqrt(|grad V(x)|^2 + 1).
double japanese_bracket_grad(const FieldSpec& spec, const Eigen::VectorXd& x);

}  // namespace kfp
