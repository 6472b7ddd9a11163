#include "kfp/field.hpp"

#include <cmath>

namespace kfp {

FieldSpec FieldSpec::from_strings(int dimension, const std::string& potential,
                                  const std::vector<std::string>& magnetic,
                                  std::optional<double> torus_period) {
  if (dimension != 2 && dimension != 3)
    throw ArgumentError("expr-field", "field dimension must be 2 or 3");
  FieldSpec spec;
  spec.dimension = dimension;
  spec.potential = parse(potential, dimension);
  for (const auto& m : magnetic) spec.magnetic.push_back(parse(m, dimension));
  spec.torus_period = torus_period;
  spec.validate();
  return spec;
}

void FieldSpec::validate() const {
  if (dimension != 2 && dimension != 3)
    throw ArgumentError("expr-field", "field dimension must be 2 or 3");
  if (static_cast<int>(magnetic.size()) != magnetic_components())
    throw ArgumentError("expr-field", "expected " + std::to_string(magnetic_components()) +
                                          " magnetic components, got " + std::to_string(magnetic.size()));
  if (potential.empty()) throw ArgumentError("expr-field", "missing potential");
  if (!torus_period) return;

  const double L = *torus_period;
  if (!(L > 0.0)) throw ArgumentError("expr-field", "torus period must be positive");

  // 5^d probe points at irrational-ish offsets inside one cell.
  constexpr int kProbe = 5;
  int total = 1;
  for (int k = 0; k < dimension; ++k) total *= kProbe;
  std::vector<const Expression*> all{&potential};
  for (const auto& m : magnetic) all.push_back(&m);

  Eigen::VectorXd x(dimension);
  for (int p = 0; p < total; ++p) {
    int rest = p;
    for (int k = 0; k < dimension; ++k) {
      x(k) = L * (0.1372 + 0.1931 * (rest % kProbe)) + 0.01 * k;
      rest /= kProbe;
    }
    for (std::size_t e = 0; e < all.size(); ++e) {
      const double f0 = (*all[e])(x);
      for (int k = 0; k < dimension; ++k) {
        Eigen::VectorXd y = x;
        y(k) += L;
        const double f1 = (*all[e])(y);
        if (std::abs(f1 - f0) > 1e-10)
          throw ArgumentError("expr-field", std::string(e == 0 ? "potential" : "magnetic component") +
                                                " is not periodic with period " + std::to_string(L) +
                                                " in x" + std::to_string(k + 1));
      }
    }
  }
}

Eigen::VectorXd FieldSpec::gradient(const Eigen::VectorXd& x) const {
  return eval_with_derivatives(potential, x).gradient;
}

Eigen::MatrixXd FieldSpec::hessian(const Eigen::VectorXd& x) const {
  return eval_with_derivatives(potential, x).hessian;
}

Eigen::VectorXd FieldSpec::magnetic_at(const Eigen::VectorXd& x) const {
  Eigen::VectorXd b(magnetic.size());
  for (std::size_t c = 0; c < magnetic.size(); ++c) b(static_cast<Index>(c)) = magnetic[c](x);
  return b;
}

double japanese_bracket_grad(const FieldSpec& spec, const Eigen::VectorXd& x) {
  return std::sqrt(spec.gradient(x).squaredNorm() + 1.0);
}

}  // namespace kfp
