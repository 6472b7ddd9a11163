#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "kfp/types.hpp"

namespace kfp {

enum class Op { literal, variable, add, sub, mul, div, pow, neg, sin, cos, exp, sqrt, log };

/// Immutable expression tree over real literals, variables x1..xd, the binary
/// operators + - * / ^, unary minus, and sin cos exp sqrt log.
///
/// Nodes are shared and never mutated after parsing, so copies are cheap and
/// evaluation is safe from several threads at once.
class Expression {
 public:
  struct Node {
    Op op = Op::literal;
    double value = 0.0;   // literal
    int variable = 0;     // zero-based coordinate for Op::variable
    bool constant = true; // subtree contains no variables
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  Expression() = default;
  Expression(std::shared_ptr<const Node> root, int dimension)
      : root_(std::move(root)), dimension_(dimension) {}

  bool empty() const noexcept { return root_ == nullptr; }
  int dimension() const noexcept { return dimension_; }
  const Node& root() const { return *root_; }

  /// Evaluates at `x` (size >= dimension()). `Scalar` is double or Jet.
  template <class Scalar>
  Scalar evaluate(std::span<const Scalar> x) const;

  double operator()(const Eigen::VectorXd& x) const {
    return evaluate<double>(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  }

 private:
  std::shared_ptr<const Node> root_;
  int dimension_ = 0;
};

/// Parses `text` with the precedence ^ > unary - > * / > + -; binary operators
/// of equal precedence associate left, except ^ which associates right.
/// Throws ParseError (with byte offset) or DimensionError for x_k with k > d.
Expression parse(std::string_view text, int dimension);

/// Fully parenthesised rendering; parse(to_string(e)) evaluates bit-identically to e.
std::string to_string(const Expression& e);

/// Second-order forward-mode jet: value, gradient and Hessian with respect to
/// the n seeded variables.
struct Jet {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;

  static Jet constant(double c, Index n) {
    return {c, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
  }
  static Jet variable(double x, Index k, Index n) {
    Jet j = constant(x, n);
    j.gradient(k) = 1.0;
    return j;
  }
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet exp(const Jet& a);
Jet sqrt(const Jet& a);
Jet log(const Jet& a);

struct Derivatives {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Value, exact gradient and exact (symmetric) Hessian of `e` at `x`.
Derivatives eval_with_derivatives(const Expression& e, const Eigen::VectorXd& x);

namespace detail {

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.value; }

inline Jet make_constant(double c, const Jet& like) { return Jet::constant(c, like.gradient.size()); }
inline double make_constant(double c, double) { return c; }

[[noreturn]] void throw_domain(const char* what, double arg);

template <class Scalar>
Scalar integer_power(const Scalar& base, long n) {
  if (n == 0) return make_constant(1.0, base);
  const bool invert = n < 0;
  unsigned long m = static_cast<unsigned long>(invert ? -n : n);
  Scalar result = base;
  for (unsigned long i = 1; i < m; ++i) result = result * base;
  if (invert) {
    if (value_of(result) == 0.0) throw_domain("division by zero in negative power", 0.0);
    result = make_constant(1.0, base) / result;
  }
  return result;
}

template <class Scalar>
Scalar eval_node(const Expression::Node& n, std::span<const Scalar> x) {
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  switch (n.op) {
    case Op::literal:
      return make_constant(n.value, x[0]);
    case Op::variable:
      return x[static_cast<std::size_t>(n.variable)];
    case Op::add:
      return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
    case Op::sub:
      return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
    case Op::mul:
      return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
    case Op::div: {
      Scalar den = eval_node(*n.rhs, x);
      if (value_of(den) == 0.0) throw_domain("division by zero", 0.0);
      return eval_node(*n.lhs, x) / den;
    }
    case Op::neg:
      return -eval_node(*n.lhs, x);
    case Op::pow: {
      Scalar base = eval_node(*n.lhs, x);
      if (n.rhs->constant) {
        const double p = value_of(eval_node(*n.rhs, x));
        if (std::nearbyint(p) == p && std::abs(p) <= 1024.0)
          return integer_power(base, static_cast<long>(p));
      }
      if (value_of(base) <= 0.0) throw_domain("non-integer power of a non-positive base", value_of(base));
      return exp(eval_node(*n.rhs, x) * log(base));
    }
    case Op::sin:
      return sin(eval_node(*n.lhs, x));
    case Op::cos:
      return cos(eval_node(*n.lhs, x));
    case Op::exp:
      return exp(eval_node(*n.lhs, x));
    case Op::sqrt: {
      Scalar a = eval_node(*n.lhs, x);
      if (value_of(a) < 0.0) throw_domain("sqrt of a negative number", value_of(a));
      if constexpr (std::is_same_v<Scalar, Jet>) {
        if (value_of(a) == 0.0 && !n.lhs->constant) throw_domain("sqrt is not differentiable at 0", 0.0);
      }
      return sqrt(a);
    }
    case Op::log: {
      Scalar a = eval_node(*n.lhs, x);
      if (value_of(a) <= 0.0) throw_domain("log of a non-positive number", value_of(a));
      return log(a);
    }
  }
  throw_domain("unknown node", 0.0);
}

}  // namespace detail

template <class Scalar>
Scalar Expression::evaluate(std::span<const Scalar> x) const {
  if (empty()) throw ArgumentError("expr-field", "evaluating an empty expression");
  if (x.size() < static_cast<std::size_t>(dimension_) || x.empty())
    throw DimensionError("expr-field", "evaluation point has fewer coordinates than the expression dimension");
  Scalar r = detail::eval_node(*root_, x);
  if (!std::isfinite(detail::value_of(r))) detail::throw_domain("non-finite result", detail::value_of(r));
  return r;
}

}  // namespace kfp
