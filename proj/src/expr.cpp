#include "kfp/expr.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace kfp {

namespace detail {

void throw_domain(const char* what, double arg) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", arg);
  throw DomainError("expr-field", std::string(what) + " (argument " + buf + ")");
}

}  // namespace detail

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_unary(Op op, NodePtr a) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->constant = a->constant;
  n->lhs = std::move(a);
  return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->constant = a->constant && b->constant;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, int dimension) : text_(text), dimension_(dimension) {}

  NodePtr parse_all() {
    NodePtr e = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character");
    return e;
  }

 private:
  // expression := term (('+'|'-') term)*
  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      skip_space();
      if (accept('+')) {
        lhs = make_binary(Op::add, lhs, term());
      } else if (accept('-')) {
        lhs = make_binary(Op::sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  // term := unary (('*'|'/') unary)*
  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      skip_space();
      if (accept('*')) {
        lhs = make_binary(Op::mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make_binary(Op::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  // unary := '-' unary | power
  NodePtr unary() {
    skip_space();
    if (accept('-')) return make_unary(Op::neg, unary());
    return power();
  }

  // power := primary ('^' unary)?   (right associative through unary -> power)
  NodePtr power() {
    NodePtr base = primary();
    skip_space();
    if (accept('^')) return make_binary(Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (accept('(')) {
      NodePtr e = expression();
      skip_space();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected character");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value,
                                     std::chars_format::general);
    if (ec != std::errc() || ptr == text_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::literal;
    n->value = value;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    if (name.size() >= 2 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string_view::npos) {
      int k = 0;
      std::from_chars(name.data() + 1, name.data() + name.size(), k);
      if (k < 1 || k > dimension_)
        throw DimensionError("expr-field", "variable " + std::string(name) + " at offset " +
                                               std::to_string(start) + " exceeds dimension " +
                                               std::to_string(dimension_));
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::variable;
      n->variable = k - 1;
      n->constant = false;
      return n;
    }

    Op op;
    if (name == "sin") op = Op::sin;
    else if (name == "cos") op = Op::cos;
    else if (name == "exp") op = Op::exp;
    else if (name == "sqrt") op = Op::sqrt;
    else if (name == "log") op = Op::log;
    else {
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "'");
    }
    skip_space();
    if (!accept('(')) fail("expected '(' after function name");
    NodePtr arg = expression();
    skip_space();
    if (!accept(')')) fail("expected ')'");
    return make_unary(op, arg);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(pos_, what); }

  std::string_view text_;
  int dimension_;
  std::size_t pos_ = 0;
};

void render(const Expression::Node& n, std::string& out) {
  auto fn = [&](const char* name) {
    out += name;
    out += '(';
    render(*n.lhs, out);
    out += ')';
  };
  auto bin = [&](char op) {
    out += '(';
    render(*n.lhs, out);
    out += ' ';
    out += op;
    out += ' ';
    render(*n.rhs, out);
    out += ')';
  };
  switch (n.op) {
    case Op::literal: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      break;
    }
    case Op::variable:
      out += 'x';
      out += std::to_string(n.variable + 1);
      break;
    case Op::add: bin('+'); break;
    case Op::sub: bin('-'); break;
    case Op::mul: bin('*'); break;
    case Op::div: bin('/'); break;
    case Op::pow: bin('^'); break;
    case Op::neg: fn("-"); break;
    case Op::sin: fn("sin"); break;
    case Op::cos: fn("cos"); break;
    case Op::exp: fn("exp"); break;
    case Op::sqrt: fn("sqrt"); break;
    case Op::log: fn("log"); break;
  }
}

// f(a) with f' and f'' evaluated at a.value.
Jet chain(const Jet& a, double f, double df, double d2f) {
  Jet r;
  r.value = f;
  r.gradient = df * a.gradient;
  r.hessian = df * a.hessian + d2f * (a.gradient * a.gradient.transpose());
  return r;
}

}  // namespace

Expression parse(std::string_view text, int dimension) {
  if (dimension < 1) throw DimensionError("expr-field", "expression dimension must be positive");
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw ParseError(0, "empty expression");
  return Expression(Parser(text, dimension).parse_all(), dimension);
}

std::string to_string(const Expression& e) {
  std::string out;
  if (!e.empty()) render(e.root(), out);
  return out;
}

Jet operator+(const Jet& a, const Jet& b) {
  return {a.value + b.value, a.gradient + b.gradient, a.hessian + b.hessian};
}

Jet operator-(const Jet& a, const Jet& b) {
  return {a.value - b.value, a.gradient - b.gradient, a.hessian - b.hessian};
}

Jet operator-(const Jet& a) { return {-a.value, -a.gradient, -a.hessian}; }

Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  r.value = a.value * b.value;
  r.gradient = a.value * b.gradient + b.value * a.gradient;
  // g_a g_b^T + g_b g_a^T is symmetric entry by entry in floating point.
  r.hessian = a.value * b.hessian + b.value * a.hessian + a.gradient * b.gradient.transpose() +
              b.gradient * a.gradient.transpose();
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  const double inv = 1.0 / b.value;
  return a * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value), c = std::cos(a.value);
  return chain(a, s, c, -s);
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value), c = std::cos(a.value);
  return chain(a, c, -s, -c);
}

Jet exp(const Jet& a) {
  const double e = std::exp(a.value);
  return chain(a, e, e, e);
}

Jet sqrt(const Jet& a) {
  const double s = std::sqrt(a.value);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.value));
}

Jet log(const Jet& a) {
  const double inv = 1.0 / a.value;
  return chain(a, std::log(a.value), inv, -inv * inv);
}

Derivatives eval_with_derivatives(const Expression& e, const Eigen::VectorXd& x) {
  const Index n = x.size();
  std::vector<Jet> vars;
  vars.reserve(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) vars.push_back(Jet::variable(x(k), k, n));
  Jet r = e.evaluate<Jet>(std::span<const Jet>(vars));
  // Products like a * b^T + b * a^T round differently in the two triangles.
  Eigen::MatrixXd h = 0.5 * (r.hessian + r.hessian.transpose());
  return {r.value, std::move(r.gradient), std::move(h)};
}

}  // namespace kfp
