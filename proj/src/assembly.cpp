#include "kfp/assembly.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace kfp {

namespace {

BasisSpec velocity_part(const BasisSpec& basis) { return BasisSpec(basis.levels()); }

void require_model_basis(const BasisSpec& basis) {
  if (basis.velocity_dim() != 2) throw ArgumentError("assembly", "model operators require d = 2");
  if (basis.torus()) throw ArgumentError("assembly", "model operators act on the velocity basis only");
}

void require_torus_basis(const FieldSpec& field, const BasisSpec& basis) {
  field.validate();
  if (!basis.torus()) throw ArgumentError("assembly", "full operator needs a torus factor in the basis");
  if (!field.torus_period) throw ArgumentError("assembly", "full operator needs a periodic field");
  const TorusFactor& t = *basis.torus();
  if (t.dimension != field.dimension || basis.velocity_dim() != field.dimension)
    throw ArgumentError("assembly", "basis dimensions do not match the field dimension");
  if (t.period != *field.torus_period) throw ArgumentError("assembly", "basis period differs from the field period");
}

SparseMatrixC dense_to_sparse(const Eigen::MatrixXd& m) {
  std::vector<Eigen::Triplet<Complex>> t;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != 0.0) t.emplace_back(i, j, m(i, j));
  SparseMatrixC s(m.rows(), m.cols());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SparseMatrixC diagonal(const Eigen::VectorXd& d) {
  SparseMatrixC s(d.size(), d.size());
  std::vector<Eigen::Triplet<Complex>> t;
  for (Index i = 0; i < d.size(); ++i)
    if (d(i) != 0.0) t.emplace_back(i, i, d(i));
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

// D_k on the space grid: I (x) .. (x) D (x) .. (x) I.
SparseMatrixC space_derivative(int k, const TorusFactor& t) {
  const SparseMatrixC d = dense_to_sparse(fourier_derivative(t.points, t.period));
  SparseMatrixC out = identity(1);
  for (int j = 0; j < t.dimension; ++j) out = kron(out, j == k ? d : identity(t.points));
  return out;
}

struct FieldSamples {
  std::vector<Eigen::VectorXd> grad;      // per coordinate, over nodes
  std::vector<Eigen::VectorXd> magnetic;  // per component, over nodes
};

FieldSamples sample(const FieldSpec& field, const TorusFactor& t) {
  const Eigen::MatrixXd nodes = torus_nodes(t);
  const Index n = nodes.rows();
  FieldSamples s;
  s.grad.assign(static_cast<std::size_t>(field.dimension), Eigen::VectorXd(n));
  s.magnetic.assign(field.magnetic.size(), Eigen::VectorXd(n));
  for (Index p = 0; p < n; ++p) {
    const Eigen::VectorXd x = nodes.row(p).transpose();
    const Eigen::VectorXd g = field.gradient(x);
    for (int k = 0; k < field.dimension; ++k) s.grad[static_cast<std::size_t>(k)](p) = g(k);
    const Eigen::VectorXd b = field.magnetic_at(x);
    for (std::size_t c = 0; c < field.magnetic.size(); ++c) s.magnetic[c](p) = b(static_cast<Index>(c));
  }
  return s;
}

// Assembles  sign_t * sum_k D_k (x) v_k  + sign_f * [ - sum_k dV_k (x) d_k - sum_c b_c (x) L_c ]
//            + I (x) H  - shift.
SparseMatrixC kinetic(const FieldSpec& field, const BasisSpec& basis, double sign_transport, double sign_force,
                      Shift shift) {
  const TorusFactor& t = *basis.torus();
  const BasisSpec vb = velocity_part(basis);
  const SparseMatrixC ispace = identity(basis.space_size());
  const FieldSamples fs = sample(field, t);

  SparseMatrixC k(basis.size(), basis.size());
  for (int c = 0; c < field.dimension; ++c) {
    k += sign_transport * kron(space_derivative(c, t), position(c, vb));
    k -= sign_force * kron(diagonal(fs.grad[static_cast<std::size_t>(c)]), derivative(c, vb));
  }
  const auto gens = magnetic_generators(vb);
  for (std::size_t c = 0; c < gens.size(); ++c) k -= sign_force * kron(diagonal(fs.magnetic[c]), gens[c]);
  k += kron(ispace, oscillator(vb).matrix);
  if (shift == Shift::K) k -= (0.5 * field.dimension) * identity(basis.size());
  k.prune(Complex(0.0));
  return k;
}

void subtract_shift(SparseMatrixC& m, Shift shift, int d) {
  if (shift == Shift::K) m -= (0.5 * d) * identity(m.rows());
}

}  // namespace

const char* to_string(Shift s) { return s == Shift::K ? "K" : "Kcheck"; }

const char* to_string(Family f) {
  switch (f) {
    case Family::full: return "full";
    case Family::adjoint: return "adjoint";
    case Family::kolmogorov: return "P0";
    case Family::hat: return "hat";
    case Family::check: return "check";
    case Family::transported: return "transported";
  }
  return "?";
}

std::string Provenance::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "family=" << to_string(family) << " shift=" << to_string(shift) << " basis=" << basis.describe();
  if (field) {
    os << " V=" << to_string(field->potential);
    for (std::size_t c = 0; c < field->magnetic.size(); ++c) os << " B" << c + 1 << "=" << to_string(field->magnetic[c]);
  }
  if (family == Family::hat || family == Family::check || family == Family::transported) {
    os << " w=(" << params.w(0) << "," << params.w(1) << ") b=" << params.b << " xi=(" << params.xi(0) << ","
       << params.xi(1) << ") rho=(" << params.rho(0) << "," << params.rho(1) << ") bprime=(" << params.bprime(0)
       << "," << params.bprime(1) << ")";
  }
  return os.str();
}

Eigen::MatrixXd fourier_derivative(int M, double period) {
  if (M < 2) throw ArgumentError("assembly", "Fourier grid needs at least 2 points");
  const double h = 2.0 * std::numbers::pi / M;
  const double scale = 2.0 * std::numbers::pi / period;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      if (i == j) continue;
      const int k = i - j;
      const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      const double x = 0.5 * k * h;
      d(i, j) = scale * 0.5 * sgn * (M % 2 == 0 ? 1.0 / std::tan(x) : 1.0 / std::sin(x));
    }
  // Enforce exact antisymmetry against rounding in tan/sin.
  return 0.5 * (d - d.transpose());
}

Eigen::MatrixXd torus_nodes(const TorusFactor& t) {
  Index n = 1;
  for (int k = 0; k < t.dimension; ++k) n *= t.points;
  Eigen::MatrixXd x(n, t.dimension);
  for (Index p = 0; p < n; ++p) {
    Index rest = p;
    for (int k = t.dimension; k-- > 0;) {
      x(p, k) = t.period * static_cast<double>(rest % t.points) / t.points;
      rest /= t.points;
    }
  }
  return x;
}

std::vector<SparseMatrixC> magnetic_generators(const BasisSpec& vb) {
  // L_jk = v_j d_k - v_k d_j.
  if (vb.velocity_dim() == 2) return {angular_momentum(0, 1, vb).matrix};
  if (vb.velocity_dim() == 3)
    return {angular_momentum(1, 2, vb).matrix, angular_momentum(2, 0, vb).matrix, angular_momentum(0, 1, vb).matrix};
  throw ArgumentError("assembly", "magnetic coupling defined for d = 2, 3 only");
}

DiscretizedOperator assemble_full(const FieldSpec& field, const BasisSpec& basis, Shift shift) {
  require_torus_basis(field, basis);
  SparseMatrixC k = kinetic(field, basis, +1.0, +1.0, shift);
  return {{std::move(k), Symmetry::none}, {Family::full, shift, basis, field, {}}};
}

DiscretizedOperator assemble_adjoint(const FieldSpec& field, const BasisSpec& basis, Shift shift) {
  require_torus_basis(field, basis);
  SparseMatrixC k = kinetic(field, basis, -1.0, -1.0, shift);
  return {{std::move(k), Symmetry::none}, {Family::adjoint, shift, basis, field, {}}};
}

DiscretizedOperator assemble_P0(const BasisSpec& basis) {
  if (!basis.torus()) throw ArgumentError("assembly", "P0 needs a torus factor in the basis");
  const TorusFactor& t = *basis.torus();
  if (t.dimension != basis.velocity_dim()) throw ArgumentError("assembly", "basis dimensions differ");
  const BasisSpec vb = velocity_part(basis);
  SparseMatrixC lap(vb.size(), vb.size());
  for (int c = 0; c < vb.velocity_dim(); ++c) {
    const SparseMatrixC d = derivative(c, vb);
    lap -= d * d;
  }
  SparseMatrixC p = kron(identity(basis.space_size()), lap);
  for (int c = 0; c < t.dimension; ++c) p -= kron(space_derivative(c, t), position(c, vb));
  p.prune(Complex(0.0));
  return {{std::move(p), Symmetry::none}, {Family::kolmogorov, Shift::Kcheck, basis, std::nullopt, {}}};
}

DiscretizedOperator assemble_hat(const ModelParams& p, const BasisSpec& basis, Shift shift) {
  require_model_basis(basis);
  SparseMatrixC k = oscillator(basis).matrix;
  for (int c = 0; c < 2; ++c) {
    k += (kI * p.xi(c)) * position(c, basis);
    k -= p.w(c) * derivative(c, basis);
  }
  k -= p.b * angular_momentum(0, 1, basis).matrix;
  subtract_shift(k, shift, 2);
  k.prune(Complex(0.0));
  return {{std::move(k), Symmetry::none}, {Family::hat, shift, basis, std::nullopt, p}};
}

DiscretizedOperator assemble_check(const ModelParams& p, const BasisSpec& basis, Shift shift) {
  require_model_basis(basis);
  if (p.rho(0) < 0.0 || p.rho(1) < 0.0) throw ArgumentError("assembly", "rho components must be non-negative");
  SparseMatrixC k = oscillator(basis).matrix;
  for (int c = 0; c < 2; ++c) k += (kI * p.rho(c)) * position(c, basis);
  k -= p.bprime(0) * angular_momentum(0, 1, basis).matrix;
  const SparseMatrixC v1 = position(0, basis), v2 = position(1, basis);
  const SparseMatrixC d1 = derivative(0, basis), d2 = derivative(1, basis);
  k += (kI * p.bprime(1)) * SparseMatrixC(v1 * v2 - d1 * d2);
  subtract_shift(k, shift, 2);
  k.prune(Complex(0.0));
  return {{std::move(k), Symmetry::none}, {Family::check, shift, basis, std::nullopt, p}};
}

SparseOperator mixing_generator(const BasisSpec& basis) {
  if (basis.velocity_dim() < 2) throw ArgumentError("assembly", "mixing generator needs two velocity coordinates");
  const Ladder l1 = ladder(basis.levels(0));
  const Ladder l2 = ladder(basis.levels(1));
  SparseMatrixC s = velocity_factor(l1.raise, 0, basis) * velocity_factor(l2.lower, 1, basis) +
                    velocity_factor(l2.raise, 1, basis) * velocity_factor(l1.lower, 0, basis);
  return {s, Symmetry::hermitian};
}

DiscretizedOperator assemble_transported(const ModelParams& p, const BasisSpec& basis, Shift shift) {
  require_model_basis(basis);
  SparseMatrixC k = oscillator(basis).matrix;
  for (int c = 0; c < 2; ++c) {
    k += (kI * p.xi(c)) * position(c, basis);
    k -= p.w(c) * derivative(c, basis);
  }
  k -= p.bprime(0) * angular_momentum(0, 1, basis).matrix;
  k += (kI * p.bprime(1)) * mixing_generator(basis).matrix;
  subtract_shift(k, shift, 2);
  k.prune(Complex(0.0));
  return {{std::move(k), Symmetry::none}, {Family::transported, shift, basis, std::nullopt, p}};
}

VelocityPolynomial hat_polynomial(const ModelParams& p) {
  VelocityPolynomial poly;
  for (int c = 0; c < 2; ++c) {
    poly.add(kI * p.xi(c), {pos(c)});
    poly.add(-p.w(c), {der(c)});
  }
  poly.add(-p.b, {pos(0), der(1)});
  poly.add(p.b, {pos(1), der(0)});
  poly.add_oscillator(1.0);
  return poly;
}

DiscretizedOperator reassemble(const Provenance& p) {
  switch (p.family) {
    case Family::full: return assemble_full(p.field.value(), p.basis, p.shift);
    case Family::adjoint: return assemble_adjoint(p.field.value(), p.basis, p.shift);
    case Family::kolmogorov: return assemble_P0(p.basis);
    case Family::hat: return assemble_hat(p.params, p.basis, p.shift);
    case Family::check: return assemble_check(p.params, p.basis, p.shift);
    case Family::transported: return assemble_transported(p.params, p.basis, p.shift);
  }
  throw ArgumentError("assembly", "unknown family");
}

}  // namespace kfp
