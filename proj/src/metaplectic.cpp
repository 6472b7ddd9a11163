#include "kfp/metaplectic.hpp"

#include <cmath>
#include <numbers>

namespace kfp {

namespace {

double wrap(double t) {
  constexpr double pi = std::numbers::pi;
  double r = std::remainder(t, 2.0 * pi);  // [-pi, pi]
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

double frobenius(const SparseMatrixC& m) { return m.norm(); }

}  // namespace

RotationAngles RotationAngles::normalized(double t1, double t2) { return {Eigen::Vector2d(wrap(t1), wrap(t2))}; }

Transported transport(const Eigen::Vector2d& w, const Eigen::Vector2d& xi, double b, const RotationAngles& t) {
  Transported r;
  for (int k = 0; k < 2; ++k) {
    const double c = std::cos(t.t(k)), s = std::sin(t.t(k));
    r.w(k) = w(k) * c - xi(k) * s;
    r.xi(k) = w(k) * s + xi(k) * c;
  }
  const double dt = t.t(1) - t.t(0);
  r.bprime = Eigen::Vector2d(b * std::cos(dt), b * std::sin(dt));
  return r;
}

Reduction reduce(const Eigen::Vector2d& w, const Eigen::Vector2d& xi) {
  Reduction r;
  for (int k = 0; k < 2; ++k) {
    r.rho(k) = std::hypot(w(k), xi(k));
    r.angles.t(k) = r.rho(k) > 0.0 ? std::atan2(w(k), xi(k)) : 0.0;
  }
  r.angles = RotationAngles::normalized(r.angles.t(0), r.angles.t(1));
  return r;
}

SparseOperator rotation_unitary(const RotationAngles& t, const BasisSpec& basis, int sign) {
  if (basis.velocity_dim() != 2) throw ArgumentError("metaplectic", "rotation unitary requires d = 2");
  if (sign != 1 && sign != -1) throw ArgumentError("metaplectic", "phase sign must be +1 or -1");
  const Index nv = basis.velocity_size();
  SparseMatrixC u(basis.size(), basis.size());
  u.reserve(Eigen::VectorXi::Constant(basis.size(), 1));
  for (Index s = 0; s < basis.space_size(); ++s)
    for (Index i = 0; i < nv; ++i) {
      const auto n = basis.multi_index(i);
      const double phase = sign * (t.t(0) * n[0] + t.t(1) * n[1]);
      u.insert(s * nv + i, s * nv + i) = std::polar(1.0, phase);
    }
  u.makeCompressed();
  return {u, Symmetry::none};
}

double verify_conjugation(const Eigen::Vector2d& w, double b, const Eigen::Vector2d& xi, const RotationAngles& t,
                          const BasisSpec& basis, int margin, int sign) {
  ModelParams p;
  p.w = w;
  p.b = b;
  p.xi = xi;
  const SparseMatrixC khat = assemble_hat(p, basis).matrix();

  const Transported tr = transport(symplectic_drift(w), xi, b, t);
  ModelParams q;
  q.w = 2.0 * tr.w;
  q.xi = tr.xi;
  q.bprime = tr.bprime;
  const SparseMatrixC target = assemble_transported(q, basis).matrix();

  const SparseMatrixC u = rotation_unitary(t, basis, sign).matrix;
  const SparseMatrixC uinv = u.adjoint();
  const SparseMatrixC conj = uinv * khat * u;

  const auto idx = InteriorProjector{margin}.indices(basis);
  const double denom = frobenius(submatrix(khat, idx, idx));
  const SparseMatrixC diff = conj - target;
  return frobenius(submatrix(diff, idx, idx)) / denom;
}

PhaseCalibration calibrate_phase_sign(const BasisSpec& basis) {
  const Eigen::Vector2d w(0.7, -1.3), xi(0.4, 0.9);
  const double b = 0.8;
  const RotationAngles t = RotationAngles::normalized(0.9, -0.4);
  PhaseCalibration c;
  c.residual_plus = verify_conjugation(w, b, xi, t, basis, 4, +1);
  c.residual_minus = verify_conjugation(w, b, xi, t, basis, 4, -1);
  c.sign = c.residual_plus < c.residual_minus ? +1 : -1;
  return c;
}

}  // namespace kfp
