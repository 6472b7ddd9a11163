#pragma once

#include <Eigen/Core>

#include "kfp/assembly.hpp"

namespace kfp {

/// Rotation angles (t_1, t_2), each normalised to (-pi, pi].
struct RotationAngles {
  Eigen::Vector2d t = Eigen::Vector2d::Zero();

  static RotationAngles normalized(double t1, double t2);
};

struct Transported {
  Eigen::Vector2d w;
  Eigen::Vector2d xi;
  Eigen::Vector2d bprime;
};

/// Coordinate-wise phase-space rotation of (w_k, xi_k) by t_k, and
///   b'_1 = b cos(t_2 - t_1),  b'_2 = b sin(t_2 - t_1).
Transported transport(const Eigen::Vector2d& w, const Eigen::Vector2d& xi, double b, const RotationAngles& t);

struct Reduction {
  RotationAngles angles;
  Eigen::Vector2d rho;
};

/// Angles with transport(w, xi, ., t).w = 0 and .xi = rho = sqrt(w_k^2 + xi_k^2);
/// t_k = 0 when rho_k = 0.
Reduction reduce(const Eigen::Vector2d& w, const Eigen::Vector2d& xi);

/// With v = a + a^dagger and d/dv = (a - a^dagger)/2, the harmonic rotations
/// act on the pair (w/2, xi) rather than (w, xi).
inline Eigen::Vector2d symplectic_drift(const Eigen::Vector2d& w) { return 0.5 * w; }

/// Sign s in the Hermite phases exp(i s t_k n_k), fixed by calibrate_phase_sign().
inline constexpr int kPhaseSign = -1;

/// diag(exp(i s (t_1 n_1 + t_2 n_2))).
SparseOperator rotation_unitary(const RotationAngles& t, const BasisSpec& basis, int sign = kPhaseSign);

/// Interior residual || P (T^-1 Khat T - Khat') P ||_F / || P Khat P ||_F where
/// Khat' is the transported operator: drift 2 w'', covariable xi'' from the
/// rotation of (w/2, xi), and magnetic pair (b'_1, b'_2) acting through L_12 and S.
double verify_conjugation(const Eigen::Vector2d& w, double b, const Eigen::Vector2d& xi, const RotationAngles& t,
                          const BasisSpec& basis, int margin = 4, int sign = kPhaseSign);

/// Residual of verify_conjugation for each sign on one fixed probe point;
/// returns the sign whose residual vanishes.
struct PhaseCalibration {
  int sign;
  double residual_plus;
  double residual_minus;
};
PhaseCalibration calibrate_phase_sign(const BasisSpec& basis);

}  // namespace kfp
