#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kfp/field.hpp"

namespace kfp {

/// Axis-aligned box [lo, hi] in R^d.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Box square(int d, double half_width);
  int dimension() const { return static_cast<int>(lo.size()); }
};

/// delta * <grad V(x)>^{-s}.
double radius(const FieldSpec& field, const Eigen::VectorXd& x, double s, double delta);

/// max(2/3 - rho0, gamma0) < s < 1/3.
bool s_in_window(double s, double rho0, double gamma0);

struct SlowVariation {
  double min_ratio = 1.0;  // min r(x)/r(y) over sampled pairs |x - y| <= delta r(x)
  double max_ratio = 1.0;
  double hessian_ratio = 0.0;  // max |D^2 V(x)| / <grad V(x)>^{1 - rho0} over samples
  int pairs = 0;
};

SlowVariation slow_variation_scan(const FieldSpec& field, double s, double delta, const Box& box, int n_samples,
                                  double rho0 = 0.5, std::uint64_t seed = 7);

/// Largest delta on the grid 0.9^k (k = 0..87) whose scanned ratios lie in [delta, 1/delta].
double measure_delta0(const FieldSpec& field, double s, const Box& box, int n_samples, double rho0 = 0.5);

struct Covering {
  Box box;
  double s = 0.3;
  double delta = 0.1;
  std::vector<Eigen::VectorXd> centers;
  std::vector<double> radii;  // delta r(x_j)
  std::vector<double> weights;  // <grad V(x_j)>^s
};

/// Greedy covering: candidates on a grid of spacing 0.1 * (smallest radius
/// on the box), visited in row-major order; a candidate becomes a center when
/// it is at distance >= separation * delta r(c) from every existing center c.
/// Maximality puts every candidate within that distance of a center.
Covering cover(const FieldSpec& field, const Box& box, double s, double delta, double separation = 0.75);

struct CoverageStats {
  double coverage = 0.0;  // fraction of probes inside at least one ball
  int overlap = 0;        // max number of balls containing a probe
  double max_depth = 0.0; // max over probes of min_j |y - x_j| / r_j
  Index probes = 0;
};

/// Probe grid with `per_axis` points per coordinate (endpoints included).
CoverageStats coverage_stats(const Covering& c, int per_axis);

/// phi_j = chi_j / sqrt(sum_k chi_k^2), chi_j = (1 - t^2)^3 with t = |x - x_j| / r_j.
/// Throws DomainError if x lies outside every ball.
Eigen::VectorXd partition_eval(const Covering& c, const Eigen::VectorXd& x);

struct PartitionCheck {
  double max_normalization_error = 0.0;  // max |sum phi_j^2 - 1|
  double gradient_constant = 0.0;        // max_j |grad phi_j| / <grad V(x_j)>^s
  Index probes = 0;
};

/// Normalisation error and fitted gradient constant (central differences)
/// on a probe grid with `per_axis` points per coordinate. The gradient
/// constant climbs from the best probe of each ball to its local peak.
PartitionCheck check_partition(const Covering& c, int per_axis);

/// "x1,...,xd,r" rows.
std::string centers_csv(const Covering& c);

}  // namespace kfp
