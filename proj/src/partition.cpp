#include "kfp/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace kfp {

namespace {

// Row-major lattice over the box with `per_axis` points per coordinate.
template <class F>
void for_each_grid_point(const Box& box, int per_axis, F&& f) {
  const int d = box.dimension();
  Index total = 1;
  for (int k = 0; k < d; ++k) total *= per_axis;
  Eigen::VectorXd x(d);
  for (Index p = 0; p < total; ++p) {
    Index rest = p;
    for (int k = d; k-- > 0;) {
      const Index i = rest % per_axis;
      rest /= per_axis;
      x(k) = per_axis == 1 ? 0.5 * (box.lo(k) + box.hi(k))
                           : box.lo(k) + (box.hi(k) - box.lo(k)) * static_cast<double>(i) / (per_axis - 1);
    }
    f(x);
  }
}

double bump(double t) {
  if (t >= 1.0) return 0.0;
  const double u = 1.0 - t * t;
  return u * u * u;
}

Eigen::VectorXd chis(const Covering& c, const Eigen::VectorXd& x) {
  Eigen::VectorXd chi(static_cast<Index>(c.centers.size()));
  for (std::size_t j = 0; j < c.centers.size(); ++j)
    chi(static_cast<Index>(j)) = bump((x - c.centers[j]).norm() / c.radii[j]);
  return chi;
}

void check_box(const Box& box) {
  if (box.lo.size() != box.hi.size() || box.lo.size() == 0) throw ArgumentError("partition", "malformed box");
  if (((box.hi - box.lo).array() <= 0.0).any()) throw ArgumentError("partition", "box must have positive extent");
}

}  // namespace

Box Box::square(int d, double half_width) {
  return {Eigen::VectorXd::Constant(d, -half_width), Eigen::VectorXd::Constant(d, half_width)};
}

double radius(const FieldSpec& field, const Eigen::VectorXd& x, double s, double delta) {
  if (!(s > 0.0 && s < 1.0)) throw ArgumentError("partition", "s must lie in (0, 1)");
  if (!(delta > 0.0)) throw ArgumentError("partition", "delta must be positive");
  return delta * std::pow(japanese_bracket_grad(field, x), -s);
}

bool s_in_window(double s, double rho0, double gamma0) {
  return std::max(2.0 / 3.0 - rho0, gamma0) < s && s < 1.0 / 3.0;
}

SlowVariation slow_variation_scan(const FieldSpec& field, double s, double delta, const Box& box, int n_samples,
                                  double rho0, std::uint64_t seed) {
  check_box(box);
  const int d = box.dimension();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  SlowVariation sv;
  sv.min_ratio = std::numeric_limits<double>::infinity();
  sv.max_ratio = 0.0;
  for (int n = 0; n < n_samples; ++n) {
    Eigen::VectorXd x(d), dir(d);
    for (int k = 0; k < d; ++k) x(k) = box.lo(k) + (box.hi(k) - box.lo(k)) * unit(rng);
    for (int k = 0; k < d; ++k) dir(k) = normal(rng);
    const double rx = radius(field, x, s, 1.0);
    const Eigen::VectorXd y = x + (delta * rx * unit(rng) / dir.norm()) * dir;
    const double ratio = rx / radius(field, y, s, 1.0);
    sv.min_ratio = std::min(sv.min_ratio, ratio);
    sv.max_ratio = std::max(sv.max_ratio, ratio);

    const Derivatives dv = eval_with_derivatives(field.potential, x);
    const double hnorm = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dv.hessian).eigenvalues().cwiseAbs().maxCoeff();
    const double bracket = std::sqrt(dv.gradient.squaredNorm() + 1.0);
    sv.hessian_ratio = std::max(sv.hessian_ratio, hnorm / std::pow(bracket, 1.0 - rho0));
    ++sv.pairs;
  }
  return sv;
}

double measure_delta0(const FieldSpec& field, double s, const Box& box, int n_samples, double rho0) {
  double delta = 1.0;
  for (int k = 0; k < 88; ++k, delta *= 0.9) {
    const SlowVariation sv = slow_variation_scan(field, s, delta, box, n_samples, rho0);
    if (sv.min_ratio >= delta && sv.max_ratio <= 1.0 / delta) return delta;
  }
  return 0.0;
}

Covering cover(const FieldSpec& field, const Box& box, double s, double delta, double separation) {
  check_box(box);
  if (!(separation > 0.0 && separation < 1.0)) throw ArgumentError("partition", "separation must lie in (0, 1)");
  Covering c;
  c.box = box;
  c.s = s;
  c.delta = delta;

  // Smallest radius on the box, from a coarse scan refined by the candidate spacing.
  double rmin = std::numeric_limits<double>::infinity();
  for_each_grid_point(box, 41, [&](const Eigen::VectorXd& x) { rmin = std::min(rmin, radius(field, x, s, delta)); });
  const double h = 0.1 * rmin;

  const int d = box.dimension();
  std::vector<int> counts(static_cast<std::size_t>(d));
  Index total = 1;
  for (int k = 0; k < d; ++k) {
    counts[static_cast<std::size_t>(k)] = static_cast<int>(std::ceil((box.hi(k) - box.lo(k)) / h)) + 1;
    total *= counts[static_cast<std::size_t>(k)];
  }
  Eigen::VectorXd x(d);
  for (Index p = 0; p < total; ++p) {
    Index rest = p;
    for (int k = d; k-- > 0;) {
      const Index i = rest % counts[static_cast<std::size_t>(k)];
      rest /= counts[static_cast<std::size_t>(k)];
      x(k) = std::min(box.hi(k), box.lo(k) + h * static_cast<double>(i));
    }
    bool separated = true;
    for (std::size_t j = 0; j < c.centers.size() && separated; ++j)
      separated = (x - c.centers[j]).norm() >= separation * c.radii[j];
    if (!separated) continue;
    c.centers.push_back(x);
    c.radii.push_back(radius(field, x, s, delta));
    c.weights.push_back(std::pow(japanese_bracket_grad(field, x), s));
  }
  return c;
}

CoverageStats coverage_stats(const Covering& c, int per_axis) {
  CoverageStats st;
  Index covered = 0;
  for_each_grid_point(c.box, per_axis, [&](const Eigen::VectorXd& y) {
    int count = 0;
    double depth = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c.centers.size(); ++j) {
      const double t = (y - c.centers[j]).norm() / c.radii[j];
      depth = std::min(depth, t);
      if (t < 1.0) ++count;
    }
    if (count > 0) ++covered;
    st.overlap = std::max(st.overlap, count);
    st.max_depth = std::max(st.max_depth, depth);
    ++st.probes;
  });
  st.coverage = static_cast<double>(covered) / static_cast<double>(st.probes);
  return st;
}

Eigen::VectorXd partition_eval(const Covering& c, const Eigen::VectorXd& x) {
  const Eigen::VectorXd chi = chis(c, x);
  const double norm = chi.norm();
  if (!(norm > 0.0)) throw DomainError("partition", "point lies outside every ball of the covering");
  return chi / norm;
}

PartitionCheck check_partition(const Covering& c, int per_axis) {
  PartitionCheck pc;
  const int d = c.box.dimension();
  const std::size_t m = c.centers.size();
  const double rmin = *std::min_element(c.radii.begin(), c.radii.end());
  const double h = 1e-5 * rmin;
  // Central differences of every phi_j at x, scaled by the ball weights.
  auto scaled_gradients = [&](const Eigen::VectorXd& x) {
    Eigen::MatrixXd grad(static_cast<Index>(m), d);
    for (int k = 0; k < d; ++k) {
      Eigen::VectorXd xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      grad.col(k) = (partition_eval(c, xp) - partition_eval(c, xm)) / (2.0 * h);
    }
    Eigen::VectorXd g = grad.rowwise().norm();
    for (std::size_t j = 0; j < m; ++j) g(static_cast<Index>(j)) /= c.weights[j];
    return g;
  };

  std::vector<double> best(m, 0.0);
  std::vector<Eigen::VectorXd> argbest(m);
  for_each_grid_point(c.box, per_axis, [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd phi = partition_eval(c, x);
    pc.max_normalization_error = std::max(pc.max_normalization_error, std::abs(phi.squaredNorm() - 1.0));
    const Eigen::VectorXd g = scaled_gradients(x);
    for (std::size_t j = 0; j < m; ++j) {
      if (g(static_cast<Index>(j)) > best[j]) {
        best[j] = g(static_cast<Index>(j));
        argbest[j] = x;
      }
    }
    ++pc.probes;
  });

  // The peaks of |grad phi_j| sit where the normalizing sum is small and are
  // narrower than a probe cell, so each ball's best probe seeds a compass
  // search that climbs to the local maximum.
  double spacing = 0.0;
  for (int k = 0; k < d; ++k) spacing = std::max(spacing, (c.box.hi(k) - c.box.lo(k)) / std::max(per_axis - 1, 1));
  for (std::size_t j = 0; j < m; ++j) {
    if (best[j] == 0.0) continue;
    Eigen::VectorXd x = argbest[j];
    double step = std::min(spacing, c.radii[j]);
    while (step > 1e-4 * c.radii[j]) {
      bool moved = false;
      for (int k = 0; k < d && !moved; ++k) {
        for (double sgn : {1.0, -1.0}) {
          Eigen::VectorXd y = x;
          y(k) = std::clamp(y(k) + sgn * step, c.box.lo(k), c.box.hi(k));
          const double v = scaled_gradients(y)(static_cast<Index>(j));
          if (v > best[j]) {
            best[j] = v;
            x = y;
            moved = true;
            break;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
    pc.gradient_constant = std::max(pc.gradient_constant, best[j]);
  }
  return pc;
}

std::string centers_csv(const Covering& c) {
  std::ostringstream os;
  const int d = c.box.dimension();
  for (int k = 0; k < d; ++k) os << 'x' << k + 1 << ',';
  os << "r\n";
  char buf[40];
  for (std::size_t j = 0; j < c.centers.size(); ++j) {
    for (int k = 0; k < d; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", c.centers[j](k));
      os << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", c.radii[j]);
    os << buf << '\n';
  }
  return os.str();
}

}  // namespace kfp
