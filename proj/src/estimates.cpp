#include "kfp/estimates.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace kfp {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void add_gram(SparseMatrixC& m, double weight, const SparseMatrixC& t) {
  if (weight == 0.0) return;
  m += weight * SparseMatrixC(t.adjoint() * t);
}

std::string monomial_name(const std::vector<int>& alpha, const std::vector<int>& beta) {
  std::string s;
  for (std::size_t k = 0; k < alpha.size(); ++k)
    if (alpha[k]) s += "v" + std::to_string(k + 1) + (alpha[k] > 1 ? "^" + std::to_string(alpha[k]) : "");
  for (std::size_t k = 0; k < beta.size(); ++k)
    if (beta[k]) s += "d" + std::to_string(k + 1) + (beta[k] > 1 ? "^" + std::to_string(beta[k]) : "");
  return s.empty() ? "1" : s;
}

double relative_change(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); }

}  // namespace

const char* to_string(FormVariant v) {
  switch (v) {
    case FormVariant::prop31: return "prop31";
    case FormVariant::interpolated: return "interpolated";
    case FormVariant::hypomax_model: return "hypomax-model";
    case FormVariant::inegmaxhom: return "inegmaxhom";
  }
  return "?";
}

FormVariant parse_variant(const std::string& name) {
  for (FormVariant v : {FormVariant::prop31, FormVariant::interpolated, FormVariant::hypomax_model,
                        FormVariant::inegmaxhom})
    if (name == to_string(v)) return v;
  throw ArgumentError("estimates", "unknown form variant '" + name + "'");
}

QuadraticForm lhs_form(const ModelParams& p, const BasisSpec& basis, FormVariant variant) {
  if (basis.velocity_dim() != 2 || basis.torus()) throw ArgumentError("estimates", "forms act on the 2-d velocity basis");
  QuadraticForm q;
  SparseMatrixC m(basis.size(), basis.size());
  const SparseMatrixC id = identity(basis.size());
  const double wn = p.w.norm();
  const double rn = p.rho.norm();

  auto term = [&](double weight, const SparseMatrixC& t, const std::string& name) {
    add_gram(m, weight, t);
    q.terms.push_back(fmt(weight) + " * |" + (name.empty() ? "f" : name + " f") + "|^2");
  };

  switch (variant) {
    case FormVariant::prop31:
      term(std::pow(wn, 4.0 / 3.0), id, "");
      [[fallthrough]];
    case FormVariant::interpolated: {
      const double w23 = std::pow(wn, 2.0 / 3.0);
      for (int k = 0; k < 2; ++k) term(w23, derivative(k, basis), "d" + std::to_string(k + 1));
      for (int k = 0; k < 2; ++k) term(w23, position(k, basis), "v" + std::to_string(k + 1));
      break;
    }
    case FormVariant::hypomax_model: {
      term(std::pow(wn, 4.0 / 3.0), id, "");
      const SparseMatrixC t = assemble_hat(p, basis).matrix() - oscillator(basis).matrix;
      term(1.0, t, "(i v.xi - w.grad_v - b L12)");
      break;
    }
    case FormVariant::inegmaxhom:
      term(1.0, SparseMatrixC(p.rho(0) * position(0, basis) + p.rho(1) * position(1, basis)), "(v.rho)");
      term(std::pow(rn, 4.0 / 3.0), id, "");
      break;
  }
  for (const auto& [alpha, beta] : monomial_indices(2, 2))
    term(1.0, monomial_op(alpha, beta, basis).matrix, monomial_name(alpha, beta));

  m.prune(Complex(0.0));
  // Hermitian up to rounding in the products; symmetrise exactly.
  SparseMatrixC h = 0.5 * (m + SparseMatrixC(m.adjoint()));
  q.matrix = {h, Symmetry::hermitian};
  return q;
}

EstimateReport estimate_constant(const SparseMatrixC& K, const SparseMatrixC& M, const BasisSpec& basis, int margin,
                                 const PencilOptions& options) {
  if (K.rows() != basis.size() || K.cols() != basis.size() || M.rows() != basis.size() || M.cols() != basis.size())
    throw DimensionError("estimates", "operator and form sizes must match the basis");
  const auto idx = InteriorProjector{margin}.indices(basis);
  if (idx.empty()) throw ArgumentError("estimates", "interior block is empty");
  const SparseMatrixC kc = column_block(K, idx);
  const SparseMatrixC g = SparseMatrixC(kc.adjoint() * kc) + identity(static_cast<Index>(idx.size()));
  const SparseMatrixC mc = submatrix(M, idx, idx);

  const PencilResult r = largest_generalized_eigenpair(mc, g, options);
  EstimateReport rep;
  rep.C_est = r.value;
  rep.residual = r.residual;
  rep.iterations = r.iterations;
  rep.converged = r.converged;
  rep.levels = basis.levels();
  rep.margin = margin;
  rep.extremal = r.vector;

  // Certificate from K itself, not from the factored pencil.
  const VectorXc& u = r.vector;
  const double lhs = u.dot(mc * u).real();
  const double rhs = (kc * u).squaredNorm() + u.squaredNorm();
  rep.certificate_ratio = lhs / rhs;
  rep.certificate_ok = lhs <= (rep.C_est + 1e-8) * rhs;
  return rep;
}

SingularResult sigma_min_interior(const SparseMatrixC& K, const BasisSpec& basis, int margin,
                                  const PencilOptions& options) {
  const auto idx = InteriorProjector{margin}.indices(basis);
  return smallest_singular_value(column_block(K, idx), options);
}

SparseMatrixC airy_operator(double rho, const BasisSpec& basis_1d) {
  if (basis_1d.velocity_dim() != 1 || basis_1d.torus())
    throw ArgumentError("estimates", "Airy operator acts on a 1-d velocity basis");
  const SparseMatrixC d = derivative(0, basis_1d);
  SparseMatrixC a = (kI * rho) * position(0, basis_1d) - SparseMatrixC(d * d);
  a.prune(Complex(0.0));
  return a;
}

int airy_levels(double rho, int cap) {
  const double c = std::ceil(8.0 * std::cbrt(std::max(rho, 0.0)));
  return std::min(cap, std::max(64, static_cast<int>(c * c)));
}

AiryScan airy_scan(const std::vector<double>& rhos, int margin, int levels_override, double refine) {
  AiryScan scan;
  for (double rho : rhos) {
    if (!(rho >= 0.0)) throw ArgumentError("estimates", "Airy scan needs rho >= 0");
    AiryPoint pt;
    pt.rho = rho;
    const int base = levels_override > 0 ? levels_override : airy_levels(rho);
    pt.levels = static_cast<int>(std::ceil(base * refine - 1e-9));
    const BasisSpec basis(1, pt.levels);
    const SingularResult s = sigma_min_interior(airy_operator(rho, basis), basis, margin);
    pt.sigma_min = s.sigma;
    pt.converged = s.converged;
    scan.points.push_back(pt);
  }

  std::vector<AiryPoint> sorted = scan.points;
  std::sort(sorted.begin(), sorted.end(), [](const AiryPoint& a, const AiryPoint& b) { return a.rho < b.rho; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].rho > 0.0 && sorted[i].sigma_min < sorted[i - 1].sigma_min) scan.monotone = false;
  // A resolved point grows like rho^{2/3}; a truncated one either stalls or
  // follows the bounded position block and grows like rho.
  scan.inadequate = !scan.monotone;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const AiryPoint &a = sorted[i - 1], &b = sorted[i];
    if (a.rho <= 0.0 || a.sigma_min <= 0.0 || b.rho <= a.rho) continue;
    if (std::log(b.sigma_min / a.sigma_min) / std::log(b.rho / a.rho) > 0.85) scan.inadequate = true;
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& p : scan.points) {
    if (p.rho <= 0.0 || p.sigma_min <= 0.0) continue;
    const double x = std::log(p.rho), y = std::log(p.sigma_min);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n >= 2) {
    scan.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    scan.intercept = (sy - scan.slope * sx) / n;
  }
  return scan;
}

std::vector<int> adaptive_levels(const ModelParams& p, int min_levels, double scale) {
  std::vector<int> levels(2);
  for (int k = 0; k < 2; ++k) {
    const double r = std::hypot(p.xi(k), 0.5 * p.w(k));
    levels[static_cast<std::size_t>(k)] =
        std::max(min_levels, static_cast<int>(std::ceil(scale * std::pow(r, 2.0 / 3.0) - 1e-9)));
  }
  return levels;
}

SweepRow sweep_point(const ModelParams& p, const SweepConfig& config) {
  SweepRow row;
  row.params = p;
  row.variant = config.variant;

  auto evaluate = [&](const BasisSpec& basis, EstimateReport& est, double& sigma) {
    const SparseMatrixC k = assemble_hat(p, basis).matrix();
    const QuadraticForm q = lhs_form(p, basis, config.variant);
    est = estimate_constant(k, q.matrix.matrix, basis, config.margin, config.options);
    const SingularResult s = sigma_min_interior(k, basis, config.margin, config.options);
    sigma = s.sigma;
    return s.converged;
  };

  try {
    const BasisSpec basis(adaptive_levels(p, config.min_levels, config.level_scale));
    const bool sigma_ok = evaluate(basis, row.estimate, row.sigma_min);
    if (!row.estimate.converged || !sigma_ok) row.status = "not-converged";
    else if (!row.estimate.certificate_ok) row.status = "certificate-failed";
    else row.status = "ok";

    if (config.stability_factor > 0.0) {
      const BasisSpec fine = basis.refined(config.stability_factor);
      EstimateReport est;
      evaluate(fine, est, row.sigma_min_refined);
      row.refined = true;
      row.refined_levels = fine.levels();
      row.C_est_refined = est.C_est;
      row.C_change = relative_change(row.estimate.C_est, est.C_est);
      row.sigma_change = relative_change(row.sigma_min, row.sigma_min_refined);
    }
  } catch (const Error& e) {
    row.status = std::string("error: ") + e.module() + ": " + e.what();
  }
  return row;
}

std::vector<SweepRow> sweep(const SweepConfig& config) {
  if (config.w_grid.empty() || config.b_grid.empty() || config.xi_grid.empty())
    throw ArgumentError("estimates", "sweep grids must be nonempty");
  std::vector<ModelParams> points;
  for (double w : config.w_grid)
    for (double b : config.b_grid)
      for (const auto& xi : config.xi_grid) {
        ModelParams p;
        p.w = Eigen::Vector2d(w, 0.0);
        p.b = b;
        p.xi = xi;
        points.push_back(p);
      }

  std::vector<SweepRow> rows(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) rows[i] = sweep_point(points[i], config);
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min<std::size_t>(points.size(), config.workers > 0 ? static_cast<std::size_t>(config.workers) : hw);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  return rows;
}

InterpolationReport interpolation_check(const std::vector<double>& w_list, double b, SweepConfig config) {
  config.w_grid = w_list;
  config.b_grid = {b};
  config.xi_grid = {Eigen::Vector2d::Zero()};
  config.variant = FormVariant::interpolated;
  InterpolationReport rep;
  rep.rows = sweep(config);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : rep.rows) {
    lo = std::min(lo, r.estimate.C_est);
    hi = std::max(hi, r.estimate.C_est);
  }
  rep.max_over_min = hi / lo;
  return rep;
}

std::string levels_string(const std::vector<int>& levels) {
  std::string s;
  for (std::size_t k = 0; k < levels.size(); ++k) s += (k ? "x" : "") + std::to_string(levels[k]);
  return s;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "w1,w2,b,xi1,xi2,variant,C_est,sigma_min,N,margin,iters,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    os << fmt(r.params.w(0)) << ',' << fmt(r.params.w(1)) << ',' << fmt(r.params.b) << ',' << fmt(r.params.xi(0))
       << ',' << fmt(r.params.xi(1)) << ',' << to_string(r.variant) << ',' << fmt(r.estimate.C_est) << ','
       << fmt(r.sigma_min) << ',' << levels_string(r.estimate.levels) << ',' << r.estimate.margin << ','
       << r.estimate.iterations << ',' << status << '\n';
  }
  return os.str();
}

std::string sweep_json(const std::vector<SweepRow>& rows) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json e;
    e["w1"] = r.params.w(0);
    e["w2"] = r.params.w(1);
    e["b"] = r.params.b;
    e["xi1"] = r.params.xi(0);
    e["xi2"] = r.params.xi(1);
    e["variant"] = to_string(r.variant);
    e["C_est"] = r.estimate.C_est;
    e["sigma_min"] = r.sigma_min;
    e["N"] = levels_string(r.estimate.levels);
    e["margin"] = r.estimate.margin;
    e["iters"] = r.estimate.iterations;
    e["status"] = r.status;
    e["residual"] = r.estimate.residual;
    e["certificate_ratio"] = r.estimate.certificate_ratio;
    e["certificate_ok"] = r.estimate.certificate_ok;
    if (r.refined) {
      e["N_refined"] = levels_string(r.refined_levels);
      e["C_est_refined"] = r.C_est_refined;
      e["sigma_min_refined"] = r.sigma_min_refined;
      e["C_change"] = r.C_change;
      e["sigma_change"] = r.sigma_change;
    }
    j["rows"].push_back(e);
  }
  return j.dump(2);
}

}  // namespace kfp
