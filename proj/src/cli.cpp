#include "kfp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "kfp/assembly.hpp"
#include "kfp/estimates.hpp"
#include "kfp/io.hpp"
#include "kfp/metaplectic.hpp"
#include "kfp/nilpotent.hpp"
#include "kfp/partition.hpp"

namespace kfp::cli {

namespace {

using Json = nlohmann::ordered_json;

// ---- config values ----------------------------------------------------------

std::string key_error(const std::string& key, const std::string& what) { return "config key " + key + ": " + what; }

double to_double(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ArgumentError("cli", key_error(key, "expected a number, got '" + s + "'"));
  return v;
}

long long to_integer(const std::string& key, const std::string& s) {
  const double v = to_double(key, s);
  if (v != std::floor(v)) throw ArgumentError("cli", key_error(key, "expected an integer, got '" + s + "'"));
  return static_cast<long long>(v);
}

const std::string& single(const std::string& key, const std::vector<std::string>& in) {
  if (in.size() != 1) throw ArgumentError("cli", key_error(key, "expected one value"));
  return in.front();
}

using Setter = std::function<void(const std::string&, const std::vector<std::string>&)>;

Setter number(double& target) {
  return [&target](const std::string& k, const std::vector<std::string>& in) { target = to_double(k, single(k, in)); };
}
Setter integer(int& target) {
  return [&target](const std::string& k, const std::vector<std::string>& in) {
    target = static_cast<int>(to_integer(k, single(k, in)));
  };
}
Setter text(std::string& target) {
  return [&target](const std::string& k, const std::vector<std::string>& in) { target = single(k, in); };
}
Setter numbers(std::vector<double>& target) {
  return [&target](const std::string& k, const std::vector<std::string>& in) {
    target.clear();
    for (const auto& s : in)
      if (!s.empty()) target.push_back(to_double(k, s));
  };
}

std::map<std::string, Setter> setters(RunConfig& c) {
  std::map<std::string, Setter> m;
  m["field.dimension"] = integer(c.field.dimension);
  m["field.potential"] = text(c.field.potential);
  m["field.magnetic"] = [&c](const std::string&, const std::vector<std::string>& in) { c.field.magnetic = in; };
  m["field.period"] = number(c.field.period);
  m["basis.levels"] = [&c](const std::string& k, const std::vector<std::string>& in) {
    c.basis.levels.clear();
    for (const auto& s : in) c.basis.levels.push_back(static_cast<int>(to_integer(k, s)));
  };
  m["basis.points"] = integer(c.basis.points);
  m["basis.margin"] = integer(c.basis.margin);
  m["model.w"] = numbers(c.model.w);
  m["model.b"] = number(c.model.b);
  m["model.xi"] = numbers(c.model.xi);
  m["model.rho"] = numbers(c.model.rho);
  m["model.bprime"] = numbers(c.model.bprime);
  m["model.x"] = numbers(c.model.x);
  m["grid.w"] = numbers(c.grid.w);
  m["grid.b"] = numbers(c.grid.b);
  m["grid.xi"] = numbers(c.grid.xi);
  m["grid.rho"] = numbers(c.grid.rho);
  m["grid.rho_components"] = numbers(c.grid.rho_components);
  m["grid.bprime_components"] = numbers(c.grid.bprime_components);
  m["grid.variant"] = text(c.grid.variant);
  m["grid.min_levels"] = integer(c.grid.min_levels);
  m["grid.level_scale"] = number(c.grid.level_scale);
  m["grid.stability_factor"] = number(c.grid.stability_factor);
  m["partition.s"] = number(c.partition.s);
  m["partition.delta"] = number(c.partition.delta);
  m["partition.rho0"] = number(c.partition.rho0);
  m["partition.gamma0"] = number(c.partition.gamma0);
  m["partition.half_width"] = number(c.partition.half_width);
  m["partition.probes"] = integer(c.partition.probes);
  m["partition.samples"] = integer(c.partition.samples);
  m["output.path"] = text(c.output.path);
  m["output.format"] = text(c.output.format);
  m["output.centers"] = text(c.output.centers);
  m["run.workers"] = integer(c.run.workers);
  m["run.seed"] = [&c](const std::string& k, const std::vector<std::string>& in) {
    const long long v = to_integer(k, single(k, in));
    if (v < 0) throw ArgumentError("cli", key_error(k, "seed must be non-negative"));
    c.run.seed = static_cast<unsigned long long>(v);
  };
  m["run.samples"] = integer(c.run.samples);
  m["run.count"] = integer(c.run.count);
  m["run.family"] = text(c.run.family);
  m["run.shift"] = text(c.run.shift);
  m["tolerances.adjoint"] = number(c.tolerances.adjoint);
  m["tolerances.accretivity"] = number(c.tolerances.accretivity);
  m["tolerances.conjugation"] = number(c.tolerances.conjugation);
  m["tolerances.rockland"] = number(c.tolerances.rockland);
  m["tolerances.uniform_ratio"] = number(c.tolerances.uniform_ratio);
  m["tolerances.airy_slope_min"] = number(c.tolerances.airy_slope_min);
  m["tolerances.airy_slope_max"] = number(c.tolerances.airy_slope_max);
  m["tolerances.normalization"] = number(c.tolerances.normalization);
  return m;
}

// ---- shared builders --------------------------------------------------------

FieldSpec make_field(const RunConfig& c) {
  std::vector<std::string> mag = c.field.magnetic;
  if (mag.empty()) mag.assign(static_cast<std::size_t>(c.field.dimension * (c.field.dimension - 1) / 2), "0");
  std::optional<double> period;
  if (c.field.period > 0.0) period = c.field.period;
  return FieldSpec::from_strings(c.field.dimension, c.field.potential, mag, period);
}

std::vector<int> velocity_levels(const RunConfig& c, int d) {
  if (c.basis.levels.size() == 1) return std::vector<int>(static_cast<std::size_t>(d), c.basis.levels.front());
  if (static_cast<int>(c.basis.levels.size()) != d)
    throw ArgumentError("cli", key_error("basis.levels", "give one value or one per velocity coordinate"));
  return c.basis.levels;
}

BasisSpec torus_basis(const RunConfig& c, const FieldSpec& f) {
  if (!f.torus_period) throw ArgumentError("cli", key_error("field.period", "this command needs a periodic field"));
  return BasisSpec(velocity_levels(c, f.dimension), TorusFactor{f.dimension, c.basis.points, *f.torus_period});
}

BasisSpec velocity_basis(const RunConfig& c) { return BasisSpec(velocity_levels(c, 2)); }

Eigen::Vector2d pair(const std::string& key, const std::vector<double>& v) {
  if (v.size() != 2) throw ArgumentError("cli", key_error(key, "expected two components"));
  return {v[0], v[1]};
}

ModelParams model_params(const RunConfig& c) {
  ModelParams p;
  p.w = pair("model.w", c.model.w);
  p.b = c.model.b;
  p.xi = pair("model.xi", c.model.xi);
  p.rho = pair("model.rho", c.model.rho);
  p.bprime = pair("model.bprime", c.model.bprime);
  return p;
}

Shift parse_shift(const std::string& s) {
  if (s == "K") return Shift::K;
  if (s == "Kcheck") return Shift::Kcheck;
  throw ArgumentError("cli", key_error("run.shift", "expected K or Kcheck"));
}

Json with_header(const std::string& command) {
  Json j;
  j["schema_version"] = 1;
  j["command"] = command;
  return j;
}

Json levels_json(const BasisSpec& b) { return Json(b.levels()); }

struct Outcome {
  Json json;
  bool passed = true;
  std::string text;  // non-JSON payload (triplets, CSV)
};

double max_abs(const SparseMatrixC& m) {
  double v = 0.0;
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(m, k); it; ++it) v = std::max(v, std::abs(it.value()));
  return v;
}

// ---- commands ---------------------------------------------------------------

Outcome cmd_assemble(const RunConfig& c) {
  const Shift shift = parse_shift(c.run.shift);
  const std::string& fam = c.run.family;
  DiscretizedOperator op = [&]() -> DiscretizedOperator {
    if (fam == "full" || fam == "adjoint" || fam == "kolmogorov") {
      const FieldSpec f = make_field(c);
      const BasisSpec b = torus_basis(c, f);
      if (fam == "full") return assemble_full(f, b, shift);
      if (fam == "adjoint") return assemble_adjoint(f, b, shift);
      return assemble_P0(b);
    }
    const ModelParams p = model_params(c);
    const BasisSpec b = velocity_basis(c);
    if (fam == "hat") return assemble_hat(p, b, shift);
    if (fam == "check") return assemble_check(p, b, shift);
    if (fam == "transported") return assemble_transported(p, b, shift);
    throw ArgumentError("cli", key_error("run.family", "unknown family '" + fam + "'"));
  }();
  std::ostringstream os;
  write_triplets(os, op);
  return {Json(), true, os.str()};
}

Outcome cmd_adjoint_check(const RunConfig& c) {
  const FieldSpec f = make_field(c);
  const BasisSpec b = torus_basis(c, f);
  const SparseMatrixC K = assemble_full(f, b).matrix();
  const SparseMatrixC Ks = assemble_adjoint(f, b).matrix();
  const auto idx = InteriorProjector{c.basis.margin}.indices(b);
  const double dev = max_abs(submatrix(SparseMatrixC(Ks - SparseMatrixC(K.adjoint())), idx, idx));
  Outcome o;
  o.json = with_header("adjoint-check");
  o.json["invariant"] = "K* equals K^H on the interior block";
  o.json["N"] = levels_json(b);
  o.json["M"] = c.basis.points;
  o.json["margin"] = c.basis.margin;
  o.json["max_deviation"] = dev;
  o.json["tolerance"] = c.tolerances.adjoint;
  o.passed = dev <= c.tolerances.adjoint;
  o.json["passed"] = o.passed;
  return o;
}

Outcome cmd_accretivity_check(const RunConfig& c) {
  const FieldSpec f = make_field(c);
  const BasisSpec b = torus_basis(c, f);
  const BasisSpec vb(b.levels());
  const SparseMatrixC K = assemble_full(f, b).matrix();
  const SparseMatrixC Kc = assemble_full(f, b, Shift::Kcheck).matrix();
  std::vector<SparseMatrixC> dv, vv;
  for (int k = 0; k < b.velocity_dim(); ++k) {
    dv.push_back(kron(identity(b.space_size()), derivative(k, vb)));
    vv.push_back(kron(identity(b.space_size()), position(k, vb)));
  }
  const auto idx = InteriorProjector{c.basis.margin}.indices(b);
  std::mt19937_64 rng(c.run.seed);
  std::normal_distribution<double> g;
  double worst = 0.0, min_re = std::numeric_limits<double>::infinity();
  for (int n = 0; n < c.run.samples; ++n) {
    VectorXc u = VectorXc::Zero(b.size());
    for (Index i : idx) u(i) = Complex(g(rng), g(rng));
    double form = 0.0;
    for (std::size_t k = 0; k < dv.size(); ++k) form += (dv[k] * u).squaredNorm() + 0.25 * (vv[k] * u).squaredNorm();
    const double nrm = u.squaredNorm();
    worst = std::max(worst, std::abs(u.dot(Kc * u).real() - form) / nrm);
    min_re = std::min(min_re, u.dot(K * u).real() / nrm);
  }
  Outcome o;
  o.json = with_header("accretivity-check");
  o.json["invariant"] = "Re<Kcheck u,u> = |grad_v u|^2 + |v u|^2/4 and Re<K u,u> >= 0 on interior vectors";
  o.json["N"] = levels_json(b);
  o.json["M"] = c.basis.points;
  o.json["margin"] = c.basis.margin;
  o.json["samples"] = c.run.samples;
  o.json["max_identity_residual"] = worst;
  o.json["min_real_part"] = min_re;
  o.json["tolerance"] = c.tolerances.accretivity;
  o.passed = worst <= c.tolerances.accretivity && min_re >= -c.tolerances.accretivity;
  o.json["passed"] = o.passed;
  return o;
}

Outcome cmd_metaplectic_check(const RunConfig& c) {
  const BasisSpec b = velocity_basis(c);
  const PhaseCalibration cal = calibrate_phase_sign(b);
  std::mt19937_64 rng(c.run.seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  Json points = Json::array();
  double worst = 0.0;
  for (int n = 0; n < c.run.samples; ++n) {
    const Eigen::Vector2d w(u(rng), u(rng)), xi(u(rng), u(rng));
    const double bb = u(rng);
    const Reduction red = reduce(symplectic_drift(w), xi);
    const double r = verify_conjugation(w, bb, xi, red.angles, b, c.basis.margin);
    worst = std::max(worst, r);
    points.push_back({{"w1", w(0)}, {"w2", w(1)}, {"b", bb}, {"xi1", xi(0)}, {"xi2", xi(1)},
                      {"t1", red.angles.t(0)}, {"t2", red.angles.t(1)}, {"residual", r}});
  }
  Outcome o;
  o.json = with_header("metaplectic-check");
  o.json["invariant"] = "T^-1 Khat T equals the transported operator on the interior block";
  o.json["N"] = levels_json(b);
  o.json["margin"] = c.basis.margin;
  o.json["phase_sign"] = cal.sign;
  o.json["calibration"] = {{"residual_plus", cal.residual_plus}, {"residual_minus", cal.residual_minus}};
  o.json["max_residual"] = worst;
  o.json["tolerance"] = c.tolerances.conjugation;
  o.json["points"] = points;
  o.passed = worst <= c.tolerances.conjugation && cal.sign == kPhaseSign;
  o.json["passed"] = o.passed;
  return o;
}

Outcome cmd_algebra_verify(const RunConfig&) {
  const GradedLieAlgebra g;
  const AlgebraReport r = verify_algebra(g);
  Json triples = Json::array();
  int nonzero = 0;
  for (const auto& e : r.jacobi) {
    const bool zero = std::all_of(e.residual.begin(), e.residual.end(), [](int v) { return v == 0; });
    if (!zero) ++nonzero;
    triples.push_back({{"triple",
                        {GradedLieAlgebra::label(e.triple[0]), GradedLieAlgebra::label(e.triple[1]),
                         GradedLieAlgebra::label(e.triple[2])}},
                       {"residual", e.residual},
                       {"zero", zero}});
  }
  Outcome o;
  o.json = with_header("algebra-verify");
  o.json["invariant"] = "Jacobi identity, antisymmetry, grading closure, type-2 generation, ell_rho([H,H]) = 0";
  o.json["antisymmetric"] = r.antisymmetric;
  o.json["jacobi_triples"] = r.jacobi.size();
  o.json["jacobi_nonzero"] = nonzero;
  o.json["grading_ok"] = r.grading_ok;
  o.json["generated_dimension"] = r.generated_dimension;
  o.json["functional_ok"] = r.functional_ok;
  o.json["jacobi"] = triples;
  o.json["structure"] = Json::parse(structure_constants_json(g));
  o.passed = r.passed();
  o.json["passed"] = o.passed;
  return o;
}

Outcome cmd_rockland(const RunConfig& c) {
  const BasisSpec b = velocity_basis(c);
  Json rows = Json::array();
  double lowest = std::numeric_limits<double>::infinity();
  bool all_converged = true;
  for (double r1 : c.grid.rho_components)
    for (double r2 : c.grid.rho_components)
      for (double b1 : c.grid.bprime_components)
        for (double b2 : c.grid.bprime_components) {
          const RocklandPoint p = rockland_probe({b1, b2}, {r1, r2}, b, c.basis.margin);
          lowest = std::min(lowest, p.sigma_min);
          all_converged = all_converged && p.converged;
          rows.push_back({{"rho1", r1}, {"rho2", r2}, {"bprime1", b1}, {"bprime2", b2}, {"sigma_min", p.sigma_min},
                          {"iters", p.iterations}, {"converged", p.converged}});
        }
  Outcome o;
  o.json = with_header("rockland");
  o.json["invariant"] = "sigma_min(pi(F_b')) >= 1 on the interior columns";
  o.json["N"] = levels_json(b);
  o.json["margin"] = c.basis.margin;
  o.json["min_sigma"] = lowest;
  o.json["tolerance"] = c.tolerances.rockland;
  o.json["points"] = rows;
  o.passed = all_converged && lowest >= 1.0 - c.tolerances.rockland;
  o.json["passed"] = o.passed;
  return o;
}

SweepConfig sweep_config(const RunConfig& c) {
  SweepConfig s;
  s.w_grid = c.grid.w;
  s.b_grid = c.grid.b;
  s.xi_grid.clear();
  if (c.grid.xi.size() % 2 != 0) throw ArgumentError("cli", key_error("grid.xi", "expected pairs xi1 xi2"));
  for (std::size_t i = 0; i < c.grid.xi.size(); i += 2) s.xi_grid.emplace_back(c.grid.xi[i], c.grid.xi[i + 1]);
  s.variant = parse_variant(c.grid.variant);
  s.margin = c.basis.margin;
  s.min_levels = c.grid.min_levels;
  s.level_scale = c.grid.level_scale;
  s.stability_factor = c.grid.stability_factor;
  s.workers = c.run.workers;
  return s;
}

Json row_json(const SweepRow& r) {
  Json j = Json::parse(sweep_json({r}))["rows"][0];
  return j;
}

Outcome cmd_estimate(const RunConfig& c) {
  const FieldSpec f = make_field(c);
  ModelParams p = model_params(c);
  if (!c.model.x.empty()) {
    if (static_cast<int>(c.model.x.size()) != f.dimension)
      throw ArgumentError("cli", key_error("model.x", "point dimension differs from field.dimension"));
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(c.model.x.data(), static_cast<Index>(c.model.x.size()));
    p.w = f.gradient(x).head<2>();
    p.b = f.magnetic_at(x)(0);
  }
  const SweepRow row = sweep_point(p, sweep_config(c));
  Outcome o;
  o.json = with_header("estimate");
  o.json["invariant"] = "extremal certificate <Mu,u> <= (C_est + 1e-8)(|Ku|^2 + |u|^2)";
  o.json["result"] = row_json(row);
  o.passed = row.status == "ok";
  o.json["passed"] = o.passed;
  return o;
}

Outcome cmd_sweep(const RunConfig& c) {
  const std::vector<SweepRow> rows = sweep(sweep_config(c));
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool ok = true;
  for (const auto& r : rows) {
    ok = ok && r.status == "ok" && std::isfinite(r.estimate.C_est);
    lo = std::min(lo, r.estimate.C_est);
    hi = std::max(hi, r.estimate.C_est);
  }
  Outcome o;
  o.passed = ok && hi / lo <= c.tolerances.uniform_ratio;
  if (c.output.format == "csv") {
    o.text = sweep_csv(rows);
  } else if (c.output.format == "json") {
    o.json = Json::parse(sweep_json(rows));
    o.json["command"] = "sweep";
    o.json["max_over_min"] = hi / lo;
    o.json["tolerance"] = c.tolerances.uniform_ratio;
    o.json["passed"] = o.passed;
  } else {
    throw ArgumentError("cli", key_error("output.format", "expected csv or json"));
  }
  return o;
}

Outcome cmd_airy_scan(const RunConfig& c) {
  const AiryScan s = airy_scan(c.grid.rho, c.basis.margin);
  Json pts = Json::array();
  bool converged = true;
  for (const auto& p : s.points) {
    converged = converged && p.converged;
    pts.push_back({{"rho", p.rho}, {"N", p.levels}, {"sigma_min", p.sigma_min}, {"converged", p.converged}});
  }
  Outcome o;
  o.json = with_header("airy-scan");
  o.json["invariant"] = "log sigma_min grows with slope in the tolerance window";
  o.json["margin"] = c.basis.margin;
  o.json["slope"] = s.slope;
  o.json["intercept"] = s.intercept;
  o.json["monotone"] = s.monotone;
  o.json["inadequate"] = s.inadequate;
  o.json["slope_window"] = {c.tolerances.airy_slope_min, c.tolerances.airy_slope_max};
  o.json["points"] = pts;
  o.passed = converged && s.monotone && !s.inadequate && s.slope >= c.tolerances.airy_slope_min &&
             s.slope <= c.tolerances.airy_slope_max;
  o.json["passed"] = o.passed;
  return o;
}

Outcome cmd_partition_check(const RunConfig& c) {
  const FieldSpec f = make_field(c);
  const Box box = Box::square(f.dimension, c.partition.half_width);
  const double delta0 = measure_delta0(f, c.partition.s, box, c.partition.samples, c.partition.rho0);
  const double delta = c.partition.delta > 0.0 ? c.partition.delta : delta0;
  if (!(delta > 0.0)) throw ArgumentError("cli", key_error("partition.delta", "no positive delta_0 found"));
  const SlowVariation sv = slow_variation_scan(f, c.partition.s, delta, box, c.partition.samples, c.partition.rho0);
  const Covering cov = cover(f, box, c.partition.s, delta);
  const CoverageStats st = coverage_stats(cov, c.partition.probes);
  const PartitionCheck pc = check_partition(cov, c.partition.probes);
  const PartitionCheck fine = check_partition(cov, 2 * c.partition.probes - 1);
  const double drift = std::abs(fine.gradient_constant / pc.gradient_constant - 1.0);
  const bool window = s_in_window(c.partition.s, c.partition.rho0, c.partition.gamma0);
  if (!c.output.centers.empty()) {
    std::ofstream os(c.output.centers);
    if (!os) throw ArgumentError("cli", key_error("output.centers", "cannot open " + c.output.centers));
    os << centers_csv(cov);
  }
  Outcome o;
  o.json = with_header("partition-check");
  o.json["invariant"] = "coverage 1, normalisation, delta_0 > 0, gradient fit stable within 20%, s in window";
  o.json["s"] = c.partition.s;
  o.json["s_in_window"] = window;
  o.json["delta0"] = delta0;
  o.json["delta"] = delta;
  o.json["slow_variation"] = {{"min_ratio", sv.min_ratio}, {"max_ratio", sv.max_ratio},
                              {"hessian_ratio", sv.hessian_ratio}, {"pairs", sv.pairs}};
  o.json["centers"] = cov.centers.size();
  o.json["coverage"] = st.coverage;
  o.json["overlap"] = st.overlap;
  o.json["probes"] = pc.probes;
  o.json["max_normalization_error"] = std::max(pc.max_normalization_error, fine.max_normalization_error);
  o.json["gradient_constant"] = pc.gradient_constant;
  o.json["gradient_constant_refined"] = fine.gradient_constant;
  o.json["gradient_drift"] = drift;
  o.passed = window && delta0 > 0.0 && st.coverage == 1.0 &&
             std::max(pc.max_normalization_error, fine.max_normalization_error) <= c.tolerances.normalization &&
             drift <= 0.2;
  o.json["passed"] = o.passed;
  return o;
}

Outcome cmd_spectrum(const RunConfig& c) {
  const FieldSpec f = make_field(c);
  const BasisSpec b = torus_basis(c, f);
  if (b.size() > 2048) throw ArgumentError("cli", "spectrum uses a dense solver; basis size must be <= 2048");
  const MatrixXc K = MatrixXc(assemble_full(f, b).matrix());
  Eigen::ComplexEigenSolver<MatrixXc> es(K, false);
  if (es.info() != Eigen::Success) throw ConvergenceError("cli", "dense eigensolver failed");
  std::vector<Complex> ev(es.eigenvalues().begin(), es.eigenvalues().end());
  std::sort(ev.begin(), ev.end(), [](Complex a, Complex z) {
    if (a.real() != z.real()) return a.real() < z.real();
    return a.imag() < z.imag();
  });
  Json vals = Json::array();
  for (int k = 0; k < std::min<int>(c.run.count, static_cast<int>(ev.size())); ++k)
    vals.push_back({ev[static_cast<std::size_t>(k)].real(), ev[static_cast<std::size_t>(k)].imag()});
  const double scale = std::max(1.0, std::abs(ev.back()));
  Outcome o;
  o.json = with_header("spectrum");
  o.json["invariant"] = "Re lambda >= 0 for the truncated operator";
  o.json["N"] = levels_json(b);
  o.json["M"] = c.basis.points;
  o.json["size"] = b.size();
  o.json["lowest"] = vals;
  o.passed = ev.front().real() >= -c.tolerances.accretivity * scale;
  o.json["passed"] = o.passed;
  return o;
}

Outcome cmd_report(const RunConfig& c) {
  Outcome o;
  o.json = with_header("report");
  Json checks;
  auto add = [&](const char* name, Outcome (*fn)(const RunConfig&)) {
    Outcome r = fn(c);
    o.passed = o.passed && r.passed;
    checks[name] = r.json;
  };
  add("algebra-verify", cmd_algebra_verify);
  add("adjoint-check", cmd_adjoint_check);
  add("accretivity-check", cmd_accretivity_check);
  add("metaplectic-check", cmd_metaplectic_check);
  add("rockland", cmd_rockland);
  add("airy-scan", cmd_airy_scan);
  add("partition-check", cmd_partition_check);
  o.json["checks"] = checks;
  o.json["passed"] = o.passed;
  return o;
}

const std::map<std::string, Outcome (*)(const RunConfig&)>& commands() {
  static const std::map<std::string, Outcome (*)(const RunConfig&)> m{
      {"assemble", cmd_assemble},
      {"adjoint-check", cmd_adjoint_check},
      {"accretivity-check", cmd_accretivity_check},
      {"metaplectic-check", cmd_metaplectic_check},
      {"algebra-verify", cmd_algebra_verify},
      {"rockland", cmd_rockland},
      {"estimate", cmd_estimate},
      {"sweep", cmd_sweep},
      {"airy-scan", cmd_airy_scan},
      {"partition-check", cmd_partition_check},
      {"spectrum", cmd_spectrum},
      {"report", cmd_report},
  };
  return m;
}

const char* summary(const std::string& name) {
  static const std::map<std::string, const char*> s{
      {"assemble", "export an operator as sparse triplets"},
      {"adjoint-check", "compare the assembled adjoint with K^H"},
      {"accretivity-check", "real part identity on random interior vectors"},
      {"metaplectic-check", "conjugation identity for the harmonic rotations"},
      {"algebra-verify", "Jacobi, grading and generation checks of the nilpotent algebra"},
      {"rockland", "smallest singular values of pi(F_b') over the rho, b' grid"},
      {"estimate", "best constant of one maximal estimate"},
      {"sweep", "uniform estimate sweep over the w, b, xi grid"},
      {"airy-scan", "rho^{2/3} scaling of the complex Airy operator"},
      {"partition-check", "covering and partition of unity checks"},
      {"spectrum", "lowest eigenvalues of the torus operator"},
      {"report", "aggregate JSON of the check commands"},
  };
  return s.at(name);
}

void write_output(const RunConfig& c, const std::string& payload, std::ostream& out) {
  if (c.output.path.empty()) {
    out << payload;
    return;
  }
  std::ofstream os(c.output.path);
  if (!os) throw ArgumentError("cli", key_error("output.path", "cannot open " + c.output.path));
  os << payload;
}

}  // namespace

void apply_ini(RunConfig& config, std::istream& in) {
  const auto table = setters(config);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    throw ArgumentError("cli", std::string("malformed config: ") + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    const std::string key = item.fullname();
    const auto it = table.find(key);
    if (it == table.end()) throw ArgumentError("cli", "unknown config key " + key);
    it->second(key, item.inputs);
  }
}

void validate(const RunConfig& c, const std::string& command) {
  auto fail = [](const std::string& key, const std::string& what) { throw ArgumentError("cli", key_error(key, what)); };
  if (c.field.dimension != 2 && c.field.dimension != 3) fail("field.dimension", "must be 2 or 3");
  static const std::vector<std::string> planar{"metaplectic-check", "algebra-verify", "rockland", "estimate",
                                               "sweep",             "airy-scan",      "report"};
  if (c.field.dimension != 2 && std::find(planar.begin(), planar.end(), command) != planar.end())
    fail("field.dimension", "command '" + command + "' requires d = 2");
  const std::pair<const char*, double> tols[] = {
      {"tolerances.adjoint", c.tolerances.adjoint},           {"tolerances.accretivity", c.tolerances.accretivity},
      {"tolerances.conjugation", c.tolerances.conjugation},   {"tolerances.rockland", c.tolerances.rockland},
      {"tolerances.uniform_ratio", c.tolerances.uniform_ratio}, {"tolerances.normalization", c.tolerances.normalization},
      {"tolerances.airy_slope_min", c.tolerances.airy_slope_min}, {"tolerances.airy_slope_max", c.tolerances.airy_slope_max}};
  for (const auto& [key, v] : tols)
    if (!(v > 0.0)) fail(key, "tolerance must be positive");
  if (c.tolerances.airy_slope_min > c.tolerances.airy_slope_max) fail("tolerances.airy_slope_min", "exceeds the maximum");
  const std::pair<const char*, std::size_t> grids[] = {{"grid.w", c.grid.w.size()},
                                                       {"grid.b", c.grid.b.size()},
                                                       {"grid.xi", c.grid.xi.size()},
                                                       {"grid.rho", c.grid.rho.size()},
                                                       {"grid.rho_components", c.grid.rho_components.size()},
                                                       {"grid.bprime_components", c.grid.bprime_components.size()},
                                                       {"basis.levels", c.basis.levels.size()}};
  for (const auto& [key, n] : grids)
    if (n == 0) fail(key, "grid must be nonempty");
  for (int n : c.basis.levels)
    if (n < 4) fail("basis.levels", "need at least 4 levels");
  if (c.basis.points < 2) fail("basis.points", "need at least 2 points");
  if (c.basis.margin < 0) fail("basis.margin", "must be non-negative");
  if (c.run.samples < 1) fail("run.samples", "must be positive");
  if (c.run.count < 1) fail("run.count", "must be positive");
  if (c.run.workers < 0) fail("run.workers", "must be non-negative");
  if (c.partition.probes < 2) fail("partition.probes", "need at least 2 probes per axis");
  if (c.partition.samples < 1) fail("partition.samples", "must be positive");
  if (!(c.partition.half_width > 0.0)) fail("partition.half_width", "must be positive");
  for (double r : c.grid.rho_components)
    if (r < 0.0) fail("grid.rho_components", "components must be non-negative");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kramers-Fokker-Planck hypoelliptic estimate toolkit", "kfp"};
  std::string config_path;
  std::vector<double> w, b, xi, rho;
  app.add_option("-c,--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  auto* gw = app.add_option("--w", w, "override grid.w");
  auto* gb = app.add_option("--b", b, "override grid.b");
  auto* gx = app.add_option("--xi", xi, "override grid.xi (flattened pairs)");
  auto* gr = app.add_option("--rho", rho, "override grid.rho");
  app.require_subcommand(1);
  for (const auto& [name, fn] : commands()) app.add_subcommand(name, summary(name))->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ArgumentError("cli", "cannot read config " + config_path);
      apply_ini(cfg, in);
    }
    if (*gw) cfg.grid.w = w;
    if (*gb) cfg.grid.b = b;
    if (*gx) cfg.grid.xi = xi;
    if (*gr) cfg.grid.rho = rho;
    validate(cfg, command);
    const Outcome o = commands().at(command)(cfg);
    write_output(cfg, o.text.empty() ? o.json.dump(2) + "\n" : o.text, out);
    if (!o.passed) err << "kfp: " << command << ": check failed (see output)\n";
    return o.passed ? 0 : 1;
  } catch (const ConvergenceError& e) {
    err << "kfp: " << e.module() << ": " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "kfp: " << e.module() << ": " << e.what() << '\n';
    return 2;
  }
}

}  // namespace kfp::cli
