#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "kfp/assembly.hpp"
#include "kfp/pencil.hpp"

namespace kfp {

/// Left-hand sides of the maximal estimates (d = 2 velocity basis).
///  prop31:        |w|^{4/3}|f|^2 + |w|^{2/3}(|grad_v f|^2 + |v f|^2) + B2
///  interpolated:  |w|^{2/3}(|grad_v f|^2 + |v f|^2) + B2
///  hypomax_model: |w|^{4/3}|f|^2 + |(i v.xi - w.grad_v - b L_12) f|^2 + B2
///  inegmaxhom:    |(v.rho) f|^2 + |rho|^{4/3}|f|^2 + B2
/// where B2 = sum_{|alpha|+|beta|<=2} |v^alpha d^beta f|^2 (15 terms).
enum class FormVariant { prop31, interpolated, hypomax_model, inegmaxhom };

const char* to_string(FormVariant v);
FormVariant parse_variant(const std::string& name);

struct QuadraticForm {
  SparseOperator matrix;             // Hermitian, sum of weight * T^H T
  std::vector<std::string> terms;    // "weight * description" per term
};

QuadraticForm lhs_form(const ModelParams& p, const BasisSpec& basis, FormVariant variant);

struct EstimateReport {
  double C_est = 0.0;
  double residual = 0.0;            // Lanczos residual of the extremal pair
  double certificate_ratio = 0.0;   // <Mu,u> / (|Ku|^2 + |u|^2), recomputed from K
  bool certificate_ok = false;      // ratio <= C_est + 1e-8
  int iterations = 0;
  bool converged = false;
  std::vector<int> levels;
  int margin = 2;
  VectorXc extremal;                // over interior indices
};

/// Largest <Mu,u> / (|Ku|^2 + |u|^2) over u supported on the interior block.
EstimateReport estimate_constant(const SparseMatrixC& K, const SparseMatrixC& M, const BasisSpec& basis,
                                 int margin = 2, const PencilOptions& options = {});

/// Smallest singular value of K restricted to interior columns.
SingularResult sigma_min_interior(const SparseMatrixC& K, const BasisSpec& basis, int margin = 2,
                                  const PencilOptions& options = {});

// ---- Airy-type scaling ----------------------------------------------------

/// -d^2/dv^2 + i rho v on one velocity coordinate (truncated products).
SparseMatrixC airy_operator(double rho, const BasisSpec& basis_1d);
/// max(64, ceil(8 rho^{1/3})^2), capped.
int airy_levels(double rho, int cap = 16384);

struct AiryPoint {
  double rho = 0.0;
  int levels = 0;
  double sigma_min = 0.0;
  bool converged = false;
};

struct AiryScan {
  std::vector<AiryPoint> points;
  double slope = 0.0;       // least-squares slope of log sigma_min against log rho (rho > 0)
  double intercept = 0.0;
  bool monotone = true;     // sigma_min nondecreasing along increasing rho
  bool inadequate = false;  // truncation flag: sigma_min stalls or outgrows rho^{2/3} (local slope > 0.85)
};

/// `levels_override` > 0 forces a fixed truncation; otherwise airy_levels(rho).
AiryScan airy_scan(const std::vector<double>& rhos, int margin = 2, int levels_override = 0,
                   double refine = 1.0);

// ---- sweeps ---------------------------------------------------------------

/// Hermite levels per coordinate for the point (w, xi):
/// N_k = max(min_levels, ceil(scale * r_k^{2/3})) with r_k = sqrt(xi_k^2 + w_k^2 / 4).
std::vector<int> adaptive_levels(const ModelParams& p, int min_levels = 40, double scale = 16.0);

struct SweepConfig {
  std::vector<double> w_grid{0, 1, 10, 100, 1000};  // |w|, with w = (|w|, 0)
  std::vector<double> b_grid{-1, 0, 1};
  std::vector<Eigen::Vector2d> xi_grid{Eigen::Vector2d::Zero()};
  FormVariant variant = FormVariant::prop31;
  int margin = 2;
  int min_levels = 40;
  double level_scale = 16.0;
  double stability_factor = 0.0;  // > 0: recompute at levels * factor
  int workers = 0;                // 0: hardware concurrency
  PencilOptions options;
};

struct SweepRow {
  ModelParams params;
  FormVariant variant = FormVariant::prop31;
  EstimateReport estimate;
  double sigma_min = 0.0;
  std::string status;  // "ok" or a failure description
  // Truncation refinement (only when stability_factor > 0).
  bool refined = false;
  std::vector<int> refined_levels;
  double C_est_refined = 0.0;
  double sigma_min_refined = 0.0;
  double C_change = 0.0;      // relative
  double sigma_change = 0.0;  // relative
};

/// Runs one grid point (used by sweep and by interpolation_check).
SweepRow sweep_point(const ModelParams& p, const SweepConfig& config);

/// One row per (w, b, xi), ordered w-major then b then xi. Points run in
/// parallel; failures are recorded in `status` and do not stop the sweep.
std::vector<SweepRow> sweep(const SweepConfig& config);

struct InterpolationReport {
  std::vector<SweepRow> rows;
  double max_over_min = 0.0;
};

InterpolationReport interpolation_check(const std::vector<double>& w_list, double b, SweepConfig config = {});

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string sweep_json(const std::vector<SweepRow>& rows);
std::string levels_string(const std::vector<int>& levels);

}  // namespace kfp
