#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kfp::cli {

/// Every key of the INI config, grouped by section. Defaults are the values
/// used when a key is absent.
struct RunConfig {
  struct Field {
    int dimension = 2;
    std::string potential = "cos(x1)+cos(x2)";
    std::vector<std::string> magnetic;  // empty: all components "0"
    double period = 6.283185307179586;  // <= 0: unbounded space
  } field;

  struct Basis {
    std::vector<int> levels{12};  // one entry is replicated over the velocity coordinates
    int points = 16;
    int margin = 2;
  } basis;

  // Frozen-coefficient point for `estimate` and the model families of `assemble`.
  struct Model {
    std::vector<double> w{0, 0};
    double b = 0.0;
    std::vector<double> xi{0, 0};
    std::vector<double> rho{0, 0};
    std::vector<double> bprime{0, 0};
    std::vector<double> x;  // nonempty: w and b are frozen from the field at x
  } model;

  struct Grid {
    std::vector<double> w{0, 1, 10, 100, 1000};
    std::vector<double> b{-1, 0, 1};
    std::vector<double> xi{0, 0};  // flattened pairs
    std::vector<double> rho{10, 30, 100, 300, 1000};
    std::vector<double> rho_components{0.1, 1, 10, 100};
    std::vector<double> bprime_components{0, 0.5, -0.5, 2, -2};
    std::string variant = "prop31";
    int min_levels = 40;
    double level_scale = 16.0;
    double stability_factor = 0.0;
  } grid;

  struct Partition {
    double s = 0.3;
    double delta = 0.0;  // <= 0: use the measured delta_0
    double rho0 = 0.5;
    double gamma0 = 0.2;
    double half_width = 5.0;
    int probes = 100;  // per axis
    int samples = 2000;
  } partition;

  struct Output {
    std::string path;  // empty: standard output
    std::string format = "csv";  // sweep only: csv or json
    std::string centers;  // partition-check: centers CSV path
  } output;

  struct Run {
    int workers = 0;
    unsigned long long seed = 1;
    int samples = 100;
    int count = 10;
    std::string family = "full";
    std::string shift = "K";
  } run;

  struct Tolerances {
    double adjoint = 1e-13;
    double accretivity = 1e-10;
    double conjugation = 1e-8;
    double rockland = 1e-6;
    double uniform_ratio = 10.0;
    double airy_slope_min = 0.60;
    double airy_slope_max = 0.72;
    double normalization = 1e-12;
  } tolerances;
};

/// Applies `key = value` items (CLI11 INI syntax) on top of `config`.
/// Unknown keys and malformed values throw kfp::ArgumentError.
void apply_ini(RunConfig& config, std::istream& in);

/// Positivity of tolerances, nonempty grids, d in {2, 3}, and d = 2 for the
/// commands that need it. Throws kfp::ArgumentError.
void validate(const RunConfig& config, const std::string& command);

/// Entry point of the `kfp` binary. Exit codes: 0 all checks pass, 1 a check
/// failed, 2 configuration or usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kfp::cli
