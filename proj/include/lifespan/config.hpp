#pragma once

#include "lifespan/model.hpp"
#include "lifespan/solver.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace lifespan {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything the CLI reads from its INI file. Sections and keys are listed
/// in README.md; anything else is rejected.
struct LabConfig {
  // [problem]
  ProblemSpec problem;
  /// NaN selects default_R0(R).
  double R0 = std::numeric_limits<double>::quiet_NaN();
  /// (D1, D2) or (M1, M2) for the bounds and odelab subcommands.
  double lemma_c1 = 1.0;
  double lemma_c2 = 1.0;

  // [solver]
  double delta = 1.0 / 200.0;
  double t_max = 10.0;
  std::vector<double> thresholds{1e3, 4e3, 1.6e4};
  int refinement_levels = 3;
  int snapshot_stride = 0;
  bool nonlinear = true;
  bool parallel = true;
  int verify_points = 0;
  double picard_T = 0.5;
  int picard_jmax = 60;
  double picard_tol = 1e-12;
  double ode_step = 0.05;
  double ode_E = 1.0;

  // [scan]
  std::vector<double> eps_grid;
  std::string regime = "power";
  double fit_tolerance = 0.15;
  int workers = 1;

  // [output]
  std::string out_dir = ".";
  bool csv = true;
  bool svg = true;

  LifespanOptions lifespan_options() const;
  EvolveOptions evolve_options() const;
  double effective_R0() const;
};

/// Throws ConfigError on syntax errors, unknown sections or keys, and
/// malformed values.
LabConfig parse_config(std::istream& is);
LabConfig load_config(const std::string& path);

/// Comma separated reals.
std::vector<double> parse_real_list(const std::string& text);

/// Worker count after applying LIFESPAN_LAB_WORKERS.
int effective_workers(const LabConfig& cfg);

}  // namespace lifespan
