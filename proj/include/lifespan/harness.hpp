#pragma once

#include "lifespan/model.hpp"
#include "lifespan/quadrature.hpp"
#include "lifespan/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lifespan {

struct ScanRow {
  double eps = 0.0;
  double delta_finest = 0.0;
  double t_star = std::numeric_limits<double>::infinity();
  double t_lo = 0.0;
  double t_hi = std::numeric_limits<double>::infinity();
  RunStatus status = RunStatus::survived;
};

/// FNV-1a over the canonical text of the ProblemSpec (minus eps) and the solver
/// settings that change results.
std::uint64_t scan_fingerprint(const ProblemSpec& spec, double delta0, const LifespanOptions& opts);

struct ScanTable {
  ProblemSpec spec;
  std::uint64_t fingerprint = 0;
  /// eps strictly decreasing.
  std::vector<ScanRow> rows;

  /// Adds rows from a table with the same fingerprint; throws
  /// std::invalid_argument on a fingerprint mismatch or a repeated eps.
  void merge(const ScanTable& other);
  std::size_t blew_up_count() const;
};

class ScanFailure : public NumericalFailure {
 public:
  ScanFailure(double eps, const std::string& what);
  double eps() const noexcept { return eps_; }

 private:
  double eps_;
};

/// Throws std::invalid_argument unless the grid has at least 5 distinct
/// points and a constant ratio in [1.2, 2] between neighbours (any order).
void check_eps_grid(const std::vector<double>& eps_grid);

/// One estimate_lifespan per eps, `workers` at a time. Rows come back sorted
/// by eps decreasing regardless of completion order. Throws ScanFailure for
/// the largest failing eps.
ScanTable lifespan_scan(const ProblemSpec& spec, const std::vector<double>& eps_grid, double delta0,
                        const LifespanOptions& opts, int workers = 1);

enum class Regime { power, exp, global };
Regime parse_regime(std::string_view name);
std::string_view to_string(Regime r) noexcept;

struct FitReport {
  Regime regime = Regime::power;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double stderr_slope = std::numeric_limits<double>::quiet_NaN();
  /// -(p-1)/(1-a) for power; NaN otherwise.
  double predicted_slope = std::numeric_limits<double>::quiet_NaN();
  double pearson_r = std::numeric_limits<double>::quiet_NaN();
  double tolerance = 0.0;
  std::size_t rows_used = 0;
  bool pass = false;
};

class InsufficientRows : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// power: log t* on log eps, pass iff |slope - predicted| <= tolerance.
/// exp: log t* on eps^{-(p-1)}, pass iff slope > 0 and r >= 0.98.
/// global: pass iff every row survived.
/// power/exp throw InsufficientRows with fewer than 5 blown-up rows.
FitReport fit_exponent(const ScanTable& table, Regime regime, double tolerance = 0.15);

/// CSV `eps,delta_finest,t_star,t_lo,t_hi,status`.
void write_scan_csv(const ScanTable& table, std::ostream& os);

/// Scatter of log t* against log eps (blown-up rows) with the fit line
/// when a power fit is given and there are at least two points.
std::string scan_svg(const ScanTable& table, const FitReport* fit);

struct EmitFormats {
  bool csv = true;
  bool svg = true;
};

/// Writes scan.csv and/or scan.svg into out_dir (created if missing).
/// Throws std::invalid_argument on an empty table and std::runtime_error
/// when the directory cannot be written.
std::vector<std::filesystem::path> emit(const ScanTable& table, const FitReport* fit,
                                        const std::filesystem::path& out_dir, EmitFormats formats);

}  // namespace lifespan
