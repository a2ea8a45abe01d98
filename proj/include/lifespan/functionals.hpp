#pragma once

#include "lifespan/model.hpp"
#include "lifespan/solver.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lifespan {

struct ConstantSet {
  double R0 = 0.0;
  double R1 = 0.0;
  double Cf = 0.0;
  double Cg = 0.0;
  double D5 = 0.0, D6 = 0.0, D7 = 0.0, D8 = 0.0;
  /// D9 as written with D7, and as used in the derivation with D8.
  double D9_text = 0.0;
  double D9 = 0.0;
  double D10 = 0.0, D11 = 0.0, D12 = 0.0;
  double M6 = 0.0;
  double M7 = 0.0;
  double lai_tu_C = 0.0;
  /// int psi f' and int psi (g' - f') for unit eps.
  double psi_f = 0.0;
  double psi_gf = 0.0;
};

/// Midpoint of (1/2, R).
double default_R0(double R);

/// Throws std::invalid_argument unless 1/2 < R0 < R and a < p.
ConstantSet constants(const ProblemSpec& spec, double R0);

/// sup over t in [0, 50] of int_0^{1+t} e^{-(t-x)} (1+x)^{a/(p-1)} dx / (1+t)^{a/(p-1)}.
/// Cached per (a, p); thread safe.
double lai_tu_C(double a, double p);

/// Samples on increasing, uniformly spaced times with centered differences;
/// d1 and d2 are NaN at the two end samples.
struct FunctionalSeries {
  std::vector<double> times, values, d1, d2;
  void differentiate();
};

enum class HVariant { subcritical, critical };

/// Spatial weight inside the strip integral.
enum class StripWeight {
  bracket,         // <x>^{-a/p}
  time,            // s^{-a/p}
  inverse_x,       // x^{-1}
  inverse_bracket  // <x>^{-1}
};

/// H(t) = int_{s0}^t (t-s) ds int_{s+R0}^{s+R} u(x,s) w dx over the stored
/// snapshot times (uniform stride). The inner integral uses the piecewise
/// linear interpolant of u on the grid.
FunctionalSeries strip_functional(const SolutionRun& run, double R0, StripWeight w, double s0);

/// Subcritical: weight <x>^{-a/p} from s = 1. Critical (a = 1 only):
/// weight x^{-1} from s = 0.
FunctionalSeries strip_H(const SolutionRun& run, double R0, HVariant variant);

struct MomentSeries {
  FunctionalSeries F, G;
};

/// F = int psi u_x dx and G = e^{-t} F; G is evaluated directly as
/// int (-e^{x-t} + e^{-x-t}) u_x dx.
MomentSeries exp_moments(const SolutionRun& run);

/// r(t) = G'' + 2G' - M6 |G|^p (1+t)^{-a}; NaN where second differences are missing.
std::vector<double> inequality_residuals(const MomentSeries& m, const ConstantSet& c, double p, double a);

/// F'' - F - int |u_x|^p <x>^{-a} phi dx; NaN at the end samples.
std::vector<double> F_equation_residuals(const SolutionRun& run, const MomentSeries& m);

/// Finite-difference tolerance c * dt^2, with c taken from the (Gt)
/// residual of a linear run (whose exact residual vanishes) times `safety`.
double calibrate_tol_fd(const SolutionRun& linear_run, double safety = 4.0);

/// Right side of the integral inequality for G by nested trapezoid sums:
/// M6 int_0^t e^{-2s} int_0^s e^{2r} |G(r)|^p (1+r)^{-a} dr ds.
std::vector<double> Gt2_rhs(const FunctionalSeries& G, double M6, double p, double a);

/// G(0) + G'(0) (1 - e^{-2t}) / 2 with G'(0) from the data: the floor that
/// integrating G'' + 2G' >= 0 actually yields.
std::vector<double> G_floor_exact(const FunctionalSeries& G, const ConstantSet& c, double eps);

struct Verdict {
  std::string name;
  bool pass = false;
  /// Smallest (lhs - rhs) over the checked window; negative on failure.
  double worst_margin = 0.0;
  double worst_t = 0.0;
  int samples = 0;
  std::string detail;
};

/// Checks lhs(t) >= rhs(t) - tol for sampled t in [t_lo, t_hi].
Verdict check_lower_bound(std::string name, const std::vector<double>& times, const std::vector<double>& lhs,
                          const std::vector<double>& rhs, double t_lo, double t_hi, double tol = 0.0);

/// 1/<y> >= D10 / (s + R0) on y in [s + R0, s + R], s in [0, s_max].
Verdict check_sy(double R, double R0, double s_max);

struct FunctionalReport {
  std::vector<Verdict> verdicts;
  bool all_pass() const noexcept;
};

void write_verdicts(const FunctionalReport& report, std::ostream& os);

struct StudyOptions {
  double delta = 1.0 / 100.0;
  double t_max = 200.0;
  std::vector<double> thresholds{1e3, 4e3, 1.6e4};
  /// Target number of stored snapshots; the stride is derived from it.
  int snapshots = 400;
  bool parallel = true;
  double safety = 4.0;
};

/// One nonlinear run with its linear twin (for tol_fd) and every functional
/// check on [0, 0.9 t*] (or the whole run when it survives).
struct FunctionalStudy {
  ConstantSet constants;
  double t_star = 0.0;
  double tol_fd = 0.0;
  FunctionalSeries H;
  MomentSeries moments;
  std::vector<double> residual;
  FunctionalReport report;
};

/// Verdict names: "H >= D7 eps t^(2-a/p)" (a < 1), "G >= M7 eps",
/// "G >= exact floor", "Gt residual >= -tol_fd", "F equation residual",
/// "1/<y> >= D10/(s+R0)".
FunctionalStudy functional_study(const ProblemSpec& spec, double R0, const StudyOptions& opts);

/// Verdict by name; throws std::out_of_range when absent.
const Verdict& find_verdict(const FunctionalReport& report, const std::string& name);


/// CSV `t,H,Hp,Hpp,F,G,residual` on the common snapshot times.
void write_functionals_csv(const FunctionalSeries& H, const MomentSeries& m, const std::vector<double>& residual,
                           std::ostream& os);

}  // namespace lifespan
