#pragma once

#include "lifespan/kernels.hpp"
#include "lifespan/model.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace lifespan {

/// Line Duhamel operator at one point by trapezoid quadrature with quad_n
/// intervals along each characteristic:
///   1/2 int_0^t v(x+t-s, s) <x+t-s>^{-a} ds  (+/-)  1/2 int_0^t v(x-t+s, s) <x-t+s>^{-a} ds.
double duhamel_line(const std::function<double(double, double)>& field, double x, double t, double a,
                    LineSign sign, int quad_n);

/// E(T): (T+2R)^{1-a} for a < 1, log(T+2R) for a = 1, 1 for a > 1.
double apriori_factor(double T, double a, double R);

/// Node layout shared with CharGrid so that fields line up node for node.
SpaceTimeField cone_grid(double T, double R, double delta);

struct PicardReport {
  /// ||w_j|| for j = 1, 2, ...
  std::vector<double> iterate_norms;
  /// diff_norms[k] = ||w_{k+2} - w_{k+1}||.
  std::vector<double> diff_norms;
  /// contraction_ratios[k] = diff_norms[k+1] / diff_norms[k] (0 when both vanish).
  std::vector<double> contraction_ratios;
  bool converged = false;
  /// Diff norms rose three times in a row, or a value became non-finite.
  bool diverged = false;
  SpaceTimeField final_field;
};

/// Picard iteration w_{j+1} = eps u_x^0 + conj line operator of |w_j|^p on
/// the characteristic grid over [0, T]. Stops once a diff norm is <= tol,
/// on divergence, or after j_max iterates. Throws std::logic_error if an
/// iterate leaves the light cone.
PicardReport picard_run(const ProblemSpec& spec, double T, double delta, int j_max, double tol,
                        bool parallel = true);

/// CSV `j,norm,diff,ratio`; one row per iterate j (diff and ratio empty where undefined).
void write_picard_csv(const PicardReport& report, std::ostream& os);

struct AprioriReport {
  double T = 0.0;
  double a = 0.0;
  double measured_lhs = 0.0;
  /// sup|w|^p * E(T).
  double rhs_factor = 0.0;
  /// measured_lhs / rhs_factor, 0 when both vanish.
  double implied_C = 0.0;
  /// Largest |conj(v)| - plus(|v|) over all nodes; <= 0 when domination holds.
  double domination_excess = 0.0;
  bool domination_holds = true;
};

AprioriReport apriori_check(const SpaceTimeField& w, double T, double a, double R, double p, bool parallel = true);

/// max over nodes of |conj line operator (v)| - plus line operator (|v|).
double domination_excess(const SpaceTimeField& v, double a, bool parallel = true);

double sup_norm(const SpaceTimeField& f) noexcept;


struct PicardAgreement {
  PicardReport report;
  /// sup |w_Picard - u_x from evolve| over the shared grid.
  double max_diff = 0.0;
  /// 10 delta^2.
  double bound = 0.0;
  /// Every contraction ratio above the rounding floor is < 1.
  bool ratios_below_one = false;
  bool pass = false;
};

/// picard_run next to an evolve run of the same spec on the same nodes.
PicardAgreement picard_vs_evolve(const ProblemSpec& spec, double T, double delta, int j_max, double tol,
                                 bool parallel = true);

}  // namespace lifespan
