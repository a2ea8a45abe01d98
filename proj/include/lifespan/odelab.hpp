#pragma once

#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lifespan {

enum class SeqKind { lem1_abc, lizhou_mk, lizhou_hjt, lizhou_ql, products };

SeqKind parse_seq_kind(std::string_view name);
std::string_view to_string(SeqKind kind) noexcept;

/// One index of a sequence table. `recurrence` holds every column computed
/// by the recurrence; `closed` holds the closed form where one exists and
/// NaN elsewhere. Multiplicative constants (C_n, K_n, T_n, L_n) are stored
/// as natural logs since they leave floating range quickly.
struct SeqRow {
  int n = 0;
  std::vector<double> recurrence;
  std::vector<double> closed;
};

struct SequenceTable {
  SeqKind kind = SeqKind::products;
  double p = 2.0;
  double a = 0.0;
  std::vector<std::string> columns;
  std::vector<SeqRow> rows;
  double l_inf = 0.0;
  double k_inf = 0.0;
  int n0 = 0;
};

/// Rows 1..n (0..n for lizhou_ql). param1/param2 seed the constants
/// (D1, D2) or (M1, M2). Throws std::overflow_error when a value leaves
/// floating range and std::invalid_argument on p <= 1 or n < 1.
SequenceTable seq_eval(SeqKind kind, double p, double a, int n, double param1 = 1.0, double param2 = 1.0);

/// prod_{i>=1} (1 + (2p)^{-i}) until the factor rounds to 1.
double l_infinity(double p);
/// sum_{i>=0} 2^{-i} until the term is negligible.
double k_infinity();
/// log of (l_n / l_{n+1})^{p^n}.
double log_b(double p, int n);
/// Smallest n >= 1 with (l_m/l_{m+1})^{p^m} >= (1/2)^{p^n} for every m in [1, 200].
int compute_n0(double p);

struct BoundReport {
  std::string lemma;
  double p = 0.0;
  double a = 0.0;
  double param1 = 0.0;
  double param2 = 0.0;
  double constant = 0.0;
  double t_bound = 0.0;
  /// Equality-ODE blow-up time; NaN until measured.
  double t_observed = std::numeric_limits<double>::quiet_NaN();
  /// t_bound / t_observed.
  double margin = std::numeric_limits<double>::quiet_NaN();
  /// |t(h) - t(h/2)| / t(h/2) for the accepted step pair.
  double richardson_rel = std::numeric_limits<double>::quiet_NaN();
};

/// Requires a < 1, p > 1, D1, D2 > 0.
BoundReport lemma1_bound(double D1, double D2, double p, double a);

/// Requires a <= 1, p > 1, M1, M2 > 0.
BoundReport lizhou_bound(double M1, double M2, double p, double a);

struct Lemma3Params {
  double A = 1.0, B = 1.0, R = 2.0;
  double a = 1.0, b = 0.0, c = 1.0;
  double x = -1.0, y = -3.0, z = 0.0;
  double p = 2.0;
};

class ConstraintError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws ConstraintError naming the first violated inequality.
BoundReport lemma3_bound(const Lemma3Params& q);

/// prod_{k>=1} (1 + 2^{-k}) to machine convergence.
double half_product();

enum class OdeKind { lem1, lizhou };

struct OdeParams {
  double p = 2.0;
  double a = 0.0;
  /// D1 or M1.
  double c1 = 1.0;
  /// D2 or M2.
  double c2 = 1.0;
  double E = 1.0;
};

class NoBlowup : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OdeResult {
  double t_observed = 0.0;
  double richardson_rel = 0.0;
  double step_used = 0.0;
};

/// Integrates the equality ODE
///   lem1:   H = D1 t^{2-a/p} + D2 int_E^t int_E^s r^{1-2p-a/p} |H|^p, i.e.
///           H'' = D1 (2-a/p)(1-a/p) t^{-a/p} + D2 t^{1-2p-a/p} |H|^p,
///           H(E) = D1 E^{2-a/p}, H'(E) = D1 (2-a/p) E^{1-a/p}
///   lizhou: G'' + 2G' = M2 |G|^p (1+t)^{-a}, G(E) = M1, G'(E) = 0
/// with a two-stage L-stable SDIRK scheme and step h = step * min(1+t, y/|y'|).
/// Returns the time y first reaches 1e12, repeating with halved steps until
/// two consecutive runs agree within 1%. Throws NoBlowup past t_cap
/// (default: 10x the lemma bound) or the step budget.
OdeResult ode_blowup(OdeKind kind, const OdeParams& params, double step0, double t_cap = 0.0);

/// Single integration at a fixed step factor; no Richardson loop.
double ode_escape_time(OdeKind kind, const OdeParams& params, double step, double t_cap);

/// Bound plus measured blow-up time for one parameter point.
BoundReport dominance_point(OdeKind kind, const OdeParams& params, double step0);

/// CSV `lemma,p,a,param1,param2,t_bound,t_observed,margin`.
void write_bound_csv(const std::vector<BoundReport>& reports, std::ostream& os);

}  // namespace lifespan
