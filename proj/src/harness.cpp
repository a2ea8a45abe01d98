#include "lifespan/harness.hpp"

#include "lifespan/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <ostream>
#include <sstream>

namespace lifespan {

std::uint64_t scan_fingerprint(const ProblemSpec& spec, double delta0, const LifespanOptions& opts) {
  std::string text;
  char buf[64];
  auto add = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s=%.17g;", key, v);
    text += buf;
  };
  add("p", spec.p);
  add("a", spec.a);
  add("R", spec.R);
  text += "preset=" + std::string(to_string(spec.preset)) + ";";
  for (double v : spec.preset_params) add("param", v);
  add("delta0", delta0);
  add("t_max", opts.t_max);
  for (double v : opts.thresholds) add("theta", v);
  add("levels", opts.refinement_levels);

  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void ScanTable::merge(const ScanTable& other) {
  if (other.fingerprint != fingerprint) throw std::invalid_argument("scan merge: fingerprint mismatch");
  for (const auto& r : other.rows)
    for (const auto& mine : rows)
      if (mine.eps == r.eps) throw std::invalid_argument("scan merge: eps " + format_real(r.eps) + " present twice");
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  std::sort(rows.begin(), rows.end(), [](const ScanRow& x, const ScanRow& y) { return x.eps > y.eps; });
}

std::size_t ScanTable::blew_up_count() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const ScanRow& r) { return r.status == RunStatus::blew_up; }));
}

ScanFailure::ScanFailure(double eps, const std::string& what)
    : NumericalFailure("scan failed at eps = " + format_real(eps) + ": " + what), eps_(eps) {}

void check_eps_grid(const std::vector<double>& eps_grid) {
  if (eps_grid.size() < 5) throw std::invalid_argument("eps grid needs at least 5 points");
  std::vector<double> g = eps_grid;
  std::sort(g.begin(), g.end(), std::greater<>());
  if (!(g.back() > 0.0)) throw std::invalid_argument("eps grid must be positive");
  const double ratio = g[0] / g[1];
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double r = g[i] / g[i + 1];
    if (std::abs(r - ratio) > 1e-6 * ratio) throw std::invalid_argument("eps grid is not geometric");
  }
  if (ratio < 1.2 - 1e-12 || ratio > 2.0 + 1e-12) throw std::invalid_argument("eps grid ratio outside [1.2, 2]");
}

ScanTable lifespan_scan(const ProblemSpec& spec, const std::vector<double>& eps_grid, double delta0,
                        const LifespanOptions& opts, int workers) {
  check_eps_grid(eps_grid);
  std::vector<double> grid = eps_grid;
  std::sort(grid.begin(), grid.end(), std::greater<>());

  ScanTable table;
  table.spec = spec;
  table.fingerprint = scan_fingerprint(spec, delta0, opts);
  table.rows.resize(grid.size());
  std::vector<std::optional<std::string>> errors(grid.size());

  const int n = static_cast<int>(grid.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, workers))
  for (int i = 0; i < n; ++i) {
    ProblemSpec s = spec;
    s.eps = grid[i];
    ScanRow& row = table.rows[i];
    row.eps = grid[i];
    try {
      const LifespanEstimate est = estimate_lifespan(s, delta0, opts);
      row.delta_finest = est.delta_finest;
      row.t_star = est.t_star;
      row.t_lo = est.t_lo;
      row.t_hi = est.t_hi;
      row.status = est.survived ? RunStatus::survived : RunStatus::blew_up;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (int i = 0; i < n; ++i)
    if (errors[i]) throw ScanFailure(grid[i], *errors[i]);
  return table;
}

Regime parse_regime(std::string_view name) {
  if (name == "power") return Regime::power;
  if (name == "exp") return Regime::exp;
  if (name == "global") return Regime::global;
  throw std::invalid_argument("unknown regime '" + std::string(name) + "'");
}

std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::power: return "power";
    case Regime::exp: return "exp";
    case Regime::global: return "global";
  }
  return "?";
}

FitReport fit_exponent(const ScanTable& table, Regime regime, double tolerance) {
  FitReport rep;
  rep.regime = regime;
  rep.tolerance = tolerance;
  if (table.rows.empty()) throw InsufficientRows("fit_exponent: empty table");
  if (regime == Regime::global) {
    rep.rows_used = table.rows.size();
    rep.pass = table.blew_up_count() == 0;
    return rep;
  }
  std::vector<double> x, y;
  const double pm = table.spec.p - 1.0;
  for (const auto& r : table.rows) {
    if (r.status != RunStatus::blew_up) continue;
    x.push_back(regime == Regime::power ? std::log(r.eps) : std::pow(r.eps, -pm));
    y.push_back(std::log(r.t_star));
  }
  if (x.size() < 5)
    throw InsufficientRows("fit_exponent: " + std::to_string(x.size()) + " blown-up rows, need 5");
  const LineFit f = fit_line(x, y);
  rep.slope = f.slope;
  rep.intercept = f.intercept;
  rep.stderr_slope = f.slope_stderr;
  rep.pearson_r = f.pearson_r;
  rep.rows_used = x.size();
  if (regime == Regime::power) {
    rep.predicted_slope = table.spec.a < 1.0 ? -pm / (1.0 - table.spec.a) : std::numeric_limits<double>::quiet_NaN();
    rep.pass = std::abs(rep.slope - rep.predicted_slope) <= tolerance;
  } else {
    rep.pass = rep.slope > 0.0 && rep.pearson_r >= 0.98;
  }
  return rep;
}

void write_scan_csv(const ScanTable& table, std::ostream& os) {
  os << "eps,delta_finest,t_star,t_lo,t_hi,status\n";
  for (const auto& r : table.rows)
    os << format_real(r.eps) << ',' << format_real(r.delta_finest) << ',' << format_real(r.t_star) << ','
       << format_real(r.t_lo) << ',' << format_real(r.t_hi) << ',' << to_string(r.status) << '\n';
}

std::string scan_svg(const ScanTable& table, const FitReport* fit) {
  std::vector<PlotPoint> pts;
  for (const auto& r : table.rows)
    if (r.status == RunStatus::blew_up) pts.push_back({std::log(r.eps), std::log(r.t_star)});
  std::optional<PlotLine> line;
  if (fit && fit->regime == Regime::power && pts.size() >= 2 && std::isfinite(fit->slope))
    line = PlotLine{fit->slope, fit->intercept};
  char title[128];
  std::snprintf(title, sizeof title, "lifespan scan p=%g a=%g", table.spec.p, table.spec.a);
  if (line) {
    char extra[64];
    std::snprintf(extra, sizeof extra, ", slope %.4f", fit->slope);
    std::string t = std::string(title) + extra;
    return svg_scatter(pts, line, "log eps", "log t*", t);
  }
  return svg_scatter(pts, line, "log eps", "log t*", title);
}

std::vector<std::filesystem::path> emit(const ScanTable& table, const FitReport* fit,
                                        const std::filesystem::path& out_dir, EmitFormats formats) {
  if (table.rows.empty()) throw std::invalid_argument("emit: no results");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + out_dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> files;
  if (formats.csv) {
    std::ostringstream os;
    write_scan_csv(table, os);
    files.push_back(out_dir / "scan.csv");
    write_text_file(files.back(), os.str());
  }
  if (formats.svg) {
    files.push_back(out_dir / "scan.svg");
    write_text_file(files.back(), scan_svg(table, fit));
  }
  return files;
}

}  // namespace lifespan
