#include "lifespan/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <omp.h>

namespace lifespan {

double abs_pow(double v, double p) noexcept {
  const double m = std::abs(v);
  if (p == 2.0) return m * m;
  if (p == 3.0) return m * m * m;
  return std::pow(m, p);
}

namespace {

struct PowSquare {
  double operator()(double v) const noexcept { return v * v; }
};
struct PowCube {
  double operator()(double v) const noexcept {
    const double m = std::abs(v);
    return m * m * m;
  }
};
struct PowGeneric {
  double p;
  double operator()(double v) const noexcept { return std::pow(std::abs(v), p); }
};
struct PowZero {
  double operator()(double) const noexcept { return 0.0; }
};

void check_range(const LevelFields& now, const LevelFields& next, std::span<const double> weight,
                 NodeRange range) {
  const auto n = static_cast<std::ptrdiff_t>(now.size());
  if (next.size() != now.size() || weight.size() != now.size())
    throw std::invalid_argument("advance_level: array size mismatch");
  if (range.lo < 1 || range.hi > n - 2) throw std::out_of_range("advance_level: range touches array edge");
}

template <class Pow>
inline void update_node(const LevelFields& now, LevelFields& next, const double* wt, std::ptrdiff_t i,
                        double dt, Pow pw) noexcept {
  const double r_foot = now.v[i + 1] + now.w[i + 1];
  const double s_foot = now.v[i - 1] - now.w[i - 1];
  const double n_right = pw(now.w[i + 1]) * wt[i + 1];
  const double n_left = pw(now.w[i - 1]) * wt[i - 1];
  const double r_pred = r_foot + dt * n_right;
  const double s_pred = s_foot + dt * n_left;
  const double n_pred = pw(0.5 * (r_pred - s_pred)) * wt[i];
  const double r_new = r_foot + 0.5 * dt * (n_right + n_pred);
  const double s_new = s_foot + 0.5 * dt * (n_left + n_pred);
  const double v_new = 0.5 * (r_new + s_new);
  next.v[i] = v_new;
  next.w[i] = 0.5 * (r_new - s_new);
  next.u[i] = now.u[i] + 0.5 * dt * (now.v[i] + v_new);
}

template <class Pow>
StepStats advance_serial_impl(const LevelFields& now, LevelFields& next, const double* wt, NodeRange range,
                              double dt, Pow pw) {
  StepStats st;
  for (std::ptrdiff_t i = range.lo; i <= range.hi; ++i) {
    update_node(now, next, wt, i, dt, pw);
    const double aw = std::abs(next.w[i]);
    const double au = std::abs(next.u[i]);
    if (!std::isfinite(aw) || !std::isfinite(au)) st.finite = false;
    st.max_abs_w = std::max(st.max_abs_w, aw);
    st.max_abs_u = std::max(st.max_abs_u, au);
  }
  return st;
}

template <class Pow>
StepStats advance_parallel_impl(const LevelFields& now, LevelFields& next, const double* wt, NodeRange range,
                                double dt, Pow pw) {
  double max_w = 0.0;
  double max_u = 0.0;
  int bad = 0;
#pragma omp parallel for schedule(static) reduction(max : max_w, max_u) reduction(| : bad)
  for (std::ptrdiff_t i = range.lo; i <= range.hi; ++i) {
    update_node(now, next, wt, i, dt, pw);
    const double aw = std::abs(next.w[i]);
    const double au = std::abs(next.u[i]);
    if (!std::isfinite(aw) || !std::isfinite(au)) bad = 1;
    max_w = std::max(max_w, aw);
    max_u = std::max(max_u, au);
  }
  return {max_w, max_u, bad == 0};
}

template <bool Parallel>
StepStats dispatch(const LevelFields& now, LevelFields& next, std::span<const double> weight, NodeRange range,
                   const StepConfig& cfg) {
  check_range(now, next, weight, range);
  const double* wt = weight.data();
  auto run = [&](auto pw) {
    if constexpr (Parallel) return advance_parallel_impl(now, next, wt, range, cfg.delta, pw);
    else return advance_serial_impl(now, next, wt, range, cfg.delta, pw);
  };
  if (!cfg.nonlinear) return run(PowZero{});
  if (cfg.p == 2.0) return run(PowSquare{});
  if (cfg.p == 3.0) return run(PowCube{});
  return run(PowGeneric{cfg.p});
}

void check_line_args(const SpaceTimeField& field, std::span<const double> weight, SpaceTimeField& out) {
  if (weight.size() != field.nodes) throw std::invalid_argument("line_operator: weight size mismatch");
  if (out.levels != field.levels || out.nodes != field.nodes) {
    out = SpaceTimeField(field.levels, field.nodes, field.x0, field.delta);
  }
}

}  // namespace

StepStats advance_level_serial(const LevelFields& now, LevelFields& next, std::span<const double> weight,
                               NodeRange range, const StepConfig& cfg) {
  return dispatch<false>(now, next, weight, range, cfg);
}

StepStats advance_level_parallel(const LevelFields& now, LevelFields& next, std::span<const double> weight,
                                 NodeRange range, const StepConfig& cfg) {
  return dispatch<true>(now, next, weight, range, cfg);
}

void line_operator_serial(const SpaceTimeField& field, std::span<const double> weight, LineSign sign,
                          SpaceTimeField& out) {
  check_line_args(field, weight, out);
  const auto nodes = static_cast<std::ptrdiff_t>(field.nodes);
  const double h = field.delta;
  const double sgn = sign == LineSign::plus ? 1.0 : -1.0;
  auto q = [&](std::size_t m, std::ptrdiff_t j) {
    if (j < 0 || j >= nodes) return 0.0;
    return field.at(m, static_cast<std::size_t>(j)) * weight[static_cast<std::size_t>(j)];
  };
  for (std::size_t n = 0; n < field.levels; ++n) {
    for (std::ptrdiff_t i = 0; i < nodes; ++i) {
      double left_moving = 0.0;   // along x + t = const
      double right_moving = 0.0;  // along x - t = const
      for (std::size_t m = 0; m <= n; ++m) {
        const auto back = static_cast<std::ptrdiff_t>(n - m);
        const double wgt = (m == 0 || m == n) ? 0.5 : 1.0;
        left_moving += wgt * q(m, i + back);
        right_moving += wgt * q(m, i - back);
      }
      if (n == 0) left_moving = right_moving = 0.0;
      out.at(n, static_cast<std::size_t>(i)) = 0.5 * h * (left_moving + sgn * right_moving);
    }
  }
}

void line_operator_parallel(const SpaceTimeField& field, std::span<const double> weight, LineSign sign,
                            SpaceTimeField& out) {
  check_line_args(field, weight, out);
  const auto nodes = static_cast<std::ptrdiff_t>(field.nodes);
  const double h = field.delta;
  const double sgn = sign == LineSign::plus ? 1.0 : -1.0;
  std::vector<double> acc_l(field.nodes, 0.0), acc_r(field.nodes, 0.0);
  std::vector<double> nxt_l(field.nodes), nxt_r(field.nodes);
  std::vector<double> q_prev(field.nodes), q_now(field.nodes);

  for (std::ptrdiff_t i = 0; i < nodes; ++i) q_prev[i] = field.at(0, i) * weight[i];
  std::fill(out.row(0).begin(), out.row(0).end(), 0.0);

  for (std::size_t n = 1; n < field.levels; ++n) {
    const auto row = field.row(n);
    auto dst = out.row(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < nodes; ++i) {
      const double qn = row[i] * weight[i];
      q_now[i] = qn;
      const double ql = i + 1 < nodes ? q_prev[i + 1] : 0.0;
      const double al = i + 1 < nodes ? acc_l[i + 1] : 0.0;
      const double qr = i > 0 ? q_prev[i - 1] : 0.0;
      const double ar = i > 0 ? acc_r[i - 1] : 0.0;
      nxt_l[i] = al + 0.5 * h * (ql + qn);
      nxt_r[i] = ar + 0.5 * h * (qr + qn);
      dst[i] = 0.5 * (nxt_l[i] + sgn * nxt_r[i]);
    }
    acc_l.swap(nxt_l);
    acc_r.swap(nxt_r);
    q_prev.swap(q_now);
  }
}

}  // namespace lifespan
