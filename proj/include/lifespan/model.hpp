#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lifespan {

/// Japanese bracket <x> = (1 + x^2)^{1/2}.
double bracket(double x) noexcept;

/// Spatial weight <x>^{-a} multiplying |u_x|^p. Every Duhamel operator and
/// the solver source term use this function.
double weight(double x, double a) noexcept;

struct HyperbolicPair {
  double phi;  // e^x + e^-x
  double psi;  // -e^x + e^-x
};

/// Throws std::domain_error when e^|x| overflows.
HyperbolicPair hyperbolic_pair(double x);

enum class Preset { bump_f, bump_g, bump_both, thm2, zero };

Preset parse_preset(std::string_view name);
std::string_view to_string(Preset preset) noexcept;

/// One instance of u_tt - u_xx = |u_x|^p / <x>^a with data (eps f, eps g).
struct ProblemSpec {
  double p = 2.0;
  double a = 0.0;
  double eps = 0.1;
  double R = 1.0;
  Preset preset = Preset::bump_both;
  /// Amplitudes (A_f, A_g) of the bump profiles.
  std::vector<double> preset_params{1.0, 1.0};

  /// Throws std::invalid_argument on p <= 1, eps <= 0 or R < 1.
  void validate() const;
};

/// A * (1 - (x/R)^2)^3 on |x| <= R, zero elsewhere. C^2 with compact support.
class BumpProfile {
 public:
  BumpProfile() = default;
  BumpProfile(double amplitude, double radius);

  double value(double x) const noexcept;
  double d1(double x) const noexcept;
  double d2(double x) const noexcept;
  /// Integral of the profile over (-inf, x].
  double primitive(double x) const noexcept;

  double amplitude() const noexcept { return amplitude_; }
  double radius() const noexcept { return radius_; }
  bool is_zero() const noexcept { return amplitude_ == 0.0; }

 private:
  double amplitude_ = 0.0;
  double radius_ = 1.0;
};

/// Initial data (f, g) exposed both as exact callables and as sampled tables.
/// Immutable after construction.
class InitialData {
 public:
  InitialData(BumpProfile f, BumpProfile g, double support_radius);

  double f(double x) const noexcept { return f_.value(x); }
  double df(double x) const noexcept { return f_.d1(x); }
  double d2f(double x) const noexcept { return f_.d2(x); }
  double g(double x) const noexcept { return g_.value(x); }
  double dg(double x) const noexcept { return g_.d1(x); }
  /// Integral of g over (-inf, x].
  double g_primitive(double x) const noexcept { return g_.primitive(x); }

  double support_radius() const noexcept { return radius_; }
  bool is_zero() const noexcept { return f_.is_zero() && g_.is_zero(); }
  const BumpProfile& f_profile() const noexcept { return f_; }
  const BumpProfile& g_profile() const noexcept { return g_; }

  struct Samples {
    std::vector<double> f, df, g;
  };
  /// Samples at x0 + k * delta for k in [0, count).
  Samples sample(double x0, double delta, std::size_t count) const;

 private:
  BumpProfile f_;
  BumpProfile g_;
  double radius_;
};

/// Builds preset data. `amp` holds (A_f, A_g).
/// Throws std::invalid_argument for R < 1, and std::runtime_error when the
/// thm2 sign conditions fail under quadrature.
InitialData preset_data(Preset preset, double R, std::array<double, 2> amp = {1.0, 1.0});
InitialData preset_data(const ProblemSpec& spec);

/// Integrals entering the thm2 hypothesis, by 10^4-node trapezoid quadrature:
/// first = int psi f', second = int psi (g' - f').
std::array<double, 2> thm2_integrals(const InitialData& data);

/// d'Alembert solution of the free wave equation scaled by eps.
struct FreeWave {
  double u = 0.0;
  double ux = 0.0;
  double ut = 0.0;
  double uxx = 0.0;
};

FreeWave free_solution(const InitialData& data, double eps, double x, double t);

struct LightCone {
  double R = 1.0;
  bool contains(double x, double t) const noexcept;
};

}  // namespace lifespan
