#include "lifespan/model.hpp"

#include "lifespan/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lifespan {

double bracket(double x) noexcept { return std::hypot(1.0, x); }

double weight(double x, double a) noexcept {
  if (a == 0.0) return 1.0;
  return std::pow(1.0 + x * x, -0.5 * a);
}

HyperbolicPair hyperbolic_pair(double x) {
  // e^709.78 is the largest finite double
  if (!(std::abs(x) < 709.0)) throw std::domain_error("hyperbolic_pair: |x| outside exponential range");
  const double ep = std::exp(x);
  const double em = std::exp(-x);
  return {ep + em, -ep + em};
}

Preset parse_preset(std::string_view name) {
  if (name == "bump_f") return Preset::bump_f;
  if (name == "bump_g") return Preset::bump_g;
  if (name == "bump_both") return Preset::bump_both;
  if (name == "thm2") return Preset::thm2;
  if (name == "zero") return Preset::zero;
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

std::string_view to_string(Preset preset) noexcept {
  switch (preset) {
    case Preset::bump_f: return "bump_f";
    case Preset::bump_g: return "bump_g";
    case Preset::bump_both: return "bump_both";
    case Preset::thm2: return "thm2";
    case Preset::zero: return "zero";
  }
  return "?";
}

void ProblemSpec::validate() const {
  if (!(p > 1.0)) throw std::invalid_argument("ProblemSpec: p must exceed 1");
  if (!(eps > 0.0)) throw std::invalid_argument("ProblemSpec: eps must be positive");
  if (!(R >= 1.0)) throw std::invalid_argument("ProblemSpec: R must be at least 1");
  if (!std::isfinite(a)) throw std::invalid_argument("ProblemSpec: a must be finite");
}

BumpProfile::BumpProfile(double amplitude, double radius) : amplitude_(amplitude), radius_(radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("BumpProfile: radius must be positive");
}

double BumpProfile::value(double x) const noexcept {
  const double z = x / radius_;
  if (std::abs(z) >= 1.0) return 0.0;
  const double q = 1.0 - z * z;
  return amplitude_ * q * q * q;
}

double BumpProfile::d1(double x) const noexcept {
  const double z = x / radius_;
  if (std::abs(z) >= 1.0) return 0.0;
  const double q = 1.0 - z * z;
  return amplitude_ * (-6.0 * z / radius_) * q * q;
}

double BumpProfile::d2(double x) const noexcept {
  const double z = x / radius_;
  if (std::abs(z) >= 1.0) return 0.0;
  const double q = 1.0 - z * z;
  const double r2 = radius_ * radius_;
  return amplitude_ * (-6.0 * q * q + 24.0 * z * z * q) / r2;
}

double BumpProfile::primitive(double x) const noexcept {
  const double z = std::clamp(x / radius_, -1.0, 1.0);
  const double z2 = z * z;
  // antiderivative of (1 - z^2)^3, shifted so that it vanishes at z = -1
  const double poly = z * (1.0 - z2 + 0.6 * z2 * z2 - z2 * z2 * z2 / 7.0);
  return amplitude_ * radius_ * (poly + 16.0 / 35.0);
}

InitialData::InitialData(BumpProfile f, BumpProfile g, double support_radius)
    : f_(f), g_(g), radius_(support_radius) {
  if (f_.radius() > radius_ || g_.radius() > radius_)
    throw std::invalid_argument("InitialData: profile exceeds support radius");
}

InitialData::Samples InitialData::sample(double x0, double delta, std::size_t count) const {
  Samples s;
  s.f.resize(count);
  s.df.resize(count);
  s.g.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double x = x0 + delta * static_cast<double>(k);
    s.f[k] = f_.value(x);
    s.df[k] = f_.d1(x);
    s.g[k] = g_.value(x);
  }
  return s;
}

std::array<double, 2> thm2_integrals(const InitialData& data) {
  const double R = data.support_radius();
  constexpr std::size_t nodes = 10000;
  const double first = trapezoid(
      [&](double x) { return hyperbolic_pair(x).psi * data.df(x); }, -R, R, nodes);
  const double second = trapezoid(
      [&](double x) { return hyperbolic_pair(x).psi * (data.dg(x) - data.df(x)); }, -R, R, nodes);
  return {first, second};
}

InitialData preset_data(Preset preset, double R, std::array<double, 2> amp) {
  if (!(R >= 1.0)) throw std::invalid_argument("preset_data: R must be at least 1");
  const auto [af, ag] = amp;
  switch (preset) {
    case Preset::zero: return InitialData({0.0, R}, {0.0, R}, R);
    case Preset::bump_f: return InitialData({af, R}, {0.0, R}, R);
    case Preset::bump_g: return InitialData({0.0, R}, {ag, R}, R);
    case Preset::bump_both: return InitialData({af, R}, {ag, R}, R);
    case Preset::thm2: {
      InitialData data({0.0, R}, {ag, R}, R);
      const auto [first, second] = thm2_integrals(data);
      // the first integral vanishes identically for f = 0; allow roundoff
      if (first < -1e-12 || !(second > 0.0))
        throw std::runtime_error("preset_data: thm2 sign conditions fail under quadrature");
      return data;
    }
  }
  throw std::invalid_argument("preset_data: unhandled preset");
}

InitialData preset_data(const ProblemSpec& spec) {
  std::array<double, 2> amp{1.0, 1.0};
  for (std::size_t k = 0; k < std::min<std::size_t>(2, spec.preset_params.size()); ++k)
    amp[k] = spec.preset_params[k];
  return preset_data(spec.preset, spec.R, amp);
}

FreeWave free_solution(const InitialData& data, double eps, double x, double t) {
  if (t < 0.0) throw std::invalid_argument("free_solution: t must be nonnegative");
  const double xp = x + t;
  const double xm = x - t;
  FreeWave w;
  w.u = eps * (0.5 * (data.f(xp) + data.f(xm)) + 0.5 * (data.g_primitive(xp) - data.g_primitive(xm)));
  w.ux = eps * 0.5 * (data.df(xp) + data.df(xm) + data.g(xp) - data.g(xm));
  w.ut = eps * 0.5 * (data.df(xp) - data.df(xm) + data.g(xp) + data.g(xm));
  w.uxx = eps * 0.5 * (data.d2f(xp) + data.d2f(xm) + data.dg(xp) - data.dg(xm));
  return w;
}

bool LightCone::contains(double x, double t) const noexcept { return std::abs(x) <= t + R; }

}  // namespace lifespan
