#include "lifespan/odelab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace lifespan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEscape = 1e12;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void finite_row(const SeqRow& row) {
  for (double v : row.recurrence)
    if (!std::isfinite(v)) throw std::overflow_error("seq_eval: value out of floating range at n = " + std::to_string(row.n));
  for (double v : row.closed)
    if (std::isinf(v)) throw std::overflow_error("seq_eval: value out of floating range at n = " + std::to_string(row.n));
}

// log(l_n / l_{n+1})
double log_l_ratio(double p, int n) { return -std::log1p(std::pow(2.0 * p, -(n + 1))); }

}  // namespace

SeqKind parse_seq_kind(std::string_view name) {
  if (name == "lem1_abc") return SeqKind::lem1_abc;
  if (name == "lizhou_mk") return SeqKind::lizhou_mk;
  if (name == "lizhou_hjt") return SeqKind::lizhou_hjt;
  if (name == "lizhou_ql") return SeqKind::lizhou_ql;
  if (name == "products") return SeqKind::products;
  throw std::invalid_argument("unknown sequence kind '" + std::string(name) + "'");
}

std::string_view to_string(SeqKind kind) noexcept {
  switch (kind) {
    case SeqKind::lem1_abc: return "lem1_abc";
    case SeqKind::lizhou_mk: return "lizhou_mk";
    case SeqKind::lizhou_hjt: return "lizhou_hjt";
    case SeqKind::lizhou_ql: return "lizhou_ql";
    case SeqKind::products: return "products";
  }
  return "?";
}

double l_infinity(double p) {
  double l = 1.0;
  for (int i = 1; i < 2000; ++i) {
    const double f = 1.0 + std::pow(2.0 * p, -i);
    if (f == 1.0) break;
    l *= f;
  }
  return l;
}

double k_infinity() {
  double k = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double term = std::ldexp(1.0, -i);
    if (k + term == k) break;
    k += term;
  }
  return k;
}

double log_b(double p, int n) { return std::pow(p, n) * log_l_ratio(p, n); }

int compute_n0(double p) {
  require(p > 1.0, "compute_n0: p must exceed 1");
  double worst = 0.0;  // min over m of log b_m
  for (int m = 1; m <= 200; ++m) worst = std::min(worst, log_b(p, m));
  for (int n = 1; n < 1000; ++n)
    if (worst >= -std::pow(p, n) * std::log(2.0)) return n;
  throw std::overflow_error("compute_n0: no admissible n found");
}

double half_product() {
  double r = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double f = 1.0 + std::ldexp(1.0, -k);
    if (f == 1.0) break;
    r *= f;
  }
  return r;
}

SequenceTable seq_eval(SeqKind kind, double p, double a, int n, double param1, double param2) {
  require(p > 1.0, "seq_eval: p must exceed 1");
  require(n >= 1, "seq_eval: n must be at least 1");
  require(param1 > 0.0 && param2 > 0.0, "seq_eval: seed constants must be positive");
  SequenceTable tab;
  tab.kind = kind;
  tab.p = p;
  tab.a = a;
  tab.l_inf = l_infinity(p);
  tab.k_inf = k_infinity();
  tab.n0 = compute_n0(p);
  const double lp = std::log(param1);
  const double l2 = std::log(param2);

  switch (kind) {
    case SeqKind::lem1_abc: {
      tab.columns = {"a_n", "b_n", "log_C_n"};
      const double k = 2.0 * p + 1.0 - a;
      double an = (1.0 - a) / p + 2.0, bn = 0.0, lc = lp;
      for (int m = 1; m <= n; ++m) {
        if (m > 1) {
          an = p * an + 2.0 + (1.0 - a) / p;
          bn = p * bn + 2.0 * p;
          lc = l2 + p * lc - 2.0 * std::log(an);
        }
        const double pm = std::pow(p, m - 1);
        SeqRow row{m, {an, bn, lc}, {-k / (1.0 - p) * pm + k / (p * (1.0 - p)), -2.0 * p / (1.0 - p) * pm + 2.0 * p / (1.0 - p), kNaN}};
        finite_row(row);
        tab.rows.push_back(std::move(row));
      }
      break;
    }
    case SeqKind::lizhou_mk: {
      require(a < 1.0, "seq_eval: lizhou_mk needs a < 1");
      tab.columns = {"m_n", "log_K_n"};
      double mn = 0.0, lk = lp;
      for (int m = 1; m <= n; ++m) {
        if (m > 1) {
          const int j = m - 1;  // advance from index j
          const double e = mn * p - a;
          lk = l2 + p * lk - (j + 2) * std::log(2.0 * p) - std::log(e + 1.0) + e * log_l_ratio(p, j);
          mn = mn * p + 1.0 - a;
        }
        const double c = (1.0 - a) / (p - 1.0);
        SeqRow row{m, {mn, lk}, {std::pow(p, m - 1) * c - c, kNaN}};
        finite_row(row);
        tab.rows.push_back(std::move(row));
      }
      break;
    }
    case SeqKind::lizhou_hjt: {
      tab.columns = {"h_n", "j_n", "log_T_n"};
      double hn = 0.0, jn = 0.0, lt = lp;
      for (int m = 1; m <= n; ++m) {
        if (m > 1) {
          const int j = m - 1;
          lt = l2 + p * lt - (j + 2) * std::log(2.0 * p) - std::log(hn * p + 1.0) + hn * p * log_l_ratio(p, j);
          hn = hn * p + 1.0;
          jn = jn * p + a;
        }
        const double pm = std::pow(p, m - 1);
        SeqRow row{m, {hn, jn, lt}, {pm / (p - 1.0) - 1.0 / (p - 1.0), pm * a / (p - 1.0) - a / (p - 1.0), kNaN}};
        finite_row(row);
        tab.rows.push_back(std::move(row));
      }
      break;
    }
    case SeqKind::lizhou_ql: {
      tab.columns = {"q_n", "log_L_n"};
      double qn = 0.0, ll = lp;
      for (int m = 0; m <= n; ++m) {
        if (m > 0) {
          const int j = m - 1;
          const double qn1 = qn * p + 1.0;
          ll = l2 + p * ll - std::log(4.0 * (std::ldexp(1.0, j) + 1.0) * qn1);
          qn = qn1;
        }
        SeqRow row{m, {qn, ll}, {std::pow(p, m) / (p - 1.0) - 1.0 / (p - 1.0), kNaN}};
        finite_row(row);
        tab.rows.push_back(std::move(row));
      }
      break;
    }
    case SeqKind::products: {
      tab.columns = {"l_n", "k_n", "log_b_n"};
      double ln = 1.0, kn = 1.0;
      for (int m = 1; m <= n; ++m) {
        ln *= 1.0 + std::pow(2.0 * p, -m);
        kn += std::ldexp(1.0, -m);
        SeqRow row{m, {ln, kn, log_b(p, m)}, {kNaN, 2.0 - std::ldexp(1.0, -m), kNaN}};
        finite_row(row);
        tab.rows.push_back(std::move(row));
      }
      break;
    }
  }
  return tab;
}

BoundReport lemma1_bound(double D1, double D2, double p, double a) {
  require(p > 1.0, "lemma1_bound: p must exceed 1");
  require(a < 1.0, "lemma1_bound: a must be below 1");
  require(D1 > 0.0 && D2 > 0.0, "lemma1_bound: D1 and D2 must be positive");
  const double k = 2.0 * p + 1.0 - a;
  const double pm = p - 1.0;
  BoundReport r;
  r.lemma = "lem1";
  r.p = p;
  r.a = a;
  r.param1 = D1;
  r.param2 = D2;
  r.constant = std::pow(p, 2.0 * p / (pm * pm)) * std::pow(2.0, k / pm) * std::pow(k, 2.0 / pm) /
               std::pow(D2 * pm * pm, 1.0 / pm);
  r.t_bound = std::pow(r.constant / D1, pm / (1.0 - a));
  return r;
}

BoundReport lizhou_bound(double M1, double M2, double p, double a) {
  require(p > 1.0, "lizhou_bound: p must exceed 1");
  require(a <= 1.0, "lizhou_bound: a must not exceed 1");
  require(M1 > 0.0 && M2 > 0.0, "lizhou_bound: M1 and M2 must be positive");
  const double pm = p - 1.0;
  const double pm2 = pm * pm;
  BoundReport r;
  r.lemma = "lizhou";
  r.p = p;
  r.a = a;
  r.param1 = M1;
  r.param2 = M2;
  if (a == 1.0) {
    r.constant = std::pow(2.0, (2.0 * p - 1.0) / pm2) * std::pow(p, p / pm2) * std::pow(4.0 / (M2 * pm), 1.0 / pm);
    r.t_bound = std::exp(std::pow(r.constant / M1, pm));
    return r;
  }
  const double pn0 = std::pow(p, compute_n0(p));
  const double lead = std::pow(2.0 * p, (4.0 * p - 2.0) / pm2) * std::pow(M2 * pm, -1.0 / pm);
  if (a <= 0.0) r.constant = lead * std::pow(2.0, (1.0 - a) * (pm + pn0) / pm2) * std::pow(1.0 - a, 1.0 / pm);
  else r.constant = lead * std::pow(2.0, ((1.0 + a) * pm + pn0) / pm2);
  r.t_bound = std::pow(r.constant / M1, pm / (1.0 - a));
  return r;
}

BoundReport lemma3_bound(const Lemma3Params& q) {
  auto fail = [](const char* what) { throw ConstraintError(std::string("lemma3_bound: violated ") + what); };
  if (!(q.p > 1.0)) fail("p > 1");
  if (!(q.a <= 1.0)) fail("a <= 1");
  if (!(q.b >= std::max(0.0, q.x / (q.p - 1.0)))) fail("b >= max{0, x/(p-1)}");
  if (std::abs(q.y + q.p * q.a + 1.0) > 1e-12) fail("y + pa = -1");
  if (!(q.z + q.c * q.p > -1.0)) fail("z + cp > -1");
  if (!(q.z + q.c * q.p >= q.c - 1.0)) fail("z + cp >= c - 1");
  if (!(q.A > 0.0 && q.B > 0.0)) fail("A > 0, B > 0");
  if (!(q.R > 1.0)) fail("R > 1");
  const double pm = q.p - 1.0;
  const double denom = q.x + q.z + 1.0 + (q.c - q.b) * pm;
  if (!(denom > 0.0)) fail("x + z + 1 + (c - b)(p - 1) > 0");

  BoundReport r;
  r.lemma = "lem3";
  r.p = q.p;
  r.a = q.a;
  r.param1 = q.A;
  r.param2 = q.B;
  const double m = std::max(q.c + (q.z + 1.0) / pm, q.c + (q.z + 1.0) / q.p);
  r.constant = std::pow(2.0, q.c + (q.p + (q.z + 1.0) * pm) / (pm * pm)) * std::pow(q.p, q.p / (pm * pm)) *
               std::pow(m / q.B, 1.0 / pm);
  const double R_inf = q.R * half_product();
  r.t_bound = std::exp(std::max(2.0 * std::log(R_inf), std::pow(r.constant / q.A, pm / denom)));
  return r;
}

namespace {

struct State {
  double y, z;
};

struct Rhs {
  OdeKind kind;
  OdeParams q;
  double coef(double t) const {
    if (kind == OdeKind::lem1) return q.c2 * std::pow(t, 1.0 - 2.0 * q.p - q.a / q.p);
    return q.c2 * std::pow(1.0 + t, -q.a);
  }
  double damping() const { return kind == OdeKind::lem1 ? 0.0 : 2.0; }
  // second derivative of D1 t^{2-a/p}, so that H >= D1 t^{2-a/p} holds along the solution
  double forcing(double t) const {
    if (kind != OdeKind::lem1) return 0.0;
    const double e = 2.0 - q.a / q.p;
    return q.c1 * e * (e - 1.0) * std::pow(t, e - 2.0);
  }
  State f(double t, State s) const {
    return {s.z, forcing(t) + coef(t) * std::pow(std::abs(s.y), q.p) - damping() * s.z};
  }
  // d/dy of the source term
  double dsource(double t, double y) const {
    return coef(t) * q.p * std::pow(std::abs(y), q.p - 1.0) * (y < 0.0 ? -1.0 : 1.0);
  }
};

// Solves Y = base + gh f(ts, Y) by Newton and returns K = f(ts, Y) as
// (Y - base) / gh; false when it fails to converge. Iterating on Y rather than
// K keeps the slope accurate when it is a small difference of large terms.
bool stage(const Rhs& rhs, double ts, State base, double gh, State& K) {
  const State f0 = rhs.f(ts, base);
  State Y{base.y + gh * f0.y, base.z + gh * f0.z};
  const double c = rhs.damping();
  for (int it = 0; it < 40; ++it) {
    const State fy = rhs.f(ts, Y);
    const double r1 = Y.y - base.y - gh * fy.y;
    const double r2 = Y.z - base.z - gh * fy.z;
    // Jacobian of Y - gh f(Y): [[1, -gh], [-gh s_y, 1 + gh c]]
    const double sy = rhs.dsource(ts, Y.y);
    const double a11 = 1.0, a12 = -gh, a21 = -gh * sy, a22 = 1.0 + gh * c;
    const double det = a11 * a22 - a12 * a21;
    if (!(std::abs(det) > 1e-300)) return false;
    const double dy = (r1 * a22 - a12 * r2) / det;
    const double dz = (a11 * r2 - a21 * r1) / det;
    Y.y -= dy;
    Y.z -= dz;
    if (!std::isfinite(Y.y) || !std::isfinite(Y.z)) return false;
    const double yscale = std::abs(Y.y) + std::abs(base.y);
    const double zscale = std::abs(Y.z) + std::abs(base.z);
    if (std::abs(dy) <= 1e-15 * yscale + 1e-300 && std::abs(dz) <= 1e-15 * zscale + 1e-300) {
      K = {(Y.y - base.y) / gh, (Y.z - base.z) / gh};
      return true;
    }
  }
  return false;
}

double default_cap(OdeKind kind, const OdeParams& q) {
  try {
    const BoundReport b = kind == OdeKind::lem1 ? lemma1_bound(q.c1, q.c2, q.p, q.a) : lizhou_bound(q.c1, q.c2, q.p, q.a);
    return 10.0 * b.t_bound;
  } catch (const std::invalid_argument&) {
    return kInf;
  }
}

}  // namespace

double ode_escape_time(OdeKind kind, const OdeParams& q, double step, double t_cap) {
  require(q.p > 1.0, "ode_escape_time: p must exceed 1");
  require(step > 0.0 && step < 1.0, "ode_escape_time: step factor must lie in (0, 1)");
  require(q.E >= 0.0 && (kind == OdeKind::lizhou || q.E > 0.0), "ode_escape_time: bad start time E");
  const Rhs rhs{kind, q};
  State s;
  if (kind == OdeKind::lem1) {
    const double e = 2.0 - q.a / q.p;
    s = {q.c1 * std::pow(q.E, e), q.c1 * e * std::pow(q.E, e - 1.0)};
  } else {
    s = {q.c1, 0.0};
  }
  const double gamma = 1.0 - std::sqrt(0.5);
  double t = q.E;
  const long max_steps = 50'000'000;
  const double decay = 0.5 * (q.p - 1.0);  // y^{-decay} is near linear in time at escape
  for (long n = 0; n < max_steps; ++n) {
    if (t > t_cap || !(t < 1e300)) break;
    double h = step * (1.0 + t);
    if (s.z != 0.0) h = std::min(h, step * std::abs(s.y) / std::abs(s.z));
    State next{};
    for (int tries = 0;; ++tries) {
      State k1, k2;
      const bool ok1 = stage(rhs, t + gamma * h, s, gamma * h, k1);
      const State mid{s.y + (1.0 - gamma) * h * k1.y, s.z + (1.0 - gamma) * h * k1.z};
      const bool ok2 = ok1 && stage(rhs, t + h, mid, gamma * h, k2);
      if (ok2) {
        next = {s.y + h * ((1.0 - gamma) * k1.y + gamma * k2.y), s.z + h * ((1.0 - gamma) * k1.z + gamma * k2.z)};
        if (std::isfinite(next.y) && std::isfinite(next.z)) break;
      }
      h *= 0.5;
      if (tries > 60) throw std::runtime_error("ode_escape_time: step size collapsed");
    }
    if (next.y >= kEscape) {
      const double u0 = std::pow(std::max(s.y, 1e-300), -decay);
      const double u1 = std::pow(next.y, -decay);
      const double ut = std::pow(kEscape, -decay);
      const double frac = u0 > u1 ? std::clamp((u0 - ut) / (u0 - u1), 0.0, 1.0) : 1.0;
      return t + frac * h;
    }
    s = next;
    t += h;
  }
  std::ostringstream msg;
  msg << "no blow-up before t = " << t << " (cap " << t_cap << ")";
  throw NoBlowup(msg.str());
}

OdeResult ode_blowup(OdeKind kind, const OdeParams& q, double step0, double t_cap) {
  if (t_cap <= 0.0) t_cap = default_cap(kind, q);
  OdeResult res;
  double h = step0;
  double prev = ode_escape_time(kind, q, h, t_cap);
  for (int k = 0; k < 12; ++k) {
    h *= 0.5;
    const double cur = ode_escape_time(kind, q, h, t_cap);
    res.t_observed = cur;
    res.richardson_rel = std::abs(prev - cur) / cur;
    res.step_used = h;
    if (res.richardson_rel < 0.01) return res;
    prev = cur;
  }
  return res;
}

BoundReport dominance_point(OdeKind kind, const OdeParams& q, double step0) {
  BoundReport r = kind == OdeKind::lem1 ? lemma1_bound(q.c1, q.c2, q.p, q.a) : lizhou_bound(q.c1, q.c2, q.p, q.a);
  const OdeResult o = ode_blowup(kind, q, step0);
  r.t_observed = o.t_observed;
  r.richardson_rel = o.richardson_rel;
  r.margin = r.t_bound / o.t_observed;
  return r;
}

void write_bound_csv(const std::vector<BoundReport>& reports, std::ostream& os) {
  os << "lemma,p,a,param1,param2,t_bound,t_observed,margin\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.lemma.c_str(), r.p, r.a,
                  r.param1, r.param2, r.t_bound, r.t_observed, r.margin);
    os << buf;
  }
}

}  // namespace lifespan
