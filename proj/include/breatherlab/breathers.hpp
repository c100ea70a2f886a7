#pragma once
// Closed-form exact solutions: Sasa-Satsuma, Satsuma-Yajima, Kuznetsov-Ma and
// Peregrine breathers, the Stokes wave, the NLS soliton and the general
// two-soliton of focusing NLS.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "grid.hpp"

namespace breatherlab {

enum class Family { SS, SY, KM, P, SY2, Soliton, Stokes };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::SS: return "ss";
    case Family::SY: return "sy";
    case Family::KM: return "km";
    case Family::P: return "p";
    case Family::SY2: return "sy2";
    case Family::Soliton: return "soliton";
    case Family::Stokes: return "stokes";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  if (s == "ss") return Family::SS;
  if (s == "sy") return Family::SY;
  if (s == "km") return Family::KM;
  if (s == "p") return Family::P;
  if (s == "sy2") return Family::SY2;
  if (s == "soliton") return Family::Soliton;
  if (s == "stokes") return Family::Stokes;
  throw InvalidArgument("unknown family '" + s + "'");
}

/// Which evolution equation a family solves.
enum class Model { SS, SY, KM, P };

struct BreatherSpec {
  Family family = Family::SS;
  double alpha = 1.0, beta = 1.0;      // SS
  double c1 = 1.0, c2 = 3.0;           // SY, SY2
  double a = 1.0;                      // KM
  double alpha1 = 0.0, alpha2 = 0.0;   // SY2 velocities
  double c = 1.0, v = 0.0;             // NLS soliton
  double x1 = 0.0, x2 = 0.0;           // SS phase and position shifts
  double t0 = 0.0, x0 = 0.0;           // time/space shifts for the other families
  double gamma0 = 0.0;                 // soliton phase

  static BreatherSpec ss(double al, double be) {
    BreatherSpec s;
    s.family = Family::SS;
    s.alpha = al;
    s.beta = be;
    return s;
  }
  static BreatherSpec sy(double a1, double a2) {
    BreatherSpec s;
    s.family = Family::SY;
    s.c1 = a1;
    s.c2 = a2;
    return s;
  }
  static BreatherSpec sy2(double a1, double a2, double v1, double v2) {
    BreatherSpec s;
    s.family = Family::SY2;
    s.c1 = a1;
    s.c2 = a2;
    s.alpha1 = v1;
    s.alpha2 = v2;
    return s;
  }
  static BreatherSpec km(double aa) {
    BreatherSpec s;
    s.family = Family::KM;
    s.a = aa;
    return s;
  }
  static BreatherSpec peregrine() {
    BreatherSpec s;
    s.family = Family::P;
    return s;
  }
  static BreatherSpec soliton(double cc, double vv = 0.0) {
    BreatherSpec s;
    s.family = Family::Soliton;
    s.c = cc;
    s.v = vv;
    return s;
  }

  /// Throws InvalidArgument if the parameters leave the family's domain.
  void validate() const {
    const auto finite = [](double v) { return std::isfinite(v); };
    for (double v : {alpha, beta, c1, c2, a, alpha1, alpha2, c, v, x1, x2, t0, x0, gamma0})
      if (!finite(v)) throw InvalidArgument("parameters must be finite");
    switch (family) {
      case Family::SS:
        if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
        if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
        break;
      case Family::SY:
        if (!(c1 > 0.0) || !(c2 > 0.0)) throw InvalidArgument("c1 and c2 must be positive");
        if (c1 == c2) throw InvalidArgument("c1 must differ from c2");
        break;
      case Family::SY2:
        if (!(c1 > 0.0) || !(c2 > 0.0)) throw InvalidArgument("c1 and c2 must be positive");
        break;
      case Family::KM:
        if (!(a > 0.5)) throw InvalidArgument("a must exceed 1/2");
        break;
      case Family::Soliton:
        if (!(c > 0.0)) throw InvalidArgument("soliton scaling c must be positive");
        break;
      case Family::P:
      case Family::Stokes:
        break;
    }
  }

  // SS derived quantities
  [[nodiscard]] double ss_gamma() const { return 3 * alpha * alpha - beta * beta; }
  [[nodiscard]] double ss_delta() const { return alpha * alpha - 3 * beta * beta; }
  [[nodiscard]] cplx ss_eta() const { return alpha / cplx(alpha, beta); }

  // KM derived quantities
  [[nodiscard]] double km_alpha() const { return std::sqrt(8 * a * (2 * a - 1)); }
  [[nodiscard]] double km_beta() const { return std::sqrt(2 * (2 * a - 1)); }

  [[nodiscard]] bool stokes_background() const {
    return family == Family::KM || family == Family::P || family == Family::Stokes;
  }
  [[nodiscard]] Model model() const {
    switch (family) {
      case Family::SS: return Model::SS;
      case Family::KM: return Model::KM;
      case Family::P:
      case Family::Stokes: return Model::P;
      default: return Model::SY;
    }
  }
};

/// Q(y) = 2(e^y + eta e^{-y}) / (e^{2y} + 2 + |eta|^2 e^{-2y}), evaluated without
/// overflow by factoring out the dominant exponential.
inline cplx ss_Q(double y, cplx eta) {
  const double e2 = std::norm(eta);
  if (y >= 0) {
    const double a = std::exp(-y);
    const double a2 = a * a;
    return 2.0 * (a + eta * a * a2) / (1.0 + 2.0 * a2 + e2 * a2 * a2);
  }
  const double b = std::exp(y);
  const double b2 = b * b;
  return 2.0 * (b * b2 + eta * b) / (b2 * b2 + 2.0 * b2 + e2);
}

/// Scaled profile Q_beta(y) = beta Q(beta y).
inline cplx ss_Qbeta(const BreatherSpec& s, double y) { return s.beta * ss_Q(s.beta * y, s.ss_eta()); }

inline cplx ss_profile(const BreatherSpec& s, double t, double x) {
  const double theta = s.alpha * (x + s.ss_delta() * t + s.x1);
  return ss_Qbeta(s, x + s.ss_gamma() * t + s.x2) * std::exp(I * theta);
}

enum class HumpKind { Single, Double };

struct HumpClass {
  HumpKind kind;
  double eta_abs;
  double gamma;
};

inline HumpClass hump_classification(const BreatherSpec& s) {
  if (s.family != Family::SS) throw InvalidArgument("hump classification applies to SS only");
  const double ea = std::abs(s.ss_eta());
  return {ea > 0.5 ? HumpKind::Single : HumpKind::Double, ea, s.ss_gamma()};
}

/// cosh(a|x|) e^{-b|x|} for 0 <= a <= b, finite for any x.
inline double cosh_scaled(double a, double b, double ax) {
  return 0.5 * (std::exp((a - b) * ax) + std::exp(-(a + b) * ax));
}

inline cplx sy_breather(const BreatherSpec& s, double t, double x) {
  t -= s.t0;
  x -= s.x0;
  const double gp = s.c2 + s.c1, gm = s.c2 - s.c1;
  const double ax = std::abs(x), big = std::abs(gp);
  const double c1 = s.c1, c2 = s.c2;
  const cplx num = 2.0 * std::sqrt(2.0) * gp * gm * std::exp(I * (c1 * c1 * t)) *
                   (c1 * cosh_scaled(c2, big, ax) +
                    c2 * std::exp(I * (gp * gm * t)) * cosh_scaled(c1, big, ax));
  const double den = gm * gm * cosh_scaled(gp, big, ax) + gp * gp * cosh_scaled(std::abs(gm), big, ax) +
                     4 * c1 * c2 * std::cos(gp * gm * t) * std::exp(-big * ax);
  return num / den;
}

inline cplx km_breather(const BreatherSpec& s, double t, double x) {
  if (!(s.a > 0.5)) throw InvalidArgument("a must exceed 1/2");
  t -= s.t0;
  x -= s.x0;
  const double al = s.km_alpha(), be = s.km_beta();
  const double sech = 1.0 / std::cosh(be * x);
  const cplx num = std::sqrt(2.0) * be * (be * be * std::cos(al * t) + I * al * std::sin(al * t)) * sech;
  const double den = al - std::sqrt(2.0) * be * std::cos(al * t) * sech;
  return std::exp(I * t) * (1.0 - num / den);
}

inline cplx peregrine(double t, double x) {
  return std::exp(I * t) * (1.0 - 4.0 * (1.0 + 2.0 * I * t) / (1.0 + 4 * t * t + 2 * x * x));
}

inline cplx stokes(double t) { return std::exp(I * t); }

/// Exact soliton of i u_t + u_xx + |u|^2 u = 0. The amplitude is sqrt(2c); with
/// amplitude sqrt(c) the profile would solve the equation with 2|u|^2 u instead.
inline cplx nls_soliton(const BreatherSpec& s, double t, double x) {
  const double sc = std::sqrt(s.c);
  const double amp = std::sqrt(2 * s.c);
  const double phase = s.c * t + x * s.v / 2 - s.v * s.v * t / 4 + s.gamma0;
  return amp * std::exp(I * phase) / std::cosh(sc * (x - s.v * t - s.x0));
}

/// General two-soliton. Both r and s are rescaled by the same factor
/// e^{-(|y2|/2 + |y1|)} so that the quotient is computed without overflow.
inline cplx sy_two_soliton(const BreatherSpec& sp, double t, double x) {
  t -= sp.t0;
  x -= sp.x0;
  const double c1 = sp.c1, c2 = sp.c2, a1 = sp.alpha1, a2 = sp.alpha2;
  const double y1 = c1 * (x + 2 * a1 * t), y2 = c2 * (x + 2 * a2 * t);
  const double th1 = a1 * x + (a1 * a1 - c1 * c1) * t;
  const double th2 = a2 * x + (a2 * a2 - c2 * c2) * t;
  const double ay1 = std::abs(y1);
  const double m = 0.5 * std::abs(y2) + ay1;
  // cosh(y1) e^{-|y1|}, sinh(y1) e^{-|y1|}
  const double e = std::exp(-2 * ay1);
  const double chs = 0.5 * (1 + e);
  const double shs = 0.5 * (1 - e) * (y1 >= 0 ? 1.0 : -1.0);
  const cplx A = cplx(a2 - a1, c2);
  const cplx r = std::exp(I * (th2 / 2)) *
                 (I * c1 * std::exp(y2 / 2 - m) * std::exp(I * (th1 - th2)) +
                  std::exp(-y2 / 2 - 0.5 * std::abs(y2)) * (A * chs + I * c1 * shs));
  const cplx s = std::exp(-I * (th2 / 2)) *
                 (I * c1 * std::exp(-y2 / 2 - m) * std::exp(-I * (th1 - th2)) +
                  std::exp(y2 / 2 - 0.5 * std::abs(y2)) * (A * chs - I * c1 * shs));
  const double den = std::norm(r) + std::norm(s);
  if (!(den > 1e-300)) throw std::runtime_error("two-soliton denominator underflow");
  const double sech1 = 2 * std::exp(-ay1) / (1 + e);
  const cplx qsy = -std::sqrt(2.0) * c1 * std::exp(-I * th1) * sech1;
  return qsy + 2 * std::sqrt(2.0) * c2 * s * std::conj(r) / den;
}

/// Pointwise evaluation for any family.
inline cplx evaluate(const BreatherSpec& s, double t, double x) {
  switch (s.family) {
    case Family::SS: return ss_profile(s, t, x);
    case Family::SY: return sy_breather(s, t, x);
    case Family::KM: return km_breather(s, t, x);
    case Family::P: return peregrine(t - s.t0, x - s.x0);
    case Family::SY2: return sy_two_soliton(s, t, x);
    case Family::Soliton: return nls_soliton(s, t, x);
    case Family::Stokes: return stokes(t - s.t0);
  }
  return 0.0;
}

inline Background background_of(const BreatherSpec& s, double t) {
  return s.stokes_background() ? Background::stokes(t - s.t0) : Background::zero();
}

/// Samples the breather at time t on a grid.
inline ComplexField sample_breather(const BreatherSpec& s, double t, const GridPtr& g) {
  s.validate();
  return sample(g, [&](double x) { return evaluate(s, t, x); }, background_of(s, t));
}

/// SS profile with the carrier phase removed: Q_beta(x + gamma t + x2).
inline ComplexField sample_ss_profile(const BreatherSpec& s, double t, const GridPtr& g) {
  s.validate();
  if (s.family != Family::SS) throw InvalidArgument("SS profile requested for non-SS family");
  return sample(g, [&](double x) { return ss_Qbeta(s, x + s.ss_gamma() * t + s.x2); });
}

/// Fastest temporal frequency of the family (used to size finite-difference steps).
inline double time_scale_frequency(const BreatherSpec& s) {
  switch (s.family) {
    case Family::SS: return std::max({1.0, s.alpha, std::abs(s.alpha * s.ss_delta()),
                                      std::abs(s.ss_gamma()) * s.beta});
    case Family::SY: return std::max({1.0, s.c1 * s.c1, std::abs((s.c2 + s.c1) * (s.c2 - s.c1))});
    case Family::SY2:
      return std::max({1.0, s.c2 * s.c2 + s.alpha2 * s.alpha2, s.c1 * s.c1 + s.alpha1 * s.alpha1});
    case Family::KM: return std::max(1.0, s.km_alpha());
    case Family::Soliton: return std::max(1.0, s.c + s.v * s.v);
    default: return 1.0;
  }
}

/// d/dt of the breather by fourth-order central differences.
inline ComplexField time_derivative(const BreatherSpec& s, double t, const GridPtr& g) {
  const double dt = 1e-3 / time_scale_frequency(s);
  const auto f = [&](double tt) { return sample_breather(s, tt, g).values; };
  const CVec fp1 = f(t + dt), fm1 = f(t - dt), fp2 = f(t + 2 * dt), fm2 = f(t - 2 * dt);
  CVec d(g->N);
  for (int j = 0; j < g->N; ++j) d[j] = (8.0 * (fp1[j] - fm1[j]) - (fp2[j] - fm2[j])) / (12 * dt);
  return ComplexField(g, std::move(d));
}

enum class Param { Alpha, Beta, X1, X2 };

/// Derivative of the SS breather with respect to a parameter, by fourth-order
/// central differences in that parameter.
inline ComplexField ss_parameter_derivative(const BreatherSpec& s, Param p, double t, const GridPtr& g) {
  if (s.family != Family::SS) throw InvalidArgument("parameter derivative implemented for SS");
  const double step = 1e-3 * (p == Param::Alpha ? std::min(1.0, s.alpha)
                                : p == Param::Beta ? std::min(1.0, s.beta) : 1.0);
  const auto shifted = [&](double d) {
    BreatherSpec q = s;
    switch (p) {
      case Param::Alpha: q.alpha += d; break;
      case Param::Beta: q.beta += d; break;
      case Param::X1: q.x1 += d; break;
      case Param::X2: q.x2 += d; break;
    }
    return sample_breather(q, t, g).values;
  };
  const CVec fp1 = shifted(step), fm1 = shifted(-step), fp2 = shifted(2 * step), fm2 = shifted(-2 * step);
  CVec d(g->N);
  for (int j = 0; j < g->N; ++j) d[j] = (8.0 * (fp1[j] - fm1[j]) - (fp2[j] - fm2[j])) / (12 * step);
  return ComplexField(g, std::move(d));
}

/// Default grid for a family: L = 30 (longer for slowly decaying profiles) and N
/// large enough to resolve the fastest spatial scale. Peregrine uses L = 200,
/// N = 8192 since its tails decay only algebraically.
struct GridChoice {
  int N;
  double L;
};

inline int next_pow2(double v) {
  int n = 8;
  while (n < v && n < (1 << 20)) n <<= 1;
  return n;
}

inline GridChoice default_grid(const BreatherSpec& s) {
  double decay = 1.0, kneed = 40.0;
  switch (s.family) {
    case Family::SS:
      decay = s.beta;
      kneed = s.alpha + 40 * s.beta;
      break;
    case Family::SY:
    case Family::SY2:
      decay = std::min(s.c1, s.c2);
      kneed = 25 * (s.c1 + s.c2) + std::abs(s.alpha1) + std::abs(s.alpha2);
      break;
    case Family::KM:
      decay = s.km_beta();
      kneed = 40 * std::max(1.0, s.km_beta());
      break;
    case Family::Soliton:
      decay = std::sqrt(s.c);
      kneed = 40 * std::sqrt(s.c) + std::abs(s.v);
      break;
    case Family::P:
    case Family::Stokes:
      return {8192, 200.0};
  }
  const double L = std::clamp(30.0 / std::min(1.0, decay), 30.0, 400.0);
  const int N = std::clamp(next_pow2(2 * L * kneed / std::numbers::pi), 1024, 8192);
  return {N, L};
}

}  // namespace breatherlab
