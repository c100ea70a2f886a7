#pragma once
// Conserved quantities (mass, energy, second energy, momenta) and the Lyapunov
// functionals H = F + m E + n M built from them.

#include <cmath>
#include <string>

#include "breathers.hpp"
#include "grid.hpp"

namespace breatherlab {

enum class FunctionalKind { Mass, Energy, SecondEnergy, Momentum, SecondMomentum, Lyapunov };

inline std::string model_name(Model m) {
  switch (m) {
    case Model::SS: return "ss";
    case Model::SY: return "sy";
    case Model::KM: return "km";
    case Model::P: return "p";
  }
  return "?";
}

/// Which sign of m makes the breather a critical point of H. `Critical` is the
/// convention under which the Gateaux derivative of H vanishes at B;
/// `Flipped` negates m_SS and m_KM.
enum class SignConvention { Critical, Flipped };

struct LyapunovCoefficients {
  double m = 0.0;
  double n = 0.0;
  SignConvention sign_convention = SignConvention::Critical;
};

/// Coefficients for the family's own model.
inline LyapunovCoefficients lyapunov_coefficients(const BreatherSpec& s,
                                                  SignConvention conv = SignConvention::Critical) {
  LyapunovCoefficients c;
  c.sign_convention = conv;
  const double flip = (conv == SignConvention::Critical) ? 1.0 : -1.0;
  switch (s.family) {
    case Family::SS: {
      const double a2 = s.alpha * s.alpha, b2 = s.beta * s.beta;
      c.m = flip * 2.0 * (b2 - a2);
      c.n = (a2 + b2) * (a2 + b2);
      break;
    }
    case Family::SY:
      c.m = s.c2 * s.c2 + s.c1 * s.c1;
      c.n = s.c1 * s.c1 * s.c2 * s.c2;
      break;
    case Family::SY2: {
      const double a1 = s.alpha1, a2 = s.alpha2;
      c.m = s.c2 * s.c2 + s.c1 * s.c1 + (a1 + a2) * (a1 + a2) + 2 * a1 * a2;
      c.n = (s.c1 * s.c1 + a1 * a1) * (s.c2 * s.c2 + a2 * a2);
      break;
    }
    case Family::KM: {
      const double b = s.km_beta();
      c.m = flip * b * b;
      c.n = 0.0;
      break;
    }
    case Family::P:
    case Family::Stokes:
      c.m = 0.0;
      c.n = 0.0;
      break;
    case Family::Soliton:
      throw InvalidArgument("no Lyapunov functional for the NLS soliton");
  }
  return c;
}

/// Extra first-order coefficients of the two-soliton functional: H + p P + l L.
struct TwoSolitonCoefficients {
  double m, n, p, l;
};

inline TwoSolitonCoefficients two_soliton_coefficients(const BreatherSpec& s) {
  const double a1 = s.alpha1, a2 = s.alpha2, c1 = s.c1, c2 = s.c2;
  return {c2 * c2 + c1 * c1 + (a1 + a2) * (a1 + a2) + 2 * a1 * a2,
          (c1 * c1 + a1 * a1) * (c2 * c2 + a2 * a2),
          -2 * (c2 * c2 * a1 + c1 * c1 * a2 + a1 * a2 * (a1 + a2)),
          2 * (a1 + a2)};
}

struct FunctionalValue {
  double value = 0.0;  // reported value (tail-corrected for Stokes-background fields)
  double raw = 0.0;    // plain trapezoid sum over the box
  double tail = 0.0;   // far-field estimate added to raw; the truncation error scale
  double imag = 0.0;   // imaginary part of the raw quadrature of the complex density
};

namespace detail {

inline void check_background(Model model, const ComplexField& u) {
  const bool stokes = (model == Model::KM || model == Model::P);
  if (stokes && u.background.kind != BackgroundKind::Stokes)
    throw InvalidArgument("model " + model_name(model) + " needs a Stokes-background field");
  if (!stokes && u.background.kind != BackgroundKind::Zero)
    throw InvalidArgument("model " + model_name(model) + " needs a zero-background field");
}

struct Derivs {
  CVec u, ux, uxx, uxxx;
};

inline Derivs derivs(const ComplexField& f, int max_order) {
  Derivs d;
  d.u = f.values;
  const Grid1D& g = *f.grid;
  if (max_order >= 1) d.ux = deriv(g, f.values, 1);
  if (max_order >= 2) d.uxx = deriv(g, f.values, 2);
  if (max_order >= 3) d.uxxx = deriv(g, f.values, 3);
  return d;
}

inline FunctionalValue integrate_density(const ComplexField& u, const CVec& density) {
  const Grid1D& g = *u.grid;
  const cplx q = quadrature(g, density);
  FunctionalValue out;
  out.raw = q.real();
  out.imag = q.imag();
  if (u.background.kind == BackgroundKind::Stokes) {
    RVec re(density.size());
    for (std::size_t j = 0; j < density.size(); ++j) re[j] = density[j].real();
    const auto t = integrate_algebraic_tail(g, re);
    out.value = t.value;
    out.tail = t.tail;
  } else {
    out.value = out.raw;
  }
  return out;
}

}  // namespace detail

inline FunctionalValue mass_value(Model model, const ComplexField& u) {
  detail::check_background(model, u);
  CVec dens(u.values.size());
  const double shift = (model == Model::KM || model == Model::P) ? 1.0 : 0.0;
  for (std::size_t j = 0; j < dens.size(); ++j) dens[j] = std::conj(u[j]) * u[j] - shift;
  return detail::integrate_density(u, dens);
}

inline FunctionalValue energy_value(Model model, const ComplexField& u) {
  detail::check_background(model, u);
  const auto d = detail::derivs(u, 1);
  CVec dens(d.u.size());
  for (std::size_t j = 0; j < dens.size(); ++j) {
    const cplx kin = std::conj(d.ux[j]) * d.ux[j];
    const double a = std::norm(d.u[j]);
    switch (model) {
      case Model::SS: dens[j] = kin - 2.0 * a * a; break;
      case Model::SY: dens[j] = kin - 0.5 * a * a; break;
      case Model::KM:
      case Model::P: dens[j] = kin - 0.5 * (a - 1.0) * (a - 1.0); break;
    }
  }
  return detail::integrate_density(u, dens);
}

inline FunctionalValue second_energy_value(Model model, const ComplexField& u) {
  detail::check_background(model, u);
  const auto d = detail::derivs(u, 2);
  const Grid1D& g = *u.grid;
  RVec a(d.u.size());
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = std::norm(d.u[j]);
  const RVec ax = deriv_real(g, a, 1);
  CVec dens(d.u.size());
  for (std::size_t j = 0; j < dens.size(); ++j) {
    const cplx kin = std::conj(d.uxx[j]) * d.uxx[j];
    const double ux2 = std::norm(d.ux[j]);
    const double aj = a[j];
    switch (model) {
      case Model::SS:
        dens[j] = kin - 8.0 * aj * ux2 - 3.0 * ax[j] * ax[j] + 8.0 * aj * aj * aj;
        break;
      case Model::SY: {
        const double re = std::real(std::conj(d.u[j]) * d.ux[j]);
        dens[j] = kin - 3.0 * aj * ux2 - 2.0 * re * re + 0.5 * aj * aj * aj;
        break;
      }
      case Model::KM:
      case Model::P: {
        const double b = aj - 1.0;
        dens[j] = kin - 3.0 * b * ux2 - 0.5 * ax[j] * ax[j] + 0.5 * b * b * b;
        break;
      }
    }
  }
  return detail::integrate_density(u, dens);
}

inline FunctionalValue momentum_value(Model model, const ComplexField& u) {
  detail::check_background(model, u);
  const auto d = detail::derivs(u, 1);
  const cplx bgc = std::conj(u.background.value());
  CVec dens(d.u.size());
  for (std::size_t j = 0; j < dens.size(); ++j) {
    const cplx ub = (model == Model::KM || model == Model::P) ? std::conj(d.u[j]) - bgc : std::conj(d.u[j]);
    dens[j] = (ub * d.ux[j]).imag();
  }
  return detail::integrate_density(u, dens);
}

/// Second momentum of focusing NLS on the zero background.
inline FunctionalValue second_momentum_value(const ComplexField& u) {
  detail::check_background(Model::SY, u);
  const auto d = detail::derivs(u, 3);
  CVec dens(d.u.size());
  for (std::size_t j = 0; j < dens.size(); ++j) {
    const double a = std::norm(d.u[j]);
    const cplx e = d.uxxx[j] * std::conj(d.u[j]) - 0.5 * d.u[j] * a * std::conj(d.ux[j]) +
                   std::conj(d.u[j]) * a * d.ux[j];
    dens[j] = 0.5 * e.imag();
  }
  return detail::integrate_density(u, dens);
}

inline double mass(Model m, const ComplexField& u) { return mass_value(m, u).value; }
inline double energy(Model m, const ComplexField& u) { return energy_value(m, u).value; }
inline double second_energy(Model m, const ComplexField& u) { return second_energy_value(m, u).value; }
inline double momentum(Model m, const ComplexField& u) { return momentum_value(m, u).value; }
inline double second_momentum_sy(const ComplexField& u) { return second_momentum_value(u).value; }

inline FunctionalValue lyapunov_value(Model model, const ComplexField& u, const LyapunovCoefficients& c) {
  const auto F = second_energy_value(model, u);
  const auto E = energy_value(model, u);
  const auto M = mass_value(model, u);
  FunctionalValue out;
  out.value = F.value + c.m * E.value + c.n * M.value;
  out.raw = F.raw + c.m * E.raw + c.n * M.raw;
  out.tail = F.tail + c.m * E.tail + c.n * M.tail;
  out.imag = F.imag + c.m * E.imag + c.n * M.imag;
  return out;
}

inline double lyapunov(Model model, const ComplexField& u, const LyapunovCoefficients& c) {
  return lyapunov_value(model, u, c).value;
}

/// Two-soliton functional on the zero background. Its Euler-Lagrange equation
/// carries the terms i p B_x + i l (B_xxx + 3|B|^2 B_x); with P and L real the
/// gradients are -i u_x and -(i/2)(u_xxx + 3|u|^2 u_x), so the real weights on P
/// and L are -p and -2l.
inline double two_soliton_lyapunov(const ComplexField& u, const TwoSolitonCoefficients& c) {
  return second_energy(Model::SY, u) + c.m * energy(Model::SY, u) + c.n * mass(Model::SY, u) -
         c.p * momentum(Model::SY, u) - 2.0 * c.l * second_momentum_sy(u);
}

/// Reduced functional on real profiles: int (u_xx^2 - 5 u^2 u_x^2 + u^6 / 2).
inline double reduced_second_energy_km(const Grid1D& g, const RVec& u) {
  const RVec ux = deriv_real(g, u, 1), uxx = deriv_real(g, u, 2);
  RVec dens(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double v = u[j];
    dens[j] = uxx[j] * uxx[j] - 5 * v * v * ux[j] * ux[j] + 0.5 * v * v * v * v * v * v;
  }
  return quadrature(g, dens);
}

inline FunctionalValue functional_value(FunctionalKind kind, Model model, const ComplexField& u,
                                        const LyapunovCoefficients& c = {}) {
  switch (kind) {
    case FunctionalKind::Mass: return mass_value(model, u);
    case FunctionalKind::Energy: return energy_value(model, u);
    case FunctionalKind::SecondEnergy: return second_energy_value(model, u);
    case FunctionalKind::Momentum: return momentum_value(model, u);
    case FunctionalKind::SecondMomentum:
      if (model != Model::SY) throw InvalidArgument("second momentum is defined for the SY model only");
      return second_momentum_value(u);
    case FunctionalKind::Lyapunov: return lyapunov_value(model, u, c);
  }
  return {};
}

}  // namespace breatherlab
