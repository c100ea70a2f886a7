#pragma once
// Pseudospectral time stepping for focusing NLS on the zero and Stokes
// backgrounds and for the Sasa-Satsuma equation; conservation traces,
// modulation fitting and the stability / instability experiments.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "breathers.hpp"
#include "functionals.hpp"
#include "grid.hpp"
#include "linearized.hpp"

namespace breatherlab {

enum class Scheme { Strang, Yoshida4 };

struct EvolveOptions {
  int frames = 10;               // equally spaced output frames after t = 0
  bool keep_fields = true;
  std::optional<Model> track;    // functional family evaluated at each frame
  std::optional<LyapunovCoefficients> lyapunov;  // also track H with these coefficients
  double t_start = 0.0;          // absolute time of the initial data (Stokes phase reference)
  double blowup_factor = 1e3;
  Scheme scheme = Scheme::Strang;
  double richardson_tol = 1e-7;  // SS stepper only
  int richardson_every = 200;    // SS stepper only
};

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<ComplexField> fields;
  std::map<std::string, std::vector<double>> functional_series;
  std::map<std::string, double> drift;  // max |f(t) - f(0)| / max(|f(0)|, 1)
  bool aborted = false;
  std::string message;
  double dt_used = 0.0;
  int rejections = 0;
  std::optional<ComplexField> last;
};

namespace detail {

inline double max_modulus(const CVec& v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

/// u reconstructed from w on the Stokes background at absolute time t.
inline ComplexField stokes_u(const GridPtr& g, const CVec& w, double t) {
  const cplx ph = std::exp(I * t);
  CVec u(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) u[j] = ph * (1.0 + w[j]);
  return ComplexField(g, std::move(u), Background::stokes(t));
}

inline void record(EvolutionTrace& tr, const EvolveOptions& o, const GridPtr& g, const CVec& v, double t,
                   bool stokes) {
  tr.times.push_back(t);
  if (o.keep_fields) tr.fields.emplace_back(g, v, stokes ? Background::stokes(o.t_start + t) : Background::zero());
  if (!o.track) return;
  const ComplexField u = stokes ? stokes_u(g, v, o.t_start + t) : ComplexField(g, v);
  const Model m = *o.track;
  const auto M = mass_value(m, u), E = energy_value(m, u), F = second_energy_value(m, u), P = momentum_value(m, u);
  tr.functional_series["M"].push_back(M.value);
  tr.functional_series["E"].push_back(E.value);
  tr.functional_series["F"].push_back(F.value);
  tr.functional_series["P"].push_back(P.value);
  if (o.lyapunov) tr.functional_series["H"].push_back(F.value + o.lyapunov->m * E.value + o.lyapunov->n * M.value);
  // The split-step flow conserves the in-box sums; the tail estimate is refitted
  // from the evolved edge samples and drifts on its own.
  if (stokes) {
    tr.functional_series["M_box"].push_back(M.raw);
    tr.functional_series["E_box"].push_back(E.raw);
    tr.functional_series["F_box"].push_back(F.raw);
    tr.functional_series["P_box"].push_back(P.raw);
    if (o.lyapunov) tr.functional_series["H_box"].push_back(F.raw + o.lyapunov->m * E.raw + o.lyapunov->n * M.raw);
  }
}

inline void finish(EvolutionTrace& tr) {
  for (const auto& [name, s] : tr.functional_series) {
    double d = 0.0;
    for (double v : s) d = std::max(d, std::abs(v - s.front()));
    tr.drift[name] = d / std::max(std::abs(s.front()), 1.0);
  }
}

/// Yoshida triple-jump weights turning a symmetric second-order step into a fourth-order one.
inline std::vector<double> composition_weights(Scheme s) {
  if (s == Scheme::Strang) return {1.0};
  const double c = std::cbrt(2.0);
  const double w1 = 1.0 / (2.0 - c), w0 = -c / (2.0 - c);
  return {w1, w0, w1};
}

/// Frame-by-frame driver: `step(v, dt)` advances by dt.
template <class Step>
EvolutionTrace march(const ComplexField& v0, double T, double dt, const EvolveOptions& o, bool stokes, Step&& step) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw InvalidArgument("T must be finite and non-negative");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
  if (o.frames < 1) throw InvalidArgument("frames must be at least 1");
  require_finite(v0.values, "initial data");
  EvolutionTrace tr;
  const GridPtr& g = v0.grid;
  CVec v = v0.values;
  record(tr, o, g, v, 0.0, stokes);
  const double bound = o.blowup_factor * std::max(max_modulus(v), 1.0);
  const double frame_dt = T / o.frames;
  double t = 0.0;
  tr.dt_used = dt;
  for (int f = 1; f <= o.frames && frame_dt > 0; ++f) {
    const int n = std::max(1, static_cast<int>(std::ceil(frame_dt / dt - 1e-9)));
    const double h = frame_dt / n;
    tr.dt_used = h;
    for (int s = 0; s < n; ++s) {
      step(v, h);
      if (s % 64 == 63 || s == n - 1) {
        const double mm = max_modulus(v);
        if (!(mm <= bound)) {
          tr.aborted = true;
          tr.message = "blow-up guard triggered at t = " + std::to_string(t + (s + 1) * h);
          break;
        }
      }
    }
    t = f * frame_dt;
    if (tr.aborted) break;
    record(tr, o, g, v, t, stokes);
  }
  tr.last = ComplexField(g, v, stokes ? Background::stokes(o.t_start + t) : Background::zero());
  finish(tr);
  return tr;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// NLS, zero background

inline void nls_zero_strang_step(const Grid1D& g, CVec& u, double dt) {
  const auto half = [&](CVec& v) {
    CVec f = fft(v);
    for (int j = 0; j < g.N; ++j) f[j] *= std::exp(-I * (g.k[j] * g.k[j] * 0.5 * dt));
    v = ifft(f);
  };
  half(u);
  for (auto& z : u) z *= std::exp(I * (std::norm(z) * dt));
  half(u);
}

inline EvolutionTrace evolve_nls_zero(const ComplexField& u0, double T, double dt, EvolveOptions o = {}) {
  if (u0.background.kind != BackgroundKind::Zero) throw InvalidArgument("evolve_nls_zero needs a zero-background field");
  const Grid1D& g = *u0.grid;
  const auto w = detail::composition_weights(o.scheme);
  return detail::march(u0, T, dt, o, false, [&](CVec& u, double h) {
    for (double c : w) nls_zero_strang_step(g, u, c * h);
  });
}

// ---------------------------------------------------------------------------
// NLS, Stokes background: i w_t + w_xx + 2 Re w + w^2 + 2|w|^2 + |w|^2 w = 0

/// Exact flow of i w_t + w_xx + 2 Re w = 0 over time tau. Per Fourier mode the
/// real and imaginary parts obey p_t = k^2 q, q_t = (2 - k^2) p.
inline void stokes_linear_flow(const Grid1D& g, CVec& w, double tau) {
  const CVec f = fft(w);
  CVec out(g.N);
  for (int j = 0; j < g.N; ++j) {
    const int jm = (g.N - j) % g.N;
    const cplx p = 0.5 * (f[j] + std::conj(f[jm]));
    const cplx q = -0.5 * I * (f[j] - std::conj(f[jm]));
    const double k2 = g.k[j] * g.k[j];
    const double s = k2 * (2.0 - k2);
    double c, sk;  // c = cosh/cos, sk = sinh(sigma tau)/sigma or sin(omega tau)/omega
    if (s > 0) {
      const double sg = std::sqrt(s);
      c = std::cosh(sg * tau);
      sk = std::sinh(sg * tau) / sg;
    } else if (s < 0) {
      const double om = std::sqrt(-s);
      c = std::cos(om * tau);
      sk = std::sin(om * tau) / om;
    } else {
      c = 1.0;
      sk = tau;
    }
    const cplx pn = c * p + sk * k2 * q;
    const cplx qn = sk * (2.0 - k2) * p + c * q;
    out[j] = pn + I * qn;
  }
  w = ifft(out);
}

inline cplx stokes_nonlinearity(cplx w) {
  const double a = std::norm(w);
  return I * (w * w + 2.0 * a + a * w);
}

/// Pointwise RK4 for w_t = i (w^2 + 2|w|^2 + |w|^2 w).
inline void stokes_nonlinear_flow(CVec& w, double tau) {
  for (auto& z : w) {
    const cplx k1 = stokes_nonlinearity(z);
    const cplx k2 = stokes_nonlinearity(z + 0.5 * tau * k1);
    const cplx k3 = stokes_nonlinearity(z + 0.5 * tau * k2);
    const cplx k4 = stokes_nonlinearity(z + tau * k3);
    z += tau / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

inline void nls_stokes_strang_step(const Grid1D& g, CVec& w, double dt) {
  stokes_linear_flow(g, w, 0.5 * dt);
  stokes_nonlinear_flow(w, dt);
  stokes_linear_flow(g, w, 0.5 * dt);
}

/// Evolves w; the functionals (when tracked) are evaluated on u = e^{it}(1 + w).
inline EvolutionTrace evolve_nls_stokes(const ComplexField& w0, double T, double dt, EvolveOptions o = {}) {
  const Grid1D& g = *w0.grid;
  const ComplexField w0z(w0.grid, w0.values);
  const auto wts = detail::composition_weights(o.scheme);
  return detail::march(w0z, T, dt, o, true, [&](CVec& w, double h) {
    for (double c : wts) nls_stokes_strang_step(g, w, c * h);
  });
}

/// w = e^{-it} u - 1 for a Stokes-background field.
inline ComplexField to_stokes_perturbation(const ComplexField& u, double t) {
  const cplx ph = std::exp(-I * t);
  CVec w(u.values.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = ph * u.values[j] - 1.0;
  return ComplexField(u.grid, std::move(w));
}

// ---------------------------------------------------------------------------
// Sasa-Satsuma: u_t + u_xxx + 6|u|^2 u_x + 3u(|u|^2)_x = 0

namespace detail {

struct SSWorkspace {
  const Grid1D& g;
  CVec sym1, lin;  // i k and the linear symbol -(ik)^3 (Nyquist zeroed)

  explicit SSWorkspace(const Grid1D& grid) : g(grid), sym1(derivative_symbol(grid, 1)), lin(derivative_symbol(grid, 3)) {
    for (auto& v : lin) v = -v;
  }

  /// Fourier transform of -(6|u|^2 u_x + 3 u (|u|^2)_x) given u-hat.
  [[nodiscard]] CVec nonlinear(const CVec& uh) const {
    const CVec u = ifft(uh);
    CVec t(g.N);
    for (int j = 0; j < g.N; ++j) t[j] = sym1[j] * uh[j];
    const CVec ux = ifft(t);
    CVec a(g.N);
    for (int j = 0; j < g.N; ++j) a[j] = std::norm(u[j]);
    CVec ah = fft(a);
    for (int j = 0; j < g.N; ++j) ah[j] *= sym1[j];
    const CVec ax = ifft(ah);
    CVec n(g.N);
    for (int j = 0; j < g.N; ++j) n[j] = -(6.0 * a[j].real() * ux[j] + 3.0 * u[j] * ax[j].real());
    return fft(n);
  }

  /// One integrating-factor RK4 step in Fourier space.
  void step(CVec& uh, double dt) const {
    CVec E(g.N), E2(g.N);
    for (int j = 0; j < g.N; ++j) {
      E[j] = std::exp(lin[j] * (0.5 * dt));
      E2[j] = E[j] * E[j];
    }
    const CVec a = nonlinear(uh);
    CVec tmp(g.N);
    for (int j = 0; j < g.N; ++j) tmp[j] = E[j] * (uh[j] + 0.5 * dt * a[j]);
    const CVec b = nonlinear(tmp);
    for (int j = 0; j < g.N; ++j) tmp[j] = E[j] * uh[j] + 0.5 * dt * b[j];
    const CVec c = nonlinear(tmp);
    for (int j = 0; j < g.N; ++j) tmp[j] = E2[j] * uh[j] + dt * E[j] * c[j];
    const CVec d = nonlinear(tmp);
    for (int j = 0; j < g.N; ++j)
      uh[j] = E2[j] * uh[j] + dt / 6.0 * (E2[j] * a[j] + 2.0 * E[j] * (b[j] + c[j]) + d[j]);
  }
};

}  // namespace detail

/// Nonlinear CFL-type step for the SS stepper: the Fourier-side integrating
/// factor removes the dispersive limit, leaving the transport-like term
/// 9|u|^2 u_x to bound dt.
inline double ss_default_dt(const ComplexField& u0) {
  const double amp = detail::max_modulus(u0.values);
  return 1.0 / (9.0 * u0.grid->kmax() * std::max(amp * amp, 0.1));
}

/// Single-step Richardson estimate: one step of dt against two of dt/2.
inline double ss_richardson_error(const Grid1D& g, const CVec& uh, double dt) {
  const detail::SSWorkspace ws(g);
  CVec one = uh, two = uh;
  ws.step(one, dt);
  ws.step(two, 0.5 * dt);
  ws.step(two, 0.5 * dt);
  const CVec a = ifft(one), b = ifft(two), u = ifft(uh);
  double e = 0.0;
  for (int j = 0; j < g.N; ++j) e = std::max(e, std::abs(a[j] - b[j]));
  return e / std::max(detail::max_modulus(u), 1e-300);
}

/// Integrating-factor RK4 for SS. dt <= 0 selects ss_default_dt. The step is
/// halved whenever the periodic Richardson check exceeds options.richardson_tol.
inline EvolutionTrace evolve_ss(const ComplexField& u0, double T, double dt, EvolveOptions o = {}) {
  if (u0.background.kind != BackgroundKind::Zero) throw InvalidArgument("evolve_ss needs a zero-background field");
  const Grid1D& g = *u0.grid;
  if (dt <= 0) dt = ss_default_dt(u0);
  const detail::SSWorkspace ws(g);
  int rejections = 0;
  double h_cur = dt;
  int since_check = 0;
  // The frame driver passes a fixed h; substeps of size h_cur <= h absorb rejections.
  auto tr = detail::march(u0, T, dt, o, false, [&](CVec& u, double h) {
    CVec uh = fft(u);
    double done = 0.0;
    while (done < h * (1 - 1e-12)) {
      double s = std::min(h_cur, h - done);
      if (since_check == 0) {
        while (ss_richardson_error(g, uh, s) > o.richardson_tol && s > 1e-12) {
          ++rejections;
          h_cur *= 0.5;
          s = std::min(h_cur, h - done);
        }
      }
      since_check = (since_check + 1) % std::max(1, o.richardson_every);
      ws.step(uh, s);
      done += s;
    }
    u = ifft(uh);
  });
  tr.rejections = rejections;
  tr.dt_used = std::min(tr.dt_used, h_cur);
  return tr;
}

// ---------------------------------------------------------------------------
// Modulation

/// The SS breather with shifts (x1, x2), wrapped periodically around its center
/// so that a breather that has travelled across the box is still represented.
inline ComplexField ss_breather_wrapped(const BreatherSpec& s, double t, double x1, double x2, const GridPtr& g) {
  BreatherSpec q = s;
  q.x1 = x1;
  q.x2 = x2;
  const double center = -(s.ss_gamma() * t + x2);
  const double P = 2 * g->L;
  return sample(g, [&](double x) {
    double y = std::fmod(x - center + g->L, P);
    if (y < 0) y += P;
    return ss_profile(q, t, center + y - g->L);
  });
}

struct ModulationEntry {
  double t = 0.0;
  double x1 = 0.0, x2 = 0.0;
  double defect1 = 0.0, defect2 = 0.0;  // orthogonality defects after the last iteration
  double z_norm = 0.0;                  // ||u - B(t; x1, x2)||_{H^2}
  int iterations = 0;
  bool converged = false;
};

struct ModulationFit {
  std::vector<ModulationEntry> entries;
};

/// Position of the maximum of |Q_beta| (the SS profile peak).
inline double ss_profile_peak(const BreatherSpec& s) {
  double best = 0.0, arg = 0.0;
  const double span = 10.0 / s.beta;
  for (int j = -4000; j <= 4000; ++j) {
    const double y = span * j / 4000.0;
    const double v = std::abs(ss_Qbeta(s, y));
    if (v > best) {
      best = v;
      arg = y;
    }
  }
  return arg;
}

namespace detail {

inline std::pair<double, double> orthogonality(const BreatherSpec& s, const ComplexField& u, double t, double x1,
                                               double x2) {
  const GridPtr& g = u.grid;
  const ComplexField B = ss_breather_wrapped(s, t, x1, x2, g);
  const CVec Bx = deriv(*g, B.values, 1);
  double j1 = 0.0, j2 = 0.0;
  for (int j = 0; j < g->N; ++j) {
    const cplx z = u.values[j] - B.values[j];
    const cplx d1 = I * s.alpha * B.values[j];     // d/dx1
    const cplx d2 = Bx[j] - I * s.alpha * B.values[j];  // d/dx2
    j1 += std::real(std::conj(d1) * z);
    j2 += std::real(std::conj(d2) * z);
  }
  return {j1 * g->h, j2 * g->h};
}

}  // namespace detail

/// Newton iteration for the shifts making u - B(t; x1, x2) orthogonal to the two
/// symmetry modes. Without a guess, x2 comes from the location of max|u| and x1
/// from the phase there.
inline ModulationEntry modulation_fit(const ComplexField& u, double t, const BreatherSpec& s,
                                      std::optional<std::pair<double, double>> guess = std::nullopt,
                                      int max_iter = 50, double tol = 1e-11) {
  if (s.family != Family::SS) throw InvalidArgument("modulation fit is implemented for SS");
  const GridPtr& g = u.grid;
  double x1, x2;
  if (guess) {
    x1 = guess->first;
    x2 = guess->second;
  } else {
    int jm = 0;
    for (int j = 0; j < g->N; ++j)
      if (std::abs(u.values[j]) > std::abs(u.values[jm])) jm = j;
    x2 = ss_profile_peak(s) - s.ss_gamma() * t - g->x[jm];
    BreatherSpec q = s;
    q.x2 = x2;
    const cplx b = ss_profile(q, t, g->x[jm]);
    x1 = std::arg(u.values[jm] / b) / s.alpha;
  }
  ModulationEntry e;
  e.t = t;
  const double scale = std::sqrt(std::max(mass(Model::SS, u), 1e-300));
  for (int it = 0; it < max_iter; ++it) {
    auto [f1, f2] = detail::orthogonality(s, u, t, x1, x2);
    e.iterations = it;
    e.defect1 = f1;
    e.defect2 = f2;
    if (std::max(std::abs(f1), std::abs(f2)) < tol * scale) {
      e.converged = true;
      break;
    }
    const double d = 1e-6;
    const auto p1 = detail::orthogonality(s, u, t, x1 + d, x2);
    const auto m1 = detail::orthogonality(s, u, t, x1 - d, x2);
    const auto p2 = detail::orthogonality(s, u, t, x1, x2 + d);
    const auto m2 = detail::orthogonality(s, u, t, x1, x2 - d);
    const double a = (p1.first - m1.first) / (2 * d), b = (p2.first - m2.first) / (2 * d);
    const double c = (p1.second - m1.second) / (2 * d), dd = (p2.second - m2.second) / (2 * d);
    const double det = a * dd - b * c;
    if (!std::isfinite(det) || std::abs(det) < 1e-300) break;
    double s1 = (dd * f1 - b * f2) / det, s2 = (-c * f1 + a * f2) / det;
    const double cap = 0.5;  // damp large steps far from the orbit
    const double len = std::hypot(s1, s2);
    if (len > cap) {
      s1 *= cap / len;
      s2 *= cap / len;
    }
    x1 -= s1;
    x2 -= s2;
    if (!std::isfinite(x1) || !std::isfinite(x2)) break;
    e.iterations = it + 1;
  }
  if (!e.converged) {
    auto [f1, f2] = detail::orthogonality(s, u, t, x1, x2);
    e.defect1 = f1;
    e.defect2 = f2;
    e.converged = std::max(std::abs(f1), std::abs(f2)) < tol * scale;
  }
  e.x1 = x1;
  e.x2 = x2;
  const ComplexField B = ss_breather_wrapped(s, t, x1, x2, g);
  CVec z(g->N);
  for (int j = 0; j < g->N; ++j) z[j] = u.values[j] - B.values[j];
  e.z_norm = sobolev_norm(ComplexField(g, std::move(z)), 2);
  return e;
}

// ---------------------------------------------------------------------------
// Experiments

struct StabilityReport {
  double eps = 0.0, T = 0.0;
  double ratio = 0.0;        // sup_t ||z(t)||_{H^2} / eps
  double shift_rate = 0.0;   // sup_t max(|x1'|, |x2'|) / eps
  int unconverged = 0;       // frames where the modulation fit was flagged
  ModulationFit fit;
  EvolutionTrace trace;
};

inline StabilityReport stability_experiment_ss(const BreatherSpec& s, double eps, double T, const GridPtr& g,
                                               int frames = 80, double dt = 0.0) {
  s.validate();
  if (s.family != Family::SS) throw InvalidArgument("stability experiment needs family ss");
  if (!(eps >= 0.0) || eps > 1e-2) throw InvalidArgument("eps must lie in [0, 1e-2]");
  StabilityReport r;
  r.eps = eps;
  r.T = T;
  ComplexField u0 = sample_breather(s, 0.0, g);
  for (int j = 0; j < g->N; ++j) u0.values[j] += eps * std::exp(-g->x[j] * g->x[j]);
  EvolveOptions o;
  o.frames = frames;
  o.track = Model::SS;
  o.lyapunov = lyapunov_coefficients(s);
  r.trace = evolve_ss(u0, T, dt, o);
  std::optional<std::pair<double, double>> guess = std::make_pair(s.x1, s.x2);
  for (std::size_t f = 0; f < r.trace.fields.size(); ++f) {
    auto e = modulation_fit(r.trace.fields[f], r.trace.times[f], s, guess);
    if (!e.converged) ++r.unconverged;
    guess = std::make_pair(e.x1, e.x2);
    r.fit.entries.push_back(e);
  }
  if (eps == 0.0) return r;
  for (const auto& e : r.fit.entries) r.ratio = std::max(r.ratio, e.z_norm / eps);
  for (std::size_t f = 1; f < r.fit.entries.size(); ++f) {
    const auto& a = r.fit.entries[f - 1];
    const auto& b = r.fit.entries[f];
    const double dt_f = b.t - a.t;
    r.shift_rate = std::max(r.shift_rate, std::max(std::abs(b.x1 - a.x1), std::abs(b.x2 - a.x2)) / dt_f / eps);
  }
  return r;
}

/// Least-squares slope of log(y) against t over t in [t0, t1].
inline double fit_growth_rate(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 - 1e-12 || t[i] > t1 + 1e-12 || !(y[i] > 0)) continue;
    const double ly = std::log(y[i]);
    n += 1;
    sx += t[i];
    sy += ly;
    sxx += t[i] * t[i];
    sxy += t[i] * ly;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// H^1 norm (Fourier side) of a field sampled on the grid.
inline double h1_norm(const Grid1D& g, const CVec& v) {
  const CVec f = fft(v);
  double s = 0.0;
  for (int j = 0; j < g.N; ++j) s += (1.0 + g.k[j] * g.k[j]) * std::norm(f[j]);
  return std::sqrt(s * g.h / g.N);
}

struct InstabilityReport {
  double eps = 0.0, T = 0.0, k = 1.0;
  std::vector<double> times, distance;  // H^1 distance to the exact breather
  double growth_factor = 0.0;           // distance(T) / distance(0) (or final distance when eps = 0)
  double max_distance = 0.0;
  double fitted_rate = 0.0;             // on [T/10, T/2]
  bool aborted = false;
  std::string message;
};

/// Default periodic box for instability runs: a multiple of 2 pi / k so cos(k x) is periodic.
inline GridChoice instability_grid(const BreatherSpec& s) {
  if (s.family == Family::P) return {8192, 64 * std::numbers::pi};
  return {2048, 10 * std::numbers::pi};
}

inline InstabilityReport instability_experiment(const BreatherSpec& s, double eps, double T, const GridPtr& g,
                                                double k = 1.0, double dt = 1e-3, int frames = 100,
                                                Scheme scheme = Scheme::Yoshida4) {
  s.validate();
  if (s.family != Family::KM && s.family != Family::P) throw InvalidArgument("instability experiment needs km or p");
  if (!(eps >= 0.0) || eps > 1e-3) throw InvalidArgument("eps must lie in [0, 1e-3]");
  InstabilityReport r;
  r.eps = eps;
  r.T = T;
  r.k = k;
  ComplexField u0 = sample_breather(s, 0.0, g);
  for (int j = 0; j < g->N; ++j) u0.values[j] += eps * std::cos(k * g->x[j]);
  const ComplexField w0 = to_stokes_perturbation(u0, 0.0);
  EvolveOptions o;
  o.frames = frames;
  o.scheme = scheme;
  const auto tr = evolve_nls_stokes(w0, T, dt, o);
  r.aborted = tr.aborted;
  r.message = tr.message;
  for (std::size_t f = 0; f < tr.fields.size(); ++f) {
    const double t = tr.times[f];
    const ComplexField we = to_stokes_perturbation(sample_breather(s, t, g), t);
    CVec d(g->N);
    for (int j = 0; j < g->N; ++j) d[j] = tr.fields[f].values[j] - we.values[j];
    r.times.push_back(t);
    r.distance.push_back(h1_norm(*g, d));
    r.max_distance = std::max(r.max_distance, r.distance.back());
  }
  if (!r.distance.empty()) {
    r.growth_factor = r.distance.front() > 0 ? r.distance.back() / r.distance.front() : r.distance.back();
    r.fitted_rate = fit_growth_rate(r.times, r.distance, T / 10, T / 2);
  }
  return r;
}

/// Linear growth check on the Stokes wave: w0 = eps cos(k x); returns the fitted
/// rate of the k-mode amplitude on [T/10, T/2].
inline double stokes_mode_growth_rate(double k, double eps, double T, const GridPtr& g, double dt = 1e-3,
                                      int frames = 80) {
  const ComplexField w0 = sample(g, [&](double x) { return cplx(eps * std::cos(k * x)); });
  EvolveOptions o;
  o.frames = frames;
  const auto tr = evolve_nls_stokes(w0, T, dt, o);
  int jk = 0;
  for (int j = 0; j < g->N; ++j)
    if (std::abs(g->k[j] - k) < std::abs(g->k[jk] - k)) jk = j;
  std::vector<double> amp;
  for (const auto& f : tr.fields) amp.push_back(std::abs(fft(f.values)[jk]));
  return fit_growth_rate(tr.times, amp, T / 10, T / 2);
}

struct PeregrineLimitEntry {
  double t = 0.0;
  double direct = 0.0;  // Re int conj(z0) L_P(t) z0
  double limit = 0.0;   // Re int (|w_x|^2 - |w|^2 - w^2), w = e^{-it} z0_x
};

/// Limit form of the Peregrine quadratic form, normalized like quadratic_form.
inline double peregrine_limit_form(const ComplexField& z0, double t) {
  const Grid1D& g = *z0.grid;
  const CVec zx = deriv(g, z0.values, 1);
  const cplx ph = std::exp(-I * t);
  CVec w(g.N);
  for (int j = 0; j < g.N; ++j) w[j] = ph * zx[j];
  const CVec wx = deriv(g, w, 1);
  double s = 0.0;
  for (int j = 0; j < g.N; ++j) s += std::norm(wx[j]) - std::norm(w[j]) - std::real(w[j] * w[j]);
  return s * g.h;
}

inline std::vector<PeregrineLimitEntry> peregrine_quadratic_limit(const ComplexField& z0,
                                                                  const std::vector<double>& t_list) {
  std::vector<PeregrineLimitEntry> out;
  const BreatherSpec p = BreatherSpec::peregrine();
  for (double t : t_list) {
    PeregrineLimitEntry e;
    e.t = t;
    const ComplexField b = sample_breather(p, t, z0.grid);
    e.direct = quadratic_form(linearized_coefficients(Model::P, b, {}), z0.values);
    e.limit = peregrine_limit_form(z0, t);
    out.push_back(e);
  }
  return out;
}

}  // namespace breatherlab
