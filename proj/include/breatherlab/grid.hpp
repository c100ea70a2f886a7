#pragma once
// Periodic Fourier grid on [-L, L), spectral derivatives, quadrature and
// Sobolev norms. FFTs go through FFTW; plans are cached per size and shared.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace breatherlab {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

inline constexpr cplx I{0.0, 1.0};

/// Thrown for invalid inputs (bad parameters, mismatched grids, etc.).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Warning sink. Defaults to stderr; tests and the CLI may redirect it.
inline std::function<void(const std::string&)>& warning_handler() {
  static std::function<void(const std::string&)> handler = [](const std::string& msg) {
    std::fprintf(stderr, "warning: %s\n", msg.c_str());
  };
  return handler;
}
inline void warn(const std::string& msg) {
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  if (warning_handler()) warning_handler()(msg);
}

class Grid1D {
 public:
  Grid1D(int n, double half_length) : N(n), L(half_length), h(2.0 * half_length / n) {
    if (n < 8 || (n & (n - 1)) != 0)
      throw InvalidArgument("grid size N must be a power of two and at least 8");
    if (!(half_length > 0.0) || !std::isfinite(half_length))
      throw InvalidArgument("grid half-length L must be positive and finite");
    x.resize(N);
    k.resize(N);
    for (int j = 0; j < N; ++j) {
      x[j] = -L + j * h;
      const int m = (j < N / 2) ? j : j - N;
      k[j] = std::numbers::pi * m / L;
    }
  }

  int N;
  double L;
  double h;
  RVec x;
  RVec k;  // FFT ordering: 0, 1, ..., N/2-1, -N/2, ..., -1 (times pi/L)

  [[nodiscard]] double kmax() const { return std::numbers::pi * (N / 2) / L; }
  bool operator==(const Grid1D& o) const { return N == o.N && L == o.L; }
};

using GridPtr = std::shared_ptr<const Grid1D>;

inline GridPtr make_grid(int N, double L) { return std::make_shared<const Grid1D>(N, L); }

enum class BackgroundKind { Zero, Stokes };

struct Background {
  BackgroundKind kind = BackgroundKind::Zero;
  double t = 0.0;  // phase time of the Stokes wave e^{it}
  static Background zero() { return {BackgroundKind::Zero, 0.0}; }
  static Background stokes(double t) { return {BackgroundKind::Stokes, t}; }
  [[nodiscard]] cplx value() const {
    return kind == BackgroundKind::Zero ? cplx{0.0, 0.0} : std::exp(I * t);
  }
};

struct ComplexField {
  GridPtr grid;
  CVec values;
  Background background;

  ComplexField() = default;
  ComplexField(GridPtr g, CVec v, Background bg = Background::zero())
      : grid(std::move(g)), values(std::move(v)), background(bg) {
    if (!grid) throw InvalidArgument("field has no grid");
    if (static_cast<int>(values.size()) != grid->N)
      throw InvalidArgument("field length does not match grid size");
  }
  [[nodiscard]] int size() const { return grid->N; }
  cplx& operator[](std::size_t j) { return values[j]; }
  const cplx& operator[](std::size_t j) const { return values[j]; }
};

namespace detail {

class FftPlans {
 public:
  struct Pair {
    fftw_plan fwd;
    fftw_plan bwd;
  };
  static const Pair& get(int n) {
    static FftPlans inst;
    std::lock_guard<std::mutex> lock(inst.m_);
    auto it = inst.plans_.find(n);
    if (it != inst.plans_.end()) return it->second;
    auto* a = fftw_alloc_complex(static_cast<std::size_t>(n));
    auto* b = fftw_alloc_complex(static_cast<std::size_t>(n));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Pair p{fftw_plan_dft_1d(n, a, b, FFTW_FORWARD, flags),
           fftw_plan_dft_1d(n, a, b, FFTW_BACKWARD, flags)};
    fftw_free(a);
    fftw_free(b);
    return inst.plans_.emplace(n, p).first->second;
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

 private:
  FftPlans() = default;
  ~FftPlans() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.fwd);
      fftw_destroy_plan(p.bwd);
    }
  }
  std::mutex m_;
  std::map<int, Pair> plans_;
};

inline fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace detail

/// Unnormalized forward DFT.
inline CVec fft(const CVec& in) {
  const int n = static_cast<int>(in.size());
  CVec src(in), out(in.size());
  fftw_execute_dft(detail::FftPlans::get(n).fwd, detail::as_fftw(src.data()),
                   detail::as_fftw(out.data()));
  return out;
}

/// Inverse DFT including the 1/N factor.
inline CVec ifft(const CVec& in) {
  const int n = static_cast<int>(in.size());
  CVec src(in), out(in.size());
  fftw_execute_dft(detail::FftPlans::get(n).bwd, detail::as_fftw(src.data()),
                   detail::as_fftw(out.data()));
  const double s = 1.0 / n;
  for (auto& v : out) v *= s;
  return out;
}

/// Fourier multiplier (ik)^order with the Nyquist mode removed for odd orders.
inline CVec derivative_symbol(const Grid1D& g, int order) {
  CVec sym(g.N);
  for (int j = 0; j < g.N; ++j) {
    const bool nyquist = (j == g.N / 2);
    if (nyquist && order % 2 == 1) {
      sym[j] = 0.0;
    } else {
      sym[j] = std::pow(I * g.k[j], order);
    }
  }
  return sym;
}

inline void require_finite(const CVec& v, const char* what) {
  for (const auto& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw InvalidArgument(std::string(what) + ": non-finite sample");
}

/// d^order f / dx^order on raw samples.
inline CVec deriv(const Grid1D& g, const CVec& f, int order) {
  if (order < 1 || order > 6) throw InvalidArgument("derivative order must be in 1..6");
  if (static_cast<int>(f.size()) != g.N) throw InvalidArgument("sample count does not match grid");
  require_finite(f, "spectral_derivative");
  CVec fh = fft(f);
  const CVec sym = derivative_symbol(g, order);
  for (int j = 0; j < g.N; ++j) fh[j] *= sym[j];
  return ifft(fh);
}

/// Real-valued derivative of real samples (imaginary round-off discarded).
inline RVec deriv_real(const Grid1D& g, const RVec& f, int order) {
  CVec c(f.begin(), f.end());
  CVec d = deriv(g, c, order);
  RVec out(d.size());
  for (std::size_t j = 0; j < d.size(); ++j) out[j] = d[j].real();
  return out;
}

inline ComplexField spectral_derivative(const ComplexField& f, int order) {
  // The Stokes background is constant, so derivatives of u and of u - e^{it} agree
  // and the result decays to zero.
  return ComplexField(f.grid, deriv(*f.grid, f.values, order), Background::zero());
}

/// Largest deviation from the background at the two ends of the box.
inline double boundary_defect(const ComplexField& f) {
  const cplx bg = f.background.value();
  return std::max(std::abs(f.values.front() - bg), std::abs(f.values.back() - bg));
}

/// Default decay tolerance: tight for exponentially decaying data, loose for the
/// algebraically decaying Stokes-background (Peregrine-type) fields.
inline double default_decay_tolerance(const Background& bg) {
  return bg.kind == BackgroundKind::Zero ? 1e-8 : 1e-3;
}

inline cplx quadrature(const Grid1D& g, const CVec& f) {
  cplx s = 0.0;
  for (const auto& v : f) s += v;
  return g.h * s;
}

inline double quadrature(const Grid1D& g, const RVec& f) {
  double s = 0.0;
  for (double v : f) s += v;
  return g.h * s;
}

/// Trapezoid sum h * sum f_j. Warns when the integrand has not decayed at +-L.
inline cplx quadrature(const ComplexField& f, double decay_tol = 1e-8) {
  const double edge = std::max(std::abs(f.values.front()), std::abs(f.values.back()));
  if (edge > decay_tol)
    warn("quadrature: integrand magnitude " + std::to_string(edge) +
         " at the box edge exceeds decay tolerance");
  return quadrature(*f.grid, f.values);
}

struct TailCorrectedIntegral {
  double value;     // raw trapezoid sum plus the estimated far-field contribution
  double raw;       // plain trapezoid sum over the box
  double tail;      // estimated contribution of |x| > L (the truncation error estimate)
};

/// Integral of a real density that decays algebraically like c/x^2 + d/x^4.
/// The two coefficients on each side are fitted from samples at |x| = 0.6 L and
/// |x| = 0.8 L, away from the last few cells where spectral derivatives of a
/// non-periodic field ring, and the missing far-field integral is added back.
inline TailCorrectedIntegral integrate_algebraic_tail(const Grid1D& g, const RVec& f) {
  const double raw = quadrature(g, f);
  const auto sample_at = [&](double x) {
    double s = (x + g.L) / g.h;
    s = std::fmod(std::fmod(s, g.N) + g.N, g.N);
    const int j0 = static_cast<int>(std::floor(s));
    const double w = s - j0;
    return (1 - w) * f[j0 % g.N] + w * f[(j0 + 1) % g.N];
  };
  const auto side_tail = [&](double sign) {
    const double xa = 0.8 * g.L, xb = 0.6 * g.L;
    const double fa = sample_at(sign * xa), fb = sample_at(sign * xb);
    // f = c/x^2 + d/x^4 through (xa, fa) and (xb, fb)
    const double a11 = 1 / (xa * xa), a12 = 1 / (xa * xa * xa * xa);
    const double a21 = 1 / (xb * xb), a22 = 1 / (xb * xb * xb * xb);
    const double det = a11 * a22 - a12 * a21;
    const double c = (fa * a22 - a12 * fb) / det;
    const double d = (a11 * fb - a21 * fa) / det;
    const double xs = (sign > 0 ? g.L - g.h : g.L) + 0.5 * g.h;
    return c / xs + d / (3 * xs * xs * xs);
  };
  // The trapezoid sum already covers half a cell beyond each end sample.
  const double tail = side_tail(+1.0) + side_tail(-1.0);
  return {raw + tail, raw, tail};
}

/// Sobolev H^s norm computed on the Fourier side, consistent with
/// sqrt(int |f|^2 + ... + |d^s f|^2) via Parseval.
inline double sobolev_norm(const ComplexField& f, int s) {
  if (s < 0 || s > 2) throw InvalidArgument("sobolev order must be 0, 1 or 2");
  require_finite(f.values, "sobolev_norm");
  const Grid1D& g = *f.grid;
  CVec v(f.values);
  const cplx bg = f.background.value();
  for (auto& z : v) z -= bg;
  const CVec fh = fft(v);
  double acc = 0.0;
  for (int j = 0; j < g.N; ++j) {
    const double k2 = g.k[j] * g.k[j];
    double w = 1.0;
    if (s >= 1) w += k2;
    if (s >= 2) w += k2 * k2;
    acc += w * std::norm(fh[j]);
  }
  // Parseval: h * sum |f_j|^2 = (h / N) * sum |f^_k|^2
  return std::sqrt(acc * g.h / g.N);
}

/// Sampling helper.
template <class F>
ComplexField sample(const GridPtr& g, F&& fn, Background bg = Background::zero()) {
  CVec v(g->N);
  for (int j = 0; j < g->N; ++j) v[j] = fn(g->x[j]);
  return ComplexField(g, std::move(v), bg);
}

}  // namespace breatherlab
