#pragma once
// Pointwise coefficients of the linearized (second-variation) operators
//
//   L z = z_4x + a2 z_xx + c2 conj(z)_xx + a1 z_x + c1 conj(z)_x + a0 z + c0 conj(z)
//
// for the four models, including the -m(...) + n z part coming from the mass
// and energy terms of H. Shared by the matrix-free quadratic form and by the
// dense matrix assembly.

#include "breathers.hpp"
#include "functionals.hpp"
#include "grid.hpp"

namespace breatherlab {

struct LinearizedCoefficients {
  GridPtr grid;
  Model model = Model::SS;
  CVec a2, c2, a1, c1, a0, c0;
};

inline LinearizedCoefficients linearized_coefficients(Model model, const ComplexField& b,
                                                      const LyapunovCoefficients& co) {
  const Grid1D& g = *b.grid;
  const CVec& B = b.values;
  const CVec Bx = deriv(g, B, 1), Bxx = deriv(g, B, 2);
  const int N = g.N;
  LinearizedCoefficients L;
  L.grid = b.grid;
  L.model = model;
  L.a2.resize(N);
  L.c2.resize(N);
  L.a1.resize(N);
  L.c1.resize(N);
  L.a0.resize(N);
  L.c0.resize(N);
  const double m = co.m, n = co.n;
  for (int j = 0; j < N; ++j) {
    const cplx u = B[j], ux = Bx[j], uxx = Bxx[j];
    const cplx ub = std::conj(u), uxb = std::conj(ux), uxxb = std::conj(uxx);
    const double A = std::norm(u);
    switch (model) {
      case Model::SS:
        L.a2[j] = 14 * A - m;
        L.c2[j] = 6.0 * u * u;
        L.a1[j] = 12.0 * u * uxb + 16.0 * ub * ux;
        L.c1[j] = 12.0 * u * ux;
        L.a0[j] = 14.0 * ub * uxx + 12 * std::norm(ux) + 12.0 * u * uxxb + 72 * A * A - 8 * m * A + n;
        L.c0[j] = 14.0 * u * uxx + 8.0 * ux * ux + 48 * A * u * u - 4 * m * u * u;
        break;
      case Model::SY:
        L.a2[j] = 4 * A - m;
        L.c2[j] = u * u;
        L.a1[j] = 2.0 * u * uxb + 6.0 * ub * ux;
        L.c1[j] = 2.0 * u * ux;
        L.a0[j] = 2 * std::norm(ux) + 2.0 * u * uxxb + 4.0 * ub * uxx + 4.5 * A * A - 2 * m * A + n;
        L.c0[j] = 3.0 * ux * ux + 4.0 * u * uxx + 3 * A * u * u - m * u * u;
        break;
      case Model::KM:
      case Model::P: {
        const double b1 = A - 1.0;
        L.a2[j] = 4 * A - 3 - m;
        L.c2[j] = u * u;
        L.a1[j] = 2.0 * u * uxb + 6.0 * ub * ux;
        L.c1[j] = 2.0 * u * ux;
        // 6(|B|^2-1) B Re(B conj z) = 3(|B|^2-1)(|B|^2 z + B^2 conj z)
        L.a0[j] = 2 * std::norm(ux) + 2.0 * u * uxxb + 4.0 * ub * uxx + 1.5 * b1 * b1 + 3 * b1 * A -
                  m * (2 * A - 1) + n;
        L.c0[j] = 3.0 * ux * ux + 4.0 * u * uxx + 3 * b1 * u * u - m * u * u;
        break;
      }
    }
  }
  return L;
}

/// Matrix-free application of L to z.
inline CVec apply_linearized(const LinearizedCoefficients& L, const CVec& z) {
  const Grid1D& g = *L.grid;
  CVec zb(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) zb[j] = std::conj(z[j]);
  const CVec z1 = deriv(g, z, 1), z2 = deriv(g, z, 2), z4 = deriv(g, z, 4);
  const CVec zb1 = deriv(g, zb, 1), zb2 = deriv(g, zb, 2);
  CVec out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j)
    out[j] = z4[j] + L.a2[j] * z2[j] + L.c2[j] * zb2[j] + L.a1[j] * z1[j] + L.c1[j] * zb1[j] +
             L.a0[j] * z[j] + L.c0[j] * zb[j];
  return out;
}

/// Re int conj(z) L z.
inline double quadratic_form(const LinearizedCoefficients& L, const CVec& z) {
  const CVec Lz = apply_linearized(L, z);
  double s = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) s += std::real(std::conj(z[j]) * Lz[j]);
  return s * L.grid->h;
}

}  // namespace breatherlab
