#pragma once
// Dense real matrices of the linearized operators and their spectra: eigenvalue
// counts, approximate kernels, continuous-spectrum edges, the Wronskian root
// criterion for the SS profile and the coercivity bound.

#include <lapacke.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "breathers.hpp"
#include "functionals.hpp"
#include "grid.hpp"
#include "linearized.hpp"
#include "varcheck.hpp"

namespace breatherlab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Real 2N x 2N matrix acting on stacked (Re z, Im z).
struct LinOpMatrix {
  Mat A;
  GridPtr grid;
  Model model = Model::SS;
  double t = 0.0;
  double probe_defect = 0.0;    // relative asymmetry of the bilinear form on smooth probes
  double entry_defect = 0.0;    // max |A - A^T| / max |A| before symmetrization
  [[nodiscard]] int dim() const { return static_cast<int>(A.rows()); }
};

/// Dense spectral differentiation matrix of the given order (0 gives identity).
inline Mat differentiation_matrix(const Grid1D& g, int order) {
  const int N = g.N;
  if (order == 0) return Mat::Identity(N, N);
  CVec e(N, 0.0);
  e[0] = 1.0;
  const CVec col = deriv(g, e, order);
  Mat D(N, N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) D(i, j) = col[((i - j) % N + N) % N].real();
  return D;
}

inline Vec stack(const CVec& z) {
  const int N = static_cast<int>(z.size());
  Vec v(2 * N);
  for (int j = 0; j < N; ++j) {
    v(j) = z[j].real();
    v(N + j) = z[j].imag();
  }
  return v;
}

inline CVec unstack(const Vec& v) {
  const int N = static_cast<int>(v.size() / 2);
  CVec z(N);
  for (int j = 0; j < N; ++j) z[j] = cplx(v(j), v(N + j));
  return z;
}

/// Threshold on the probe defect above which assembly is treated as a transcription error.
inline constexpr double kSymmetryAbort = 1e-8;

inline LinOpMatrix assemble(const LinearizedCoefficients& L, double t) {
  const Grid1D& g = *L.grid;
  const int N = g.N;
  LinOpMatrix op;
  op.grid = L.grid;
  op.model = L.model;
  op.t = t;
  op.A = Mat::Zero(2 * N, 2 * N);
  auto pp = op.A.topLeftCorner(N, N);
  auto pq = op.A.topRightCorner(N, N);
  auto qp = op.A.bottomLeftCorner(N, N);
  auto qq = op.A.bottomRightCorner(N, N);
  const Mat D4 = differentiation_matrix(g, 4);
  pp += D4;
  qq += D4;
  const std::pair<const CVec*, const CVec*> terms[3] = {{&L.a0, &L.c0}, {&L.a1, &L.c1}, {&L.a2, &L.c2}};
  for (int order = 0; order < 3; ++order) {
    const Mat D = differentiation_matrix(g, order);
    const CVec& a = *terms[order].first;
    const CVec& c = *terms[order].second;
    for (int i = 0; i < N; ++i) {
      const double ar = a[i].real(), ai = a[i].imag(), cr = c[i].real(), ci = c[i].imag();
      pp.row(i) += (ar + cr) * D.row(i);
      pq.row(i) += (ci - ai) * D.row(i);
      qp.row(i) += (ai + ci) * D.row(i);
      qq.row(i) += (ar - cr) * D.row(i);
    }
  }
  // Aliasing of products with the potentials makes the raw matrix slightly
  // nonsymmetric entrywise; the form restricted to resolved fields is symmetric.
  const double amax = op.A.cwiseAbs().maxCoeff();
  op.entry_defect = (op.A - op.A.transpose()).cwiseAbs().maxCoeff() / amax;
  const auto probes = default_directions(L.grid);
  std::vector<Vec> pv;
  for (const auto& p : probes) pv.push_back(stack(p.values));
  double num = 0.0, den = 0.0;
  for (const auto& u : pv) {
    const Vec Au = op.A * u;
    for (const auto& v : pv) {
      const double uv = v.dot(Au), vu = u.dot(op.A * v);
      num = std::max(num, std::abs(uv - vu));
      den = std::max(den, std::abs(uv));
    }
  }
  op.probe_defect = den > 0 ? num / den : 0.0;
  if (!(op.probe_defect < kSymmetryAbort))
    throw NumericalFailure("linearized operator fails the symmetry check (defect " +
                           std::to_string(op.probe_defect) + ")");
  op.A = (0.5 * (op.A + op.A.transpose())).eval();
  return op;
}

inline LinOpMatrix build_linearized_operator(const BreatherSpec& s, double t, const GridPtr& g,
                                             const LyapunovCoefficients& c) {
  const ComplexField b = sample_breather(s, t, g);
  return assemble(linearized_coefficients(s.model(), b, c), t);
}

inline LinOpMatrix build_linearized_operator(const BreatherSpec& s, double t, const GridPtr& g) {
  return build_linearized_operator(s, t, g, lyapunov_coefficients(s));
}

struct EigenDecomposition {
  Vec values;
  Mat vectors;  // columns
};

/// Lowest k eigenpairs of a symmetric matrix (all of them when k <= 0 or k >= n).
inline EigenDecomposition lowest_eigenpairs(const Mat& A, int k) {
  const int n = static_cast<int>(A.rows());
  if (k <= 0 || k > n) k = n;
  Mat work = A;
  Vec w(n);
  Mat Z(n, k);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(k));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', k == n ? 'A' : 'I', 'U', n, work.data(), n, 0.0,
                                         0.0, 1, k, 0.0, &found, w.data(), Z.data(), n, isuppz.data());
  if (info != 0) throw NumericalFailure("symmetric eigensolver failed, LAPACK info = " + std::to_string(info));
  return {w.head(found), Z.leftCols(found)};
}

struct SpectrumReport {
  int dim = 0;
  int negative_count = 0;
  int near_zero_count = 0;
  double zero_tol = 1e-4;
  std::vector<double> lowest_eigenvalues;
  double essential_edge_predicted = std::numeric_limits<double>::quiet_NaN();
  double essential_edge_measured = std::numeric_limits<double>::quiet_NaN();
  double probe_defect = 0.0;
  double entry_defect = 0.0;
};

/// Share of the eigenvector's squared norm carried by |x| > L/3.
inline double boundary_mass(const Grid1D& g, const Vec& v) {
  double edge = 0.0, total = 0.0;
  for (int j = 0; j < g.N; ++j) {
    const double w = v(j) * v(j) + v(g.N + j) * v(g.N + j);
    total += w;
    if (std::abs(g.x[j]) > g.L / 3) edge += w;
  }
  return total > 0 ? edge / total : 0.0;
}

inline SpectrumReport eigen_spectrum(const LinOpMatrix& op, int k, double zero_tol = 1e-4) {
  const auto ed = lowest_eigenpairs(op.A, k);
  SpectrumReport r;
  r.dim = op.dim();
  r.zero_tol = zero_tol;
  r.probe_defect = op.probe_defect;
  r.entry_defect = op.entry_defect;
  for (int i = 0; i < ed.values.size(); ++i) {
    const double lam = ed.values(i);
    r.lowest_eigenvalues.push_back(lam);
    if (std::abs(lam) < zero_tol)
      ++r.near_zero_count;
    else if (lam < 0)
      ++r.negative_count;
    if (std::isnan(r.essential_edge_measured) && std::abs(lam) >= zero_tol &&
        boundary_mass(*op.grid, ed.vectors.col(i)) > 0.5)
      r.essential_edge_measured = lam;
  }
  return r;
}

/// Infimum of the continuous spectrum predicted from the symbol at spatial infinity.
inline double continuous_spectrum_edge(const BreatherSpec& s) {
  if (s.family == Family::SS) {
    const double a2 = s.alpha * s.alpha, b2 = s.beta * s.beta;
    return s.beta >= s.alpha ? (a2 + b2) * (a2 + b2) : 4 * a2 * b2;
  }
  if (s.family == Family::KM) {
    const double b = s.km_beta(), b2 = b * b;
    return b >= std::sqrt(2.0) ? -2 * b2 : -0.25 * (2 - b2) * (2 - b2) - 2 * b2;
  }
  throw InvalidArgument("continuous spectrum edge is implemented for ss and km");
}

/// The two symbol branches of the constant-coefficient KM operator at infinity.
inline std::pair<double, double> km_symbol_branches(double beta, double xi) {
  const double x2 = xi * xi, b2 = beta * beta;
  return {x2 * x2 + b2 * x2, x2 * x2 + (b2 - 2) * x2 - 2 * b2};
}

inline double l2_norm(const Grid1D& g, const CVec& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s * g.h);
}

/// ||L v|| / (||v_4x|| + |n| ||v||): the same normalization as the elliptic residuals.
inline double relative_image_norm(const LinearizedCoefficients& L, const LyapunovCoefficients& c, const CVec& v) {
  const Grid1D& g = *L.grid;
  return l2_norm(g, apply_linearized(L, v)) / (l2_norm(g, deriv(g, v, 4)) + std::abs(c.n) * l2_norm(g, v));
}

struct KernelResiduals {
  double translation = 0.0;  // L applied to B_x
  double phase = 0.0;        // L applied to i B (SS only; NaN otherwise)
};

inline KernelResiduals kernel_residuals(const BreatherSpec& s, double t, const GridPtr& g) {
  const auto c = lyapunov_coefficients(s);
  const ComplexField b = sample_breather(s, t, g);
  const auto L = linearized_coefficients(s.model(), b, c);
  KernelResiduals r;
  r.translation = relative_image_norm(L, c, deriv(*g, b.values, 1));
  r.phase = std::numeric_limits<double>::quiet_NaN();
  if (s.family == Family::SS) {
    CVec ib(b.values.size());
    for (std::size_t j = 0; j < ib.size(); ++j) ib[j] = I * b.values[j];
    r.phase = relative_image_norm(L, c, ib);
  }
  return r;
}

/// Identities satisfied by the parameter derivatives of the SS breather.
struct SSIdentityReport {
  double d_alpha = 0.0;  // relative defect of L dB/dalpha = -4 alpha (B_xx + 4|B|^2 B) - 4 alpha (alpha^2+beta^2) B
  double b0 = 0.0;       // relative defect of L B0 = -B
};

inline SSIdentityReport ss_parameter_identities(const BreatherSpec& s, const GridPtr& g, double t = 0.0) {
  if (s.family != Family::SS) throw InvalidArgument("SS family required");
  const auto c = lyapunov_coefficients(s);
  const ComplexField b = sample_breather(s, t, g);
  const auto L = linearized_coefficients(Model::SS, b, c);
  const CVec da = ss_parameter_derivative(s, Param::Alpha, t, g).values;
  const CVec db = ss_parameter_derivative(s, Param::Beta, t, g).values;
  const CVec& B = b.values;
  const CVec Bxx = deriv(*g, B, 2);
  const double al = s.alpha, be = s.beta, r2 = al * al + be * be;
  const CVec Lda = apply_linearized(L, da);
  CVec expect(B.size()), b0(B.size());
  for (std::size_t j = 0; j < B.size(); ++j) {
    expect[j] = -4 * al * (Bxx[j] + 4 * std::norm(B[j]) * B[j]) - 4 * al * r2 * B[j];
    b0[j] = (be * da[j] + al * db[j]) / (8 * al * be * r2);
  }
  const CVec Lb0 = apply_linearized(L, b0);
  const auto rel = [&](const CVec& got, const CVec& want, bool plus) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < got.size(); ++j) {
      if (std::abs(g->x[j]) > g->L / 2) continue;
      num = std::max(num, std::abs(plus ? got[j] + want[j] : got[j] - want[j]));
      den = std::max(den, std::abs(want[j]));
    }
    return num / den;
  };
  return {rel(Lda, expect, false), rel(Lb0, B, true)};
}

struct NegativeDirection {
  double direct = 0.0;
  double closed_form = 0.0;
};

/// Re int conj(v) L v for v = beta dB/dalpha + alpha dB/dbeta, by quadrature and in closed form.
inline NegativeDirection negative_direction_value(const BreatherSpec& s, const GridPtr& g) {
  if (s.family != Family::SS) throw InvalidArgument("SS family required");
  const auto c = lyapunov_coefficients(s);
  const ComplexField b = sample_breather(s, 0.0, g);
  const auto L = linearized_coefficients(Model::SS, b, c);
  const CVec da = ss_parameter_derivative(s, Param::Alpha, 0.0, g).values;
  const CVec db = ss_parameter_derivative(s, Param::Beta, 0.0, g).values;
  CVec v(da.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = s.beta * da[j] + s.alpha * db[j];
  NegativeDirection out;
  out.direct = quadratic_form(L, v);
  RVec q2(b.values.size());
  for (std::size_t j = 0; j < q2.size(); ++j) q2[j] = std::norm(b.values[j]);
  const double al = s.alpha, be = s.beta;
  out.closed_form = -4 * al * al * be * (al * al + be * be) * quadrature(*g, q2);
  const double tol = 1e-5 * std::max(std::abs(out.direct), std::abs(out.closed_form));
  if (std::abs(out.direct - out.closed_form) > tol)
    throw NumericalFailure("negative direction: quadrature and closed form disagree");
  return out;
}

// ---------------------------------------------------------------------------
// Wronskian criterion

struct WronskianReport {
  std::vector<double> positive_roots_u;      // sorted ascending
  std::vector<int> kernel_dims;              // 1 where the derivative condition also holds
  std::vector<double> second_condition_roots;
  std::vector<double> condition_values;      // derivative condition at each root
  std::vector<double> closed_form_roots;     // u_{1,+} and, when real, u_{2,+-}
  double max_closed_form_mismatch = 0.0;
  int filtered_count = 0;
};

/// Coefficients (highest power first) of the quartic in u = e^{2y} whose positive
/// roots are the zeros of Re{conj(Q) Q'} for the SS profile.
inline std::vector<double> wronskian_quartic(double al, double be) {
  const double a2 = al * al, b2 = be * be, a4 = a2 * a2, b4 = b2 * b2;
  return {a4 + 2 * a2 * b2 + b4, 2 * a4 - 2 * b4, 0.0, -2 * a4 + 2 * a2 * b2, -a4};
}

/// All roots of a polynomial (highest power first) as companion-matrix eigenvalues.
inline std::vector<cplx> polynomial_roots(const std::vector<double>& c) {
  std::size_t lead = 0;
  while (lead < c.size() && c[lead] == 0.0) ++lead;
  const int deg = static_cast<int>(c.size() - lead) - 1;
  if (deg < 1) return {};
  Mat C = Mat::Zero(deg, deg);
  for (int j = 0; j < deg; ++j) C(0, j) = -c[lead + 1 + j] / c[lead];
  for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
  Eigen::EigenSolver<Mat> es(C, false);
  if (es.info() != Eigen::Success) throw NumericalFailure("companion-matrix root finding did not converge");
  std::vector<cplx> r;
  for (int i = 0; i < deg; ++i) r.push_back(es.eigenvalues()(i));
  return r;
}

/// Newton polish of a real root.
inline double polish_root(const std::vector<double>& c, double u) {
  for (int it = 0; it < 20; ++it) {
    double p = 0.0, dp = 0.0;
    for (double a : c) {
      dp = dp * u + p;
      p = p * u + a;
    }
    if (dp == 0.0) break;
    const double step = p / dp;
    u -= step;
    if (std::abs(step) < 1e-16 * std::abs(u)) break;
  }
  return u;
}

/// 2Re{Q'' conj Q'} + 2m Im{Q'' conj Q} + 2m^2 Re{Q' conj Q} for the unscaled
/// profile Q_eta at y, with m = alpha / beta.
inline double wronskian_derivative_condition(const BreatherSpec& s, double y) {
  const cplx eta = s.ss_eta();
  const double h = 1e-3;
  const auto q = [&](double yy) { return ss_Q(yy, eta); };
  const cplx q0 = q(y), qp1 = q(y + h), qm1 = q(y - h), qp2 = q(y + 2 * h), qm2 = q(y - 2 * h);
  const cplx d1 = (8.0 * (qp1 - qm1) - (qp2 - qm2)) / (12 * h);
  const cplx d2 = (16.0 * (qp1 + qm1) - (qp2 + qm2) - 30.0 * q0) / (12 * h * h);
  const double m = s.alpha / s.beta;
  return 2 * std::real(d2 * std::conj(d1)) + 2 * m * std::imag(d2 * std::conj(q0)) +
         2 * m * m * std::real(d1 * std::conj(q0));
}

inline WronskianReport wronskian_roots(const BreatherSpec& s, double condition_tol = 1e-6) {
  s.validate();
  if (s.family != Family::SS) throw InvalidArgument("Wronskian criterion applies to SS only");
  const double al = s.alpha, be = s.beta, a2 = al * al, b2 = be * be;
  const auto coef = wronskian_quartic(al, be);
  WronskianReport r;
  for (const cplx& z : polynomial_roots(coef)) {
    if (std::abs(z.imag()) > 1e-7 * std::max(1.0, std::abs(z)) || z.real() <= 0) continue;
    r.positive_roots_u.push_back(polish_root(coef, z.real()));
  }
  std::sort(r.positive_roots_u.begin(), r.positive_roots_u.end());
  // Merge duplicates produced by a double root at beta^2 = 3 alpha^2.
  r.positive_roots_u.erase(std::unique(r.positive_roots_u.begin(), r.positive_roots_u.end(),
                                       [](double x, double y) { return std::abs(x - y) < 1e-7 * std::abs(x); }),
                           r.positive_roots_u.end());
  r.closed_form_roots.push_back(al / std::sqrt(a2 + b2));
  if (b2 >= 3 * a2) {
    const double disc = be * std::sqrt(b2 - 3 * a2);
    r.closed_form_roots.push_back((b2 - a2 - disc) / (a2 + b2));
    r.closed_form_roots.push_back((b2 - a2 + disc) / (a2 + b2));
  }
  std::sort(r.closed_form_roots.begin(), r.closed_form_roots.end());
  for (double u : r.positive_roots_u) {
    double best = std::numeric_limits<double>::infinity();
    for (double w : r.closed_form_roots) best = std::min(best, std::abs(u - w));
    r.max_closed_form_mismatch = std::max(r.max_closed_form_mismatch, best);
    const double cond = wronskian_derivative_condition(s, 0.5 * std::log(u));
    r.condition_values.push_back(cond);
    const bool holds = std::abs(cond) < condition_tol;
    r.kernel_dims.push_back(holds ? 1 : 0);
    if (holds) r.second_condition_roots.push_back(u);
  }
  r.filtered_count = static_cast<int>(r.second_condition_roots.size());
  return r;
}

// ---------------------------------------------------------------------------
// Coercivity

/// Discrete H^2 Gram matrix for stacked (Re z, Im z): ||z||^2_{H^2} = v^T W v.
inline Mat h2_gram(const Grid1D& g) {
  const Mat D1 = differentiation_matrix(g, 1), D2 = differentiation_matrix(g, 2);
  const Mat S = g.h * (Mat::Identity(g.N, g.N) + D1.transpose() * D1 + D2.transpose() * D2);
  Mat W = Mat::Zero(2 * g.N, 2 * g.N);
  W.topLeftCorner(g.N, g.N) = S;
  W.bottomRightCorner(g.N, g.N) = S;
  return W;
}

/// Minimum of v^T A v / v^T W v over v orthogonal to the columns of C.
inline double constrained_min_rayleigh(const Mat& A, const Mat& W, const Mat& C) {
  const int n = static_cast<int>(A.rows());
  Eigen::ColPivHouseholderQR<Mat> qr(C);
  qr.setThreshold(1e-8);
  const int k = static_cast<int>(qr.rank());
  const Mat Q = qr.householderQ();
  const Mat Z = Q.rightCols(n - k);
  Mat Ar = Z.transpose() * A * Z;
  Mat Wr = Z.transpose() * W * Z;
  Ar = (0.5 * (Ar + Ar.transpose())).eval();
  Wr = (0.5 * (Wr + Wr.transpose())).eval();
  const int m = n - k;
  Vec w(m);
  const lapack_int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'N', 'U', m, Ar.data(), m, Wr.data(), m, w.data());
  if (info != 0) throw NumericalFailure("generalized eigensolver failed, LAPACK info = " + std::to_string(info));
  return w(0);
}

struct CoercivityReport {
  double mu0 = 0.0;              // constraints: phase mode, translation mode, B
  double without_mass_direction = 0.0;  // constraints: phase and translation modes only
  double extended = 0.0;         // additionally projecting the remaining near-kernel eigenvectors
  int extra_kernel_directions = 0;
};

inline CoercivityReport coercivity_check(const BreatherSpec& s, const GridPtr& g, double zero_tol = 1e-4) {
  if (s.family != Family::SS) throw InvalidArgument("coercivity check is implemented for SS");
  const ComplexField b = sample_breather(s, 0.0, g);
  const LinOpMatrix op = build_linearized_operator(s, 0.0, g);
  const Mat W = h2_gram(*g);
  CVec ib(b.values.size());
  for (std::size_t j = 0; j < ib.size(); ++j) ib[j] = I * b.values[j];
  const Vec v_phase = stack(ib), v_trans = stack(deriv(*g, b.values, 1)), v_mass = stack(b.values);
  CoercivityReport r;
  Mat C(op.dim(), 3);
  C << v_phase, v_trans, v_mass;
  r.mu0 = constrained_min_rayleigh(op.A, W, C);
  r.without_mass_direction = constrained_min_rayleigh(op.A, W, C.leftCols(2));
  // The remaining near-kernel eigenvectors, projected together with the three
  // directions above; rank detection in the QR drops the overlap with iB and B_x.
  const auto ed = lowest_eigenpairs(op.A, 8);
  std::vector<int> near;
  for (int i = 0; i < ed.values.size(); ++i)
    if (std::abs(ed.values(i)) < zero_tol) near.push_back(i);
  r.extra_kernel_directions = std::max(0, static_cast<int>(near.size()) - 2);
  Mat C2(op.dim(), 3 + static_cast<int>(near.size()));
  C2.leftCols(3) = C;
  for (std::size_t i = 0; i < near.size(); ++i) C2.col(3 + static_cast<int>(i)) = ed.vectors.col(near[i]);
  r.extended = r.extra_kernel_directions > 0 ? constrained_min_rayleigh(op.A, W, C2) : r.mu0;
  return r;
}

}  // namespace breatherlab
