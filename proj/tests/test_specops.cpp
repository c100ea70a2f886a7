#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "breatherlab/specops.hpp"

using namespace breatherlab;

namespace {

CVec apply_matrix(const LinOpMatrix& op, const CVec& z) { return unstack(op.A * stack(z)); }

double rel_diff(const CVec& a, const CVec& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num = std::max(num, std::abs(a[j] - b[j]));
    den = std::max(den, std::abs(b[j]));
  }
  return num / den;
}

}  // namespace

TEST(Assembly, MatrixActsLikeOperatorOnResolvedFields) {
  const auto s = BreatherSpec::ss(1, 1);
  auto g = make_grid(256, 25.0);
  const auto b = sample_breather(s, 0.0, g);
  const auto co = lyapunov_coefficients(s);
  const auto L = linearized_coefficients(Model::SS, b, co);
  const auto op = assemble(L, 0.0);
  EXPECT_EQ(op.dim(), 512);
  EXPECT_LT(op.probe_defect, kSymmetryAbort);
  EXPECT_EQ((op.A - op.A.transpose()).cwiseAbs().maxCoeff(), 0.0);
  for (const auto& z : default_directions(g)) EXPECT_LT(rel_diff(apply_matrix(op, z.values), apply_linearized(L, z.values)), 1e-3);
}

TEST(Assembly, StackRoundTrip) {
  const CVec z = {cplx(1, 2), cplx(-3, 0.5), cplx(0, -1)};
  EXPECT_EQ(unstack(stack(z)), z);
}

TEST(Assembly, TranscriptionErrorTripsSymmetryCheck) {
  const auto s = BreatherSpec::ss(1, 1);
  auto g = make_grid(128, 25.0);
  auto L = linearized_coefficients(Model::SS, sample_breather(s, 0.0, g), lyapunov_coefficients(s));
  for (auto& v : L.a1) v *= 1.5;  // breaks self-adjointness
  EXPECT_THROW(assemble(L, 0.0), NumericalFailure);
}

TEST(SSIdentities, KernelAndParameterDirections) {
  for (const auto& s : {BreatherSpec::ss(1, 1), BreatherSpec::ss(2, 1)}) {
    const auto gc = default_grid(s);
    auto g = make_grid(gc.N, gc.L);
    const auto k = kernel_residuals(s, 0.0, g);
    EXPECT_LT(k.translation, 1e-6);
    EXPECT_LT(k.phase, 1e-6);
    const auto id = ss_parameter_identities(s, g);
    EXPECT_LT(id.d_alpha, 1e-6);
    EXPECT_LT(id.b0, 1e-6);
  }
}

TEST(Spectrum, SasaSatsumaSingleNegativeEigenvalue) {
  auto g = make_grid(512, 25.0);
  for (const auto& s : {BreatherSpec::ss(1, 1), BreatherSpec::ss(0.3, 1), BreatherSpec::ss(2, 1)}) {
    const auto r = eigen_spectrum(build_linearized_operator(s, 0.0, g), 40);
    EXPECT_EQ(r.negative_count, 1);
    EXPECT_GE(r.near_zero_count, 2);  // at least the translation and phase modes
    EXPECT_LE(r.negative_count + r.near_zero_count, r.dim);
    EXPECT_NEAR(r.essential_edge_measured, continuous_spectrum_edge(s), 0.05 * continuous_spectrum_edge(s));
  }
}

TEST(Spectrum, CountsStableUnderRefinement) {
  const auto s = BreatherSpec::ss(1, 1);
  const auto base = eigen_spectrum(build_linearized_operator(s, 0.0, make_grid(512, 25.0)), 20);
  const auto finer = eigen_spectrum(build_linearized_operator(s, 0.0, make_grid(1024, 25.0)), 20);
  const auto longer = eigen_spectrum(build_linearized_operator(s, 0.0, make_grid(512, 35.0)), 20);
  EXPECT_EQ(base.negative_count, finer.negative_count);
  EXPECT_EQ(base.negative_count, longer.negative_count);
  EXPECT_EQ(base.near_zero_count, finer.near_zero_count);
  EXPECT_EQ(base.near_zero_count, longer.near_zero_count);
}

TEST(Spectrum, EdgeOnLargerBox) {
  const auto s = BreatherSpec::ss(1, 1);
  const auto r = eigen_spectrum(build_linearized_operator(s, 0.0, make_grid(1024, 40.0)), 40);
  EXPECT_NEAR(r.essential_edge_measured, 4.0, 0.2);
}

TEST(ContinuousSpectrum, ClosedForms) {
  EXPECT_DOUBLE_EQ(continuous_spectrum_edge(BreatherSpec::ss(1, 2)), 25.0);
  EXPECT_DOUBLE_EQ(continuous_spectrum_edge(BreatherSpec::ss(2, 1)), 16.0);
  auto s = BreatherSpec::ss(1, 1);
  EXPECT_DOUBLE_EQ(continuous_spectrum_edge(s), 4.0);
  s.beta = 1 - 1e-12;
  EXPECT_NEAR(continuous_spectrum_edge(s), 4.0, 1e-10);
  EXPECT_NEAR(continuous_spectrum_edge(BreatherSpec::km(0.75)), -2.25, 1e-14);
  EXPECT_NEAR(continuous_spectrum_edge(BreatherSpec::km(1.0)), -4.0, 1e-14);
  EXPECT_NEAR(continuous_spectrum_edge(BreatherSpec::km(1.0 - 1e-12)), -4.0, 1e-10);
  EXPECT_THROW(continuous_spectrum_edge(BreatherSpec::sy(1, 3)), InvalidArgument);
}

TEST(KMSymbol, BranchesAndMinimum) {
  for (double beta : {1.0, std::sqrt(2.0), 2.0}) {
    const auto z = km_symbol_branches(beta, 0.0);
    EXPECT_EQ(z.first, 0.0);
    EXPECT_DOUBLE_EQ(z.second, -2 * beta * beta);
    double lo = 1e300;
    for (int i = 0; i <= 400000; ++i) {
      const double xi = 3.0 * i / 400000;
      const auto br = km_symbol_branches(beta, xi);
      EXPECT_GE(br.first, 0.0);
      lo = std::min(lo, br.second);
    }
    BreatherSpec k = BreatherSpec::km(0.5 * (beta * beta / 2 + 1));
    EXPECT_NEAR(lo, continuous_spectrum_edge(k), 1e-10);
  }
}

TEST(KMSpectrum, KernelAndNegativeSpectrum) {
  const auto k = BreatherSpec::km(1.0);
  const auto gc = default_grid(k);
  auto g = make_grid(gc.N, gc.L);
  EXPECT_LT(kernel_residuals(k, 0.2, g).translation, 1e-5);
  const auto r = eigen_spectrum(build_linearized_operator(k, 0.0, make_grid(512, 20.0)), 30);
  EXPECT_LT(r.lowest_eigenvalues.front(), 0.0);
  EXPECT_NEAR(r.essential_edge_measured, -4.0, 0.2);
}

TEST(PeregrineKernel, Translation) {
  const auto p = BreatherSpec::peregrine();
  const auto gc = default_grid(p);
  EXPECT_LT(kernel_residuals(p, 0.0, make_grid(gc.N, gc.L)).translation, 1e-3);
}

TEST(NegativeDirection, BothPathsAgreeAndNegative) {
  for (const auto& s : {BreatherSpec::ss(1, 1), BreatherSpec::ss(0.3, 1), BreatherSpec::ss(2, 1)}) {
    const auto gc = default_grid(s);
    const auto v = negative_direction_value(s, make_grid(gc.N, gc.L));
    EXPECT_LT(v.direct, 0.0);
    EXPECT_NEAR(v.direct, v.closed_form, 1e-5 * std::abs(v.closed_form));
  }
  const auto gc = default_grid(BreatherSpec::ss(1, 1));
  auto g = make_grid(gc.N, gc.L);
  EXPECT_NEAR(negative_direction_value(BreatherSpec::ss(1, 1), g).closed_form, -16.0, 1e-8);
  // alpha -> 0: the value shrinks like alpha^2
  const double v1 = negative_direction_value(BreatherSpec::ss(0.02, 1), g).direct;
  const double v2 = negative_direction_value(BreatherSpec::ss(0.01, 1), g).direct;
  EXPECT_NEAR(v1 / v2, 4.0, 0.05);
}

TEST(Wronskian, SingleHumpRoot) {
  const auto r = wronskian_roots(BreatherSpec::ss(1, 1));
  ASSERT_EQ(r.positive_roots_u.size(), 1u);
  EXPECT_NEAR(r.positive_roots_u[0], 1 / std::sqrt(2.0), 1e-12);
  EXPECT_EQ(r.kernel_dims[0], 1);
  EXPECT_EQ(r.filtered_count, 1);
  EXPECT_LT(r.max_closed_form_mismatch, 1e-10);
}

TEST(Wronskian, DoubleHumpRoots) {
  const auto r = wronskian_roots(BreatherSpec::ss(1, 2));
  ASSERT_EQ(r.positive_roots_u.size(), 3u);
  EXPECT_NEAR(r.positive_roots_u[0], 0.2, 1e-12);
  EXPECT_NEAR(r.positive_roots_u[1], 1 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(r.positive_roots_u[2], 1.0, 1e-12);
  EXPECT_EQ(r.filtered_count, 1);
  EXPECT_LT(r.max_closed_form_mismatch, 1e-10);
  for (std::size_t i = 1; i < r.positive_roots_u.size(); ++i)
    EXPECT_LT(r.positive_roots_u[i - 1], r.positive_roots_u[i]);
}

TEST(Wronskian, AgreesWithDiagonalization) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ua(0.3, 1.5), ub(0.6, 1.5);
  auto g = make_grid(256, 20.0);
  int double_hump = 0;
  for (int i = 0; i < 10; ++i) {
    const auto s = BreatherSpec::ss(ua(rng), ub(rng));
    if (hump_classification(s).kind == HumpKind::Double) ++double_hump;
    const auto w = wronskian_roots(s);
    for (double u : w.positive_roots_u) EXPECT_GT(u, 0.0);
    const auto e = eigen_spectrum(build_linearized_operator(s, 0.0, g), 10);
    EXPECT_EQ(w.filtered_count, e.negative_count) << s.alpha << " " << s.beta;
  }
  EXPECT_GT(double_hump, 0);
  EXPECT_LT(double_hump, 10);
}

TEST(Coercivity, MassDirectionCarriesTheNegativeEigenvalue) {
  auto g = make_grid(256, 20.0);
  for (const auto& s : {BreatherSpec::ss(1, 1), BreatherSpec::ss(0.3, 1)}) {
    const auto c = coercivity_check(s, g);
    EXPECT_LT(c.without_mass_direction, 0.0);
    EXPECT_GT(c.extended, 0.1);
    EXPECT_GT(c.mu0, -1e-4);
  }
}
