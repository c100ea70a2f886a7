#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "breatherlab/grid.hpp"

using namespace breatherlab;

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

ComplexField sech_field(const GridPtr& g) {
  return sample(g, [](double x) { return cplx(sech(x), 0.3 * sech(x) * std::tanh(x)); });
}

}  // namespace

TEST(Grid, ConstructionInvariants) {
  const Grid1D g(64, 5.0);
  EXPECT_EQ(g.N, 64);
  EXPECT_DOUBLE_EQ(g.h * g.N, 2 * g.L);
  EXPECT_DOUBLE_EQ(g.x.front(), -5.0);
  for (int j = 1; j < g.N / 2; ++j) EXPECT_DOUBLE_EQ(g.k[j], -g.k[g.N - j]);
  EXPECT_DOUBLE_EQ(g.k[1], std::numbers::pi / 5.0);
}

TEST(Grid, RejectsBadSizes) {
  EXPECT_THROW(Grid1D(4, 1.0), InvalidArgument);
  EXPECT_THROW(Grid1D(100, 1.0), InvalidArgument);
  EXPECT_THROW(Grid1D(64, -1.0), InvalidArgument);
}

TEST(Grid, FieldLengthMustMatch) {
  auto g = make_grid(16, 1.0);
  EXPECT_THROW(ComplexField(g, CVec(15)), InvalidArgument);
}

TEST(SpectralDerivative, ConstantHasZeroDerivative) {
  auto g = make_grid(64, 3.0);
  const auto d = spectral_derivative(sample(g, [](double) { return cplx(1.0); }), 1);
  for (const auto& v : d.values) EXPECT_LT(std::abs(v), 1e-14);
}

TEST(SpectralDerivative, SineIsEigenfunction) {
  const double L = 4.0;
  auto g = make_grid(64, L);
  const double kk = std::numbers::pi / L;
  const auto d = spectral_derivative(sample(g, [&](double x) { return cplx(std::sin(kk * x)); }), 2);
  for (int j = 0; j < g->N; ++j) EXPECT_NEAR(d[j].real(), -kk * kk * std::sin(kk * g->x[j]), 1e-13);
}

TEST(SpectralDerivative, SechMatchesClosedForm) {
  auto g = make_grid(1024, 30.0);
  const auto d = spectral_derivative(sample(g, [](double x) { return cplx(sech(x)); }), 1);
  double err = 0.0;
  for (int j = 0; j < g->N; ++j) err = std::max(err, std::abs(d[j] + sech(g->x[j]) * std::tanh(g->x[j])));
  EXPECT_LT(err, 1e-10);
}

TEST(SpectralDerivative, RejectsBadOrderAndNonFinite) {
  auto g = make_grid(32, 3.0);
  auto f = sech_field(g);
  EXPECT_THROW(spectral_derivative(f, 0), InvalidArgument);
  EXPECT_THROW(spectral_derivative(f, 7), InvalidArgument);
  f.values[3] = cplx(std::nan(""), 0.0);
  EXPECT_THROW(spectral_derivative(f, 1), InvalidArgument);
}

TEST(SpectralDerivative, ComposesWithItself) {
  auto g = make_grid(512, 25.0);
  const auto f = sech_field(g);
  const auto a = spectral_derivative(spectral_derivative(f, 1), 1);
  const auto b = spectral_derivative(f, 2);
  for (int j = 0; j < g->N; ++j) EXPECT_LT(std::abs(a[j] - b[j]), 1e-10);
}

TEST(Quadrature, ZeroAndSechSquared) {
  auto g = make_grid(1024, 30.0);
  EXPECT_EQ(quadrature(sample(g, [](double) { return cplx(0.0); })), cplx(0.0));
  const cplx q = quadrature(sample(g, [](double x) { return cplx(sech(x) * sech(x)); }));
  EXPECT_NEAR(q.real(), 2.0, 1e-12);
  EXPECT_NEAR(q.imag(), 0.0, 1e-15);
}

TEST(Quadrature, AlgebraicTailWithinTolerance) {
  auto g = make_grid(8192, 200.0);
  RVec f(g->N);
  for (int j = 0; j < g->N; ++j) f[j] = 2.0 / (1.0 + 2.0 * g->x[j] * g->x[j]);
  const auto t = integrate_algebraic_tail(*g, f);
  const double exact = std::numbers::pi * std::sqrt(2.0);
  EXPECT_NEAR(t.value, exact, 1e-3);
  // The plain sum misses about 2/L; the tail estimate accounts for it.
  EXPECT_NEAR(t.raw + t.tail, t.value, 1e-14);
  EXPECT_NEAR(t.tail, exact - t.raw, 1e-4);
}

TEST(Quadrature, WarnsOnUndecayedEdges) {
  auto g = make_grid(64, 3.0);
  std::string got;
  auto old = warning_handler();
  warning_handler() = [&](const std::string& m) { got = m; };
  quadrature(sample(g, [](double) { return cplx(1.0); }));
  warning_handler() = old;
  EXPECT_NE(got.find("decay"), std::string::npos);
}

TEST(Quadrature, LinearAndConjugationEquivariant) {
  auto g = make_grid(256, 20.0);
  const auto f = sech_field(g);
  const auto h = sample(g, [](double x) { return cplx(std::exp(-x * x), std::exp(-(x - 1) * (x - 1))); });
  CVec fc(g->N), comb(g->N);
  for (int j = 0; j < g->N; ++j) {
    fc[j] = std::conj(f[j]);
    comb[j] = 2.0 * f[j] - cplx(0, 3) * h[j];
  }
  EXPECT_LT(std::abs(quadrature(*g, fc) - std::conj(quadrature(f))), 1e-15);
  EXPECT_LT(std::abs(quadrature(*g, comb) - (2.0 * quadrature(f) - cplx(0, 3) * quadrature(h))), 1e-13);
}

TEST(SobolevNorm, ZeroParsevalAndDirectH2) {
  auto g = make_grid(1024, 30.0);
  EXPECT_EQ(sobolev_norm(sample(g, [](double) { return cplx(0.0); }), 2), 0.0);
  const auto f = sample(g, [](double x) { return cplx(sech(x)); });
  RVec a(g->N);
  for (int j = 0; j < g->N; ++j) a[j] = std::norm(f[j]);
  EXPECT_NEAR(sobolev_norm(f, 0), std::sqrt(quadrature(*g, a)), 1e-12);
  const auto f1 = spectral_derivative(f, 1), f2 = spectral_derivative(f, 2);
  for (int j = 0; j < g->N; ++j) a[j] += std::norm(f1[j]) + std::norm(f2[j]);
  EXPECT_NEAR(sobolev_norm(f, 2), std::sqrt(quadrature(*g, a)), 1e-10);
}

TEST(SobolevNorm, ParsevalForSeveralFields) {
  auto g = make_grid(512, 20.0);
  for (double shift : {-2.0, 0.0, 1.5}) {
    const auto f = sample(g, [&](double x) { return std::exp(-(x - shift) * (x - shift)) * std::exp(I * x); });
    RVec a(g->N);
    for (int j = 0; j < g->N; ++j) a[j] = std::norm(f[j]);
    const double direct = quadrature(*g, a);
    EXPECT_NEAR(sobolev_norm(f, 0) * sobolev_norm(f, 0), direct, 1e-12 * direct);
  }
}

TEST(SobolevNorm, StokesBackgroundIsSubtracted) {
  auto g = make_grid(128, 10.0);
  const auto f = sample(g, [](double) { return std::exp(I * 0.4); }, Background::stokes(0.4));
  EXPECT_LT(sobolev_norm(f, 2), 1e-13);
}
