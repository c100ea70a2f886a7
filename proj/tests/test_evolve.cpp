#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "breatherlab/evolve.hpp"

using namespace breatherlab;

namespace {

double max_diff(const CVec& a, const CVec& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

CVec conj_of(const CVec& v) {
  CVec out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = std::conj(v[j]);
  return out;
}

CVec roll(const CVec& v, int s) {
  CVec out(v.size());
  const int n = static_cast<int>(v.size());
  for (int j = 0; j < n; ++j) out[(j + s) % n] = v[j];
  return out;
}

}  // namespace

TEST(NlsZero, SolitonConservesMassAndEnergy) {
  auto g = make_grid(1024, 30.0);
  const auto u0 = sample_breather(BreatherSpec::soliton(1.0), 0.0, g);
  EvolveOptions o;
  o.track = Model::SY;
  const auto tr = evolve_nls_zero(u0, 5.0, 2e-4, o);
  EXPECT_FALSE(tr.aborted);
  EXPECT_LT(tr.drift.at("M"), 1e-8);
  EXPECT_LT(tr.drift.at("E"), 1e-8);
  // the exact solution is also reproduced
  const auto exact = sample_breather(BreatherSpec::soliton(1.0), 5.0, g);
  EXPECT_LT(max_diff(tr.last->values, exact.values), 1e-5);
}

TEST(NlsZero, BreatherReturnsAfterOnePeriod) {
  auto g = make_grid(2048, 30.0);
  const auto s = BreatherSpec::sy(1, 3);
  const auto u0 = sample_breather(s, 0.0, g);
  const double T = 2 * std::numbers::pi / 8;
  EvolveOptions o;
  o.frames = 1;
  const auto tr = evolve_nls_zero(u0, T, 1e-4, o);
  const cplx phase = std::exp(I * T);
  CVec expect(u0.values);
  for (auto& v : expect) v *= phase;
  EXPECT_LT(max_diff(tr.last->values, expect), 1e-5);
}

TEST(NlsZero, ZeroDataStaysZero) {
  auto g = make_grid(128, 20.0);
  const auto tr = evolve_nls_zero(ComplexField(g, CVec(g->N, 0.0)), 1.0, 1e-2);
  EXPECT_EQ(max_diff(tr.last->values, CVec(g->N, 0.0)), 0.0);
}

TEST(NlsZero, RejectsBadArguments) {
  auto g = make_grid(128, 20.0);
  const ComplexField z(g, CVec(g->N, 0.0));
  EXPECT_THROW(evolve_nls_zero(z, 1.0, 0.0), InvalidArgument);
  EXPECT_THROW(evolve_nls_zero(z, -1.0, 1e-3), InvalidArgument);
  EXPECT_THROW(evolve_ss(sample_breather(BreatherSpec::km(1.0), 0.0, g), 1.0, 1e-3), InvalidArgument);
}

TEST(NlsZero, BlowUpGuard) {
  auto g = make_grid(128, 20.0);
  EvolveOptions o;
  o.blowup_factor = 1.0 + 1e-12;
  const auto u0 = sample(g, [](double x) { return cplx(2.0 * std::exp(-x * x)); });
  const auto tr = evolve_nls_zero(u0, 1.0, 1e-3, o);
  EXPECT_TRUE(tr.aborted);
  EXPECT_NE(tr.message.find("blow-up"), std::string::npos);
}

TEST(NlsZero, TimeReversal) {
  auto g = make_grid(512, 30.0);
  const auto u0 = sample_breather(BreatherSpec::sy(1, 3), 0.0, g);
  EvolveOptions o;
  o.frames = 1;
  const auto fw = evolve_nls_zero(u0, 1.0, 1e-3, o);
  const auto bw = evolve_nls_zero(ComplexField(g, conj_of(fw.last->values)), 1.0, 1e-3, o);
  EXPECT_LT(max_diff(conj_of(bw.last->values), u0.values), 1e-6);
}

TEST(NlsZero, SecondOrder) {
  auto g = make_grid(512, 30.0);
  const auto u0 = sample_breather(BreatherSpec::sy(1, 2), 0.1, g);
  EvolveOptions o;
  o.frames = 1;
  const double dt = 1e-2;
  const auto ref = evolve_nls_zero(u0, 1.0, dt / 8, o);
  const double e1 = max_diff(evolve_nls_zero(u0, 1.0, dt, o).last->values, ref.last->values);
  const double e2 = max_diff(evolve_nls_zero(u0, 1.0, dt / 2, o).last->values, ref.last->values);
  // Against a dt/8 reference the ideal ratio is (1 - 1/64) / (1/4 - 1/64) = 4.2.
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 5.0);
}

TEST(NlsStokes, KuznetsovMaConservation) {
  const auto s = BreatherSpec::km(1.0);
  const auto gc = default_grid(s);
  auto g = make_grid(gc.N, gc.L);
  EvolveOptions o;
  o.track = Model::KM;
  o.lyapunov = lyapunov_coefficients(s);
  o.scheme = Scheme::Yoshida4;
  const auto tr = evolve_nls_stokes(to_stokes_perturbation(sample_breather(s, 0.0, g), 0.0), 3.0, 1e-3, o);
  for (const char* k : {"M", "E", "F", "H"}) EXPECT_LT(tr.drift.at(k), 1e-5) << k;
}

TEST(NlsStokes, ZeroPerturbationStaysZero) {
  auto g = make_grid(256, 20.0);
  const auto tr = evolve_nls_stokes(ComplexField(g, CVec(g->N, 0.0)), 2.0, 1e-2);
  EXPECT_EQ(max_diff(tr.last->values, CVec(g->N, 0.0)), 0.0);
}

TEST(NlsStokes, ModulationalGrowthRate) {
  auto g = make_grid(1024, 10 * std::numbers::pi);
  const double sigma = stokes_mode_growth_rate(1.0, 1e-6, 8.0, g, 1e-3);
  EXPECT_NEAR(sigma, 1.0, 0.05);
}

TEST(NlsStokes, TimeReversalAndOrder) {
  const auto s = BreatherSpec::km(1.0);
  auto g = make_grid(512, 10 * std::numbers::pi);
  const auto w0 = to_stokes_perturbation(sample_breather(s, 0.0, g), 0.0);
  EvolveOptions o;
  o.frames = 1;
  const auto fw = evolve_nls_stokes(w0, 1.0, 1e-3, o);
  const auto bw = evolve_nls_stokes(ComplexField(g, conj_of(fw.last->values)), 1.0, 1e-3, o);
  EXPECT_LT(max_diff(conj_of(bw.last->values), w0.values), 1e-6);

  const double dt = 1e-2;
  const auto ref = evolve_nls_stokes(w0, 1.0, dt / 8, o);
  const double e1 = max_diff(evolve_nls_stokes(w0, 1.0, dt, o).last->values, ref.last->values);
  const double e2 = max_diff(evolve_nls_stokes(w0, 1.0, dt / 2, o).last->values, ref.last->values);
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 5.0);
  o.scheme = Scheme::Yoshida4;
  const auto ref4 = evolve_nls_stokes(w0, 1.0, dt / 8, o);
  const double f1 = max_diff(evolve_nls_stokes(w0, 1.0, dt, o).last->values, ref4.last->values);
  const double f2 = max_diff(evolve_nls_stokes(w0, 1.0, dt / 2, o).last->values, ref4.last->values);
  EXPECT_GT(f1 / f2, 12.0);
}

TEST(SasaSatsuma, Conservation) {
  for (const auto& s : {BreatherSpec::ss(1, 1), BreatherSpec::ss(0.3, 1)}) {
    const auto gc = default_grid(s);
    auto g = make_grid(gc.N, gc.L);
    EvolveOptions o;
    o.track = Model::SS;
    o.lyapunov = lyapunov_coefficients(s);
    const auto tr = evolve_ss(sample_breather(s, 0.0, g), 5.0, 0.0, o);
    EXPECT_FALSE(tr.aborted);
    for (const char* k : {"M", "E", "F", "H"}) EXPECT_LT(tr.drift.at(k), 1e-6) << k << " " << s.alpha;
    const auto exact = sample_breather(s, 5.0, g);
    EXPECT_LT(max_diff(tr.last->values, exact.values), 1e-4);
  }
}

TEST(SasaSatsuma, LyapunovConservedOnPerturbedData) {
  const auto s = BreatherSpec::ss(1, 1);
  const auto gc = default_grid(s);
  auto g = make_grid(gc.N, gc.L);
  auto u0 = sample_breather(s, 0.0, g);
  for (int j = 0; j < g->N; ++j) u0.values[j] += 1e-2 * std::exp(-g->x[j] * g->x[j]);
  EvolveOptions o;
  o.track = Model::SS;
  o.lyapunov = lyapunov_coefficients(s);
  const auto tr = evolve_ss(u0, 3.0, 0.0, o);
  EXPECT_LT(tr.drift.at("H"), 1e-5);
}

TEST(SasaSatsuma, TranslationEquivariance) {
  const auto s = BreatherSpec::ss(1, 1);
  auto g = make_grid(512, 30.0);
  const auto u0 = sample_breather(s, 0.0, g);
  EvolveOptions o;
  o.frames = 1;
  const auto a = evolve_ss(u0, 1.0, 1e-3, o);
  const auto b = evolve_ss(ComplexField(g, roll(u0.values, 37)), 1.0, 1e-3, o);
  EXPECT_LT(max_diff(roll(a.last->values, 37), b.last->values), 1e-8);
}

TEST(SasaSatsuma, FourthOrder) {
  const auto s = BreatherSpec::ss(1, 1);
  auto g = make_grid(256, 30.0);
  const auto u0 = sample_breather(s, 0.0, g);
  EvolveOptions o;
  o.frames = 1;
  o.richardson_tol = 1e300;
  const double dt = 8e-3;
  const auto ref = evolve_ss(u0, 1.0, dt / 8, o);
  const double e1 = max_diff(evolve_ss(u0, 1.0, dt, o).last->values, ref.last->values);
  const double e2 = max_diff(evolve_ss(u0, 1.0, dt / 2, o).last->values, ref.last->values);
  // ideal ratio against a dt/8 reference: (1 - 1/4096) / (1/16 - 1/4096) = 16.06
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
}

TEST(SasaSatsuma, StepRejectionHalvesStep) {
  const auto s = BreatherSpec::ss(1, 1);
  auto g = make_grid(256, 30.0);
  EvolveOptions o;
  o.frames = 1;
  o.richardson_tol = 1e-12;
  const auto tr = evolve_ss(sample_breather(s, 0.0, g), 0.05, 0.01, o);
  EXPECT_GT(tr.rejections, 0);
  EXPECT_LT(tr.dt_used, 0.01);
}

TEST(Modulation, RecoversExactShifts) {
  auto s = BreatherSpec::ss(1, 1);
  const auto gc = default_grid(s);
  auto g = make_grid(gc.N, gc.L);
  for (double t : {0.0, 0.7}) {
    const auto u = ss_breather_wrapped(s, t, 0.1, -0.2, g);
    const auto e = modulation_fit(u, t, s);
    EXPECT_TRUE(e.converged);
    EXPECT_NEAR(e.x1, 0.1, 1e-8);
    EXPECT_NEAR(e.x2, -0.2, 1e-8);
    EXPECT_LT(e.z_norm, 1e-8);
  }
}

TEST(Modulation, SmallPerturbation) {
  const auto s = BreatherSpec::ss(1, 1);
  const auto gc = default_grid(s);
  auto g = make_grid(gc.N, gc.L);
  double prev = 0.0;
  for (double eps : {1e-3, 1e-4}) {
    auto u = sample_breather(s, 0.0, g);
    for (int j = 0; j < g->N; ++j) u.values[j] += eps * std::exp(-(g->x[j] - 0.5) * (g->x[j] - 0.5));
    const auto e = modulation_fit(u, 0.0, s);
    EXPECT_TRUE(e.converged);
    EXPECT_LT(std::abs(e.defect1), 1e-10);
    EXPECT_LT(std::abs(e.defect2), 1e-10);
    EXPECT_LT(e.z_norm, 10 * eps);
    if (prev > 0) {
      EXPECT_NEAR(prev / e.z_norm, 10.0, 1.0);
    }
    prev = e.z_norm;
  }
}

TEST(Modulation, FarFromOrbitIsFlagged) {
  const auto s = BreatherSpec::ss(1, 1);
  const auto gc = default_grid(s);
  auto g = make_grid(gc.N, gc.L);
  auto u = sample_breather(s, 0.0, g);
  for (int j = 0; j < g->N; ++j) u.values[j] += 1.0 * std::exp(-(g->x[j] - 3) * (g->x[j] - 3)) * cplx(0.3, -1.0);
  EXPECT_FALSE(modulation_fit(u, 0.0, s).converged);
}

TEST(Stability, ZeroPerturbationAndShortRun) {
  const auto s = BreatherSpec::ss(1, 1);
  const auto gc = default_grid(s);
  auto g = make_grid(gc.N, gc.L);
  EXPECT_EQ(stability_experiment_ss(s, 0.0, 1.0, g, 4).ratio, 0.0);
  const auto r = stability_experiment_ss(s, 1e-3, 2.0, g, 8);
  EXPECT_EQ(r.unconverged, 0);
  EXPECT_GT(r.ratio, 0.0);
  EXPECT_LT(r.ratio, 100.0);
  EXPECT_THROW(stability_experiment_ss(s, 0.1, 1.0, g), InvalidArgument);
}

TEST(Instability, ControlRunAndArguments) {
  const auto s = BreatherSpec::km(1.0);
  auto g = make_grid(1024, 10 * std::numbers::pi);
  const auto r = instability_experiment(s, 0.0, 1.0, g, 1.0, 5e-4, 10);
  EXPECT_LT(r.max_distance, 1e-5);
  EXPECT_THROW(instability_experiment(s, 1e-2, 1.0, g), InvalidArgument);
  EXPECT_THROW(instability_experiment(BreatherSpec::sy(1, 3), 1e-4, 1.0, g), InvalidArgument);
}

TEST(Growth, FitRecoversExponential) {
  std::vector<double> t, y;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.1 * i);
    y.push_back(3e-4 * std::exp(0.8 * t.back()));
  }
  EXPECT_NEAR(fit_growth_rate(t, y, 1.0, 5.0), 0.8, 1e-12);
}

TEST(PeregrineLimit, ZeroAndNegativeDirection) {
  auto g = make_grid(8192, 200.0);
  const auto zero = peregrine_quadratic_limit(ComplexField(g, CVec(g->N, 0.0)), {50.0});
  EXPECT_EQ(zero[0].direct, 0.0);
  EXPECT_EQ(zero[0].limit, 0.0);
  const auto z1 = sample(g, [](double x) { return cplx(std::exp(-x * x / 800) * std::sin(0.5 * x)); });
  const auto r = peregrine_quadratic_limit(z1, {50.0});
  EXPECT_LT(r[0].limit, 0.0);
  EXPECT_LT(r[0].direct, 0.0);
}

TEST(PeregrineLimit, GapShrinksWithTime) {
  auto g = make_grid(8192, 200.0);
  const auto z0 = sample(g, [](double x) { return cplx(std::exp(-x * x / 2)); });
  const auto r = peregrine_quadratic_limit(z0, {10.0, 50.0, -50.0});
  const double gap10 = std::abs(r[0].direct - r[0].limit), gap50 = std::abs(r[1].direct - r[1].limit);
  EXPECT_LT(gap50, 0.5 * gap10);
  EXPECT_NEAR(std::abs(r[2].direct - r[2].limit), gap50, 0.2 * gap50);
}
