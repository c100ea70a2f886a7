// Command-line front end for the breatherlab library.
//
// Every subcommand prints a JSON report on stdout and writes its outputs
// (CSV and/or JSON plus a run manifest) into --out. Exit codes: 0 when all
// tolerances hold, 1 for usage or parameter errors, 2 when a tolerance fails.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "breatherlab/evolve.hpp"
#include "breatherlab/functionals.hpp"
#include "breatherlab/specops.hpp"
#include "breatherlab/varcheck.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace breatherlab;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kSpectrumMaxN = 2048;

struct Options {
  std::string family = "ss";
  double alpha = 1.0, beta = 1.0, a = 1.0, c1 = 1.0, c2 = 3.0, alpha1 = 0.0, alpha2 = 0.0;
  double c = 1.0, v = 0.0;
  double t = 0.0;
  int N = 0;          // 0: subcommand default
  double L = 0.0;     // 0: subcommand default
  double T = -1.0;    // negative: subcommand default
  double dt = 0.0;    // 0: subcommand default
  double eps = -1.0;  // negative: subcommand default
  double k = std::numeric_limits<double>::quiet_NaN();
  unsigned seed = 0;
  int jobs = 1;
  int draws = 1;
  int frames = 0;
  int nev = 40;
  std::string times = "10,20,50,100,-50";
  std::string scheme = "yoshida4";
  std::string out = "breatherlab_out";
  std::string format = "both";
  bool x0only = false;
};

/// Result of one subcommand: the JSON report, an optional CSV table and the verdict.
struct Outcome {
  json report = json::object();
  std::vector<std::string> csv_header;
  std::vector<std::vector<double>> csv_rows;
  json tolerances = json::object();
  bool pass = true;
  GridChoice grid{0, 0.0};
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    if (!f.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string csv_text(const Outcome& o) {
  std::ostringstream s;
  for (std::size_t i = 0; i < o.csv_header.size(); ++i) s << (i ? "," : "") << o.csv_header[i];
  s << '\n';
  for (const auto& row : o.csv_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << fmt17(row[i]);
    s << '\n';
  }
  return s.str();
}

BreatherSpec make_spec(const Options& o) {
  BreatherSpec s;
  s.family = parse_family(o.family);
  s.alpha = o.alpha;
  s.beta = o.beta;
  s.a = o.a;
  s.c1 = o.c1;
  s.c2 = o.c2;
  s.alpha1 = o.alpha1;
  s.alpha2 = o.alpha2;
  s.c = o.c;
  s.v = o.v;
  s.validate();
  return s;
}

json spec_json(const BreatherSpec& s) {
  json j;
  j["family"] = family_name(s.family);
  switch (s.family) {
    case Family::SS: j["alpha"] = s.alpha, j["beta"] = s.beta; break;
    case Family::SY: j["c1"] = s.c1, j["c2"] = s.c2; break;
    case Family::SY2:
      j["c1"] = s.c1, j["c2"] = s.c2, j["alpha1"] = s.alpha1, j["alpha2"] = s.alpha2;
      break;
    case Family::KM: j["a"] = s.a; break;
    case Family::Soliton: j["c"] = s.c, j["v"] = s.v; break;
    default: break;
  }
  return j;
}

GridChoice pick_grid(const Options& o, GridChoice fallback) {
  GridChoice g = fallback;
  if (o.N > 0) g.N = o.N;
  if (o.L > 0) g.L = o.L;
  return g;
}

void require_family(const BreatherSpec& s, std::initializer_list<Family> allowed, const char* cmd) {
  for (Family f : allowed)
    if (s.family == f) return;
  throw InvalidArgument(std::string(cmd) + " does not support family " + family_name(s.family));
}

json residual_json(const ResidualReport& r) {
  return {{"equation", equation_name(r.equation)}, {"max_abs", num(r.max_abs)}, {"l2", num(r.l2)},
          {"location_of_max", r.location_of_max}, {"max_abs_full_box", num(r.max_abs_full)}};
}

// ---------------------------------------------------------------------------
// subcommands

Outcome cmd_profile(const Options& o) {
  const auto s = make_spec(o);
  Outcome out;
  out.grid = pick_grid(o, default_grid(s));
  out.report["spec"] = spec_json(s);
  out.report["t"] = o.t;
  const cplx v0 = evaluate(s, o.t, 0.0);
  out.report["value_at_origin"] = {{"re", v0.real()}, {"im", v0.imag()}, {"abs", std::abs(v0)}};
  if (s.family == Family::SS) {
    const auto h = hump_classification(s);
    out.report["hump"] = h.kind == HumpKind::Single ? "single" : "double";
    out.report["eta_abs"] = h.eta_abs;
    out.report["gamma"] = h.gamma;
  }
  out.csv_header = {"x", "re", "im", "abs"};
  if (o.x0only) {
    out.csv_rows.push_back({0.0, v0.real(), v0.imag(), std::abs(v0)});
    out.grid = {0, 0.0};
  } else {
    auto g = make_grid(out.grid.N, out.grid.L);
    const auto f = sample_breather(s, o.t, g);
    double mx = 0.0;
    for (int j = 0; j < g->N; ++j) {
      out.csv_rows.push_back({g->x[j], f[j].real(), f[j].imag(), std::abs(f[j])});
      mx = std::max(mx, std::abs(f[j]));
    }
    out.report["max_abs"] = mx;
  }
  return out;
}

BreatherSpec random_draw(const BreatherSpec& base, std::mt19937_64& rng, double& t) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BreatherSpec s = base;
  t = -1.0 + 2.0 * u(rng);
  switch (base.family) {
    case Family::SS:
      s.alpha = 0.3 + 1.7 * u(rng);
      s.beta = 0.5 + 1.0 * u(rng);
      break;
    case Family::SY:
    case Family::SY2:
      s.c1 = 0.5 + u(rng);
      s.c2 = s.c1 + 0.5 + 1.5 * u(rng);
      if (base.family == Family::SY2) {
        s.alpha1 = -0.3 + 0.6 * u(rng);
        s.alpha2 = -0.3 + 0.6 * u(rng);
      }
      break;
    case Family::KM: s.a = 0.6 + 0.9 * u(rng); break;
    default: break;
  }
  return s;
}

struct DrawResult {
  BreatherSpec spec;
  double t = 0.0;
  std::vector<std::pair<ResidualReport, double>> checks;  // report and its tolerance
  GridChoice grid{0, 0.0};
};

DrawResult residual_one(const BreatherSpec& s, double t, const Options& o) {
  DrawResult d;
  d.spec = s;
  d.t = t;
  d.grid = pick_grid(o, default_grid(s));
  auto g = make_grid(d.grid.N, d.grid.L);
  const double tol = s.family == Family::P ? 1e-4 : 1e-6;
  const auto field = sample_breather(s, t, g);
  d.checks.emplace_back(elliptic_residual(field, s), tol);
  if (s.family == Family::SS) {
    d.checks.emplace_back(ss_third_order_residual(s, t, g), 1e-8);
    d.checks.emplace_back(ss_fourth_order_profile_residual(s, g, t), 1e-6);
    d.checks.emplace_back(nonlinear_identity_residual_ss(s, g), 1e-8);
  }
  d.checks.emplace_back(pde_residual(s, t, g), 1e-5);
  return d;
}

Outcome cmd_residual(const Options& o) {
  const auto base = make_spec(o);
  if (base.family == Family::Soliton) throw InvalidArgument("residual: the soliton has no elliptic equation");
  if (o.draws < 1) throw UsageError("--draws must be at least 1");
  std::vector<std::pair<BreatherSpec, double>> work;
  if (o.draws == 1) {
    work.emplace_back(base, o.t);
  } else {
    std::mt19937_64 rng(o.seed);
    for (int i = 0; i < o.draws; ++i) {
      double t = 0.0;
      const auto s = random_draw(base, rng, t);
      work.emplace_back(s, t);
    }
  }
  std::vector<DrawResult> results(work.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::string> errors(work.size());
  const auto worker = [&] {
    for (std::size_t i; (i = next++) < work.size();) {
      try {
        results[i] = residual_one(work[i].first, work[i].second, o);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int nthreads = std::clamp(o.jobs, 1, static_cast<int>(work.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (!e.empty()) throw InvalidArgument(e);

  Outcome out;
  out.grid = results.front().grid;
  out.csv_header = {"draw", "t", "param1", "param2", "param3", "param4", "check", "max_abs", "l2", "tolerance", "pass"};
  json draws = json::array();
  double worst = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& d = results[i];
    json jd;
    jd["spec"] = spec_json(d.spec);
    jd["t"] = d.t;
    jd["grid"] = {{"N", d.grid.N}, {"L", d.grid.L}};
    json checks = json::array();
    const double p[4] = {d.spec.family == Family::SS ? d.spec.alpha : d.spec.family == Family::KM ? d.spec.a : d.spec.c1,
                         d.spec.family == Family::SS ? d.spec.beta : d.spec.c2, d.spec.alpha1, d.spec.alpha2};
    for (std::size_t c = 0; c < d.checks.size(); ++c) {
      const auto& [r, tol] = d.checks[c];
      const bool ok = r.max_abs < tol;
      out.pass = out.pass && ok;
      worst = std::max(worst, r.max_abs / tol);
      json jc = residual_json(r);
      jc["tolerance"] = tol;
      jc["pass"] = ok;
      checks.push_back(jc);
      out.csv_rows.push_back({static_cast<double>(i), d.t, p[0], p[1], p[2], p[3], static_cast<double>(r.equation),
                              r.max_abs, r.l2, tol, ok ? 1.0 : 0.0});
    }
    jd["checks"] = checks;
    draws.push_back(jd);
  }
  out.report["draws"] = draws;
  out.report["worst_ratio_to_tolerance"] = worst;
  out.report["equation_codes"] = json::object();
  for (int e = 0; e <= static_cast<int>(Equation::EvolutionPDE); ++e)
    out.report["equation_codes"][std::to_string(e)] = equation_name(static_cast<Equation>(e));
  out.tolerances = {{"elliptic", base.family == Family::P ? 1e-4 : 1e-6}, {"third_order", 1e-8},
                    {"fourth_order_profile", 1e-6}, {"nonlinear_identity", 1e-8}, {"evolution_pde", 1e-5}};
  return out;
}

Outcome cmd_conserved(const Options& o) {
  const auto s = make_spec(o);
  if (s.family == Family::Stokes) throw InvalidArgument("conserved: unsupported family");
  Outcome out;
  out.grid = pick_grid(o, default_grid(s));
  auto g = make_grid(out.grid.N, out.grid.L);
  const Model m = s.model();
  const auto at = [&](double t) { return sample_breather(s, t, g); };
  struct Item {
    std::string name;
    std::function<FunctionalValue(const ComplexField&)> f;
  };
  std::vector<Item> items = {
      {"M", [&](const ComplexField& u) { return mass_value(m, u); }},
      {"E", [&](const ComplexField& u) { return energy_value(m, u); }},
      {"F", [&](const ComplexField& u) { return second_energy_value(m, u); }},
      {"P", [&](const ComplexField& u) { return momentum_value(m, u); }},
  };
  if (m == Model::SY) items.push_back({"L", [&](const ComplexField& u) { return second_momentum_value(u); }});
  if (s.family == Family::SY2) {
    const auto c = two_soliton_coefficients(s);
    items.push_back({"H", [c](const ComplexField& u) {
                       FunctionalValue v;
                       v.value = v.raw = two_soliton_lyapunov(u, c);
                       return v;
                     }});
    out.report["coefficients"] = {{"m", c.m}, {"n", c.n}, {"p", c.p}, {"l", c.l}};
  } else if (s.family != Family::Soliton) {
    const auto c = lyapunov_coefficients(s);
    items.push_back({"H", [m, c](const ComplexField& u) { return lyapunov_value(m, u, c); }});
    out.report["coefficients"] = {{"m", c.m}, {"n", c.n}};
  }
  out.report["spec"] = spec_json(s);
  out.report["t"] = o.t;
  out.csv_header = {"t", "index", "value", "raw", "tail", "imag"};
  json names = json::array();
  const double t2 = o.t + 0.37;
  const auto u1 = at(o.t), u2 = at(t2);
  double worst_dt = 0.0, worst_im = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto a = items[i].f(u1), b = items[i].f(u2);
    out.report[items[i].name] = a.value;
    out.report["tail_" + items[i].name] = a.tail;
    names.push_back(items[i].name);
    out.csv_rows.push_back({o.t, static_cast<double>(i), a.value, a.raw, a.tail, a.imag});
    worst_dt = std::max(worst_dt, std::abs(a.value - b.value));
    worst_im = std::max(worst_im, std::abs(a.imag) / std::max(1.0, std::abs(a.raw)));
  }
  out.report["order"] = names;
  out.report["time_independence_defect"] = worst_dt;
  out.report["max_relative_imaginary_part"] = worst_im;
  out.tolerances = {{"time_independence", 1e-6}, {"imaginary_part", 1e-12}};
  out.pass = worst_dt < 1e-6 && worst_im < 1e-12;
  return out;
}

Outcome cmd_spectrum(const Options& o) {
  const auto s = make_spec(o);
  require_family(s, {Family::SS, Family::SY, Family::KM, Family::P}, "spectrum");
  Outcome out;
  GridChoice g0{512, s.family == Family::SS ? 25.0 : 20.0};
  out.grid = pick_grid(o, g0);
  if (out.grid.N > kSpectrumMaxN) {
    out.report["N_requested"] = out.grid.N;
    out.grid.N = kSpectrumMaxN;
  }
  auto g = make_grid(out.grid.N, out.grid.L);
  const auto op = build_linearized_operator(s, o.t, g);
  const auto r = eigen_spectrum(op, std::min(o.nev, op.dim()));
  out.report["spec"] = spec_json(s);
  out.report["t"] = o.t;
  out.report["negative"] = r.negative_count;
  out.report["kernel"] = r.near_zero_count;
  out.report["zero_tol"] = r.zero_tol;
  out.report["edge"] = num(r.essential_edge_measured);
  out.report["lowest"] = r.lowest_eigenvalues;
  out.report["probe_symmetry_defect"] = r.probe_defect;
  out.report["entry_symmetry_defect"] = r.entry_defect;
  out.csv_header = {"index", "eigenvalue"};
  for (std::size_t i = 0; i < r.lowest_eigenvalues.size(); ++i)
    out.csv_rows.push_back({static_cast<double>(i), r.lowest_eigenvalues[i]});
  if (s.family == Family::SS || s.family == Family::KM) {
    const double pred = continuous_spectrum_edge(s);
    out.report["edge_predicted"] = pred;
    const bool edge_ok = std::abs(r.essential_edge_measured - pred) <= 0.05 * std::abs(pred);
    out.tolerances["edge_relative"] = 0.05;
    if (s.family == Family::SS) {
      out.tolerances["negative_count"] = 1;
      out.pass = r.negative_count == 1 && edge_ok;
    } else {
      out.pass = r.lowest_eigenvalues.front() < 0 && edge_ok;
    }
  }
  return out;
}

Outcome cmd_wronskian(const Options& o) {
  const auto s = make_spec(o);
  require_family(s, {Family::SS}, "wronskian");
  const auto r = wronskian_roots(s);
  Outcome out;
  out.report["spec"] = spec_json(s);
  out.report["hump"] = hump_classification(s).kind == HumpKind::Single ? "single" : "double";
  out.report["positive_roots_u"] = r.positive_roots_u;
  out.report["kernel_dims"] = r.kernel_dims;
  out.report["condition_values"] = r.condition_values;
  out.report["second_condition_roots"] = r.second_condition_roots;
  out.report["closed_form_roots"] = r.closed_form_roots;
  out.report["max_closed_form_mismatch"] = r.max_closed_form_mismatch;
  out.report["filtered_count"] = r.filtered_count;
  out.csv_header = {"u", "kernel_dim", "condition"};
  for (std::size_t i = 0; i < r.positive_roots_u.size(); ++i)
    out.csv_rows.push_back({r.positive_roots_u[i], static_cast<double>(r.kernel_dims[i]), r.condition_values[i]});
  out.tolerances = {{"closed_form_mismatch", 1e-10}, {"filtered_count", 1}};
  out.pass = r.filtered_count == 1 && r.max_closed_form_mismatch < 1e-10;
  return out;
}

Scheme parse_scheme(const std::string& s) { return s == "strang" ? Scheme::Strang : Scheme::Yoshida4; }

Outcome cmd_evolve(const Options& o) {
  const auto s = make_spec(o);
  Outcome out;
  out.grid = pick_grid(o, default_grid(s));
  auto g = make_grid(out.grid.N, out.grid.L);
  const double T = o.T >= 0 ? o.T : 3.0;
  EvolveOptions eo;
  eo.frames = o.frames > 0 ? o.frames : 30;
  eo.track = s.model();
  if (s.family != Family::Soliton && s.family != Family::SY2) eo.lyapunov = lyapunov_coefficients(s);
  eo.scheme = parse_scheme(o.scheme);
  eo.t_start = o.t;
  const auto u0 = sample_breather(s, o.t, g);
  EvolutionTrace tr;
  if (s.family == Family::SS) {
    tr = evolve_ss(u0, T, o.dt, eo);
  } else if (s.stokes_background()) {
    tr = evolve_nls_stokes(to_stokes_perturbation(u0, o.t), T, o.dt > 0 ? o.dt : 1e-3, eo);
  } else {
    tr = evolve_nls_zero(u0, T, o.dt > 0 ? o.dt : 1e-3, eo);
  }
  out.report["spec"] = spec_json(s);
  out.report["T"] = T;
  out.report["dt_used"] = tr.dt_used;
  out.report["rejections"] = tr.rejections;
  out.report["aborted"] = tr.aborted;
  if (tr.aborted) out.report["message"] = tr.message;
  out.report["drift"] = tr.drift;
  out.csv_header = {"t"};
  for (const auto& [name, series] : tr.functional_series) out.csv_header.push_back(name);
  out.csv_header.push_back("deviation_from_exact");
  double worst_dev = 0.0;
  for (std::size_t f = 0; f < tr.times.size(); ++f) {
    std::vector<double> row = {tr.times[f]};
    for (const auto& [name, series] : tr.functional_series) row.push_back(series[f]);
    const double tt = o.t + tr.times[f];
    const auto exact = sample_breather(s, tt, g);
    const CVec& got = tr.fields[f].values;
    double dev = 0.0;
    for (int j = 0; j < g->N; ++j) {
      const cplx want = s.stokes_background() ? exact[j] * std::exp(-I * tt) - 1.0 : exact[j];
      dev = std::max(dev, std::abs(got[j] - want));
    }
    worst_dev = std::max(worst_dev, dev);
    row.push_back(dev);
    out.csv_rows.push_back(row);
  }
  out.report["max_deviation_from_exact"] = worst_dev;
  // On the Stokes background the flow conserves the in-box sums; tail-corrected values are reported alongside.
  double worst = 0.0;
  for (const auto& [name, d] : tr.drift)
    if (!s.stokes_background() || name.ends_with("_box")) worst = std::max(worst, d);
  out.report["max_drift_checked"] = worst;
  out.tolerances = {{"drift", 1e-5}};
  out.pass = !tr.aborted && worst < 1e-5;
  return out;
}

Outcome cmd_stability(const Options& o) {
  const auto s = make_spec(o);
  require_family(s, {Family::SS}, "stability");
  Outcome out;
  out.grid = pick_grid(o, default_grid(s));
  auto g = make_grid(out.grid.N, out.grid.L);
  const double eps = o.eps >= 0 ? o.eps : 1e-3;
  const double T = o.T >= 0 ? o.T : 20.0;
  const auto r = stability_experiment_ss(s, eps, T, g, o.frames > 0 ? o.frames : 80, o.dt);
  out.report["spec"] = spec_json(s);
  out.report["eps"] = eps;
  out.report["T"] = T;
  out.report["ratio"] = r.ratio;
  out.report["shift_rate"] = r.shift_rate;
  out.report["unconverged_frames"] = r.unconverged;
  out.report["dt_used"] = r.trace.dt_used;
  out.report["drift"] = r.trace.drift;
  out.csv_header = {"t", "x1", "x2", "z_norm", "defect1", "defect2", "iterations", "converged"};
  for (const auto& e : r.fit.entries)
    out.csv_rows.push_back({e.t, e.x1, e.x2, e.z_norm, e.defect1, e.defect2, static_cast<double>(e.iterations),
                            e.converged ? 1.0 : 0.0});
  out.tolerances = {{"ratio_bound", 50.0}};
  out.pass = r.ratio < 50.0 && r.unconverged == 0 && !r.trace.aborted;
  return out;
}

Outcome cmd_instability(const Options& o) {
  const auto s = make_spec(o);
  require_family(s, {Family::KM, Family::P}, "instability");
  Outcome out;
  out.grid = pick_grid(o, instability_grid(s));
  auto g = make_grid(out.grid.N, out.grid.L);
  const double eps = o.eps >= 0 ? o.eps : 1e-4;
  const double T = o.T >= 0 ? o.T : 10.0;
  const double k = std::isnan(o.k) ? 1.0 : o.k;
  const double dt = o.dt > 0 ? o.dt : 5e-4;
  const auto r = instability_experiment(s, eps, T, g, k, dt, o.frames > 0 ? o.frames : 100, parse_scheme(o.scheme));
  out.report["spec"] = spec_json(s);
  out.report["eps"] = eps;
  out.report["T"] = T;
  out.report["k"] = k;
  out.report["dt"] = dt;
  out.report["growth_factor"] = num(r.growth_factor);
  out.report["max_distance"] = r.max_distance;
  out.report["fitted_rate"] = num(r.fitted_rate);
  out.report["predicted_rate"] = std::abs(k) * std::sqrt(std::max(0.0, 2 - k * k));
  out.report["aborted"] = r.aborted;
  out.csv_header = {"t", "distance_h1"};
  for (std::size_t i = 0; i < r.times.size(); ++i) out.csv_rows.push_back({r.times[i], r.distance[i]});
  if (eps > 0) {
    out.tolerances = {{"growth_factor_min", 1e2}};
    out.pass = r.growth_factor >= 1e2 || r.aborted;
  } else {
    out.tolerances = {{"control_distance_max", 1e-5}};
    out.pass = r.max_distance < 1e-5;
  }
  return out;
}

std::pair<double, double> dispersion(double k) {
  const double w2 = k * k * (k * k - 2);  // omega^2
  return {w2 >= 0 ? std::sqrt(w2) : 0.0, w2 < 0 ? std::sqrt(-w2) : 0.0};
}

Outcome cmd_dispersion(const Options& o) {
  Outcome out;
  out.csv_header = {"k", "omega", "growth_rate"};
  for (int i = 0; i <= 300; ++i) {
    const double k = 0.01 * i;
    const auto [w, s] = dispersion(k);
    out.csv_rows.push_back({k, w, s});
  }
  if (!std::isnan(o.k)) {
    const auto [w, s] = dispersion(o.k);
    const double d = o.k * o.k - 2;
    out.report["k"] = o.k;
    out.report["omega"] = w;
    out.report["growth_rate"] = s;
    out.report["omega_squared"] = o.k * o.k * d;
    out.report["band"] = std::abs(d) < 1e-6 ? "edge" : (d < 0 && o.k != 0 ? "unstable" : "stable");
  }
  out.report["band_edge"] = std::numbers::sqrt2;
  out.report["max_growth_rate"] = 1.0;
  out.report["argmax_growth_rate"] = 1.0;
  return out;
}

std::vector<double> parse_times(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--times: cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("--times needs at least one value");
  return out;
}

Outcome cmd_peregrine_limit(const Options& o) {
  Outcome out;
  out.grid = pick_grid(o, default_grid(BreatherSpec::peregrine()));
  auto g = make_grid(out.grid.N, out.grid.L);
  const bool mode = !std::isnan(o.k);
  const auto z0 = mode ? sample(g, [&](double x) { return cplx(std::exp(-x * x / 800) * std::sin(o.k * x)); })
                       : sample(g, [](double x) { return cplx(std::exp(-x * x / 2)); });
  const auto ts = parse_times(o.times);
  const auto rows = peregrine_quadratic_limit(z0, ts);
  const double n2 = std::pow(sobolev_norm(z0, 2), 2);
  out.report["direction"] = mode ? "mode" : "gaussian";
  if (mode) out.report["k"] = o.k;
  out.report["z0_h2_norm_squared"] = n2;
  out.csv_header = {"t", "direct", "limit", "gap", "relative_gap"};
  json entries = json::array();
  bool ok = true;
  for (const auto& e : rows) {
    const double gap = std::abs(e.direct - e.limit);
    out.csv_rows.push_back({e.t, e.direct, e.limit, gap, gap / n2});
    entries.push_back({{"t", e.t}, {"direct", e.direct}, {"limit", e.limit}, {"relative_gap", gap / n2}});
    if (e.t == 50.0 && !(gap / n2 < 1e-3)) ok = false;
    if (mode && !(e.limit < 0)) ok = false;
  }
  out.report["entries"] = entries;
  out.tolerances = {{"relative_gap_at_t50", 1e-3}};
  out.pass = ok;
  return out;
}

std::vector<std::string> join_argv(int argc, char** argv) {
  std::vector<std::string> v;
  for (int i = 1; i < argc; ++i) v.emplace_back(argv[i]);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"breatherlab: breathers of NLS and Sasa-Satsuma, their functionals, spectra and dynamics"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "flat key = value defaults file (also BREATHERLAB_DEFAULTS)")
      ->envname("BREATHERLAB_DEFAULTS");
  Options o;
  app.add_option("--family", o.family, "breather family")
      ->check(CLI::IsMember({"ss", "sy", "km", "p", "sy2", "soliton"}))
      ->capture_default_str();
  app.add_option("--alpha", o.alpha, "SS alpha")->capture_default_str();
  app.add_option("--beta", o.beta, "SS beta")->capture_default_str();
  app.add_option("--a", o.a, "KM parameter a > 1/2")->capture_default_str();
  app.add_option("--c1", o.c1, "SY/SY2 c1")->capture_default_str();
  app.add_option("--c2", o.c2, "SY/SY2 c2")->capture_default_str();
  app.add_option("--alpha1", o.alpha1, "SY2 speed alpha1")->capture_default_str();
  app.add_option("--alpha2", o.alpha2, "SY2 speed alpha2")->capture_default_str();
  app.add_option("--c", o.c, "soliton scaling")->capture_default_str();
  app.add_option("--v", o.v, "soliton velocity")->capture_default_str();
  app.add_option("--t", o.t, "evaluation / start time")->capture_default_str();
  app.add_option("--N", o.N, "grid points (power of two; 0 = default)");
  app.add_option("--L", o.L, "grid half-length, x in [-L, L) (0 = default)");
  app.add_option("--T", o.T, "final time (default per subcommand)");
  app.add_option("--dt", o.dt, "time step (default per subcommand)");
  app.add_option("--eps", o.eps, "perturbation size (default per subcommand)");
  app.add_option("--k", o.k, "wavenumber (dispersion, instability mode, peregrine-limit mode direction)");
  app.add_option("--seed", o.seed, "seed for randomized parameter draws")->capture_default_str();
  app.add_option("--jobs", o.jobs, "worker threads for parameter sweeps")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--draws", o.draws, "randomized parameter draws (residual)")->capture_default_str();
  app.add_option("--frames", o.frames, "output frames (evolve, stability, instability)");
  app.add_option("--nev", o.nev, "number of eigenvalues (spectrum)")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--times", o.times, "comma-separated times (peregrine-limit)")->capture_default_str();
  app.add_option("--scheme", o.scheme, "NLS time stepper")
      ->check(CLI::IsMember({"strang", "yoshida4"}))
      ->capture_default_str();
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  app.add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();
  app.add_flag("--x0only", o.x0only, "profile: only the value at x = 0");

  using Handler = Outcome (*)(const Options&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"profile", "sample a breather profile", cmd_profile},
      {"residual", "elliptic and ODE residuals", cmd_residual},
      {"conserved", "conserved quantities and H", cmd_conserved},
      {"spectrum", "spectrum of the linearized operator", cmd_spectrum},
      {"wronskian", "Wronskian root criterion (ss)", cmd_wronskian},
      {"evolve", "evolve the exact breather and track conservation", cmd_evolve},
      {"stability", "orbital stability experiment (ss)", cmd_stability},
      {"instability", "instability experiment (km, p)", cmd_instability},
      {"dispersion", "dispersion relation of the Stokes wave", cmd_dispersion},
      {"peregrine-limit", "Peregrine quadratic form against its large-time limit", cmd_peregrine_limit},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, fn] : commands) subs.push_back(app.add_subcommand(name, help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  std::size_t which = 0;
  while (!subs[which]->parsed()) ++which;
  const std::string name = std::get<0>(commands[which]);

  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = std::get<2>(commands[which])(o);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  out.report["subcommand"] = name;
  out.report["pass"] = out.pass;
  if (!out.tolerances.empty()) out.report["tolerances"] = out.tolerances;

  json manifest;
  manifest["subcommand"] = name;
  manifest["arguments"] = join_argv(argc, argv);
  manifest["parameters"] = {{"family", o.family}, {"alpha", o.alpha}, {"beta", o.beta}, {"a", o.a},
                            {"c1", o.c1},         {"c2", o.c2},       {"alpha1", o.alpha1}, {"alpha2", o.alpha2},
                            {"c", o.c},           {"v", o.v},         {"t", o.t},           {"N", o.N},
                            {"L", o.L},           {"T", o.T},         {"dt", o.dt},         {"eps", o.eps},
                            {"k", num(o.k)},      {"seed", o.seed},   {"jobs", o.jobs},     {"draws", o.draws},
                            {"frames", o.frames}, {"nev", o.nev},     {"times", o.times},   {"scheme", o.scheme},
                            {"format", o.format}, {"x0only", o.x0only}};
  manifest["grid"] = {{"N", out.grid.N}, {"L", out.grid.L}};
  manifest["tolerances"] = out.tolerances;
  manifest["version"] = kVersion;
  manifest["wall_time_s"] = wall;
  manifest["pass"] = out.pass;
  json files = json::array();

  try {
    fs::create_directories(o.out);
    const fs::path dir(o.out);
    if (o.format != "json" && !out.csv_header.empty()) {
      write_atomic(dir / (name + ".csv"), csv_text(out));
      files.push_back(name + ".csv");
    }
    if (o.format != "csv") {
      write_atomic(dir / (name + ".json"), out.report.dump(2) + "\n");
      files.push_back(name + ".json");
    }
    manifest["outputs"] = files;
    write_atomic(dir / (name + ".manifest.json"), manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  std::cout << out.report.dump(2) << '\n';
  return out.pass ? 0 : 2;
}
