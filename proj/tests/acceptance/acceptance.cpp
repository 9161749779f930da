// Acceptance suite: one PASS/FAIL line per criterion, preceded by the
// measured values each verdict rests on.
//
// Usage: acceptance [--only 1,3,6] [--full-size]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "flochern/chern_marker.hpp"
#include "flochern/experiments.hpp"

using namespace flochern;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void detail(int id, const std::string& line) { std::cout << "  [" << id << "] " << line << std::endl; }

/// Shared state: every expensive run happens once and feeds several criteria.
class Suite {
 public:
  explicit Suite(bool full_size) : full_size_(full_size), pool_(std::max(1u, std::thread::hardware_concurrency())) {}

  Outcome kz_scaling();
  Outcome edge_saturation();
  Outcome critical_amplitude();
  Outcome edge_currents();
  Outcome micromotion();
  Outcome marker_calibration();
  Outcome dynamical_marker();
  Outcome subresonant();
  Outcome integrity();
  Outcome selective_population();

 private:
  RunContext context() {
    RunContext ctx;
    ctx.pool = &pool_;
    ctx.progress = [](const std::string& what) { std::cerr << "    .. " << what << std::endl; };
    return ctx;
  }
  void collect(const RunContext& ctx, const std::string& what) {
    for (const auto& e : ctx.log.events) events_.push_back(what + ": " + e);
  }

  const HaldaneQaResult& haldane();
  const FloquetQaResult& floquet(const std::string& key);
  const ChernDynamicsResult& chern();
  const ChernRun& chern_full();

  bool full_size_;
  ThreadPool pool_;
  std::optional<HaldaneQaResult> haldane_;
  std::map<std::string, FloquetQaResult> floquet_;
  std::optional<ChernDynamicsResult> chern_;
  std::optional<ChernRun> chern_full_;
  std::vector<std::string> events_;
  double marker_trace_max_ = 0.0;
};

CMatrix flake_ground_state(const FlakeGeometry& g, const HaldaneParams& p) {
  return ground_state(build_flake_h(g, 0.0, p).to_dense(), static_cast<int>(g.num_sites() / 2)).sector.orbitals;
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const HaldaneQaResult& Suite::haldane() {
  if (!haldane_) {
    const auto start = std::chrono::steady_clock::now();
    std::cerr << "running haldane_qa preset" << std::endl;
    RunContext ctx = context();
    haldane_ = run_haldane_qa(preset(ExperimentKind::HaldaneQa), ctx);
    collect(ctx, "haldane_qa");
    detail(1, fmt("haldane_qa wall time %.0f s", elapsed_since(start)));
  }
  return *haldane_;
}

ExperimentConfig floquet_config(const std::string& key) {
  if (key == "uniform-") return preset(ExperimentKind::FloquetQaUniform);
  if (key == "uniform+") {
    ExperimentConfig c = preset(ExperimentKind::FloquetQaUniform);
    c.polarization_phase = kPi / 2;
    return c;
  }
  if (key == "focused") return preset(ExperimentKind::FloquetQaFocused);
  if (key == "sub4") return preset(ExperimentKind::Subresonant);
  ExperimentConfig c = preset(ExperimentKind::Subresonant);  // "sub7"
  c.omega = 7.0;
  return c;
}

const FloquetQaResult& Suite::floquet(const std::string& key) {
  auto it = floquet_.find(key);
  if (it == floquet_.end()) {
    const auto start = std::chrono::steady_clock::now();
    std::cerr << "running floquet run " << key << std::endl;
    RunContext ctx = context();
    it = floquet_.emplace(key, run_floquet_qa(floquet_config(key), ctx)).first;
    collect(ctx, "floquet " + key);
    std::cout << "  [-] floquet run " << key << fmt(" wall time %.0f s", elapsed_since(start)) << std::endl;
  }
  return it->second;
}

const ChernDynamicsResult& Suite::chern() {
  if (!chern_) {
    const auto start = std::chrono::steady_clock::now();
    std::cerr << "running chern_dynamics preset" << std::endl;
    RunContext ctx = context();
    chern_ = run_chern_dynamics(preset(ExperimentKind::ChernDynamics), ctx);
    collect(ctx, "chern_dynamics");
    for (const auto& run : chern_->runs) marker_trace_max_ = std::max(marker_trace_max_, run.max_abs_trace);
    detail(7, fmt("chern_dynamics wall time %.0f s", elapsed_since(start)));
  }
  return *chern_;
}

const ChernRun& Suite::chern_full() {
  if (!chern_full_) {
    ExperimentConfig c = preset(ExperimentKind::ChernDynamics);
    c.n_qa = 300;
    c.n_f = 220;
    std::cerr << "running full-size chern run L=48" << std::endl;
    RunContext ctx = context();
    chern_full_ = run_chern_point(c, 48, ctx);
    collect(ctx, "chern_dynamics L=48");
    marker_trace_max_ = std::max(marker_trace_max_, chern_full_->max_abs_trace);
  }
  return *chern_full_;
}

// ---------------------------------------------------------------------------

Outcome Suite::kz_scaling() {
  const HaldaneQaResult& r = haldane();
  for (const auto& f : r.fits) {
    detail(1, fmt("tau_QA=%g eps_bulk=%.5g +- %.2g", f.tau_qa, f.split.eps_bulk, f.split.stderr_bulk));
  }
  if (!r.kz) return {false, "power-law fit failed: " + r.kz_error};
  double lo = 1e300;
  double hi = 0.0;
  for (const auto& f : r.fits) {
    lo = std::min(lo, f.tau_qa);
    hi = std::max(hi, f.tau_qa);
  }
  const double decades = std::log10(hi / lo);
  const double x = r.kz->exponent;
  const bool pass = decades >= 1.5 - 1e-9 && std::abs(x + 1.0) <= 0.15;
  return {pass, fmt("exponent %.3f +- %.3f over %.2f decades (target -1 +- 0.15, >= 1.5 decades)", x, r.kz->stderr,
                    decades)};
}

Outcome Suite::edge_saturation() {
  const HaldaneQaResult& r = haldane();
  auto fits = r.fits;
  std::sort(fits.begin(), fits.end(), [](const auto& a, const auto& b) { return a.tau_qa < b.tau_qa; });
  bool monotone = true;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    detail(2, fmt("tau_QA=%g eps_edge=%.5g +- %.2g", fits[i].tau_qa, fits[i].split.eps_edge, fits[i].split.stderr_edge));
    if (i > 0) {
      const double prev = fits[i - 1].split.eps_edge;
      const double cur = fits[i].split.eps_edge;
      if (cur < prev - 0.02 * std::abs(prev)) {
        monotone = false;
        detail(2, fmt("  decrease %.5g -> %.5g exceeds the 2%% slack", prev, cur));
      }
    }
  }
  const double last = fits.empty() ? 0.0 : fits.back().split.eps_edge;
  const double share = last / r.lz.value;
  detail(2, fmt("eps_edge_LZ=%.5g (%d intervals)", r.lz.value, r.lz.intervals));
  const bool pass = monotone && share >= 0.80;
  return {pass, fmt("monotone=%s, eps_edge(largest tau)/eps_edge_LZ = %.3f (target >= 0.80)", monotone ? "yes" : "no",
                    share)};
}

double dirac_gap(double lambda, double delta) {
  DriveParams drive;
  drive.omega = 7.0;
  const Vec2 k = dirac_point(1);
  const BlochDrivenSource src(k, -1.0, drive, Schedule::frozen(lambda, delta));
  const FloquetSpectrum s = floquet_spectrum(one_period_propagator(src, k.y, 0.0, drive.period(), 400), drive.omega);
  return floquet_gap(s.quasi_energies(0), s.quasi_energies(1), drive.omega);
}

Outcome Suite::critical_amplitude() {
  const double delta = 0.1;
  const double analytic = critical_lambda(delta, 7.0, -1.0);
  // Coarse scan, then golden-section refinement of the bracketing minimum.
  double best = 0.0;
  double best_gap = 1e300;
  for (int i = 1; i <= 40; ++i) {
    const double l = 0.03 * i;
    const double g = dirac_gap(l, delta);
    if (g < best_gap) {
      best_gap = g;
      best = l;
    }
  }
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = best - 0.03;
  double b = best + 0.03;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = dirac_gap(c, delta);
  double fd = dirac_gap(d, delta);
  while (b - a > 1e-4) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = dirac_gap(c, delta);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = dirac_gap(d, delta);
    }
  }
  const double scanned = 0.5 * (a + b);
  const double rel = std::abs(scanned - analytic) / analytic;
  detail(3, fmt("critical_lambda(0.1, 7) = %.5f; scanned gap minimum at lambda = %.5f (gap %.2e)", analytic, scanned,
                dirac_gap(scanned, delta)));
  const bool pass = analytic >= 0.54 && analytic <= 0.60 && rel < 0.05;
  return {pass, fmt("lambda_cr = %.4f in [0.54, 0.60], scan agrees within %.2f%% (target 5%%)", analytic, 100 * rel)};
}

Outcome Suite::edge_currents() {
  const FloquetQaResult& u = floquet("uniform-");
  const auto& j = u.j_av;
  const std::size_t last = j.size() - 1;
  const double left = std::abs(j.front());
  const double right = std::abs(j[last]);
  double bulk = 0.0;
  for (std::size_t i = j.size() / 4; i <= 3 * j.size() / 4; ++i) bulk = std::max(bulk, std::abs(j[i]));
  const double edge_bulk = 0.5 * (left + right) / std::max(bulk, 1e-300);
  const double lr = std::abs(left - right) / std::max(left, right);
  detail(4, fmt("uniform: J_av left %.5g right %.5g, max |J_av| over the central half %.3g", j.front(), j[last], bulk));

  const FloquetQaResult& f = floquet("focused");
  const double f_left = std::abs(f.j_av.front());
  const double f_right = std::abs(f.j_av.back());
  detail(4, fmt("focused (x_c = L_x): J_av left %.5g right %.5g", f.j_av.front(), f.j_av.back()));
  const double ratio = f_left / f_right;
  const bool pass = edge_bulk > 10.0 && lr < 0.05 && ratio < 0.10;
  return {pass, fmt("edge/bulk %.3g (> 10), left/right mismatch %.2f%% (< 5%%), focused dark/lit %.3f (< 0.10)",
                    edge_bulk, 100 * lr, ratio)};
}

Outcome Suite::micromotion() {
  const FloquetQaResult& u = floquet("uniform-");
  bool pass = true;
  std::string summary;
  for (std::size_t b : {std::size_t{0}, u.j_av.size() - 1}) {
    const double p2p = u.j_max[b] - u.j_min[b];
    const double avg = std::abs(u.j_av[b]);
    const double strobe_gap = std::abs(u.j_strobe[b] - u.j_av[b]);
    const double quad_err = std::abs(u.j_av[b] - u.j_av_coarse[b]);
    detail(5, fmt("bond %zu: J_min %.4g J_max %.4g J_av %.5g J_strobe %.5g J_av(half samples) %.5g", b, u.j_min[b],
                  u.j_max[b], u.j_av[b], u.j_strobe[b], u.j_av_coarse[b]));
    pass = pass && p2p > avg && strobe_gap > 10 * quad_err + 1e-9;
    if (summary.empty()) {
      summary = fmt("peak-to-peak %.3g vs |J_av| %.3g; |J_strobe - J_av| %.3g vs quadrature error %.2g", p2p, avg,
                    strobe_gap, quad_err);
    }
  }
  return {pass, summary};
}

Outcome Suite::marker_calibration() {
  const FlakeGeometry g = build_flake({1.0, 24, 24});
  const CellRegion centre = central_region(g);
  const ChernMarkerField topo = chern_marker(flake_ground_state(g, {-1.0, 0.2, kPi / 2, 0.0}), g);
  const ChernMarkerField triv = chern_marker(flake_ground_state(g, {-1.0, 0.1, kPi / 2, 4 * kSqrt3 * 0.1}), g);
  const double c_topo = topo.average(centre);
  const double c_triv = triv.average(centre);
  detail(6, fmt("topological (t2 = 0.2, Delta = 0): C_bulk %.4f, marker sum %.2e", c_topo, topo.total));
  detail(6, fmt("trivial (Delta/t2 = 4 sqrt3): C_bulk %.4f, marker sum %.2e", c_triv, triv.total));
  double trace = std::max(std::abs(topo.total), std::abs(triv.total));
  if (chern_) {
    detail(6, fmt("largest marker sum over every dynamical sample: %.2e", marker_trace_max_));
    trace = std::max(trace, marker_trace_max_);
  }
  const bool pass = std::abs(c_topo - 1.0) <= 0.05 && std::abs(c_triv) <= 0.05 && trace < 1e-6;
  return {pass, fmt("C_topo %.4f (1 +- 0.05), C_triv %.4f (0 +- 0.05), max |sum C| %.1e (< 1e-6)", c_topo, c_triv,
                    trace)};
}

Outcome Suite::dynamical_marker() {
  const ExperimentConfig c = preset(ExperimentKind::ChernDynamics);
  const ChernDynamicsResult& r = chern();
  // The Chern number of the effective Haldane model has the sign of
  // t2_eff sin(phi_H_eff); orient the marker so that the expected value is +1
  // for either polarization.
  const EffectiveFloquetParams eff = effective_floquet_params(c.lambda_final, c.omega, c.t1, c.polarization_phase);
  const double orient = eff.t2_eff * std::sin(eff.phi_h_eff) >= 0 ? 1.0 : -1.0;
  const double lambda_cr = critical_lambda(c.delta_ab, c.omega, c.t1);
  detail(7, fmt("effective t2 %.4f, flux phase %.4f: orientation %+g; lambda_cr = %.4f", eff.t2_eff, eff.phi_h_eff,
                orient, lambda_cr));

  std::vector<std::pair<double, double>> pts;
  for (const auto& run : r.runs) {
    pts.emplace_back(run.l, orient * run.c_bulk_av);
    detail(7, fmt("L=%d: raw C_bulk_av %.4f, max |sum C| %.1e", run.l, run.c_bulk_av, run.max_abs_trace));
  }
  const ChernRun& big = r.runs.back();
  double before = 0.0;
  int n_before = 0;
  double after = 0.0;
  int n_after = 0;
  const double ramp_end = c.n_qa * kTwoPi / c.omega;
  for (std::size_t i = 0; i < big.t.size(); ++i) {
    if (big.t[i] > 0.0 && big.lambda[i] <= 0.8 * lambda_cr) {
      before += orient * big.c_bulk[i];
      ++n_before;
    }
    if (big.t[i] >= ramp_end - 1e-9) {
      after += orient * big.c_bulk[i];
      ++n_after;
    }
  }
  before /= std::max(1, n_before);
  after /= std::max(1, n_after);
  for (double frac : {0.5, 0.8, 1.0, 1.2, 1.5}) {
    const double target = std::min(frac * lambda_cr, c.lambda_final);
    std::size_t best = 0;
    for (std::size_t i = 0; i < big.t.size(); ++i) {
      if (std::abs(big.lambda[i] - target) < std::abs(big.lambda[best] - target)) best = i;
    }
    detail(7, fmt("L=%d: lambda %.3f -> oriented C_bulk %.4f", big.l, big.lambda[best], orient * big.c_bulk[best]));
  }
  const bool rising = before < 0.5 && after > 0.5 && after > before;
  const double c_av = orient * big.c_bulk_av;
  const InverseLFit fit = fit_inverse_l(pts);
  detail(7, fmt("extrapolation c0 + c1/L + c2/L^2: c0 %.4f c1 %.4f c2 %.4f", fit.c0, fit.c1, fit.c2));
  // Reference: the same extrapolation applied to the equilibrium ground state
  // of the effective Haldane flake, which has C = 1 exactly.
  std::vector<std::pair<double, double>> eq;
  for (const auto& run : r.runs) {
    const FlakeGeometry g = build_flake({c.a, run.l, run.l});
    const HaldaneParams hp{eff.t1_eff, eff.t2_eff, eff.phi_h_eff, c.delta_ab};
    const double v = chern_marker_region(flake_ground_state(g, hp), g, central_region(g)).average;
    eq.emplace_back(run.l, orient * v);
    detail(7, fmt("L=%d: equilibrium effective-Haldane marker (oriented) %.4f", run.l, orient * v));
  }
  detail(7, fmt("equilibrium reference extrapolates to %.4f with the same fit", fit_inverse_l(eq).c0));
  bool pass = c_av >= 0.80 && c_av <= 1.00 && rising && std::abs(fit.c0 - 1.0) <= 0.05;
  std::string summary = fmt("L=24 oriented C_bulk_av %.4f in [0.80, 1.00], mean below 0.8 lambda_cr %.3f -> hold %.3f, "
                            "extrapolated %.4f (1 +- 0.05)",
                            c_av, before, after, fit.c0);
  if (full_size_) {
    const ChernRun& full = chern_full();
    const double v = orient * full.c_bulk_av;
    detail(7, fmt("L=48, tau_QA = 300 tau: raw C_bulk_av %.4f", full.c_bulk_av));
    pass = pass && std::abs(v - 0.96) <= 0.03;
    summary += fmt("; L=48 oriented %.4f (0.96 +- 0.03)", v);
  }
  return {pass, summary};
}

Outcome Suite::subresonant() {
  const FloquetQaResult& low = floquet("sub4");
  const FloquetQaResult& high = floquet("sub7");
  detail(8, fmt("omega=4: M %.4g, partial share %.3f, Floquet ground-state count mismatches %d", low.metallicity,
                low.partial_fraction, low.fgs_count_mismatches));
  detail(8, fmt("omega=7: M %.4g, partial share %.3f", high.metallicity, high.partial_fraction));
  const double ratio = low.metallicity / std::max(high.metallicity, 1e-300);
  const bool pass = ratio > 5.0 && low.partial_fraction >= 0.10;
  return {pass, fmt("M(4)/M(7) = %.3g (> 5), partial-occupation share %.3f (>= 0.10)", ratio, low.partial_fraction)};
}

// --- integrity ----------------------------------------------------------------

struct PresetModel {
  std::string name;
  std::optional<RibbonGeometry> ribbon;
  std::optional<FlakeGeometry> flake;
  std::unique_ptr<TightBindingModel> model;
  double t0 = 0.0;
  double window = 0.0;
  int steps = 0;
};

PresetModel small_model(const ExperimentConfig& c) {
  PresetModel p;
  p.name = to_string(c.experiment);
  if (c.experiment == ExperimentKind::HaldaneQa) {
    p.ribbon = build_ribbon({c.a, 12, 12});
    const double tau = c.tau_qa_values.front();
    p.model = std::make_unique<HaldaneModel>(*p.ribbon, HaldaneSchedule{c.t1, c.t2, c.phi_h, c.start_ratio,
                                                                        c.end_ratio, tau});
    p.t0 = 0.25 * tau;
    p.window = 0.5 * tau;
    p.steps = 20;
    return p;
  }
  DriveParams drive;
  if (c.experiment == ExperimentKind::ChernDynamics) {
    p.flake = build_flake({c.a, 8, 8});
    drive = drive_params(c, nullptr, &*p.flake);
    p.model = std::make_unique<DrivenModel>(*p.flake, c.t1, drive, drive_schedule(c, drive));
  } else {
    p.ribbon = build_ribbon({c.a, 12, 12});
    drive = drive_params(c, &*p.ribbon);
    p.model = std::make_unique<DrivenModel>(*p.ribbon, c.t1, drive, drive_schedule(c, drive));
  }
  p.t0 = std::floor(0.5 * c.n_qa) * drive.period();
  p.window = drive.period();
  p.steps = c.omega > 6.0 ? 40 : 60;
  return p;
}

CMatrix assembled(const SectorAssembler& a, const TightBindingModel& m, double t) {
  std::vector<cplx> amps(m.terms().size());
  std::vector<double> onsite(static_cast<std::size_t>(m.dimension()));
  m.evaluate(t, amps, onsite);
  BandedMatrix h = a.make_matrix();
  a.assemble(amps, onsite, h);
  return h.to_dense();
}

struct SectorChecks {
  double hermiticity = 0.0;
  double order = 1e300;
  double current_rel = 0.0;
};

SectorChecks check_sector(const PresetModel& p, double k, bool with_current) {
  SectorChecks out;
  const TightBindingModel& m = *p.model;
  const SectorAssembler asm0(m, k);
  const CMatrix h = assembled(asm0, m, p.t0);
  out.hermiticity = (h - h.adjoint()).cwiseAbs().maxCoeff();

  const ModelSource src(m, k);
  const SlaterSector start = ground_state(h, m.dimension() / 2).sector;
  std::vector<CMatrix> finals;
  for (int mult : {1, 2, 4}) {
    SlaterSector s = start;
    rk4_evolve(s, p.t0, p.t0 + p.window, p.window / (p.steps * mult), src);
    finals.push_back(s.orbitals);
  }
  const double e1 = (finals[0] - finals[1]).norm();
  const double e2 = (finals[1] - finals[2]).norm();
  out.order = std::log2(e1 / e2);

  if (with_current) {
    std::vector<cplx> amps(m.terms().size());
    std::vector<double> onsite(static_cast<std::size_t>(m.dimension()));
    m.evaluate(p.t0, amps, onsite);
    BandedMatrix j = asm0.make_matrix();
    asm0.assemble_derivative(amps, j);
    const double dk = 1e-5;
    const CMatrix fd = (assembled(SectorAssembler(m, k, dk), m, p.t0) - assembled(SectorAssembler(m, k, -dk), m, p.t0)) /
                       (2 * dk);
    const CMatrix jd = j.to_dense();
    out.current_rel = (jd - fd).cwiseAbs().maxCoeff() / jd.cwiseAbs().maxCoeff();
  }
  return out;
}

Outcome Suite::integrity() {
  bool pass = true;
  std::ostringstream summary;
  for (const ExperimentConfig& c : presets()) {
    const PresetModel p = small_model(c);
    SectorChecks worst;
    worst.order = 1e300;
    std::vector<double> momenta = p.ribbon ? std::vector<double>{0.3, kTwoPi / 3, 2.5} : std::vector<double>{0.0};
    for (double k : momenta) {
      const SectorChecks s = check_sector(p, k, p.ribbon.has_value());
      worst.hermiticity = std::max(worst.hermiticity, s.hermiticity);
      worst.order = std::min(worst.order, s.order);
      worst.current_rel = std::max(worst.current_rel, s.current_rel);
    }
    const bool ok = worst.hermiticity < 1e-12 && worst.order >= 3.7 && worst.current_rel < 1e-6;
    detail(9, fmt("%s: |H - H^dag| %.1e, RK4 order %.2f, current operator vs finite difference %s", p.name.c_str(),
                  worst.hermiticity, worst.order,
                  p.ribbon ? fmt("%.1e", worst.current_rel).c_str() : "n/a (open flake)"));
    pass = pass && ok;
  }

  // Integrity statistics of the full preset runs.
  const auto report = [&](const std::string& name, const IntegrityStats& s, bool floquet_run) {
    detail(9, fmt("%s run: Gram %.1e, unitarity %.1e, occupation sum %.1e, Floquet-frame Hermiticity %.1e",
                  name.c_str(), s.max_gram_deviation, s.max_unitarity_error, s.max_occupation_sum_error,
                  s.max_hermiticity_error));
    const bool ok = s.max_gram_deviation < kGramTolerance &&
                    (!floquet_run || (s.max_unitarity_error < 1e-8 && s.max_occupation_sum_error < 1e-8 &&
                                      s.max_hermiticity_error < 1e-12));
    pass = pass && ok;
  };
  if (haldane_) report("haldane_qa", haldane_->integrity, false);
  for (const auto& [key, r] : floquet_) report("floquet " + key, r.integrity, true);
  if (chern_) {
    for (const auto& run : chern_->runs) report("chern L=" + std::to_string(run.l), run.integrity, false);
  }
  detail(9, fmt("integrator events across all runs: %zu", events_.size()));
  for (const auto& e : events_) detail(9, "  " + e);
  pass = pass && events_.empty();
  summary << "Hermiticity, RK4 order, current operator on every preset; unitarity, norm and occupation sum rule "
             "on every executed run; "
          << events_.size() << " integrator events";
  return {pass, summary.str()};
}

Outcome Suite::selective_population() {
  const double k_plus = kTwoPi / 3;
  const double k_f = kPi;
  const double k_minus = 2 * kTwoPi / 3;
  bool pass = true;
  std::string summary;
  for (const std::string key : {"uniform-", "uniform+"}) {
    const FloquetQaResult& r = floquet(key);
    const EdgeCounts lo = r.edge_counts(k_plus, k_f);
    const EdgeCounts hi = r.edge_counts(k_f, k_minus);
    for (const auto& [name, e] : {std::pair{"(K+, K_f)", lo}, std::pair{"(K_f, K-)", hi}}) {
      detail(10, fmt("%s window %s: right occupied %d/%d (excited %d), left occupied %d/%d (excited %d)", key.c_str(),
                     name, e.right_occupied, e.right_total, e.right_excited, e.left_occupied, e.left_total,
                     e.left_excited));
    }
    // Reversing the polarization is a time reversal k -> -k: the window
    // holding the population-inverted right-edge branch moves from
    // (K+, K_f) to (K_f, K-).
    const bool minus = key == "uniform-";
    const EdgeCounts& own = minus ? lo : hi;
    const EdgeCounts& other = minus ? hi : lo;
    const bool ratio_ok = own.right_occupied > 0 && own.right_occupied >= 5 * own.left_occupied;
    const bool moved = own.right_excited > 0 && own.right_excited >= 5 * other.right_excited;
    pass = pass && ratio_ok && moved;
    summary += fmt("%s%s R:L %d:%d, excited own/other %d/%d", summary.empty() ? "" : "; ", key.c_str(),
                   own.right_occupied, own.left_occupied, own.right_excited, other.right_excited);
  }
  return {pass, summary};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::vector<int> only;
  bool full_size = false;
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',')->check(CLI::Range(1, 10));
  app.add_flag("--full-size", full_size, "Also run the L = 48, tau_QA = 300 tau marker calibration (about 2 h)");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected = only.empty() ? std::set<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}
                                              : std::set<int>(only.begin(), only.end());

  Suite suite(full_size);
  using Fn = Outcome (Suite::*)();
  // Criterion 9 audits the runs made for the others, so it is evaluated last.
  const std::vector<std::pair<int, Fn>> order = {
      {3, &Suite::critical_amplitude}, {1, &Suite::kz_scaling},      {2, &Suite::edge_saturation},
      {4, &Suite::edge_currents},      {5, &Suite::micromotion},     {10, &Suite::selective_population},
      {8, &Suite::subresonant},        {7, &Suite::dynamical_marker}, {6, &Suite::marker_calibration},
      {9, &Suite::integrity}};
  std::map<int, Outcome> results;
  for (const auto& [id, fn] : order) {
    if (!selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    try {
      results[id] = (suite.*fn)();
    } catch (const std::exception& e) {
      results[id] = {false, std::string("exception: ") + e.what()};
    }
    detail(id, fmt("criterion evaluated in %.0f s", elapsed_since(start)));
  }

  std::cout << "\n";
  int failed = 0;
  for (const auto& [id, r] : results) {
    std::cout << "criterion " << id << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.summary << "\n";
    failed += r.pass ? 0 : 1;
  }
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
