#include "flochern/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "flochern/checkpoint.hpp"

namespace flochern {

namespace {

/// Re-orthonormalises drifting sectors and rejects non-finite amplitudes.
void check_state(SlaterState& state, double t, RunContext& ctx, IntegrityStats& stats) {
  for (auto& sector : state) {
    if (!sector.orbitals.allFinite()) {
      throw NumericalError("non-finite amplitudes at t = " + std::to_string(t) + " (k = " +
                           std::to_string(sector.k) + "); reduce the time step");
    }
    const double dev = gram_deviation(sector.orbitals);
    stats.max_gram_deviation = std::max(stats.max_gram_deviation, dev);
    if (dev > kGramTolerance) {
      reorthonormalize(sector.orbitals);
      ++ctx.log.reorthonormalizations;
      ctx.log.record("re-orthonormalised sector k=" + std::to_string(sector.k) + " at t=" + std::to_string(t) +
                     " (deviation " + std::to_string(dev) + ")");
    }
  }
}

std::filesystem::path checkpoint_file(const RunContext& ctx, const std::string& tag) {
  auto p = ctx.checkpoint_stem;
  p += "." + tag + ".ckpt";
  return p;
}

bool wants_checkpoint(const RunContext& ctx) { return !ctx.checkpoint_stem.empty() && ctx.checkpoint_every > 0; }

std::optional<Checkpoint> try_resume(const RunContext& ctx, const std::string& tag) {
  if (!ctx.resume || ctx.checkpoint_stem.empty()) return std::nullopt;
  const auto path = checkpoint_file(ctx, tag);
  if (!std::filesystem::exists(path)) return std::nullopt;
  Checkpoint cp = load_checkpoint(path);
  if (cp.config_hash != ctx.config_hash) {
    throw std::runtime_error("checkpoint " + path.string() + " belongs to a different configuration");
  }
  return cp;
}

std::vector<double> integrity_series(const IntegrityStats& s) {
  return {s.max_gram_deviation, s.max_unitarity_error, s.max_occupation_sum_error, s.max_hermiticity_error};
}

IntegrityStats integrity_from_series(const std::vector<double>& v) {
  IntegrityStats s;
  if (v.size() == 4) s = {v[0], v[1], v[2], v[3]};
  return s;
}

std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
  std::vector<double> out;
  for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::vector<std::vector<double>> unflatten(const std::vector<double>& flat, std::size_t width) {
  std::vector<std::vector<double>> out;
  if (width == 0) return out;
  for (std::size_t i = 0; i + width <= flat.size(); i += width) {
    out.emplace_back(flat.begin() + static_cast<long>(i), flat.begin() + static_cast<long>(i + width));
  }
  return out;
}

}  // namespace

DriveParams drive_params(const ExperimentConfig& c, const RibbonGeometry* ribbon, const FlakeGeometry* flake) {
  DriveParams d;
  d.omega = c.omega;
  d.polarization_phase = c.polarization_phase;
  d.lambda_final = c.lambda_final;
  d.n_qa = static_cast<int>(std::lround(c.n_qa));
  d.n_f = static_cast<int>(std::lround(c.n_f));
  if (c.envelope == "gaussian") {
    double width = 0.0;
    const auto& sites = ribbon ? ribbon->sites : flake->sites;
    for (const auto& s : sites) width = std::max(width, s.position.x);
    d.envelope = Envelope::gaussian(c.x_center * width, c.sigma * width);
  }
  return d;
}

Schedule drive_schedule(const ExperimentConfig& c, const DriveParams& drive) {
  const auto mode = c.delta_mode == "switch_off" ? Schedule::DeltaMode::SwitchOff : Schedule::DeltaMode::Constant;
  return Schedule::from_drive(drive, c.delta_ab, mode);
}

SlaterState sector_ground_states(const TightBindingModel& model, const std::vector<double>& momenta, double t,
                                 ThreadPool* pool) {
  std::vector<cplx> amps(model.terms().size());
  std::vector<double> onsite(static_cast<std::size_t>(model.dimension()));
  model.evaluate(t, amps, onsite);
  SlaterState state(momenta.size());
  const auto body = [&](std::size_t s) {
    SectorAssembler assembler(model, momenta[s]);
    BandedMatrix h = assembler.make_matrix();
    assembler.assemble(amps, onsite, h);
    GroundState gs = ground_state(h.to_dense(), model.dimension() / 2, model.x_positions());
    gs.sector.k = momenta[s];
    state[s] = std::move(gs.sector);
  };
  if (pool != nullptr) {
    pool->parallel_for(momenta.size(), body);
  } else {
    for (std::size_t s = 0; s < momenta.size(); ++s) body(s);
  }
  return state;
}

// ---------------------------------------------------------------------------

HaldaneQaPoint run_haldane_point(const ExperimentConfig& c, int l, double tau_qa, RunContext& ctx,
                                 IntegrityStats* integrity) {
  const RibbonGeometry g = build_ribbon({c.a, l, l});
  HaldaneSchedule sched{c.t1, c.t2, c.phi_h, c.start_ratio, c.end_ratio, tau_qa};
  const HaldaneModel model(g, sched);
  const long steps = std::max(1L, static_cast<long>(std::ceil(tau_qa / c.haldane_dt - 1e-9)));
  const double dt = tau_qa / static_cast<double>(steps);

  SlaterState state = sector_ground_states(model, g.momenta, 0.0, ctx.pool);
  SectorEngine engine(model, g.momenta, ctx.pool);
  IntegrityStats local;
  const long check_every = 400;
  for (long s = 0; s < steps; ++s) {
    engine.step(state, s * dt, dt);
    if ((s + 1) % check_every == 0 || s + 1 == steps) check_state(state, (s + 1) * dt, ctx, local);
  }
  const ResidualEnergyRecord rec = residual_energy(state, tau_qa, model);
  if (integrity != nullptr) {
    integrity->max_gram_deviation = std::max(integrity->max_gram_deviation, local.max_gram_deviation);
  }
  return {l, tau_qa, dt, rec.e_res, rec.energy, rec.ground_energy};
}

HaldaneQaResult run_haldane_qa(const ExperimentConfig& c, RunContext& ctx) {
  HaldaneQaResult r;
  std::vector<int> sizes = c.l_values;
  if (sizes.empty()) sizes.push_back(c.nx);
  for (double tau : c.tau_qa_values) {
    for (int l : sizes) {
      ctx.report("haldane_qa L=" + std::to_string(l) + " tau_qa=" + std::to_string(tau));
      r.points.push_back(run_haldane_point(c, l, tau, ctx, &r.integrity));
    }
  }
  std::vector<std::pair<double, double>> kz_points;
  for (double tau : c.tau_qa_values) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : r.points) {
      if (p.tau_qa == tau) pts.emplace_back(p.l, p.e_res);
    }
    std::set<double> distinct;
    for (const auto& p : pts) distinct.insert(p.first);
    if (distinct.size() < 2) continue;
    HaldaneQaFit fit{tau, fit_bulk_edge(pts)};
    kz_points.emplace_back(tau, fit.split.eps_bulk);
    r.fits.push_back(fit);
  }
  try {
    r.kz = kz_exponent(kz_points);
  } catch (const std::exception& e) {
    r.kz_error = e.what();
  }
  const RibbonGeometry lz_geometry = build_ribbon({c.a, *std::max_element(sizes.begin(), sizes.end()), 1});
  HaldaneParams final_params{c.t1, c.t2, c.phi_h, c.end_ratio * c.t2};
  try {
    r.lz = edge_lz_integral(final_params, lz_geometry);
  } catch (const std::domain_error& e) {
    ctx.log.record(std::string("edge LZ integral unavailable: ") + e.what());
  }
  return r;
}

// ---------------------------------------------------------------------------

EdgeCounts FloquetQaResult::edge_counts(double k_lo, double k_hi) const {
  EdgeCounts e;
  constexpr double eps = 1e-12;
  for (const auto& row : table) {
    if (!(row.k > k_lo + eps && row.k < k_hi - eps)) continue;
    const bool occupied = row.occupation > 0.5;
    if (row.edge_right > kEdgeThreshold) {
      ++e.right_total;
      if (occupied) ++e.right_occupied;
      if (occupied && row.quasi_energy > 0.0) ++e.right_excited;
    } else if (row.edge_left > kEdgeThreshold) {
      ++e.left_total;
      if (occupied) ++e.left_occupied;
      if (occupied && row.quasi_energy > 0.0) ++e.left_excited;
    }
  }
  return e;
}

namespace {

void floquet_analysis(const ExperimentConfig& c, const RibbonGeometry& g, const DriveParams& drive,
                      const Schedule& schedule, const SlaterState& state, FloquetQaResult& r, ThreadPool* pool) {
  const DrivenModel frozen(g, c.t1, drive, schedule.frozen_at(r.tau_qa));
  const DrivenModel static_limit(g, c.t1, drive, Schedule::frozen(0.0, schedule.at(r.tau_qa).delta_ab));
  std::vector<cplx> amps(static_limit.terms().size());
  std::vector<double> onsite(static_cast<std::size_t>(static_limit.dimension()));
  static_limit.evaluate(0.0, amps, onsite);

  const std::size_t ns = g.momenta.size();
  r.spectra.assign(ns, {});
  r.occupations.assign(ns, {});
  std::vector<double> unitarity(ns, 0.0);
  std::vector<double> sum_error(ns, 0.0);
  std::vector<double> herm(ns, 0.0);
  std::vector<int> mismatch(ns, 0);
  const auto body = [&](std::size_t s) {
    const double k = g.momenta[s];
    ModelSource source(frozen, k);
    BandedMatrix probe = source.make_matrix();
    source.assemble(r.tau_qa + 0.25 * r.period, probe);
    herm[s] = probe.hermiticity_error() / std::max(probe.max_abs(), 1e-300);
    const Propagator u = one_period_propagator(source, k, r.tau_qa, r.period, r.steps_per_period);
    unitarity[s] = unitarity_error(u.u);
    SectorAssembler sa(static_limit, k);
    BandedMatrix h0 = sa.make_matrix();
    sa.assemble(amps, onsite, h0);
    const CMatrix tie = h0.to_dense();
    r.spectra[s] = floquet_spectrum(u, c.omega, &tie);
    r.occupations[s] = occupations(state[s], r.spectra[s]);
    sum_error[s] = std::abs(r.occupations[s].sum() - state[s].occupied());
    mismatch[s] = floquet_ground_state(r.spectra[s], g.nx() / 2).regime_warning ? 1 : 0;
  };
  if (pool != nullptr) {
    pool->parallel_for(ns, body);
  } else {
    for (std::size_t s = 0; s < ns; ++s) body(s);
  }
  r.table.clear();
  int partial = 0;
  int total = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    r.integrity.max_unitarity_error = std::max(r.integrity.max_unitarity_error, unitarity[s]);
    r.integrity.max_occupation_sum_error = std::max(r.integrity.max_occupation_sum_error, sum_error[s]);
    r.integrity.max_hermiticity_error = std::max(r.integrity.max_hermiticity_error, herm[s]);
    r.fgs_count_mismatches += mismatch[s];
    const auto& sp = r.spectra[s];
    for (Eigen::Index a = 0; a < sp.quasi_energies.size(); ++a) {
      const EdgeWeight w = edge_weight(sp.modes.col(a), kEdgeDepth);
      const double n = r.occupations[s](a);
      r.table.push_back({sp.k, static_cast<int>(a), sp.quasi_energies(a), n, w.left, w.right});
      if (n > 0.1 && n < 0.9) ++partial;
      ++total;
    }
  }
  r.metallicity = metallicity(r.occupations);
  r.partial_fraction = total > 0 ? static_cast<double>(partial) / total : 0.0;
}

}  // namespace

FloquetQaResult run_floquet_qa(const ExperimentConfig& c, RunContext& ctx) {
  const RibbonGeometry g = build_ribbon({c.a, c.nx, c.ny});
  const DriveParams drive = drive_params(c, &g);
  const Schedule schedule = drive_schedule(c, drive);
  const DrivenModel model(g, c.t1, drive, schedule);

  FloquetQaResult r;
  r.nx = c.nx;
  r.ny = c.ny;
  r.omega = c.omega;
  r.period = drive.period();
  r.tau_qa = drive.tau_qa();
  r.steps_per_period = c.effective_steps_per_period();
  r.momenta = g.momenta;

  const long spp = r.steps_per_period;
  const double dt = r.period / static_cast<double>(spp);
  const long ramp_end = drive.n_qa * spp;
  const long total = (drive.n_qa + drive.n_f) * spp;
  const long stride = spp / c.samples_per_period;
  const std::size_t bonds = static_cast<std::size_t>(c.nx - 1);

  SlaterState state;
  long step = 0;
  bool analysed = false;
  std::vector<double> saved_occupations;
  IntegrityStats saved_integrity;
  if (auto cp = try_resume(ctx, "strip")) {
    state = std::move(cp->state);
    step = cp->step;
    r.sample_t = cp->series["sample_t"];
    r.currents = unflatten(cp->series["currents"], bonds);
    saved_occupations = cp->series["occupations"];
    saved_integrity = integrity_from_series(cp->series["integrity"]);
    r.integrity = saved_integrity;
    ctx.report("resumed at step " + std::to_string(step));
  } else {
    state = sector_ground_states(model, g.momenta, 0.0, ctx.pool);
  }
  SectorEngine engine(model, g.momenta, ctx.pool);

  const auto analyse = [&]() {
    ctx.report("floquet analysis at t = tau_QA");
    floquet_analysis(c, g, drive, schedule, state, r, ctx.pool);
    analysed = true;
  };
  if (step > ramp_end && !saved_occupations.empty()) {
    // Spectra are a deterministic function of the configuration; occupations
    // at tau_QA come from the checkpoint.
    SlaterState dummy = state;
    floquet_analysis(c, g, drive, schedule, dummy, r, ctx.pool);
    std::size_t pos = 0;
    for (auto& row : r.occupations) {
      for (Eigen::Index a = 0; a < row.size(); ++a) row(a) = saved_occupations[pos++];
    }
    for (auto& row : r.table) {
      const auto s = static_cast<std::size_t>(&row - r.table.data()) / static_cast<std::size_t>(c.nx);
      row.occupation = r.occupations[s](row.alpha);
    }
    int partial = 0;
    for (const auto& row : r.table) partial += (row.occupation > 0.1 && row.occupation < 0.9) ? 1 : 0;
    r.metallicity = metallicity(r.occupations);
    r.partial_fraction = static_cast<double>(partial) / static_cast<double>(r.table.size());
    // The re-analysis above ran on the resumed state; keep the diagnostics
    // of the original trajectory instead.
    r.integrity = saved_integrity;
    analysed = true;
  }

  const auto sample = [&](long s) {
    const double t = s * dt;
    r.sample_t.push_back(t);
    r.currents.push_back(measure_currents(state, t, engine));
  };
  const auto save = [&](long s) {
    Checkpoint cp;
    cp.config_hash = ctx.config_hash;
    cp.stage = s <= ramp_end ? "ramp" : "hold";
    cp.t = s * dt;
    cp.step = s;
    cp.state = state;
    cp.series["sample_t"] = r.sample_t;
    cp.series["currents"] = flatten(r.currents);
    cp.series["integrity"] = integrity_series(r.integrity);
    if (analysed) {
      std::vector<double> occ;
      for (const auto& row : r.occupations) occ.insert(occ.end(), row.data(), row.data() + row.size());
      cp.series["occupations"] = occ;
    }
    save_checkpoint(checkpoint_file(ctx, "strip"), cp);
  };

  if (step == ramp_end && !analysed) {
    analyse();
    if (drive.n_f > 0 && r.sample_t.empty()) sample(step);
  }
  while (step < total) {
    engine.step(state, step * dt, dt);
    ++step;
    if (step % spp == 0) {
      check_state(state, step * dt, ctx, r.integrity);
      if ((step / spp) % 10 == 0) ctx.report("period " + std::to_string(step / spp));
    }
    if (step == ramp_end) {
      analyse();
      if (drive.n_f > 0) sample(step);
    } else if (step > ramp_end && (step - ramp_end) % stride == 0) {
      sample(step);
    }
    if (wants_checkpoint(ctx) && step % (spp * ctx.checkpoint_every) == 0 && step < total) save(step);
  }
  if (!analysed) analyse();

  if (r.sample_t.size() >= 3) {
    std::vector<double> coarse_t;
    std::vector<double> strobe_t;
    std::vector<std::size_t> coarse_idx;
    std::vector<std::size_t> strobe_idx;
    for (std::size_t i = 0; i < r.sample_t.size(); ++i) {
      if (i % 2 == 0) {
        coarse_t.push_back(r.sample_t[i]);
        coarse_idx.push_back(i);
      }
      const long s = std::lround(r.sample_t[i] / dt);
      if ((s - ramp_end) % spp == 0) {
        strobe_t.push_back(r.sample_t[i]);
        strobe_idx.push_back(i);
      }
    }
    for (std::size_t b = 0; b < bonds; ++b) {
      std::vector<double> v(r.sample_t.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = r.currents[i][b];
      r.j_av.push_back(window_average(r.sample_t, v));
      r.j_min.push_back(*std::min_element(v.begin(), v.end()));
      r.j_max.push_back(*std::max_element(v.begin(), v.end()));
      std::vector<double> cv;
      for (auto i : coarse_idx) cv.push_back(v[i]);
      r.j_av_coarse.push_back(window_average(coarse_t, cv));
      std::vector<double> sv;
      for (auto i : strobe_idx) sv.push_back(v[i]);
      r.j_strobe.push_back(sv.size() >= 2 ? window_average(strobe_t, sv) : (sv.empty() ? 0.0 : sv.front()));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

ChernRun run_chern_point(const ExperimentConfig& c, int l, RunContext& ctx) {
  const FlakeGeometry g = build_flake({c.a, l, l});
  const DriveParams drive = drive_params(c, nullptr, &g);
  const Schedule schedule = drive_schedule(c, drive);
  const DrivenModel model(g, c.t1, drive, schedule);
  const CellRegion region = central_region(g);
  const std::vector<double> momenta{0.0};

  const long spp = c.effective_steps_per_period();
  const double dt = drive.period() / static_cast<double>(spp);
  const long ramp_end = drive.n_qa * spp;
  const long total = (drive.n_qa + drive.n_f) * spp;
  const long hold_stride = spp / c.marker_samples_per_period;
  const long trace_stride = spp * c.trace_check_every;
  const std::string tag = "flake" + std::to_string(l);

  ChernRun run;
  run.l = l;
  SlaterState state;
  long step = 0;
  if (auto cp = try_resume(ctx, tag)) {
    state = std::move(cp->state);
    step = cp->step;
    run.t = cp->series["t"];
    run.lambda = cp->series["lambda"];
    run.c_bulk = cp->series["c_bulk"];
    run.trace_t = cp->series["trace_t"];
    run.trace = cp->series["trace"];
    const auto& imag = cp->series["max_imag"];
    run.max_imag = imag.empty() ? 0.0 : imag.front();
    run.integrity = integrity_from_series(cp->series["integrity"]);
    for (double v : run.trace) run.max_abs_trace = std::max(run.max_abs_trace, std::abs(v));
    ctx.report("resumed L=" + std::to_string(l) + " at step " + std::to_string(step));
  } else {
    state = sector_ground_states(model, momenta, 0.0);
  }
  SectorEngine engine(model, momenta, ctx.pool);

  const auto sample = [&](long s) {
    const double t = s * dt;
    const RegionMarker m = chern_marker_region(state.front().orbitals, g, region);
    run.t.push_back(t);
    run.lambda.push_back(schedule.at(t).lambda);
    run.c_bulk.push_back(m.average);
    run.max_imag = std::max(run.max_imag, m.max_imag);
  };
  const auto trace_check = [&](long s) {
    const ChernMarkerField f = chern_marker(state.front().orbitals, g);
    run.trace_t.push_back(s * dt);
    run.trace.push_back(f.total);
    run.max_abs_trace = std::max(run.max_abs_trace, std::abs(f.total));
    run.max_imag = std::max(run.max_imag, f.max_imag);
    return f;
  };
  const auto save = [&](long s) {
    Checkpoint cp;
    cp.config_hash = ctx.config_hash;
    cp.stage = s <= ramp_end ? "ramp" : "hold";
    cp.t = s * dt;
    cp.step = s;
    cp.state = state;
    cp.series["t"] = run.t;
    cp.series["lambda"] = run.lambda;
    cp.series["c_bulk"] = run.c_bulk;
    cp.series["trace_t"] = run.trace_t;
    cp.series["trace"] = run.trace;
    cp.series["max_imag"] = {run.max_imag};
    cp.series["integrity"] = integrity_series(run.integrity);
    save_checkpoint(checkpoint_file(ctx, tag), cp);
  };

  if (step == 0) {
    sample(0);
    trace_check(0);
  }
  while (step < total) {
    engine.step(state, step * dt, dt);
    ++step;
    if (step % spp == 0) {
      check_state(state, step * dt, ctx, run.integrity);
      if ((step / spp) % 10 == 0) ctx.report("L=" + std::to_string(l) + " period " + std::to_string(step / spp));
    }
    const bool in_hold = step >= ramp_end;
    if ((!in_hold && step % spp == 0) || (in_hold && (step - ramp_end) % hold_stride == 0)) sample(step);
    if (step % trace_stride == 0 && step != total) trace_check(step);
    if (wants_checkpoint(ctx) && step % (spp * ctx.checkpoint_every) == 0 && step < total) save(step);
  }
  run.final_field = trace_check(total).values;

  std::vector<double> ht;
  std::vector<double> hv;
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    if (run.t[i] >= ramp_end * dt - 1e-9) {
      ht.push_back(run.t[i]);
      hv.push_back(run.c_bulk[i]);
    }
  }
  run.c_bulk_av = ht.size() >= 2 ? window_average(ht, hv) : (hv.empty() ? 0.0 : hv.back());
  return run;
}

ChernDynamicsResult run_chern_dynamics(const ExperimentConfig& c, RunContext& ctx) {
  ChernDynamicsResult r;
  std::vector<int> sizes = c.l_values;
  if (sizes.empty()) sizes.push_back(c.nx);
  for (int l : sizes) {
    ctx.report("chern_dynamics L=" + std::to_string(l));
    r.runs.push_back(run_chern_point(c, l, ctx));
  }
  if (r.runs.size() >= 3) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& run : r.runs) pts.emplace_back(run.l, run.c_bulk_av);
    r.fit = fit_inverse_l(pts);
  }
  return r;
}

}  // namespace flochern
