#include "flochern/harness.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "flochern/experiments.hpp"

namespace flochern {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const ExperimentConfig& c, const std::string& columns, char sep = ',')
      : os_(path), sep_(sep) {
    if (!os_) throw std::runtime_error("cannot write " + path.string());
    os_ << csv_header_line(c) << '\n' << columns << '\n';
  }
  template <typename... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((os_ << (first ? "" : std::string(1, sep_)) << cell(values), first = false), ...);
    os_ << '\n';
  }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::ofstream os_;
  char sep_;
};

void write_haldane(const ExperimentConfig& c, const HaldaneQaResult& r, const std::filesystem::path& dir,
                   RunManifest& m) {
  {
    CsvWriter w(dir / "eres.csv", c, "L,tau_qa,t,dt,E_res,energy,E_gs");
    for (const auto& p : r.points) w.row(p.l, p.tau_qa, p.tau_qa, p.dt, p.e_res, p.energy, p.ground_energy);
    m.outputs.push_back("eres.csv");
  }
  {
    CsvWriter w(dir / "bulk_edge.csv", c, "tau_qa,eps_bulk,eps_edge,stderr_bulk,stderr_edge,fit_residual,points");
    for (const auto& f : r.fits) {
      w.row(f.tau_qa, f.split.eps_bulk, f.split.eps_edge, f.split.stderr_bulk, f.split.stderr_edge,
            f.split.fit_residual, f.split.points);
    }
    m.outputs.push_back("bulk_edge.csv");
  }
  {
    CsvWriter w(dir / "kz.csv", c, "exponent,stderr,prefactor,points,eps_edge_lz,lz_intervals");
    if (r.kz) {
      w.row(r.kz->exponent, r.kz->stderr, r.kz->prefactor, r.kz->used, r.lz.value, r.lz.intervals);
      for (const auto& warning : r.kz->warnings) m.warnings.push_back(warning);
    } else {
      m.warnings.push_back("kz exponent not fitted: " + r.kz_error);
    }
    m.outputs.push_back("kz.csv");
  }
}

void write_floquet(const ExperimentConfig& c, const FloquetQaResult& r, const std::filesystem::path& dir,
                   RunManifest& m) {
  {
    CsvWriter w(dir / "bands.tsv", c, "k\talpha\tepsilon\tn\tedge_weight_left\tedge_weight_right", '\t');
    for (const auto& row : r.table) w.row(row.k, row.alpha, row.quasi_energy, row.occupation, row.edge_left, row.edge_right);
    m.outputs.push_back("bands.tsv");
  }
  if (!r.j_av.empty()) {
    CsvWriter w(dir / "currents.csv", c, "bond_index,J_av,J_min,J_max,J_strobe,J_av_coarse");
    for (std::size_t b = 0; b < r.j_av.size(); ++b) {
      w.row(b, r.j_av[b], r.j_min[b], r.j_max[b], r.j_strobe[b], r.j_av_coarse[b]);
    }
    m.outputs.push_back("currents.csv");
    std::string cols = "t";
    for (std::size_t b = 0; b < r.j_av.size(); ++b) cols += ",J_" + std::to_string(b);
    std::ofstream os(dir / "current_series.csv");
    os << csv_header_line(c) << '\n' << cols << '\n';
    for (std::size_t i = 0; i < r.sample_t.size(); ++i) {
      os << num(r.sample_t[i]);
      for (double v : r.currents[i]) os << ',' << num(v);
      os << '\n';
    }
    m.outputs.push_back("current_series.csv");
  }
  {
    const EdgeCounts lo = r.edge_counts(2.0 * kPi / (3.0 * c.a), kPi / c.a);
    const EdgeCounts hi = r.edge_counts(kPi / c.a, 4.0 * kPi / (3.0 * c.a));
    CsvWriter w(dir / "summary.csv", c, "quantity,value");
    w.row("metallicity", r.metallicity);
    w.row("partial_fraction", r.partial_fraction);
    w.row("fgs_count_mismatches", r.fgs_count_mismatches);
    w.row("edge_right_occupied_kplus_kf", lo.right_occupied);
    w.row("edge_left_occupied_kplus_kf", lo.left_occupied);
    w.row("edge_right_occupied_kf_kminus", hi.right_occupied);
    w.row("edge_left_occupied_kf_kminus", hi.left_occupied);
    w.row("max_unitarity_error", r.integrity.max_unitarity_error);
    w.row("max_occupation_sum_error", r.integrity.max_occupation_sum_error);
    w.row("max_gram_deviation", r.integrity.max_gram_deviation);
    m.outputs.push_back("summary.csv");
  }
  if (r.fgs_count_mismatches > 0) {
    m.warnings.push_back("Floquet ground state filling differs from Nx/2 at " +
                         std::to_string(r.fgs_count_mismatches) + " momenta");
  }
}

void write_chern(const ExperimentConfig& c, const ChernDynamicsResult& r, const std::filesystem::path& dir,
                 RunManifest& m) {
  for (const auto& run : r.runs) {
    const std::string suffix = "_L" + std::to_string(run.l) + ".csv";
    {
      CsvWriter w(dir / ("marker_series" + suffix), c, "t,lambda,C_bulk");
      for (std::size_t i = 0; i < run.t.size(); ++i) w.row(run.t[i], run.lambda[i], run.c_bulk[i]);
      m.outputs.push_back("marker_series" + suffix);
    }
    {
      CsvWriter w(dir / ("marker_field" + suffix), c, "cell_x,cell_y,C");
      for (Eigen::Index x = 0; x < run.final_field.rows(); ++x) {
        for (Eigen::Index y = 0; y < run.final_field.cols(); ++y) {
          w.row(static_cast<int>(x), static_cast<int>(y), run.final_field(x, y));
        }
      }
      m.outputs.push_back("marker_field" + suffix);
    }
  }
  CsvWriter w(dir / "chern_summary.csv", c, "L,C_bulk_av,max_abs_trace,max_imag");
  for (const auto& run : r.runs) w.row(run.l, run.c_bulk_av, run.max_abs_trace, run.max_imag);
  m.outputs.push_back("chern_summary.csv");
  if (r.fit) {
    CsvWriter f(dir / "extrapolation.csv", c, "c0,c1,c2");
    f.row(r.fit->c0, r.fit->c1, r.fit->c2);
    m.outputs.push_back("extrapolation.csv");
  }
}

}  // namespace

std::string csv_header_line(const ExperimentConfig& c) {
  std::string line = "# hash=" + config_hash(c);
  std::istringstream is(serialize_config(c));
  std::string kv;
  while (std::getline(is, kv)) {
    const auto eq = kv.find(" = ");
    line += " " + kv.substr(0, eq) + "=" + kv.substr(eq + 3);
  }
  return line;
}

RunManifest run_experiment(ExperimentConfig config, const RunOptions& options) {
  if (options.dt_divisor > 0) config.steps_per_period = options.dt_divisor;
  if (!options.out_dir.empty()) config.output_dir = options.out_dir.string();
  const auto findings = validate_config(config);
  if (has_errors(findings)) {
    std::vector<std::string> messages;
    for (const auto& f : findings) {
      if (f.severity == Finding::Severity::Error) messages.push_back(f.message);
    }
    throw ConfigError(messages);
  }

  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  RunManifest m;
  m.config_hash = config_hash(config);
  m.experiment = to_string(config.experiment);
  m.out_dir = dir;
  m.config_path = dir / "config.cfg";
  m.threads = options.threads;
  m.checkpoint_every = options.checkpoint_every;
  m.status = "running";
  for (const auto& f : findings) m.warnings.push_back(f.message);
  {
    std::ofstream os(m.config_path);
    os << serialize_config(config);
  }
  write_manifest(dir / "manifest.txt", m);

  const auto start = std::chrono::steady_clock::now();
  ThreadPool pool(static_cast<std::size_t>(std::max(1, options.threads)));
  RunContext ctx;
  ctx.pool = &pool;
  ctx.progress = options.progress;
  ctx.config_hash = m.config_hash;
  ctx.resume = options.resume;
  ctx.checkpoint_every = options.checkpoint_every;
  if (options.checkpoint_every > 0 || options.resume) ctx.checkpoint_stem = dir / "checkpoint";

  try {
    switch (config.experiment) {
      case ExperimentKind::HaldaneQa:
        write_haldane(config, run_haldane_qa(config, ctx), dir, m);
        break;
      case ExperimentKind::FloquetQaUniform:
      case ExperimentKind::FloquetQaFocused:
      case ExperimentKind::Subresonant:
        write_floquet(config, run_floquet_qa(config, ctx), dir, m);
        break;
      case ExperimentKind::ChernDynamics:
        write_chern(config, run_chern_dynamics(config, ctx), dir, m);
        break;
    }
  } catch (...) {
    m.status = "failed";
    m.events = ctx.log.events;
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(dir / "manifest.txt", m);
    throw;
  }
  m.events = ctx.log.events;
  m.status = "complete";
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(dir / "manifest.txt", m);
  return m;
}

RunManifest resume_experiment(const std::filesystem::path& manifest_path, RunOptions options) {
  const RunManifest old = read_manifest(manifest_path);
  ExperimentConfig config = load_config(old.config_path.string());
  if (config_hash(config) != old.config_hash) throw ConfigError({"config file does not match the manifest hash"});
  options.resume = true;
  options.dt_divisor = 0;  // already baked into the stored configuration
  options.out_dir = old.out_dir;
  if (options.checkpoint_every <= 0) options.checkpoint_every = old.checkpoint_every;
  return run_experiment(config, options);
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write manifest " + path.string());
  os << "config_hash = " << m.config_hash << '\n'
     << "experiment = " << m.experiment << '\n'
     << "status = " << m.status << '\n'
     << "out_dir = " << m.out_dir.string() << '\n'
     << "config_path = " << m.config_path.string() << '\n'
     << "threads = " << m.threads << '\n'
     << "checkpoint_every = " << m.checkpoint_every << '\n'
     << "wall_seconds = " << num(m.wall_seconds) << '\n';
  for (const auto& o : m.outputs) os << "output = " << o << '\n';
  for (const auto& e : m.events) os << "event = " << e << '\n';
  for (const auto& w : m.warnings) os << "warning = " << w << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read manifest " + path.string());
  RunManifest m;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    if (key == "config_hash") m.config_hash = value;
    else if (key == "experiment") m.experiment = value;
    else if (key == "status") m.status = value;
    else if (key == "out_dir") m.out_dir = value;
    else if (key == "config_path") m.config_path = value;
    else if (key == "threads") m.threads = std::stoi(value);
    else if (key == "checkpoint_every") m.checkpoint_every = std::stoi(value);
    else if (key == "wall_seconds") m.wall_seconds = std::stod(value);
    else if (key == "output") m.outputs.push_back(value);
    else if (key == "event") m.events.push_back(value);
    else if (key == "warning") m.warnings.push_back(value);
  }
  return m;
}

}  // namespace flochern
