#include "flochern/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <openssl/sha.h>

namespace flochern {

namespace {

constexpr const char* kNames[] = {"haldane_qa", "floquet_qa_uniform", "floquet_qa_focused", "chern_dynamics",
                                  "subresonant"};

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw std::invalid_argument("empty list item");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

struct Field {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

Field real(const char* key, double ExperimentConfig::*m) {
  return {key, [m](const ExperimentConfig& c) { return fmt(c.*m); },
          [m](ExperimentConfig& c, const std::string& v) { c.*m = parse_double(v); }};
}

Field integer(const char* key, int ExperimentConfig::*m) {
  return {key, [m](const ExperimentConfig& c) { return std::to_string(c.*m); },
          [m](ExperimentConfig& c, const std::string& v) { c.*m = parse_int(v); }};
}

Field text(const char* key, std::string ExperimentConfig::*m) {
  return {key, [m](const ExperimentConfig& c) { return c.*m; },
          [m](ExperimentConfig& c, const std::string& v) { c.*m = v; }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"experiment", [](const ExperimentConfig& c) { return to_string(c.experiment); },
       [](ExperimentConfig& c, const std::string& v) { c.experiment = experiment_from_string(v); }},
      text("name", &ExperimentConfig::name),
      real("a", &ExperimentConfig::a),
      integer("nx", &ExperimentConfig::nx),
      integer("ny", &ExperimentConfig::ny),
      {"l_values",
       [](const ExperimentConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.l_values.size(); ++i) s += (i ? "," : "") + std::to_string(c.l_values[i]);
         return s;
       },
       [](ExperimentConfig& c, const std::string& v) {
         c.l_values.clear();
         if (v.empty()) return;
         for (const auto& item : split_list(v)) c.l_values.push_back(parse_int(item));
       }},
      real("t1", &ExperimentConfig::t1),
      real("omega", &ExperimentConfig::omega),
      real("polarization_phase", &ExperimentConfig::polarization_phase),
      real("lambda_final", &ExperimentConfig::lambda_final),
      real("n_qa", &ExperimentConfig::n_qa),
      real("n_f", &ExperimentConfig::n_f),
      text("envelope", &ExperimentConfig::envelope),
      real("x_center", &ExperimentConfig::x_center),
      real("sigma", &ExperimentConfig::sigma),
      real("delta_ab", &ExperimentConfig::delta_ab),
      text("delta_mode", &ExperimentConfig::delta_mode),
      real("t2", &ExperimentConfig::t2),
      real("phi_h", &ExperimentConfig::phi_h),
      real("start_ratio", &ExperimentConfig::start_ratio),
      real("end_ratio", &ExperimentConfig::end_ratio),
      {"tau_qa_values",
       [](const ExperimentConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.tau_qa_values.size(); ++i) s += (i ? "," : "") + fmt(c.tau_qa_values[i]);
         return s;
       },
       [](ExperimentConfig& c, const std::string& v) {
         c.tau_qa_values.clear();
         if (v.empty()) return;
         for (const auto& item : split_list(v)) c.tau_qa_values.push_back(parse_double(item));
       }},
      real("haldane_dt", &ExperimentConfig::haldane_dt),
      integer("steps_per_period", &ExperimentConfig::steps_per_period),
      integer("samples_per_period", &ExperimentConfig::samples_per_period),
      integer("marker_samples_per_period", &ExperimentConfig::marker_samples_per_period),
      integer("trace_check_every", &ExperimentConfig::trace_check_every),
      text("output_dir", &ExperimentConfig::output_dir),
  };
  return table;
}

bool is_integer_valued(double v) { return std::abs(v - std::round(v)) < 1e-9; }

bool is_driven(ExperimentKind k) { return k != ExperimentKind::HaldaneQa; }

}  // namespace

std::string to_string(ExperimentKind kind) { return kNames[static_cast<int>(kind)]; }

ExperimentKind experiment_from_string(const std::string& name) {
  for (int i = 0; i < 5; ++i) {
    if (name == kNames[i]) return static_cast<ExperimentKind>(i);
  }
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

int ExperimentConfig::effective_steps_per_period() const {
  if (steps_per_period > 0) return steps_per_period;
  return omega > 6.0 * std::abs(t1) ? 400 : 800;
}

namespace {

std::string join_messages(const std::vector<std::string>& messages) {
  std::string s = "invalid configuration";
  for (const auto& m : messages) s += "\n  " + m;
  return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> messages)
    : std::runtime_error(join_messages(messages)), messages_(std::move(messages)) {}

std::string serialize_config(const ExperimentConfig& c) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(c) + "\n";
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::vector<std::string> errors;
  std::vector<std::string> seen;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    auto trim = [](std::string s) {
      const auto l = s.find_first_not_of(" \t\r");
      const auto r = s.find_last_not_of(" \t\r");
      return l == std::string::npos ? std::string{} : s.substr(l, r - l + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field* field = nullptr;
    for (const auto& f : fields()) {
      if (key == f.key) field = &f;
    }
    if (field == nullptr) {
      errors.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      continue;
    }
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      continue;
    }
    seen.push_back(key);
    try {
      field->set(c, value);
    } catch (const std::exception& e) {
      errors.push_back("line " + std::to_string(lineno) + ": " + key + ": " + e.what());
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string config_hash(const ExperimentConfig& c) {
  const std::string body = serialize_config(c);
  std::string blob = "blob " + std::to_string(body.size());
  blob.push_back('\0');
  blob += body;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char d : digest) {
    out.push_back(hex[d >> 4]);
    out.push_back(hex[d & 15]);
  }
  return out;
}

std::vector<Finding> validate_config(const ExperimentConfig& c) {
  std::vector<Finding> f;
  auto error = [&](std::string m) { f.push_back({Finding::Severity::Error, std::move(m)}); };
  auto warn = [&](std::string m) { f.push_back({Finding::Severity::Warning, std::move(m)}); };
  const bool flake = c.experiment == ExperimentKind::ChernDynamics;
  const int min_ny = flake ? 4 : 1;

  if (!(c.a > 0.0)) error("lattice constant must be positive");
  std::vector<std::pair<int, int>> sizes;
  if (c.l_values.empty()) {
    sizes.emplace_back(c.nx, c.ny);
  } else {
    for (int l : c.l_values) sizes.emplace_back(l, l);
  }
  bool odd = false, narrow = false, short_y = false;
  for (const auto& [nx, ny] : sizes) {
    odd = odd || nx % 2 != 0;
    narrow = narrow || nx < 4;
    short_y = short_y || ny < min_ny;
  }
  if (odd) error("Nx must be even");
  if (narrow) error("Nx must be at least 4");
  if (short_y) error("Ny must be at least " + std::to_string(min_ny));
  if (c.t1 == 0.0) error("t1 must be nonzero");

  if (is_driven(c.experiment)) {
    if (!(c.omega > 0.0)) error("omega must be positive");
    if (c.n_qa < 0.0 || !is_integer_valued(c.n_qa)) error("ramp must be integer periods");
    if (c.n_f < 0.0 || !is_integer_valued(c.n_f)) error("hold must be integer periods");
    if (c.envelope == "gaussian") {
      if (!(c.sigma > 0.0)) error("gaussian envelope needs sigma > 0");
    } else if (c.envelope != "uniform") {
      error("unknown envelope '" + c.envelope + "'");
    }
    if (c.experiment == ExperimentKind::FloquetQaFocused && c.envelope != "gaussian") {
      error("floquet_qa_focused needs a gaussian envelope");
    }
    if (c.delta_mode != "constant" && c.delta_mode != "switch_off") error("unknown delta_mode '" + c.delta_mode + "'");
    const int steps = c.effective_steps_per_period();
    if (steps <= 0) error("steps_per_period must be positive");
    if (c.samples_per_period <= 0 || (steps > 0 && steps % c.samples_per_period != 0)) {
      error("samples_per_period must divide steps_per_period");
    }
    if (flake && (c.marker_samples_per_period <= 0 || (steps > 0 && steps % c.marker_samples_per_period != 0))) {
      error("marker_samples_per_period must divide steps_per_period");
    }
    if (flake && c.trace_check_every <= 0) error("trace_check_every must be positive");
    if (c.omega > 0.0 && c.omega <= 6.0 * std::abs(c.t1)) {
      warn("sub-bandwidth regime: adiabatic Floquet picture breaks");
    }
  } else {
    if (c.t2 == 0.0) error("t2 must be nonzero");
    if (c.tau_qa_values.empty()) error("tau_qa_values must list at least one ramp time");
    for (double tau : c.tau_qa_values) {
      if (!(tau > 0.0)) {
        error("tau_qa_values must be positive");
        break;
      }
    }
    if (!(c.haldane_dt > 0.0)) error("haldane_dt must be positive");
  }
  if (c.output_dir.empty()) error("output_dir must be set");
  return f;
}

bool has_errors(const std::vector<Finding>& findings) {
  for (const auto& x : findings) {
    if (x.severity == Finding::Severity::Error) return true;
  }
  return false;
}

ExperimentConfig preset(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.name = to_string(kind);
  c.output_dir = "out/" + c.name;
  switch (kind) {
    case ExperimentKind::HaldaneQa:
      c.l_values = {18, 24, 30, 36};
      c.tau_qa_values = {1.5, 3, 6, 12, 24, 48};
      break;
    case ExperimentKind::FloquetQaUniform:
      c.n_f = 20;
      break;
    case ExperimentKind::FloquetQaFocused:
      c.n_f = 20;
      c.envelope = "gaussian";
      break;
    case ExperimentKind::ChernDynamics:
      c.l_values = {12, 18, 24};
      c.n_qa = 150;
      c.n_f = 110;
      c.delta_ab = 0.1;
      break;
    case ExperimentKind::Subresonant:
      c.nx = 24;
      c.ny = 24;
      c.omega = 4.0;
      c.delta_ab = 0.1;
      c.n_qa = 300;
      break;
  }
  return c;
}

std::vector<ExperimentConfig> presets() {
  std::vector<ExperimentConfig> out;
  for (int i = 0; i < 5; ++i) out.push_back(preset(static_cast<ExperimentKind>(i)));
  return out;
}

}  // namespace flochern
