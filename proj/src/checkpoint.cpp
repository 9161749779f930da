#include "flochern/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace flochern {

namespace {

constexpr const char* kMagic = "flochern-checkpoint 1";

std::string repr(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_doubles(std::ostream& os, const double* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      auto bits = std::bit_cast<std::uint64_t>(data[i]);
      bits = __builtin_bswap64(bits);
      os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
}

void read_doubles(std::istream& is, double* data, std::size_t count) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  if (!is) throw std::runtime_error("checkpoint: truncated payload");
  if constexpr (std::endian::native != std::endian::little) {
    for (std::size_t i = 0; i < count; ++i) {
      data[i] = std::bit_cast<double>(__builtin_bswap64(std::bit_cast<std::uint64_t>(data[i])));
    }
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
  const int rows = cp.state.empty() ? 0 : cp.state.front().dimension();
  const int cols = cp.state.empty() ? 0 : cp.state.front().occupied();
  for (const auto& s : cp.state) {
    if (s.dimension() != rows || s.occupied() != cols) throw std::invalid_argument("checkpoint: ragged sectors");
  }
  std::ostringstream header;
  header << kMagic << '\n'
         << "hash " << (cp.config_hash.empty() ? "-" : cp.config_hash) << '\n'
         << "stage " << (cp.stage.empty() ? "-" : cp.stage) << '\n'
         << "t " << repr(cp.t) << '\n'
         << "step " << cp.step << '\n'
         << "sectors " << cp.state.size() << '\n'
         << "rows " << rows << '\n'
         << "cols " << cols << '\n'
         << "k";
  for (const auto& s : cp.state) header << ' ' << repr(s.k);
  header << '\n';
  for (const auto& [name, values] : cp.series) header << "series " << name << ' ' << values.size() << '\n';
  header << "end\n";

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + tmp.string());
    os << header.str();
    for (const auto& s : cp.state) {
      write_doubles(os, reinterpret_cast<const double*>(s.orbitals.data()),
                    static_cast<std::size_t>(2 * s.orbitals.size()));
    }
    for (const auto& [name, values] : cp.series) write_doubles(os, values.data(), values.size());
    if (!os) throw std::runtime_error("checkpoint: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != kMagic) throw std::runtime_error("checkpoint: bad magic in " + path.string());

  Checkpoint cp;
  std::size_t sectors = 0;
  int rows = 0;
  int cols = 0;
  std::vector<double> ks;
  std::vector<std::pair<std::string, std::size_t>> series;
  bool ended = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "end") {
      ended = true;
      break;
    }
    if (key == "hash") {
      ls >> cp.config_hash;
      if (cp.config_hash == "-") cp.config_hash.clear();
    } else if (key == "stage") {
      ls >> cp.stage;
      if (cp.stage == "-") cp.stage.clear();
    } else if (key == "t") {
      std::string v;
      ls >> v;
      cp.t = std::stod(v);
    } else if (key == "step") {
      ls >> cp.step;
    } else if (key == "sectors") {
      ls >> sectors;
    } else if (key == "rows") {
      ls >> rows;
    } else if (key == "cols") {
      ls >> cols;
    } else if (key == "k") {
      std::string v;
      while (ls >> v) ks.push_back(std::stod(v));
      ls.clear();  // reading to the end of the line sets failbit
    } else if (key == "series") {
      std::string name;
      std::size_t len = 0;
      ls >> name >> len;
      series.emplace_back(name, len);
    } else {
      throw std::runtime_error("checkpoint: unknown header key '" + key + "'");
    }
    if (ls.fail()) throw std::runtime_error("checkpoint: malformed header line '" + line + "'");
  }
  if (!ended || ks.size() != sectors) throw std::runtime_error("checkpoint: incomplete header");
  cp.state.resize(sectors);
  for (std::size_t s = 0; s < sectors; ++s) {
    cp.state[s].k = ks[s];
    cp.state[s].orbitals.resize(rows, cols);
    read_doubles(is, reinterpret_cast<double*>(cp.state[s].orbitals.data()),
                 static_cast<std::size_t>(2 * rows) * static_cast<std::size_t>(cols));
  }
  for (const auto& [name, len] : series) {
    std::vector<double> values(len);
    read_doubles(is, values.data(), len);
    cp.series[name] = std::move(values);
  }
  return cp;
}

}  // namespace flochern
