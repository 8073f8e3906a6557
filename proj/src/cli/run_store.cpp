#include "torus_stab/cli/run_store.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace torus_stab::cli {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "snapshot files are written in host byte order, which must be little-endian");

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const fs::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw std::runtime_error("truncated snapshot file '" + path.string() + "'");
  return v;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_snapshots(const fs::path& path, const std::vector<double>& times,
                     const std::vector<Field>& snapshots) {
  if (times.size() != snapshots.size())
    throw std::invalid_argument("write_snapshots: times and snapshots differ in length");
  const std::uint64_t n = snapshots.empty() ? 0 : static_cast<std::uint64_t>(snapshots.front().size());
  std::ostringstream out;
  out.write(kSnapshotMagic, sizeof kSnapshotMagic);
  put(out, kSnapshotVersion);
  put(out, kSnapshotDtypeF64);
  put(out, n);
  put(out, static_cast<std::uint64_t>(times.size()));
  for (double t : times) put(out, t);
  for (const Field& f : snapshots) {
    if (static_cast<std::uint64_t>(f.size()) != n)
      throw std::invalid_argument("write_snapshots: snapshots on different grids");
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(n * sizeof(double)));
  }
  write_file_atomic(path, out.str());
}

SnapshotFile read_snapshots(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot file '" + path.string() + "'");
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0)
    throw std::runtime_error("'" + path.string() + "' is not a snapshot file (bad magic)");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kSnapshotVersion)
    throw std::runtime_error("unsupported snapshot version " + std::to_string(version));
  const auto dtype = get<std::uint32_t>(in, path);
  if (dtype != kSnapshotDtypeF64)
    throw std::runtime_error("unsupported snapshot dtype " + std::to_string(dtype));
  const auto n = get<std::uint64_t>(in, path);
  const auto count = get<std::uint64_t>(in, path);
  if (count > 0 && (n < TorusGrid::kMinSize || n > TorusGrid::kMaxSize))
    throw std::runtime_error("snapshot grid size " + std::to_string(n) + " out of range");
  const auto expected = 32 + count * 8 * (n + 1);
  if (fs::file_size(path) != expected)
    throw std::runtime_error("snapshot file '" + path.string() + "' has size " +
                             std::to_string(fs::file_size(path)) + ", expected " +
                             std::to_string(expected));
  SnapshotFile file{static_cast<int>(n), {}, {}};
  file.times.resize(count);
  in.read(reinterpret_cast<char*>(file.times.data()), static_cast<std::streamsize>(count * 8));
  if (count > 0) {
    const TorusGrid grid(static_cast<int>(n));
    for (std::uint64_t i = 0; i < count; ++i) {
      std::vector<double> values(n);
      in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * 8));
      file.snapshots.emplace_back(grid, std::move(values));
    }
  }
  if (!in) throw std::runtime_error("truncated snapshot file '" + path.string() + "'");
  return file;
}

void write_energy_csv(const fs::path& path, const SimulationRecord& r) {
  std::string out = "t,E,D,residual,damping_integral,flux_integral\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    out += fmt17(r.times[i]) + "," + fmt17(r.energy[i]) + "," + fmt17(r.damping[i]) + "," +
           fmt17(r.residual[i]) + "," + fmt17(r.damping_integral[i]) + "," +
           fmt17(r.flux_integral[i]) + "\n";
  }
  write_file_atomic(path, out);
}

SimulationRecord load_record(const fs::path& run_dir) {
  SimulationRecord r;
  const auto manifest = read_json(run_dir / "manifest.json");
  const auto& cfg = manifest.at("config");
  const auto kind = parse_rhs_kind(cfg.at("rhs").get<std::string>());
  if (!kind) throw std::runtime_error("manifest names an unknown rhs");
  r.rhs = *kind;
  r.gamma = cfg.at("params").at("gamma").get<double>();
  r.alpha = cfg.at("alpha").get<double>();
  r.dt = manifest.at("summary").at("dt").get<double>();

  std::ifstream in(run_dir / "energy.csv");
  if (!in) throw std::runtime_error("cannot open '" + (run_dir / "energy.csv").string() + "'");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double v[6];
    for (double& x : v) {
      if (!std::getline(row, cell, ',')) throw std::runtime_error("short row in energy.csv");
      x = std::strtod(cell.c_str(), nullptr);  // accepts "nan"
    }
    r.times.push_back(v[0]);
    r.energy.push_back(v[1]);
    r.damping.push_back(v[2]);
    r.residual.push_back(v[3]);
    r.damping_integral.push_back(v[4]);
    r.flux_integral.push_back(v[5]);
  }
  auto snaps = read_snapshots(run_dir / "snapshots.bin");
  r.snapshot_times = std::move(snaps.times);
  r.snapshots = std::move(snaps.snapshots);
  return r;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  static std::atomic<unsigned> counter{0};
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

void write_json_atomic(const fs::path& path, const nlohmann::json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return nlohmann::json::parse(in);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace torus_stab::cli
