#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "torus_stab/timestepper.hpp"

namespace torus_stab::cli {

inline constexpr char kSnapshotMagic[8] = {'T', 'S', 'T', 'B', 'S', 'N', 'A', 'P'};
inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::uint32_t kSnapshotDtypeF64 = 1;

/// Layout documented in docs/snapshot_format.md.
void write_snapshots(const std::filesystem::path& path, const std::vector<double>& times,
                     const std::vector<Field>& snapshots);

struct SnapshotFile {
  int n;
  std::vector<double> times;
  std::vector<Field> snapshots;
};

/// Throws std::runtime_error on a bad magic, version, dtype or size.
SnapshotFile read_snapshots(const std::filesystem::path& path);

/// Columns t,E,D,residual,damping_integral,flux_integral with %.17g values,
/// so the record reloads bit-identically.
void write_energy_csv(const std::filesystem::path& path, const SimulationRecord& record);

/// Rebuilds a record from energy.csv and snapshots.bin.
SimulationRecord load_record(const std::filesystem::path& run_dir);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);

/// UTC, ISO 8601.
std::string utc_timestamp();

/// Version tag recorded in manifests.
inline constexpr const char* kCodeVersion = "torus_stab 0.1.0";

}  // namespace torus_stab::cli
