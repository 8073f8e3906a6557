#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "torus_stab/cli/config.hpp"

namespace torus_stab::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitDivergence = 3,
  kExitVerify = 4,
};

struct CommonOptions {
  std::optional<std::filesystem::path> config;
  /// --out, else TORUS_STAB_OUT, else ./torus_stab_out.
  std::optional<std::filesystem::path> out;
  bool force = false;
  int workers = 1;
  std::optional<std::uint64_t> seed;
};

std::filesystem::path output_root(const CommonOptions& opts);

/// runs/<id>/{manifest.json, energy.csv, snapshots.bin}.
int cmd_simulate(const CommonOptions& opts);

struct VerifyReport {
  std::string suite;
  std::string csv;                   ///< header plus one row per check
  std::vector<std::string> summary;  ///< human-readable lines, PASS/FAIL per invariant
  nlohmann::json constants;          ///< estimated constants and extremes
  bool passed = false;
};

inline const std::vector<std::string> kVerifySuites = {
    "adjoint", "identity", "carleman-elliptic", "carleman-transport", "carleman-combined"};

/// Runs a suite in memory. Throws ConfigError for unknown names and lets
/// BoundViolationError escape when the weight cannot be built.
VerifyReport run_verify_suite(const std::string& suite, const RunConfig& cfg, std::uint64_t seed);

/// Suites: adjoint, identity, carleman-elliptic, carleman-transport,
/// carleman-combined. Writes verify/<suite>/{report.csv, summary.txt}.
int cmd_verify(const std::string& suite, const CommonOptions& opts);

/// sweeps/<id>/{aggregate.csv, energy.svg, beta_vs_amplitude.svg, manifest.json}.
int cmd_sweep(const CommonOptions& opts);

}  // namespace torus_stab::cli
