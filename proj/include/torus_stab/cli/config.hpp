#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "torus_stab/params.hpp"
#include "torus_stab/timestepper.hpp"

namespace torus_stab::cli {

struct CarlemanSettings {
  double eta = std::numbers::pi / 2.0;
  double delta = 0.1;
  std::optional<double> seam_slope;
  double rho = 0.9;
  int n_fine = 4097;
};

/// Parameter grid of `sweep`. Empty lists fall back to the base config value.
struct SweepSettings {
  std::vector<double> amplitudes;
  std::vector<double> widths;
  std::vector<double> gammas;
  std::vector<double> speeds;  ///< a/b; a is rescaled, b kept
  std::vector<std::uint64_t> seeds;
  /// Observation window of the observability quotient; default 1.2·2πb/a.
  std::optional<double> observe_T;
};

/// Everything a run needs, with defaults filled in. The canonical JSON echo
/// of this struct is what the run id hashes.
struct RunConfig {
  int n = 256;
  bool grid_given = false;

  double a = 1.0;
  double a1 = 1.0;
  double b = 1.0;
  double b1 = 1.0;
  double gamma = kConservativeGamma;

  BumpProfile damping{};
  std::vector<double> damping_samples;  ///< overrides the bump when non-empty

  InitialProfile initial{};

  std::optional<double> t_final;
  std::optional<double> dt;  ///< nullopt: auto
  int stride = 10;

  RhsKind rhs = RhsKind::ClosedLoop;
  std::string frozen_preset = "pure_transport";  ///< pure_transport | state | constant
  double frozen_q = 0.0;
  double frozen_p = 0.0;
  double frozen_r = 0.0;
  double alpha = 1.0;

  CarlemanSettings carleman{};
  SweepSettings sweep{};

  TorusGrid grid() const { return TorusGrid(n); }
  ModelParams model_params() const;
  /// Throws ConfigError("missing field 'time.T_final'") when T_final is absent.
  SimConfig sim_config() const;

  nlohmann::json echo() const;
  /// First 16 hex digits of SHA-256 over echo().dump().
  std::string run_id() const;
};

/// YAML front end. Errors carry the field path and, where known, the line.
RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>");
RunConfig parse_config_file(const std::filesystem::path& path);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);

}  // namespace torus_stab::cli
