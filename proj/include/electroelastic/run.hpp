#pragma once

#include "electroelastic/config.hpp"
#include "electroelastic/coupled.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace electroelastic {

const char* version() noexcept;

/// 0 success, 2 validation, 3 solver failure, 4 I/O.
int exit_code_for(ErrorKind kind) noexcept;

struct ManifestEntry {
  std::string file;      // relative to the output directory
  std::string sha256;
};

/// Nodal phi_l/phi_n/phi_r and u, per-face f_s and per-cell J as separate
/// legacy-VTK files plus `fields_index.json`. Missing fields are written as
/// zeros of the right length.
struct FieldBundle {
  const Mesh* mesh = nullptr;
  const PotentialDecomposition* decomp = nullptr;
  const PiolaFields* piola = nullptr;
  const std::vector<Vec3>* u = nullptr;
  const ForceSet* forces = nullptr;         // exported as fs
  const ForceSet* state_forces = nullptr;   // optional, exported as fs_state
};
std::vector<ManifestEntry> export_fields(const FieldBundle& b, const std::filesystem::path& dir);
std::vector<ManifestEntry> export_fields(const Mesh& mesh, const CoupledState& s, const std::filesystem::path& dir);

struct RunOutcome {
  bool ok = true;
  int exit_code = 0;
  std::string stage;       // failing stage, empty on success
  std::string error_kind;
  std::string message;
  std::map<std::string, double> metrics;
  std::vector<ManifestEntry> files;
  std::filesystem::path output_dir;
};

/// Executes the scenario and writes config.json, traces, fields and
/// summary.json under cfg.output_dir. Stage failures are recorded, not thrown
/// (except I/O failures while writing the summary itself).
RunOutcome run_scenario(const ScenarioConfig& cfg);

/// Radial oracle only.
RunOutcome run_oracle(const ScenarioConfig& cfg);

/// One run per sweep value in output_dir/sweep_NNN plus sweep.csv.
std::vector<RunOutcome> run_sweep(const ScenarioConfig& cfg);

/// Applies a sweep value to a copy of the configuration.
ScenarioConfig apply_sweep_value(const ScenarioConfig& cfg, const std::string& parameter, double value);

/// Mesh of the scenario geometry.
Mesh build_scenario_mesh(const ScenarioConfig& cfg);
/// Coupled scenario assembled from the configuration.
Scenario build_scenario(const ScenarioConfig& cfg, std::shared_ptr<const Mesh> mesh);

}  // namespace electroelastic
