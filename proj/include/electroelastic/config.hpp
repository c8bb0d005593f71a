#pragma once

#include "electroelastic/charges.hpp"
#include "electroelastic/coupled.hpp"
#include "electroelastic/radial.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace electroelastic {

enum class ScenarioKind { Born, TwoSpheres, IonicShift, FullCoupled };
const char* to_string(ScenarioKind k) noexcept;
ScenarioKind scenario_from_string(const std::string& s);

struct GeometryConfig {
  double flexible_radius = 1.0;
  double rigid_radius = 1.0;
  double separation = 3.0;
  double box_half_width = 4.0;
  double h = 0.25;
  double cap_angle_deg = 30.0;
};

struct SweepConfig {
  std::string parameter;        // rigid_scale, kappa_per_A, h_A, rigid_radius_A
  std::vector<double> values;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Born;
  GeometryConfig geometry;
  DielectricParams diel;
  std::string charge_file;      // empty: inline or scenario default charges
  bool charges_inline = false;
  ChargeSystem charges;         // resolved charges (file, inline or default)
  ElasticParams elastic{100.0, 100.0};
  ElasticConfig elastic_cfg;
  PBEConfig pbe;
  PBEMode mode = PBEMode::Nonlinear;
  double delta_target = 1e-6;
  FixedPointConfig fixed_point;
  std::vector<ContinuationStage> continuation;
  SweepConfig sweep;
  RadialConfig oracle;          // grid_points and R_out are read; physics follows the scenario
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  std::vector<std::string> defaulted;  // dotted keys filled from defaults

  void validate() const;
};

/// Default charges of a scenario when none are configured.
ChargeSystem default_charges(ScenarioKind kind, const GeometryConfig& g);

/// Parses JSON text; relative paths resolve against `base_dir`. Unknown keys
/// and range violations are errors naming the field.
ScenarioConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = ".");
ScenarioConfig parse_config(const std::filesystem::path& path);

/// Canonical JSON with every field written explicitly (charges inline unless
/// read from a file).
std::string serialize_config(const ScenarioConfig& cfg);

/// SHA-256 of the canonical serialization.
std::string config_hash(const ScenarioConfig& cfg);

}  // namespace electroelastic
