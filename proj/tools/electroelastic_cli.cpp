#include "electroelastic/config.hpp"
#include "electroelastic/io.hpp"
#include "electroelastic/run.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace electroelastic;

namespace {

void report(const RunOutcome& r) {
  if (r.ok) {
    std::printf("ok: %s\n", r.output_dir.string().c_str());
    for (const auto& [k, v] : r.metrics) std::printf("  %s = %.10g\n", k.c_str(), v);
  } else {
    std::fprintf(stderr, "failed at stage '%s' (%s): %s\n", r.stage.c_str(), r.error_kind.c_str(), r.message.c_str());
  }
}

int validate_mesh_file(const std::string& path, double debye_length) {
  const Mesh mesh = read_mesh_file(path);
  const MeshReport rep = validate_mesh(mesh, debye_length);
  std::printf("vertices %zu cells %zu faces %zu\n", mesh.num_vertices(), mesh.num_cells(), mesh.faces.size());
  for (const auto& w : rep.warnings) std::printf("warning: %s\n", w.c_str());
  for (const auto& v : rep.violations) std::printf("violation: %s\n", v.c_str());
  std::printf("%s\n", rep.ok() ? "valid" : "invalid");
  return rep.ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled Poisson-Boltzmann / nonlinear elasticity solver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());

  std::string config_path, output_override, mesh_path;
  double debye = 0.0;
  auto* solve = app.add_subcommand("solve", "run a scenario");
  auto* oracle = app.add_subcommand("oracle", "radial Born-ion oracle only");
  auto* sweep = app.add_subcommand("sweep", "parameter ramp over sweep.values");
  auto* validate = app.add_subcommand("validate", "check a mesh file");
  for (auto* s : {solve, oracle, sweep}) {
    s->add_option("config", config_path, "scenario configuration (JSON)")->required();
    s->add_option("-o,--output", output_override, "override output_dir");
  }
  validate->add_option("mesh", mesh_path, "mesh file")->required();
  validate->add_option("--debye-length", debye, "Debye length for the clearance warning (<= 0 disables)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) return validate_mesh_file(mesh_path, debye);
    ScenarioConfig cfg = parse_config(config_path);
    if (!output_override.empty()) cfg.output_dir = output_override;
    if (solve->parsed()) {
      const RunOutcome r = run_scenario(cfg);
      report(r);
      return r.exit_code;
    }
    if (oracle->parsed()) {
      const RunOutcome r = run_oracle(cfg);
      report(r);
      return r.exit_code;
    }
    const auto runs = run_sweep(cfg);
    int rc = 0;
    for (const auto& r : runs) {
      report(r);
      if (!r.ok && rc == 0) rc = r.exit_code;
    }
    return rc;
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  }
}
