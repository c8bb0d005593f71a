#include "electroelastic/run.hpp"

#include "electroelastic/io.hpp"
#include "electroelastic/radial.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

#ifndef ELECTROELASTIC_VERSION
#define ELECTROELASTIC_VERSION "unknown"
#endif

namespace electroelastic {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

const char* version() noexcept { return ELECTROELASTIC_VERSION; }

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Validation:
    case ErrorKind::Geometry:
    case ErrorKind::Topology:
      return 2;
    case ErrorKind::Io:
      return 4;
    default:
      return 3;
  }
}

namespace {

// Collects files written below one output directory.
class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& text) {
    write_text_file(dir_ / name, text);
    files_.push_back(ManifestEntry{name, sha256_hex(text)});
  }
  void add(const std::vector<ManifestEntry>& entries, const std::string& prefix) {
    for (const auto& e : entries) files_.push_back(ManifestEntry{prefix + e.file, e.sha256});
  }
  const fs::path& dir() const { return dir_; }
  const std::vector<ManifestEntry>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<ManifestEntry> files_;
};

std::string vtk_text(const VtkData& d, const std::string& title) {
  std::ostringstream os;
  write_vtk(os, d, title);
  return os.str();
}

std::string mesh_text(const Mesh& m) {
  std::ostringstream os;
  write_mesh(os, m);
  return os.str();
}

template <class F>
std::string csv(F&& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

std::string pbe_trace_csv(const EnergyReport& r) {
  std::ostringstream os;
  os << "iteration,residual,energy,damping\n";
  char buf[256];
  for (const auto& s : r.trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", s.iteration, s.residual, s.energy, s.damping);
    os << buf;
  }
  return os.str();
}

std::string force_summary_csv(const Mesh& mesh, const std::vector<std::pair<std::string, const ForceSet*>>& rows) {
  std::ostringstream os;
  os << "label,body_l2,surface_l2,body_x,body_y,body_z,surface_x,surface_y,surface_z\n";
  for (const auto& [name, f] : rows) {
    const ForceSummary s = summarize(mesh, *f);
    os << name << ',' << fmt(s.body_l2) << ',' << fmt(s.surface_l2) << ',' << fmt(s.body_total.x()) << ','
       << fmt(s.body_total.y()) << ',' << fmt(s.body_total.z()) << ',' << fmt(s.surface_total.x()) << ','
       << fmt(s.surface_total.y()) << ',' << fmt(s.surface_total.z()) << '\n';
  }
  return os.str();
}

// Mean of f_s . n over GAMMA_F, weighted by face area.
double mean_normal_surface_force(const Mesh& mesh, const ForceSet& f) {
  const InterfacePatch patch = extract_interface(mesh, FaceTag::GammaF);
  double s = 0.0;
  for (std::size_t k = 0; k < patch.size(); ++k) s += patch.areas[k] * f.surface[patch.faces[k]].dot(patch.normals[k]);
  return s / patch.total_area;
}

RadialConfig oracle_config(const ScenarioConfig& cfg) {
  RadialConfig r = cfg.oracle;
  r.q = cfg.charges.flexible.empty() ? 0.0 : cfg.charges.flexible.front().q;
  r.R = cfg.geometry.flexible_radius;
  r.eps_m = cfg.diel.eps_m;
  r.eps_s = cfg.diel.eps_s;
  r.kappa = cfg.diel.kappa;
  return r;
}

bool centered_single_charge(const ScenarioConfig& cfg) {
  return cfg.charges.flexible.size() == 1 && cfg.charges.rigid.empty() &&
         cfg.charges.flexible.front().position.norm() < 1e-12;
}

struct StageGuard {
  std::string stage;
};

void run_born(const ScenarioConfig& cfg, Output& out, RunOutcome& res, StageGuard& g) {
  g.stage = "mesh";
  const Mesh mesh = build_scenario_mesh(cfg);
  out.write("mesh.txt", mesh_text(mesh));
  res.metrics["num_cells"] = static_cast<double>(mesh.num_cells());
  res.metrics["num_vertices"] = static_cast<double>(mesh.num_vertices());
  validate_charges(cfg.charges, mesh);

  g.stage = "pbe";
  auto id = std::make_shared<const PiolaFields>(identity_piola(mesh));
  const PotentialDecomposition d = solve_pbe(mesh, id, cfg.charges, cfg.diel, cfg.pbe, cfg.mode);
  out.write("pbe_trace.csv", pbe_trace_csv(d.energy));
  const double phi0 = interpolate(mesh, d.phi_r, Vec3::Zero());
  res.metrics["phi_r_center"] = phi0;
  res.metrics["pbe_newton_steps"] = static_cast<double>(d.energy.trace.size() - 1);
  res.metrics["pbe_rejected_trials"] = d.energy.rejected_trials;
  const LinfBound b = check_linf_bound(d);
  res.metrics["linf_phi_n"] = b.phi_n_max;

  g.stage = "forces";
  const ForceSet f = assemble_forces(d, cfg.delta_target, ForceState::Coupled);
  out.write("surface_force.csv", csv([&](std::ostream& os) { write_surface_force_csv(os, mesh, f); }));
  out.write("blobs.csv", csv([&](std::ostream& os) { write_blob_csv(os, f.blobs); }));
  res.metrics["surface_force_mean_normal"] = mean_normal_surface_force(mesh, f);

  if (centered_single_charge(cfg)) {
    g.stage = "oracle";
    const RadialConfig rc = oracle_config(cfg);
    const RadialSolution rs = solve_radial_pb(rc, cfg.mode == PBEMode::Linearized);
    out.write("oracle_profile.csv", csv([&](std::ostream& os) { write_radial_profile(os, rs); }));
    res.metrics["oracle_phi_r_center"] = rs.phi_r_center;
    res.metrics["oracle_closed_form_phi_r_center"] = born_reaction_potential(rc);
    res.metrics["oracle_surface_force"] = radial_surface_force(rs, rc);
    res.metrics["phi_r_center_rel_error"] = std::abs(phi0 - rs.phi_r_center) / std::abs(rs.phi_r_center);
  }

  g.stage = "export";
  const std::vector<Vec3> u(mesh.num_vertices(), Vec3::Zero());
  FieldBundle fb{&mesh, &d, id.get(), &u, &f, nullptr};
  out.add(export_fields(fb, out.dir() / "fields"), "fields/");
}

void record_coupled(const Mesh& mesh, const Scenario& sc, const CoupledState& st, RunOutcome& res) {
  res.metrics["iterations"] = st.iterations;
  res.metrics["converged"] = st.converged ? 1.0 : 0.0;
  double umax = 0.0;
  for (const auto& v : st.u) umax = std::max(umax, v.norm());
  res.metrics["u_max"] = umax;
  if (!st.increments.empty()) res.metrics["final_increment"] = st.increments.back();
  if (st.increments.size() >= 3) {
    res.metrics["contraction_estimate"] = st.contraction_estimate(1, 6);
    res.metrics["contraction_estimate_all"] = st.contraction_estimate();
  }
  const WeakFormResidual w = residual_weak_form(sc, st);
  res.metrics["weak_residual_pbe"] = w.pbe;
  res.metrics["weak_residual_elastic"] = w.elastic;
  const ForceSummary s = summarize(mesh, st.forces);
  res.metrics["net_body_l2"] = s.body_l2;
  res.metrics["net_surface_l2"] = s.surface_l2;
  res.metrics["min_J"] = st.piola ? st.piola->min_J : 1.0;
}

void run_coupled(const ScenarioConfig& cfg, Output& out, RunOutcome& res, StageGuard& g) {
  g.stage = "mesh";
  auto mesh = std::make_shared<const Mesh>(build_scenario_mesh(cfg));
  out.write("mesh.txt", mesh_text(*mesh));
  res.metrics["num_cells"] = static_cast<double>(mesh->num_cells());
  res.metrics["num_vertices"] = static_cast<double>(mesh->num_vertices());
  validate_charges(cfg.charges, *mesh);
  Scenario sc = build_scenario(cfg, mesh);

  g.stage = "free_state";
  prepare_free_state(sc);

  g.stage = "coupled";
  CoupledState st;
  if (!cfg.continuation.empty()) {
    std::vector<ContinuationStage> stages = cfg.continuation;
    for (auto& s : stages) s.cfg = cfg.fixed_point;
    const auto all = run_continuation(sc, stages);
    std::ostringstream os;
    os << "stage,kappa,rigid_scale,iterations,converged,final_increment\n";
    for (std::size_t i = 0; i < all.size(); ++i)
      os << i << ',' << fmt(stages[i].kappa) << ',' << fmt(stages[i].rigid_scale) << ',' << all[i].iterations << ','
         << (all[i].converged ? 1 : 0) << ',' << fmt(all[i].increments.empty() ? 0.0 : all[i].increments.back())
         << '\n';
    out.write("continuation.csv", os.str());
    st = all.back();
    sc.diel.kappa = stages.back().kappa;
    sc.charges = cfg.charges.scaled(1.0, stages.back().rigid_scale);
    res.metrics["continuation_stages"] = static_cast<double>(all.size());
  } else {
    st = solve_coupled(sc, cfg.fixed_point);
  }
  out.write("coupled_trace.csv", csv([&](std::ostream& os) { write_coupled_trace_csv(os, st); }));
  out.write("surface_force.csv", csv([&](std::ostream& os) { write_surface_force_csv(os, *mesh, st.forces); }));
  out.write("blobs.csv", csv([&](std::ostream& os) { write_blob_csv(os, st.forces.blobs); }));
  record_coupled(*mesh, sc, st, res);

  g.stage = "diagnostics";
  const EstimateRow e = estimate_report(sc, st);
  {
    std::ostringstream os;
    os << "kappa_shift,cavity_volume,F_minus_I_w1p,J_minus_1_inf,added_charge,body_net,surface_net\n";
    os << fmt(e.kappa_shift) << ',' << fmt(e.cavity_volume) << ',' << fmt(e.F_minus_I_w1p) << ','
       << fmt(e.J_minus_1_inf) << ',' << fmt(e.added_charge) << ',' << fmt(e.body_net) << ',' << fmt(e.surface_net)
       << '\n';
    out.write("estimate.csv", os.str());
  }
  res.metrics["cavity_volume"] = e.cavity_volume;

  if (cfg.kind == ScenarioKind::FullCoupled) {
    g.stage = "ledger";
    const auto states = ledger_states(sc, st);
    const PerturbationLedger L = build_perturbation_ledger(states);
    static const char* names[] = {"ionic_strength", "cavity", "added_charges", "deformation"};
    std::vector<std::pair<std::string, const ForceSet*>> rows;
    for (int i = 0; i < 4; ++i) rows.emplace_back(names[i], &L.deltas[static_cast<std::size_t>(i)]);
    out.write("ledger.csv", force_summary_csv(*mesh, rows));
    std::vector<std::pair<std::string, const ForceSet*>> srows;
    for (std::size_t i = 0; i < states.size(); ++i) srows.emplace_back(to_string(states[i].label), &states[i]);
    out.write("ledger_states.csv", force_summary_csv(*mesh, srows));
    res.metrics["ledger_telescoping_residual"] = L.telescoping_residual;
    res.metrics["ledger_cavity_surface_l2"] = summarize(*mesh, L.deltas[1]).surface_l2;
    res.metrics["ledger_ionic_surface_l2"] = summarize(*mesh, L.deltas[0]).surface_l2;
  }

  g.stage = "export";
  out.add(export_fields(*mesh, st, out.dir() / "fields"), "fields/");
}

json summary_json(const ScenarioConfig& cfg, const RunOutcome& res, const std::string& verb) {
  json j;
  j["version"] = version();
  j["verb"] = verb;
  j["scenario"] = to_string(cfg.kind);
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["defaulted"] = cfg.defaulted;
  j["status"] = res.ok ? "ok" : "failed";
  if (!res.ok) {
    j["stage"] = res.stage;
    j["error_kind"] = res.error_kind;
    j["message"] = res.message;
  }
  j["exit_code"] = res.exit_code;
  json m = json::object();
  for (const auto& [k, v] : res.metrics) m[k] = v;
  j["outcomes"] = m;
  json files = json::array();
  for (const auto& f : res.files) files.push_back({{"file", f.file}, {"sha256", f.sha256}});
  j["files"] = files;
  return j;
}

template <class Body>
RunOutcome execute(const ScenarioConfig& cfg, const std::string& verb, Body&& body) {
  RunOutcome res;
  res.output_dir = cfg.output_dir;
  Output out(cfg.output_dir);
  StageGuard g{"config"};
  try {
    cfg.validate();
    out.write("config.json", serialize_config(cfg));
    body(out, res, g);
  } catch (const Error& e) {
    res.ok = false;
    res.stage = g.stage;
    res.error_kind = to_string(e.kind());
    res.message = e.what();
    res.exit_code = exit_code_for(e.kind());
  } catch (const std::exception& e) {
    res.ok = false;
    res.stage = g.stage;
    res.error_kind = "internal";
    res.message = e.what();
    res.exit_code = 3;
  }
  res.files = out.files();
  write_text_file(out.dir() / "summary.json", summary_json(cfg, res, verb).dump(2) + "\n");
  return res;
}

}  // namespace

Mesh build_scenario_mesh(const ScenarioConfig& cfg) {
  const auto& g = cfg.geometry;
  CapSpec cap;
  cap.angle_deg = g.cap_angle_deg;
  if (cfg.kind == ScenarioKind::TwoSpheres || cfg.kind == ScenarioKind::FullCoupled) {
    TwoBallGeometry tb;
    tb.flexible_radius = g.flexible_radius;
    tb.rigid_radius = g.rigid_radius;
    tb.separation = g.separation;
    tb.box_half_width = g.box_half_width;
    return build_two_balls_in_box(tb, g.h, cap);
  }
  return build_ball_in_box(Vec3::Zero(), g.flexible_radius, g.box_half_width, g.h, Region::MF, cap);
}

Scenario build_scenario(const ScenarioConfig& cfg, std::shared_ptr<const Mesh> mesh) {
  Scenario sc;
  sc.mesh = std::move(mesh);
  sc.charges = cfg.charges;
  sc.diel = cfg.diel;
  sc.elastic = cfg.elastic;
  sc.pbe = cfg.pbe;
  sc.mode = cfg.mode;
  sc.elastic_cfg = cfg.elastic_cfg;
  sc.delta_target = cfg.delta_target;
  sc.molecule_radius = cfg.geometry.flexible_radius;
  return sc;
}

std::vector<ManifestEntry> export_fields(const FieldBundle& b, const fs::path& dir) {
  require(b.mesh != nullptr, ErrorKind::Validation, "export_fields: missing mesh");
  const Mesh& mesh = *b.mesh;
  const std::size_t nv = mesh.num_vertices(), nc = mesh.num_cells();
  std::vector<ManifestEntry> files;
  json index = json::array();
  auto emit = [&](const std::string& name, const std::string& field, const std::string& entity, std::size_t count,
                  const VtkData& d) {
    const std::string text = vtk_text(d, field);
    write_text_file(dir / name, text);
    files.push_back(ManifestEntry{name, sha256_hex(text)});
    index.push_back({{"file", name}, {"field", field}, {"entity", entity}, {"count", count}, {"sha256", files.back().sha256}});
  };
  auto nodal = [&](const VectorX* v) {
    std::vector<double> out(nv, 0.0);
    if (v && static_cast<std::size_t>(v->size()) == nv)
      for (std::size_t i = 0; i < nv; ++i) out[i] = (*v)[static_cast<Eigen::Index>(i)];
    return out;
  };
  const PotentialDecomposition* d = b.decomp;
  for (const auto& [name, vec] : {std::pair<std::string, const VectorX*>{"phi_l", d ? &d->phi_l : nullptr},
                                  {"phi_n", d ? &d->phi_n : nullptr},
                                  {"phi_r", d ? &d->phi_r : nullptr}}) {
    VtkData v = vtk_volume(mesh);
    v.point_data[name] = scalar_array(nodal(vec));
    emit(name + ".vtk", name, "vertex", nv, v);
  }
  {
    VtkData v = vtk_volume(mesh);
    std::vector<Vec3> u(nv, Vec3::Zero());
    if (b.u && b.u->size() == nv) u = *b.u;
    v.point_data["u"] = vector_array(u);
    emit("u.vtk", "u", "vertex", nv, v);
  }
  {
    std::vector<Index> ids;
    VtkData v = vtk_interface(mesh, &ids);
    auto per_face = [&](const ForceSet* f) {
      std::vector<Vec3> out(ids.size(), Vec3::Zero());
      if (f && f->surface.size() == mesh.faces.size())
        for (std::size_t k = 0; k < ids.size(); ++k) out[k] = f->surface[static_cast<std::size_t>(ids[k])];
      return out;
    };
    v.cell_data["fs"] = vector_array(per_face(b.forces));
    if (b.state_forces) v.cell_data["fs_state"] = vector_array(per_face(b.state_forces));
    std::vector<double> face_id(ids.begin(), ids.end());
    v.cell_data["face_id"] = scalar_array(face_id);
    emit("fs.vtk", "fs", "interface_face", ids.size(), v);
  }
  {
    VtkData v = vtk_volume(mesh);
    std::vector<double> J(nc, 1.0);
    if (b.piola && b.piola->J.size() == nc) J = b.piola->J;
    v.cell_data["J"] = scalar_array(J);
    emit("J.vtk", "J", "cell", nc, v);
  }
  json j;
  j["files"] = index;
  const std::string text = j.dump(2) + "\n";
  write_text_file(dir / "fields_index.json", text);
  files.push_back(ManifestEntry{"fields_index.json", sha256_hex(text)});
  return files;
}

std::vector<ManifestEntry> export_fields(const Mesh& mesh, const CoupledState& s, const fs::path& dir) {
  FieldBundle b{&mesh, &s.decomp, s.piola.get(), &s.u, &s.forces, &s.absolute};
  return export_fields(b, dir);
}

RunOutcome run_scenario(const ScenarioConfig& cfg) {
  return execute(cfg, "solve", [&](Output& out, RunOutcome& res, StageGuard& g) {
    if (cfg.kind == ScenarioKind::Born)
      run_born(cfg, out, res, g);
    else
      run_coupled(cfg, out, res, g);
  });
}

RunOutcome run_oracle(const ScenarioConfig& cfg) {
  return execute(cfg, "oracle", [&](Output& out, RunOutcome& res, StageGuard& g) {
    g.stage = "oracle";
    require(!cfg.charges.flexible.empty(), ErrorKind::Validation, "oracle: needs one flexible charge");
    const RadialConfig rc = oracle_config(cfg);
    for (bool lin : {true, false}) {
      const RadialSolution rs = solve_radial_pb(rc, lin);
      const std::string tag = lin ? "linearized" : "nonlinear";
      out.write("oracle_profile_" + tag + ".csv", csv([&](std::ostream& os) { write_radial_profile(os, rs); }));
      res.metrics["phi_r_center_" + tag] = rs.phi_r_center;
      res.metrics["surface_force_" + tag] = radial_surface_force(rs, rc);
    }
    res.metrics["closed_form_phi_r_center"] = born_reaction_potential(rc);
  });
}

ScenarioConfig apply_sweep_value(const ScenarioConfig& cfg, const std::string& parameter, double value) {
  ScenarioConfig c = cfg;
  if (parameter == "rigid_scale") {
    c.charges = cfg.charges.scaled(1.0, value);
  } else if (parameter == "kappa_per_A") {
    c.diel.kappa = value;
  } else if (parameter == "h_A") {
    c.geometry.h = value;
  } else if (parameter == "rigid_radius_A") {
    c.geometry.rigid_radius = value;
    for (auto& q : c.charges.rigid) q.radius = value;
  } else {
    fail(ErrorKind::Validation, "sweep: unknown parameter '" + parameter + "'");
  }
  c.sweep = {};
  return c;
}

std::vector<RunOutcome> run_sweep(const ScenarioConfig& cfg) {
  require(!cfg.sweep.parameter.empty() && !cfg.sweep.values.empty(), ErrorKind::Validation,
          "sweep: parameter and values are required");
  std::vector<RunOutcome> out;
  std::ostringstream os;
  os << "index," << cfg.sweep.parameter << ",status,exit_code,iterations,contraction_estimate,net_surface_l2,"
        "phi_r_center,cavity_volume,ledger_cavity_surface_l2\n";
  for (std::size_t i = 0; i < cfg.sweep.values.size(); ++i) {
    ScenarioConfig c = apply_sweep_value(cfg, cfg.sweep.parameter, cfg.sweep.values[i]);
    char sub[32];
    std::snprintf(sub, sizeof sub, "sweep_%03zu", i);
    c.output_dir = (fs::path(cfg.output_dir) / sub).string();
    out.push_back(run_scenario(c));
    const auto& r = out.back();
    auto metric = [&](const char* k) {
      auto it = r.metrics.find(k);
      return it == r.metrics.end() ? std::string() : fmt(it->second);
    };
    os << i << ',' << fmt(cfg.sweep.values[i]) << ',' << (r.ok ? "ok" : "failed") << ',' << r.exit_code << ','
       << metric("iterations") << ',' << metric("contraction_estimate") << ',' << metric("net_surface_l2") << ','
       << metric("phi_r_center") << ',' << metric("cavity_volume") << ',' << metric("ledger_cavity_surface_l2")
       << '\n';
  }
  write_text_file(fs::path(cfg.output_dir) / "sweep.csv", os.str());
  return out;
}

}  // namespace electroelastic
