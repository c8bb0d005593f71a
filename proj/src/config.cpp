#include "electroelastic/config.hpp"

#include "electroelastic/io.hpp"

#include <json.hpp>

#include <set>

namespace electroelastic {

using json = nlohmann::ordered_json;

const char* to_string(ScenarioKind k) noexcept {
  switch (k) {
    case ScenarioKind::Born: return "born";
    case ScenarioKind::TwoSpheres: return "two_spheres";
    case ScenarioKind::IonicShift: return "ionic_shift";
    case ScenarioKind::FullCoupled: return "full_coupled";
  }
  return "?";
}

ScenarioKind scenario_from_string(const std::string& s) {
  for (auto k : {ScenarioKind::Born, ScenarioKind::TwoSpheres, ScenarioKind::IonicShift, ScenarioKind::FullCoupled})
    if (s == to_string(k)) return k;
  fail(ErrorKind::Validation, "scenario: unknown kind '" + s + "'");
}

namespace {

bool two_ball(ScenarioKind k) { return k == ScenarioKind::TwoSpheres || k == ScenarioKind::FullCoupled; }

// Reads one JSON object, recording defaults and rejecting unknown keys.
class Section {
 public:
  Section(const json& obj, std::string path, std::vector<std::string>& defaulted)
      : obj_(obj), path_(std::move(path)), defaulted_(defaulted) {
    if (!obj_.is_object()) fail(ErrorKind::Validation, "field '" + path_ + "' must be an object");
  }

  template <class T>
  T get(const std::string& key, const T& def) {
    known_.insert(key);
    if (!obj_.contains(key)) {
      defaulted_.push_back(name(key));
      return def;
    }
    try {
      return obj_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(ErrorKind::Validation, "field '" + name(key) + "' has the wrong type");
    }
  }
  bool has(const std::string& key) {
    known_.insert(key);
    return obj_.contains(key);
  }
  const json& at(const std::string& key) {
    known_.insert(key);
    return obj_.at(key);
  }
  void finish() const {
    for (const auto& [k, v] : obj_.items())
      if (!known_.count(k)) fail(ErrorKind::Validation, "unknown key '" + name(k) + "'");
  }
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& defaulted_;
  std::set<std::string> known_;
};

const json& sub(const json& root, const std::string& key, const json& empty) {
  return root.contains(key) ? root.at(key) : empty;
}

void check(bool ok, const std::string& field, const std::string& rule) {
  if (!ok) fail(ErrorKind::Validation, "field '" + field + "': " + rule);
}

}  // namespace

ChargeSystem default_charges(ScenarioKind kind, const GeometryConfig& g) {
  ChargeSystem c;
  const double R = g.flexible_radius;
  if (kind == ScenarioKind::Born) {
    c.flexible.push_back(PointCharge{Vec3::Zero(), 1.0, R});
    return c;
  }
  c.flexible.push_back(PointCharge{Vec3(0.4 * R, 0.0, 0.0), 1.0, 0.5 * R});
  c.flexible.push_back(PointCharge{Vec3(-0.4 * R, 0.1 * R, 0.0), -1.0, 0.5 * R});
  if (two_ball(kind)) c.rigid.push_back(PointCharge{Vec3(g.separation, 0.0, 0.0), 0.1, g.rigid_radius});
  return c;
}

void ScenarioConfig::validate() const {
  const auto& g = geometry;
  check(g.flexible_radius > 0.0, "geometry.flexible_radius_A", "must be positive");
  check(g.h > 0.0, "geometry.h_A", "must be positive");
  check(g.h <= g.flexible_radius / 2.0, "geometry.h_A", "must not exceed flexible_radius_A/2");
  check(g.box_half_width >= 4.0 * g.flexible_radius, "geometry.box_half_width_A",
        "must be at least 4 flexible radii");
  check(g.cap_angle_deg > 0.0 && g.cap_angle_deg < 90.0, "geometry.cap_angle_deg", "must lie in (0, 90)");
  if (two_ball(kind)) {
    check(g.rigid_radius > 0.0, "geometry.rigid_radius_A", "must be positive");
    check(g.h <= g.rigid_radius / 2.0, "geometry.h_A", "must not exceed rigid_radius_A/2");
    check(g.separation > g.flexible_radius + g.rigid_radius, "geometry.separation_A",
          "balls must not overlap (separation > sum of radii)");
    check(g.box_half_width >= 4.0 * g.rigid_radius, "geometry.box_half_width_A", "must be at least 4 rigid radii");
  }
  check(diel.eps_m > 0.0, "dielectric.eps_m", "must be positive");
  check(diel.eps_m < diel.eps_s, "dielectric.eps_m", "invariant eps_m < eps_s violated");
  check(diel.kappa >= 0.0, "dielectric.kappa_per_A", "must be >= 0");
  check(diel.kappa0 >= 0.0, "dielectric.kappa0_per_A", "must be >= 0");
  check(charges.rigid.empty() || diel.rigid_cavity, "dielectric.rigid_cavity",
        "must be true when rigid charges are present");
  check(elastic.lambda > 0.0, "elastic.lambda_force_per_area", "must be positive");
  check(elastic.mu > 0.0, "elastic.mu_force_per_area", "must be positive");
  check(elastic_cfg.tolerance > 0.0, "elastic.tolerance", "must be positive");
  check(elastic_cfg.max_steps > 0, "elastic.max_steps", "must be positive");
  check(pbe.tolerance > 0.0, "pbe.tolerance", "must be positive");
  check(pbe.max_steps > 0, "pbe.max_steps", "must be positive");
  check(pbe.backtrack > 0.0 && pbe.backtrack < 1.0, "pbe.backtrack", "must lie in (0, 1)");
  check(pbe.sufficient_decrease > 0.0 && pbe.sufficient_decrease < 0.5, "pbe.sufficient_decrease",
        "must lie in (0, 0.5)");
  check(pbe.max_backtracks > 0, "pbe.max_backtracks", "must be positive");
  check(delta_target > 0.0, "forces.delta_target_force_per_volume", "must be positive");
  const auto& fp = fixed_point;
  check(fp.relaxation > 0.0 && fp.relaxation <= 1.0, "fixed_point.relaxation", "must lie in (0, 1]");
  check(fp.tolerance > 0.0, "fixed_point.tolerance_rel_radius", "must be positive");
  check(fp.max_iterations > 0, "fixed_point.max_iterations", "must be positive");
  check(fp.admissibility_M > 0.0, "fixed_point.admissibility_M", "must be positive");
  check(fp.j_min > 0.0 && fp.j_min < 1.0, "fixed_point.j_min", "must lie in (0, 1)");
  for (std::size_t i = 0; i < continuation.size(); ++i) {
    check(continuation[i].kappa >= 0.0, "continuation[" + std::to_string(i) + "].kappa_per_A", "must be >= 0");
    check(continuation[i].rigid_scale >= 0.0, "continuation[" + std::to_string(i) + "].rigid_scale",
          "must be >= 0");
  }
  static const std::set<std::string> sweepable = {"rigid_scale", "kappa_per_A", "h_A", "rigid_radius_A"};
  if (!sweep.parameter.empty())
    check(sweepable.count(sweep.parameter) > 0, "sweep.parameter",
          "must be one of rigid_scale, kappa_per_A, h_A, rigid_radius_A");
  check(oracle.grid_points >= 200, "oracle.grid_points", "must be at least 200");
  check(oracle.R_out > g.flexible_radius, "oracle.R_out_A", "must exceed flexible_radius_A");
  check(!output_dir.empty(), "output_dir", "must not be empty");
  if (kind == ScenarioKind::Born) check(charges.rigid.empty(), "charges", "born scenario takes no rigid charges");
  if (kind == ScenarioKind::IonicShift)
    check(charges.rigid.empty(), "charges", "ionic_shift scenario takes no rigid charges");
  for (std::size_t i = 0; i < charges.size(); ++i)
    check(charges[i].radius > 0.0 && charges[i].position.allFinite() && std::isfinite(charges[i].q),
          "charges[" + std::to_string(i) + "]", "needs finite position/charge and positive radius");
}

ScenarioConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, std::string("config is not valid JSON: ") + e.what());
  }
  ScenarioConfig c;
  auto& d = c.defaulted;
  const json empty = json::object();
  Section top(root, "", d);
  if (!top.has("scenario")) fail(ErrorKind::Validation, "field 'scenario' is required");
  c.kind = scenario_from_string(top.get<std::string>("scenario", ""));
  c.output_dir = top.get<std::string>("output_dir", c.output_dir);
  c.seed = top.get<std::uint64_t>("seed", c.seed);

  top.has("geometry");
  {
    Section s(sub(root, "geometry", empty), "geometry", d);
    auto& g = c.geometry;
    g.flexible_radius = s.get("flexible_radius_A", g.flexible_radius);
    g.rigid_radius = s.get("rigid_radius_A", g.rigid_radius);
    g.separation = s.get("separation_A", g.separation);
    g.box_half_width = s.get("box_half_width_A", g.box_half_width);
    g.h = s.get("h_A", g.h);
    g.cap_angle_deg = s.get("cap_angle_deg", g.cap_angle_deg);
    s.finish();
  }
  top.has("dielectric");
  {
    Section s(sub(root, "dielectric", empty), "dielectric", d);
    c.diel.eps_m = s.get("eps_m", c.diel.eps_m);
    c.diel.eps_s = s.get("eps_s", c.diel.eps_s);
    c.diel.kappa = s.get("kappa_per_A", c.diel.kappa);
    c.diel.kappa0 = s.get("kappa0_per_A", c.diel.kappa0);
    c.diel.rigid_cavity = s.get("rigid_cavity", c.diel.rigid_cavity);
    s.finish();
  }
  top.has("charges");
  {
    Section s(sub(root, "charges", empty), "charges", d);
    if (s.has("file") && s.has("inline")) fail(ErrorKind::Validation, "field 'charges': give either file or inline");
    if (s.has("file")) {
      const auto f = s.get<std::string>("file", "");
      std::filesystem::path p(f);
      if (p.is_relative()) p = base_dir / p;
      if (!std::filesystem::exists(p)) fail(ErrorKind::Io, "field 'charges.file': " + p.string() + " does not exist");
      c.charge_file = p.string();
      c.charges = read_pqr_file(c.charge_file);
    } else if (s.has("inline")) {
      c.charges_inline = true;
      const json& arr = s.at("inline");
      if (!arr.is_array()) fail(ErrorKind::Validation, "field 'charges.inline' must be an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        std::vector<std::string> sink;
        Section e(arr[i], "charges.inline[" + std::to_string(i) + "]", sink);
        PointCharge pc;
        pc.position = Vec3(e.get("x_A", 0.0), e.get("y_A", 0.0), e.get("z_A", 0.0));
        pc.q = e.get("q_e", 0.0);
        pc.radius = e.get("radius_A", 0.0);
        const auto mol = e.get<std::string>("molecule", "flexible");
        if (!sink.empty()) fail(ErrorKind::Validation, "field '" + sink.front() + "' is required");
        e.finish();
        if (mol == "flexible")
          c.charges.flexible.push_back(pc);
        else if (mol == "rigid")
          c.charges.rigid.push_back(pc);
        else
          fail(ErrorKind::Validation, "field 'charges.inline[" + std::to_string(i) + "].molecule' must be flexible or rigid");
      }
    } else {
      d.push_back("charges (scenario default)");
    }
    s.finish();
  }
  top.has("elastic");
  {
    Section s(sub(root, "elastic", empty), "elastic", d);
    c.elastic.lambda = s.get("lambda_force_per_area", c.elastic.lambda);
    c.elastic.mu = s.get("mu_force_per_area", c.elastic.mu);
    c.elastic_cfg.tolerance = s.get("tolerance", c.elastic_cfg.tolerance);
    c.elastic_cfg.max_steps = s.get("max_steps", c.elastic_cfg.max_steps);
    s.finish();
  }
  top.has("pbe");
  {
    Section s(sub(root, "pbe", empty), "pbe", d);
    const auto mode = s.get<std::string>("mode", "nonlinear");
    if (mode == "nonlinear")
      c.mode = PBEMode::Nonlinear;
    else if (mode == "linearized")
      c.mode = PBEMode::Linearized;
    else
      fail(ErrorKind::Validation, "field 'pbe.mode' must be nonlinear or linearized");
    c.pbe.tolerance = s.get("tolerance", c.pbe.tolerance);
    c.pbe.max_steps = s.get("max_steps", c.pbe.max_steps);
    c.pbe.backtrack = s.get("backtrack", c.pbe.backtrack);
    c.pbe.sufficient_decrease = s.get("sufficient_decrease", c.pbe.sufficient_decrease);
    c.pbe.max_backtracks = s.get("max_backtracks", c.pbe.max_backtracks);
    s.finish();
  }
  top.has("forces");
  {
    Section s(sub(root, "forces", empty), "forces", d);
    c.delta_target = s.get("delta_target_force_per_volume", c.delta_target);
    s.finish();
  }
  top.has("fixed_point");
  {
    Section s(sub(root, "fixed_point", empty), "fixed_point", d);
    auto& f = c.fixed_point;
    f.relaxation = s.get("relaxation", f.relaxation);
    f.tolerance = s.get("tolerance_rel_radius", f.tolerance);
    f.max_iterations = s.get("max_iterations", f.max_iterations);
    f.admissibility_M = s.get("admissibility_M", f.admissibility_M);
    f.j_min = s.get("j_min", f.j_min);
    s.finish();
  }
  if (top.has("continuation")) {
    const json& arr = root.at("continuation");
    if (!arr.is_array()) fail(ErrorKind::Validation, "field 'continuation' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::vector<std::string> sink;
      Section e(arr[i], "continuation[" + std::to_string(i) + "]", sink);
      ContinuationStage st;
      st.kappa = e.get("kappa_per_A", c.diel.kappa);
      st.rigid_scale = e.get("rigid_scale", 1.0);
      st.cfg = c.fixed_point;
      e.finish();
      c.continuation.push_back(st);
    }
  } else {
    d.push_back("continuation");
  }
  top.has("sweep");
  {
    Section s(sub(root, "sweep", empty), "sweep", d);
    c.sweep.parameter = s.get<std::string>("parameter", "");
    c.sweep.values = s.get<std::vector<double>>("values", {});
    s.finish();
  }
  top.has("oracle");
  {
    Section s(sub(root, "oracle", empty), "oracle", d);
    c.oracle.grid_points = s.get("grid_points", c.oracle.grid_points);
    c.oracle.R_out = s.get("R_out_A", c.oracle.R_out);
    s.finish();
  }
  top.finish();
  if (c.charge_file.empty() && !c.charges_inline) c.charges = default_charges(c.kind, c.geometry);
  c.validate();
  return c;
}

ScenarioConfig parse_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  return parse_config_text(text, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

std::string serialize_config(const ScenarioConfig& c) {
  json j;
  j["scenario"] = to_string(c.kind);
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  const auto& g = c.geometry;
  j["geometry"] = {{"flexible_radius_A", g.flexible_radius}, {"rigid_radius_A", g.rigid_radius},
                   {"separation_A", g.separation},           {"box_half_width_A", g.box_half_width},
                   {"h_A", g.h},                             {"cap_angle_deg", g.cap_angle_deg}};
  j["dielectric"] = {{"eps_m", c.diel.eps_m},
                     {"eps_s", c.diel.eps_s},
                     {"kappa_per_A", c.diel.kappa},
                     {"kappa0_per_A", c.diel.kappa0},
                     {"rigid_cavity", c.diel.rigid_cavity}};
  if (!c.charge_file.empty()) {
    j["charges"] = {{"file", c.charge_file}};
  } else {
    json arr = json::array();
    auto add = [&](const PointCharge& p, const char* mol) {
      arr.push_back({{"molecule", mol},
                     {"x_A", p.position.x()},
                     {"y_A", p.position.y()},
                     {"z_A", p.position.z()},
                     {"q_e", p.q},
                     {"radius_A", p.radius}});
    };
    for (const auto& p : c.charges.flexible) add(p, "flexible");
    for (const auto& p : c.charges.rigid) add(p, "rigid");
    j["charges"] = {{"inline", arr}};
  }
  j["elastic"] = {{"lambda_force_per_area", c.elastic.lambda},
                  {"mu_force_per_area", c.elastic.mu},
                  {"tolerance", c.elastic_cfg.tolerance},
                  {"max_steps", c.elastic_cfg.max_steps}};
  j["pbe"] = {{"mode", c.mode == PBEMode::Nonlinear ? "nonlinear" : "linearized"},
              {"tolerance", c.pbe.tolerance},
              {"max_steps", c.pbe.max_steps},
              {"backtrack", c.pbe.backtrack},
              {"sufficient_decrease", c.pbe.sufficient_decrease},
              {"max_backtracks", c.pbe.max_backtracks}};
  j["forces"] = {{"delta_target_force_per_volume", c.delta_target}};
  const auto& f = c.fixed_point;
  j["fixed_point"] = {{"relaxation", f.relaxation},
                      {"tolerance_rel_radius", f.tolerance},
                      {"max_iterations", f.max_iterations},
                      {"admissibility_M", f.admissibility_M},
                      {"j_min", f.j_min}};
  json cont = json::array();
  for (const auto& s : c.continuation) cont.push_back({{"kappa_per_A", s.kappa}, {"rigid_scale", s.rigid_scale}});
  j["continuation"] = cont;
  j["sweep"] = {{"parameter", c.sweep.parameter}, {"values", c.sweep.values}};
  j["oracle"] = {{"grid_points", c.oracle.grid_points}, {"R_out_A", c.oracle.R_out}};
  return j.dump(2) + "\n";
}

std::string config_hash(const ScenarioConfig& cfg) {
  // where the results go does not change what is computed
  ScenarioConfig c = cfg;
  c.output_dir.clear();
  return sha256_hex(serialize_config(c));
}

}  // namespace electroelastic
