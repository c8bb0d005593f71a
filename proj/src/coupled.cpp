#include "electroelastic/coupled.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace electroelastic {

void FixedPointConfig::validate() const {
  require(relaxation > 0.0 && relaxation <= 1.0, ErrorKind::Validation, "relaxation must lie in (0, 1]");
  require(tolerance > 0.0, ErrorKind::Validation, "fixed-point tolerance must be positive");
  require(max_iterations > 0, ErrorKind::Validation, "max_iterations must be positive");
  require(admissibility_M > 0.0, ErrorKind::Validation, "admissibility bound M must be positive");
  require(j_min > 0.0 && j_min < 1.0, ErrorKind::Validation, "j_min must lie in (0, 1)");
}

void Scenario::validate() const {
  require(mesh != nullptr, ErrorKind::Validation, "scenario has no mesh");
  require(molecule_radius > 0.0, ErrorKind::Validation, "molecule radius must be positive");
  require(delta_target > 0.0, ErrorKind::Validation, "delta_target must be positive");
  diel.validate();
  elastic.validate();
  pbe.validate();
  elastic_cfg.validate();
  validate_charges(charges, *mesh);
  require(charges.rigid.empty() || diel.rigid_cavity, ErrorKind::Validation,
          "rigid charges need the dielectric cavity (rigid_cavity = true)");
}

DielectricParams Scenario::free_dielectric() const {
  DielectricParams d = diel;
  d.kappa = diel.kappa0;
  d.rigid_cavity = false;
  return d;
}

namespace {

ForceSet state_forces(const Scenario& sc, std::shared_ptr<const PiolaFields> piola, const ChargeSystem& charges,
                      const DielectricParams& diel, ForceState label, PotentialDecomposition* out) {
  PotentialDecomposition d = solve_pbe(*sc.mesh, std::move(piola), charges, diel, sc.pbe, sc.mode);
  ForceSet f = assemble_forces(d, sc.delta_target, label);
  if (out) *out = std::move(d);
  return f;
}

std::vector<Vec3> masked(const Mesh& mesh, const std::vector<Vec3>& u) {
  const auto mf = mesh.region_vertex_mask(Region::MF);
  std::vector<Vec3> out(mesh.num_vertices(), Vec3::Zero());
  for (std::size_t v = 0; v < out.size(); ++v)
    if (mf[v]) out[v] = u[v];
  return out;
}

DisplacementField as_field(const Mesh& mesh, const std::vector<Vec3>& u) {
  DisplacementField d = DisplacementField::zero(mesh);
  d.values = masked(mesh, u);
  return d;
}

bool all_zero(const std::vector<Vec3>& u) {
  for (const auto& x : u)
    if (!x.isZero(0.0)) return false;
  return true;
}

}  // namespace

void prepare_free_state(Scenario& sc) {
  if (sc.free) return;
  sc.validate();
  auto fs = std::make_shared<FreeState>();
  fs->forces = state_forces(sc, std::make_shared<const PiolaFields>(identity_piola(*sc.mesh)),
                            sc.charges.without_rigid(), sc.free_dielectric(), ForceState::State0, &fs->decomp);
  sc.free = std::move(fs);
}

MapResult map_S(const Scenario& sc, const std::vector<Vec3>& v, const FixedPointConfig& cfg) {
  require(sc.free != nullptr, ErrorKind::Validation, "map_S: free-state reference not prepared");
  const Mesh& mesh = *sc.mesh;
  require(v.size() == mesh.num_vertices(), ErrorKind::Validation, "map_S: displacement size mismatch");
  MapResult r;
  const DisplacementField vin = as_field(mesh, v);
  r.gate = check_admissible(mesh, vin, cfg.admissibility_M, cfg.j_min);
  if (!r.gate.admissible) {
    std::ostringstream os;
    os << "map_S: inadmissible input (surrogate norm " << r.gate.surrogate_norm << " vs M = " << cfg.admissibility_M
       << ", min J " << r.gate.min_J << ")";
    fail(ErrorKind::Inadmissible, os.str());
  }
  try {
    if (all_zero(vin.values)) {
      r.piola = std::make_shared<const PiolaFields>(identity_piola(mesh));
    } else {
      const DisplacementField w = harmonic_extend(mesh, vin.values);
      r.piola = std::make_shared<const PiolaFields>(compute_piola(mesh, w, cfg.j_min));
    }
  } catch (const Error& e) {
    fail(e.kind(), std::string("[piola] ") + e.what());
  }
  try {
    r.absolute = state_forces(sc, r.piola, sc.charges, sc.diel, ForceState::Coupled, &r.decomp);
  } catch (const Error& e) {
    fail(e.kind(), std::string("[pbe/forces] ") + e.what());
  }
  r.forces = net_forces(r.absolute, sc.free->forces);
  try {
    r.elastic = solve_elasticity(mesh, r.forces.to_loads(), sc.elastic, sc.elastic_cfg, &vin.values);
  } catch (const Error& e) {
    fail(e.kind(), std::string("[elasticity] ") + e.what());
  }
  r.u = std::move(r.elastic.u);
  r.elastic.u.clear();
  return r;
}

double CoupledState::contraction_estimate(int first, int last) const {
  const int n = static_cast<int>(increments.size());
  if (last < 0 || last > n) last = n;
  double s = 0.0;
  int m = 0;
  for (int k = std::max(first, 1); k < last; ++k) {
    if (!(increments[k - 1] > 0.0) || !(increments[k] > 0.0)) continue;
    s += std::log(increments[k] / increments[k - 1]);
    ++m;
  }
  return m > 0 ? std::exp(s / m) : 0.0;
}

CoupledState solve_coupled(Scenario& sc, const FixedPointConfig& cfg, const std::vector<Vec3>* initial) {
  cfg.validate();
  prepare_free_state(sc);
  const Mesh& mesh = *sc.mesh;
  const auto mf_cells = region_cell_mask(mesh, Region::MF);
  const double tol = cfg.tolerance * sc.molecule_radius;

  CoupledState st;
  st.u.assign(mesh.num_vertices(), Vec3::Zero());
  if (initial) st.u = masked(mesh, *initial);

  for (int k = 0; k < cfg.max_iterations; ++k) {
    MapResult m = map_S(sc, st.u, cfg);
    std::vector<Vec3> next(mesh.num_vertices());
    std::vector<Vec3> diff(mesh.num_vertices());
    for (std::size_t v = 0; v < next.size(); ++v) {
      next[v] = cfg.relaxation == 1.0 ? m.u[v] : (1.0 - cfg.relaxation) * st.u[v] + cfg.relaxation * m.u[v];
      diff[v] = next[v] - st.u[v];
    }
    const double inc = h1_norm(mesh, diff, mf_cells);
    const AdmissibilityReport gate = check_admissible(mesh, as_field(mesh, next), cfg.admissibility_M, cfg.j_min);

    CoupledTraceRow row;
    row.k = k + 1;
    row.increment = inc;
    const ForceSummary fs = summarize(mesh, m.forces);
    row.body_net = fs.body_l2;
    row.surface_net = fs.surface_l2;
    row.min_J = m.piola->min_J;
    row.energy = m.decomp.energy.trace.empty() ? 0.0 : m.decomp.energy.trace.back().energy;
    row.surrogate = gate.surrogate_norm;
    st.trace.push_back(row);
    st.increments.push_back(inc);

    st.u_prev = std::move(st.u);
    st.u = std::move(next);
    st.decomp = std::move(m.decomp);
    st.piola = m.piola;
    st.absolute = std::move(m.absolute);
    st.forces = std::move(m.forces);
    st.gate = gate;
    st.iterations = k + 1;

    if (!gate.admissible) {
      std::ostringstream os;
      os << "regime error: iterate " << k + 1 << " left the admissible set (surrogate norm "
         << gate.surrogate_norm << ", M = " << cfg.admissibility_M << ", min J " << gate.min_J
         << "); use a smaller perturbation or continuation";
      fail(ErrorKind::Inadmissible, os.str());
    }
    if (inc < tol) {
      st.converged = true;
      return st;
    }
  }
  std::ostringstream os;
  os << "fixed point did not converge in " << cfg.max_iterations << " iterations; increments:";
  for (double x : st.increments) os << ' ' << x;
  fail(ErrorKind::NonConvergence, os.str());
}

std::vector<CoupledState> run_continuation(const Scenario& base, const std::vector<ContinuationStage>& stages) {
  require(!stages.empty(), ErrorKind::Validation, "continuation: empty schedule");
  for (std::size_t i = 1; i < stages.size(); ++i) {
    const double a = std::abs(stages[i - 1].kappa - base.diel.kappa0), b = std::abs(stages[i].kappa - base.diel.kappa0);
    require(b >= a && stages[i].rigid_scale >= stages[i - 1].rigid_scale, ErrorKind::Validation,
            "continuation: stages must be monotone in perturbation strength (stage " + std::to_string(i) + ")");
  }
  Scenario sc = base;
  prepare_free_state(sc);
  std::vector<CoupledState> out;
  const std::vector<Vec3>* warm = nullptr;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    sc.diel.kappa = stages[i].kappa;
    sc.charges = base.charges.scaled(1.0, stages[i].rigid_scale);
    try {
      out.push_back(solve_coupled(sc, stages[i].cfg, warm));
    } catch (const Error& e) {
      std::ostringstream os;
      os << "continuation stage " << i << " failed (last good stage: ";
      if (i == 0)
        os << "none";
      else
        os << i - 1;
      os << "): " << e.what();
      fail(e.kind(), os.str());
    }
    warm = &out.back().u;
  }
  return out;
}

WeakFormResidual residual_weak_form(const Scenario& sc, const CoupledState& state, const std::vector<Vec3>& u) {
  const Mesh& mesh = *sc.mesh;
  WeakFormResidual r;
  const std::vector<Vec3> um = masked(mesh, u);
  PiolaFields piola = identity_piola(mesh);
  if (!all_zero(um)) piola = compute_piola(mesh, harmonic_extend(mesh, um), kDefaultJMin);
  const WeakResidual w = pbe_weak_residual(mesh, piola, sc.charges, sc.diel, state.decomp.phi_r, state.decomp.mode);
  r.pbe = w.scale > 0.0 ? w.relative() : w.residual;

  const LoadSet loads = state.forces.to_loads();
  const auto res = elastic_residual(mesh, um, loads, sc.elastic);
  const auto ext = elastic_residual(mesh, std::vector<Vec3>(mesh.num_vertices(), Vec3::Zero()), loads, sc.elastic);
  const auto clamp = clamped_vertices(mesh);
  const auto mf = mesh.region_vertex_mask(Region::MF);
  double rn = 0.0, fn = 0.0;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (!mf[v] || clamp[v]) continue;
    rn += res[v].squaredNorm();
    fn += ext[v].squaredNorm();
  }
  r.elastic = fn > 0.0 ? std::sqrt(rn / fn) : std::sqrt(rn);
  return r;
}

WeakFormResidual residual_weak_form(const Scenario& sc, const CoupledState& state) {
  return residual_weak_form(sc, state, state.u);
}

EstimateRow estimate_report(const Scenario& sc, const CoupledState& state, double p) {
  const Mesh& mesh = *sc.mesh;
  EstimateRow e;
  e.kappa_shift = std::abs(sc.diel.kappa - sc.diel.kappa0);
  if (sc.diel.rigid_cavity)
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
      if (mesh.cell_region[c] == Region::MR) e.cavity_volume += mesh.geometry[c].volume;
  for (const auto& q : sc.charges.rigid) e.added_charge += std::abs(q.q);
  if (state.piola) {
    std::vector<Mat3> FmI(mesh.num_cells());
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      FmI[c] = state.piola->F[c] - Mat3::Identity();
      e.J_minus_1_inf = std::max(e.J_minus_1_inf, std::abs(state.piola->J[c] - 1.0));
    }
    e.F_minus_I_w1p = cellwise_w1p(mesh, FmI, std::vector<char>(mesh.num_cells(), 1), p);
  }
  const ForceSummary s = summarize(mesh, state.forces);
  e.body_net = s.body_l2;
  e.surface_net = s.surface_l2;
  return e;
}

std::vector<ForceSet> ledger_states(Scenario& sc, const CoupledState& state) {
  prepare_free_state(sc);
  const auto id = std::make_shared<const PiolaFields>(identity_piola(*sc.mesh));
  std::vector<ForceSet> out;
  out.push_back(sc.free->forces);
  DielectricParams d1 = sc.free_dielectric();
  d1.kappa = sc.diel.kappa;
  out.push_back(state_forces(sc, id, sc.charges.without_rigid(), d1, ForceState::State1, nullptr));
  DielectricParams d2 = d1;
  d2.rigid_cavity = sc.diel.rigid_cavity;
  out.push_back(state_forces(sc, id, sc.charges.without_rigid(), d2, ForceState::State2, nullptr));
  out.push_back(state_forces(sc, id, sc.charges, sc.diel, ForceState::State3, nullptr));
  out.push_back(state.absolute);
  return out;
}

void write_coupled_trace_csv(std::ostream& os, const CoupledState& s) {
  os << "k,increment,body_net,surface_net,min_J,energy,surrogate\n";
  char buf[512];
  for (const auto& r : s.trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.k, r.increment, r.body_net,
                  r.surface_net, r.min_J, r.energy, r.surrogate);
    os << buf;
  }
}

}  // namespace electroelastic
