// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "electroelastic/config.hpp"
#include "electroelastic/coupled.hpp"
#include "electroelastic/io.hpp"
#include "electroelastic/run.hpp"

#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace electroelastic;
namespace fs = std::filesystem;

namespace {

struct Result {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const PiolaFields> identity(const Mesh& m) {
  return std::make_shared<const PiolaFields>(identity_piola(m));
}

DielectricParams diel(double kappa, double kappa0) {
  DielectricParams d;
  d.kappa = kappa;
  d.kappa0 = kappa0;
  return d;
}

double max_norm(const std::vector<Vec3>& u) {
  double s = 0.0;
  for (const auto& v : u) s = std::max(s, v.norm());
  return s;
}

fs::path work_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "electroelastic_acceptance" / name;
  fs::remove_all(p);
  return p;
}

// Blob conservation checked by the spherical product rule; degenerate blobs
// (zero prefactor by construction) are counted separately.
struct BlobTally {
  int checked = 0;
  int degenerate = 0;
  double worst = 0.0;
  void add(const std::vector<GaussianBlob>& blobs) {
    for (const auto& b : blobs) {
      if (b.a == 0.0) {
        ++degenerate;
        continue;
      }
      const double mass = oracle::ball_integral(b.center, b.radius, [&](const Vec3& x) { return b.density(x); });
      worst = std::max(worst, std::abs(mass - std::abs(b.A)) / std::abs(b.A));
      ++checked;
    }
  }
};

BlobTally g_blobs;
std::vector<double> g_ledger_residuals;

// 1 ---------------------------------------------------------------------------
Result born_oracle() {
  Result r;
  for (double kappa : {0.0, 1.0}) {
    const double exact = oracle::born_phi_r0(1.0, 1.0, 2.0, 80.0, kappa);
    std::vector<double> errs;
    double slowest = 0.0;
    for (double h : {0.5, 0.25, 0.125}) {
      const Mesh m = build_ball_in_box(Vec3::Zero(), 1.0, 4.0, h, Region::MF);
      ChargeSystem c;
      c.flexible.push_back(PointCharge{Vec3::Zero(), 1.0, 1.0});
      const auto t0 = std::chrono::steady_clock::now();
      const auto d = solve_pbe(m, identity(m), c, diel(kappa, kappa), PBEConfig{});
      const double phi0 = interpolate(m, d.phi_r, Vec3::Zero());
      slowest = std::max(slowest, seconds_since(t0));
      errs.push_back(std::abs(phi0 - exact) / std::abs(exact));
      if (h == 0.125) r.detail << " kappa=" << kappa << ": phi_r(0)=" << phi0 << " oracle=" << exact;
    }
    r.detail << " rel.err " << errs[0] << " > " << errs[1] << " > " << errs[2] << ", slowest solve " << slowest
             << " s;";
    r.require(errs[2] <= 0.05, "5% at h = R/8");
    r.require(errs[1] < errs[0] && errs[2] < errs[1], "strict decrease under refinement");
    r.require(slowest <= 300.0, "runtime");
  }
  return r;
}

// 2, 3, 5 (randomized suite) --------------------------------------------------
struct RandomSuite {
  int configs = 0;
  int bound_violations = 0;
  int accepted_steps = 0;
  int energy_increases = 0;
  double worst_margin = -1e300;
};

RandomSuite run_random_suite() {
  RandomSuite s;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> U(-1.0, 1.0), K(0.0, 2.0);
  std::uniform_int_distribution<int> N(1, 10);
  const Mesh ball = build_ball_in_box(Vec3::Zero(), 1.0, 4.0, 0.5, Region::MF);
  const Mesh pair = build_two_balls_in_box(TwoBallGeometry{}, 0.5);
  for (int t = 0; t < 24; ++t) {
    const bool two = t % 4 == 3;
    const Mesh& m = two ? pair : ball;
    ChargeSystem c;
    const int n = N(rng);
    for (int i = 0; i < n; ++i) {
      Vec3 x;
      do x = Vec3(U(rng), U(rng), U(rng));
      while (x.norm() > 1.0);
      const PointCharge p{0.6 * x, U(rng), 0.3};
      if (two && i % 3 == 2)
        c.rigid.push_back(PointCharge{p.position + Vec3(3, 0, 0), p.q, p.radius});
      else
        c.flexible.push_back(p);
    }
    if (c.flexible.empty()) c.flexible.push_back(PointCharge{Vec3(0.1, 0.2, -0.1), 0.5, 0.3});
    const double kappa = K(rng);
    const auto d = solve_pbe(m, identity(m), c, diel(kappa, kappa), PBEConfig{});
    ++s.configs;
    const LinfBound b = check_linf_bound(d);
    s.worst_margin = std::max(s.worst_margin, b.phi_n_max - (b.phi_l_solvent_max + b.G_solvent_max));
    if (!(b.phi_n_max <= b.phi_l_solvent_max + b.G_solvent_max + 1e-8)) ++s.bound_violations;
    const auto e = d.energy.energies();
    for (std::size_t k = 1; k < e.size(); ++k) {
      ++s.accepted_steps;
      if (e[k] > e[k - 1]) ++s.energy_increases;
    }
    std::vector<GaussianBlob> blobs;
    assemble_body_force(d, 1e-6, &blobs);
    g_blobs.add(blobs);
  }
  return s;
}

// 4, 6 and blob collection from coupled runs --------------------------------
Scenario two_sphere_scenario(std::shared_ptr<const Mesh> mesh, double q_rigid, double kappa, double kappa0) {
  Scenario sc;
  sc.mesh = std::move(mesh);
  sc.charges.flexible = {PointCharge{Vec3(0.4, 0, 0), 1.0, 0.5}, PointCharge{Vec3(-0.4, 0.1, 0), -1.0, 0.5}};
  if (q_rigid != 0.0) sc.charges.rigid = {PointCharge{Vec3(3.0, 0, 0), q_rigid, 1.0}};
  sc.diel = diel(kappa, kappa0);
  sc.elastic = ElasticParams{100.0, 100.0};
  return sc;
}

double ledger_residual(Scenario& sc, const CoupledState& st) {
  const auto states = ledger_states(sc, st);
  const PerturbationLedger led = build_perturbation_ledger(states);
  // independent re-summation of the deltas against final - reference
  double worst = 0.0;
  for (std::size_t i = 0; i < states[0].surface.size(); ++i) {
    Vec3 sum = Vec3::Zero();
    for (const auto& d : led.deltas) sum += d.surface[i];
    worst = std::max(worst, (sum - (states[4].surface[i] - states[0].surface[i])).norm());
  }
  for (std::size_t c = 0; c < states[0].body.size(); ++c)
    for (std::size_t q = 0; q < states[0].body[c].size(); ++q) {
      Vec3 sum = Vec3::Zero();
      for (const auto& d : led.deltas) sum += d.body[c][q];
      worst = std::max(worst, (sum - (states[4].body[c][q] - states[0].body[c][q])).norm());
    }
  for (const auto& f : states) g_blobs.add(f.blobs);
  return std::max(worst, led.telescoping_residual);
}

Result ledger_identity() {
  Result r;
  auto mesh = std::make_shared<const Mesh>(build_two_balls_in_box(TwoBallGeometry{}, 0.5));
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int t = 0; t < 4; ++t) {
    // odd runs: uncharged cavity
    const double q = 0.2 * U(rng);
    Scenario sc = two_sphere_scenario(mesh, t % 2 == 0 ? q : 0.0, 0.1 + 0.05 * (U(rng) + 1.0), 0.1);
    sc.charges.flexible.push_back(PointCharge{0.3 * Vec3(U(rng), U(rng), U(rng)), U(rng), 0.3});
    const CoupledState st = solve_coupled(sc, FixedPointConfig{});
    g_blobs.add(st.absolute.blobs);
    g_ledger_residuals.push_back(ledger_residual(sc, st));
  }
  // the CLI's full_coupled run reports its own ledger residual
  ScenarioConfig cfg = parse_config_text(R"({
    "scenario": "full_coupled",
    "geometry": {"h_A": 0.5},
    "dielectric": {"kappa_per_A": 0.15, "kappa0_per_A": 0.1, "rigid_cavity": true},
    "continuation": [{"kappa_per_A": 0.12, "rigid_scale": 0.5}, {"kappa_per_A": 0.15, "rigid_scale": 1.0}]
  })");
  cfg.output_dir = work_dir("full_coupled").string();
  const RunOutcome run = run_scenario(cfg);
  r.require(run.ok, "full_coupled run succeeded");
  if (run.ok) g_ledger_residuals.push_back(run.metrics.at("ledger_telescoping_residual"));
  double worst = 0.0;
  for (double x : g_ledger_residuals) worst = std::max(worst, x);
  r.detail << " " << g_ledger_residuals.size() << " ledgers, worst residual " << worst;
  r.require(worst <= 1e-12, "residual <= 1e-12");
  return r;
}

Result zero_perturbation() {
  Result r;
  auto mesh = std::make_shared<const Mesh>(build_two_balls_in_box(TwoBallGeometry{}, 0.5));
  Scenario sc = two_sphere_scenario(mesh, 0.0, 0.1, 0.1);
  sc.diel.rigid_cavity = false;
  const CoupledState st = solve_coupled(sc, FixedPointConfig{});
  g_blobs.add(st.absolute.blobs);
  g_ledger_residuals.push_back(ledger_residual(sc, st));
  r.detail << " iterations " << st.iterations << ", ||u||_inf " << max_norm(st.u);
  r.require(st.converged && st.iterations == 1, "converged at iteration 1");
  r.require(max_norm(st.u) <= 1e-10, "||u|| <= 1e-10");
  return r;
}

// 7 ---------------------------------------------------------------------------
Result contraction() {
  Result r;
  auto mesh = std::make_shared<const Mesh>(build_two_balls_in_box(TwoBallGeometry{}, 0.5));
  double prev = -1.0;
  for (double s : {0.1, 0.2, 0.4}) {
    Scenario sc = two_sphere_scenario(mesh, s, 0.1, 0.1);
    const CoupledState st = solve_coupled(sc, FixedPointConfig{});
    g_blobs.add(st.absolute.blobs);
    bool decreasing = true;
    for (std::size_t k = 2; k < st.increments.size(); ++k) decreasing &= st.increments[k] < st.increments[k - 1];
    const double rho = st.contraction_estimate(1, 6);
    r.detail << " s=" << s << ": " << st.iterations << " it, rho=" << rho << (decreasing ? "" : " (not decreasing)")
             << ";";
    r.require(decreasing, "strictly decreasing increments");
    r.require(rho > prev, "contraction estimate increases with s");
    prev = rho;
  }
  return r;
}

// 8 ---------------------------------------------------------------------------
Result cubic_gap() {
  Result r;
  const Mesh m = build_ball_in_box(Vec3::Zero(), 1.0, 4.0, 0.25, Region::MF);
  std::vector<double> xs, ys;
  for (double s : {1.0, 0.5, 0.25}) {
    ChargeSystem c;
    c.flexible.push_back(PointCharge{Vec3::Zero(), s, 1.0});
    const auto n = solve_pbe(m, identity(m), c, diel(1.0, 1.0), PBEConfig{}, PBEMode::Nonlinear);
    const auto l = solve_pbe(m, identity(m), c, diel(1.0, 1.0), PBEConfig{}, PBEMode::Linearized);
    xs.push_back(std::log(s));
    ys.push_back(std::log((n.phi_r - l.phi_r).cwiseAbs().maxCoeff()));
  }
  const double xm = (xs[0] + xs[1] + xs[2]) / 3.0, ym = (ys[0] + ys[1] + ys[2]) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (xs[i] - xm) * (ys[i] - ym);
    sxx += (xs[i] - xm) * (xs[i] - xm);
  }
  const double slope = sxy / sxx;
  r.detail << " Born ion, kappa=1, h=R/4: slope " << slope;
  r.require(std::abs(slope - 3.0) <= 0.3, "slope 3 +- 0.3");
  return r;
}

// 9 ---------------------------------------------------------------------------
Result elastic_fd() {
  Result r;
  const Mesh m = build_ball_in_box(Vec3::Zero(), 1.0, 4.0, 0.5, Region::MF);
  const ElasticParams p{100.0, 100.0};
  LoadSet loads = LoadSet::zero(m);
  for (std::size_t i = 0; i < m.faces.size(); ++i)
    if (m.faces[i].tag == FaceTag::GammaF) {
      const auto& f = m.faces[i];
      loads.traction[i] = -0.5 * (m.vertices[f.v[0]] + m.vertices[f.v[1]] + m.vertices[f.v[2]]).normalized();
    }
  for (std::size_t c = 0; c < m.num_cells(); ++c)
    if (m.cell_region[c] == Region::MF)
      for (auto& b : loads.body[c]) b = Vec3(0.3, -0.1, 0.2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const auto clamp = clamped_vertices(m);
  const auto mf = m.region_vertex_mask(Region::MF);
  std::vector<std::size_t> free;
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    if (mf[v] && !clamp[v]) free.push_back(v);
  std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    // smooth random field: the gate bounds recovered second derivatives, so nodal noise is not admissible
    Mat3 A;
    for (int i = 0; i < 9; ++i) A(i / 3, i % 3) = U(rng);
    const Vec3 k(U(rng), U(rng), U(rng)), b(U(rng), U(rng), U(rng));
    std::vector<Vec3> u(m.num_vertices(), Vec3::Zero());
    for (std::size_t v : free) {
      const Vec3& x = m.vertices[v];
      u[v] = 0.02 * (A * x + b * std::sin(2.0 * k.dot(x)));
    }
    const AdmissibilityReport gate = check_admissible(m, harmonic_extend(m, u), 1.0);
    if (!gate.admissible) r.detail << " [surrogate " << gate.surrogate_norm << ", min J " << gate.min_J << "]";
    r.require(gate.admissible, "random displacement admissible");
    const auto res = elastic_residual(m, u, loads, p);
    double num = 0.0, den = 0.0;
    for (int t = 0; t < 30; ++t) {
      const std::size_t v = free[pick(rng)];
      const int d = t % 3;
      const double h = 1e-6;
      auto up = u, dn = u;
      up[v][d] += h;
      dn[v][d] -= h;
      const double fd = (hyperelastic_energy(m, up, loads, p) - hyperelastic_energy(m, dn, loads, p)) / (2 * h);
      num += (fd - res[v][d]) * (fd - res[v][d]);
      den += res[v][d] * res[v][d];
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  r.detail << " worst relative mismatch " << worst;
  r.require(worst <= 1e-6, "relative error <= 1e-6");
  return r;
}

// 10 --------------------------------------------------------------------------
Result piola_invariants() {
  Result r;
  const Mesh m = build_two_balls_in_box(TwoBallGeometry{}, 0.5);
  const PiolaFields zero = compute_piola(m, harmonic_extend(m, std::vector<Vec3>(m.num_vertices(), Vec3::Zero())));
  bool exact = true;
  for (std::size_t c = 0; c < m.num_cells(); ++c) exact &= zero.F[c] == Mat3::Identity() && zero.J[c] == 1.0;
  r.require(exact, "F(0) = I and J(0) = 1 exactly");

  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const auto mf = m.region_vertex_mask(Region::MF);
  double worst_asym = 0.0, min_eig = 1e300;
  for (int trial = 0; trial < 8; ++trial) {
    Mat3 A;
    Vec3 k;
    for (int i = 0; i < 3; ++i) {
      k[i] = 3.0 * U(rng);
      for (int j = 0; j < 3; ++j) A(i, j) = U(rng);
    }
    std::vector<Vec3> u(m.num_vertices(), Vec3::Zero());
    for (std::size_t v = 0; v < u.size(); ++v)
      if (mf[v]) {
        const Vec3& x = m.vertices[v];
        u[v] = A * Vec3(std::sin(k.dot(x)), std::cos(k[0] * x[1]), x[0] * x[2]) + 0.1 * Vec3(U(rng), U(rng), U(rng));
      }
    DisplacementField w = harmonic_extend(m, u);
    double g = 0.0;
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      Mat3 G = Mat3::Zero();
      for (int a = 0; a < 4; ++a) G += w.values[m.cells[c][a]] * m.geometry[c].grad.row(a);
      g = std::max(g, Eigen::JacobiSVD<Mat3>(G).singularValues()[0]);
    }
    for (auto& v : u) v *= 0.2 / g;
    w = harmonic_extend(m, u);
    const PiolaFields p = compute_piola(m, w);
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      worst_asym = std::max(worst_asym, (p.F[c] - p.F[c].transpose()).cwiseAbs().maxCoeff());
      min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Mat3>(p.F[c]).eigenvalues().minCoeff());
    }
  }
  r.detail << " 8 fields at |grad u| = 0.2: max asymmetry " << worst_asym << ", min eigenvalue " << min_eig;
  r.require(worst_asym <= 1e-12, "symmetry to 1e-12");
  r.require(min_eig > 0.0, "positive definite");
  return r;
}

// 11 --------------------------------------------------------------------------
Result determinism() {
  Result r;
  const std::vector<std::string> texts = {
      R"({"scenario": "born", "geometry": {"h_A": 0.5}, "dielectric": {"kappa_per_A": 1.0, "kappa0_per_A": 1.0}})",
      R"({"scenario": "two_spheres", "geometry": {"h_A": 0.5}, "dielectric": {"kappa_per_A": 0.1, "kappa0_per_A": 0.1}})",
      R"({"scenario": "full_coupled", "geometry": {"h_A": 0.5},
          "dielectric": {"kappa_per_A": 0.15, "kappa0_per_A": 0.1},
          "continuation": [{"kappa_per_A": 0.12, "rigid_scale": 0.5}, {"kappa_per_A": 0.15, "rigid_scale": 1.0}]})"};
  int compared = 0, differing = 0;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::vector<fs::path> dirs;
    for (int run = 0; run < 2; ++run) {
      ScenarioConfig cfg = parse_config_text(texts[i]);
      cfg.output_dir = work_dir("det" + std::to_string(i) + "_" + std::to_string(run)).string();
      const RunOutcome o = run_scenario(cfg);
      r.require(o.ok, "run succeeded");
      dirs.push_back(cfg.output_dir);
    }
    for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
      if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
      const fs::path other = dirs[1] / fs::relative(e.path(), dirs[0]);
      ++compared;
      if (!fs::exists(other) || read_text_file(e.path()) != read_text_file(other)) {
        ++differing;
        r.detail << " differs: " << fs::relative(e.path(), dirs[0]).string();
      }
    }
  }
  r.detail << " " << compared << " CSV files compared across 3 scenarios, " << differing << " differ";
  r.require(compared > 0 && differing == 0, "byte-identical CSV");
  return r;
}

// 12 --------------------------------------------------------------------------
Result scaling() {
  Result r;
  // ionic strength: coupled net surface force of the ionic-shift scenario
  {
    auto mesh = std::make_shared<const Mesh>(build_ball_in_box(Vec3::Zero(), 1.0, 4.0, 0.25, Region::MF));
    std::vector<double> norms;
    for (double d : {0.01, 0.02, 0.04}) {
      Scenario sc = two_sphere_scenario(mesh, 0.0, 0.1 + d, 0.1);
      const CoupledState st = solve_coupled(sc, FixedPointConfig{});
      g_blobs.add(st.absolute.blobs);
      norms.push_back(summarize(*mesh, st.forces).surface_l2);
    }
    const double g1 = norms[1] / norms[0], g2 = norms[2] / norms[1];
    r.detail << " |kappa-kappa0| 0.01->0.02->0.04: growth " << g1 << ", " << g2 << ";";
    r.require(g1 >= 1.5 && g1 <= 2.5 && g2 >= 1.5 && g2 <= 2.5, "kappa growth in [1.5, 2.5]");
  }
  // cavity volume: uncharged rigid ball, dielectric-cavity step of the ledger
  {
    std::vector<double> norms, volumes;
    for (int k = 0; k < 3; ++k) {
      TwoBallGeometry g;
      g.separation = 4.0;
      g.rigid_radius = 0.5 * std::cbrt(std::pow(2.0, k));
      auto mesh = std::make_shared<const Mesh>(build_two_balls_in_box(g, 0.25));
      Scenario sc = two_sphere_scenario(mesh, 0.0, 0.1, 0.1);
      const auto states = ledger_states(sc, CoupledState{});
      norms.push_back(summarize(*mesh, net_forces(states[2], states[1])).surface_l2);
      double v = 0.0;
      for (std::size_t c = 0; c < mesh->num_cells(); ++c)
        if (mesh->cell_region[c] == Region::MR) v += mesh->geometry[c].volume;
      volumes.push_back(v);
    }
    const double g1 = norms[1] / norms[0], g2 = norms[2] / norms[1];
    r.detail << " V_mr " << volumes[0] << "->" << volumes[1] << "->" << volumes[2] << ": growth " << g1 << ", " << g2;
    r.require(g1 >= 1.5 && g1 <= 2.5 && g2 >= 1.5 && g2 <= 2.5, "cavity growth in [1.5, 2.5]");
  }
  return r;
}

}  // namespace

int main() {
  int failures = 0;
  std::map<int, std::string> lines;
  auto report = [&](int n, const char* name, const std::function<Result()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = f();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail << " exception: " << e.what();
    }
    if (!r.pass) ++failures;
    char head[160];
    std::snprintf(head, sizeof head, "criterion %2d %s  %s:", n, r.pass ? "PASS" : "FAIL", name);
    char tail[32];
    std::snprintf(tail, sizeof tail, " (%.1f s)", seconds_since(t0));
    lines[n] = head + r.detail.str() + tail;
    std::fprintf(stderr, "%s\n", lines[n].c_str());
  };

  RandomSuite suite;
  report(1, "Born-ion oracle equivalence", born_oracle);
  report(2, "L-infinity bound", [&] {
    Result r;
    suite = run_random_suite();
    r.detail << " " << suite.configs << " random configurations, " << suite.bound_violations
             << " violations, worst margin " << suite.worst_margin;
    r.require(suite.configs >= 20 && suite.bound_violations == 0, "no violations over >= 20 configurations");
    return r;
  });
  report(3, "energy monotonicity", [&] {
    Result r;
    r.detail << " " << suite.accepted_steps << " accepted Newton steps, " << suite.energy_increases << " increases";
    r.require(suite.accepted_steps > 0 && suite.energy_increases == 0, "all steps non-increasing");
    return r;
  });
  report(4, "telescoping ledger identity", ledger_identity);
  report(6, "zero-perturbation fixed point", zero_perturbation);
  report(7, "contraction in the small regime", contraction);
  report(8, "cubic nonlinear-linear gap", cubic_gap);
  report(9, "elasticity residual-energy consistency", elastic_fd);
  report(10, "Piola invariants", piola_invariants);
  report(11, "determinism", determinism);
  report(12, "scaling diagnostics", scaling);
  // blobs are collected from every run above
  report(5, "Gaussian force conservation", [] {
    Result r;
    r.detail << " " << g_blobs.checked << " blobs, worst relative error " << g_blobs.worst << ", "
             << g_blobs.degenerate << " zeroed";
    r.require(g_blobs.checked > 0 && g_blobs.worst <= 1e-6, "conservation to 1e-6");
    return r;
  });
  for (const auto& [n, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%d of %zu criteria failed\n", failures, lines.size());
  return failures == 0 ? 0 : 1;
}
