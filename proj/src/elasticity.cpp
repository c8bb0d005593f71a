#include "electroelastic/elasticity.hpp"

#include "electroelastic/linear_solver.hpp"
#include "electroelastic/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace electroelastic {

void ElasticParams::validate() const {
  require(std::isfinite(lambda) && lambda > 0.0, ErrorKind::Validation, "lambda must be positive");
  require(std::isfinite(mu) && mu > 0.0, ErrorKind::Validation, "mu must be positive");
}

void ElasticConfig::validate() const {
  require(tolerance > 0.0, ErrorKind::Validation, "elastic tolerance must be positive");
  require(max_steps > 0 && max_backtracks > 0, ErrorKind::Validation, "elastic step limits must be positive");
}

LoadSet LoadSet::zero(const Mesh& mesh) {
  LoadSet l;
  l.body.assign(mesh.num_cells(), std::vector<Vec3>(tet_rule_degree5().size(), Vec3::Zero()));
  l.traction.assign(mesh.faces.size(), Vec3::Zero());
  return l;
}

bool LoadSet::is_zero() const {
  for (const auto& c : body)
    for (const auto& f : c)
      if (!f.isZero(0.0)) return false;
  for (const auto& t : traction)
    if (!t.isZero(0.0)) return false;
  return true;
}

Mat3 strain(const Mat3& grad_u) {
  return 0.5 * (grad_u.transpose() + grad_u + grad_u.transpose() * grad_u);
}

namespace {

Mat3 second_pk(const Mat3& E, const ElasticParams& p) {
  return p.lambda * E.trace() * Mat3::Identity() + 2.0 * p.mu * E;
}

Mat3 cell_grad(const Mesh& mesh, std::size_t c, const std::vector<Vec3>& u) {
  const auto& t = mesh.cells[c];
  const auto& g = mesh.geometry[c].grad;
  Mat3 G = Mat3::Zero();
  for (int a = 0; a < 4; ++a) G += u[t[a]] * g.row(a);
  return G;
}

void check_loads(const Mesh& mesh, const LoadSet& loads) {
  require(loads.body.empty() || loads.body.size() == mesh.num_cells(), ErrorKind::Validation,
          "body force layout does not match the mesh");
  require(loads.traction.empty() || loads.traction.size() == mesh.faces.size(), ErrorKind::Validation,
          "traction layout does not match the mesh faces");
  const std::size_t nq = tet_rule_degree5().size();
  for (std::size_t c = 0; c < loads.body.size(); ++c) {
    if (mesh.cell_region[c] != Region::MF) continue;
    require(loads.body[c].size() == nq, ErrorKind::Validation, "body force needs one value per quadrature point");
    for (const auto& f : loads.body[c]) require(f.allFinite(), ErrorKind::Validation, "non-finite body force");
  }
  for (const auto& t : loads.traction) require(t.allFinite(), ErrorKind::Validation, "non-finite traction");
}

// External load vector; counts GAMMA_F0 faces with nonzero traction.
std::vector<Vec3> external_loads(const Mesh& mesh, const LoadSet& loads, int* discarded) {
  std::vector<Vec3> f(mesh.num_vertices(), Vec3::Zero());
  const auto& rule = tet_rule_degree5();
  for (std::size_t c = 0; c < loads.body.size(); ++c) {
    if (mesh.cell_region[c] != Region::MF) continue;
    const auto& t = mesh.cells[c];
    const double V = mesh.geometry[c].volume;
    for (std::size_t k = 0; k < rule.size(); ++k)
      for (int a = 0; a < 4; ++a) f[t[a]] += V * rule.weights[k] * rule.points[k][a] * loads.body[c][k];
  }
  int dropped = 0;
  for (std::size_t i = 0; i < loads.traction.size(); ++i) {
    const Face& fc = mesh.faces[i];
    if (fc.tag == FaceTag::GammaF0) {
      if (!loads.traction[i].isZero(0.0)) ++dropped;
      continue;
    }
    if (fc.tag != FaceTag::GammaF) continue;
    const auto p = mesh.face_points(fc);
    const double A = triangle_area_vector(p[0], p[1], p[2]).norm();
    for (Index v : fc.v) f[v] += (A / 3.0) * loads.traction[i];
  }
  if (discarded) *discarded = dropped;
  return f;
}

std::vector<Vec3> internal_forces(const Mesh& mesh, const std::vector<Vec3>& u, const ElasticParams& p,
                                  double* min_J) {
  std::vector<Vec3> r(mesh.num_vertices(), Vec3::Zero());
  double mj = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    if (mesh.cell_region[c] != Region::MF) continue;
    const Mat3 G = cell_grad(mesh, c, u);
    mj = std::min(mj, (Mat3::Identity() + G).determinant());
    const Mat3 P = stress(G, p);
    const auto& g = mesh.geometry[c];
    for (int a = 0; a < 4; ++a) r[mesh.cells[c][a]] += g.volume * (P * g.grad.row(a).transpose());
  }
  if (min_J) *min_J = mj;
  return r;
}

double nodal_norm(const std::vector<Vec3>& r, const DofMap& dofs) {
  double s = 0.0;
  for (std::size_t v = 0; v < r.size(); ++v)
    for (int i = 0; i < 3; ++i)
      if (dofs.index[3 * v + i] >= 0) s += r[v][i] * r[v][i];
  return std::sqrt(s);
}

}  // namespace

Mat3 stress(const Mat3& grad_u, const ElasticParams& p) {
  return (Mat3::Identity() + grad_u) * second_pk(strain(grad_u), p);
}

double strain_energy_density(const Mat3& grad_u, const ElasticParams& p) {
  const Mat3 E = strain(grad_u);
  const double tr = E.trace();
  return 0.5 * p.lambda * tr * tr + p.mu * E.squaredNorm();
}

double hyperelastic_energy(const Mesh& mesh, const std::vector<Vec3>& u, const LoadSet& loads,
                           const ElasticParams& p) {
  check_loads(mesh, loads);
  double e = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    if (mesh.cell_region[c] == Region::MF) e += mesh.geometry[c].volume * strain_energy_density(cell_grad(mesh, c, u), p);
  const auto f = external_loads(mesh, loads, nullptr);
  for (std::size_t v = 0; v < u.size(); ++v) e -= f[v].dot(u[v]);
  return e;
}

std::vector<Vec3> elastic_residual(const Mesh& mesh, const std::vector<Vec3>& u, const LoadSet& loads,
                                   const ElasticParams& p) {
  check_loads(mesh, loads);
  auto r = internal_forces(mesh, u, p, nullptr);
  const auto f = external_loads(mesh, loads, nullptr);
  for (std::size_t v = 0; v < r.size(); ++v) r[v] -= f[v];
  return r;
}

std::vector<char> clamped_vertices(const Mesh& mesh) {
  std::vector<char> m(mesh.num_vertices(), 0);
  for (const auto& f : mesh.faces)
    if (f.tag == FaceTag::GammaF0)
      for (Index v : f.v) m[v] = 1;
  return m;
}

double incompressibility_diagnostic(const Mesh& mesh, const std::vector<Vec3>& u) {
  // For P1 fields cof(I + grad u) n dA is the deformed area vector of the face.
  double s = 0.0, vol = 0.0;
  for (const auto& f : mesh.faces) {
    if (!is_flexible_interface(f.tag)) continue;
    const auto p = mesh.face_points(f);
    const Vec3 a = p[0] + u[f.v[0]], b = p[1] + u[f.v[1]], c = p[2] + u[f.v[2]];
    s += ((a + b + c) / 3.0).dot(triangle_area_vector(a, b, c));
  }
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    if (mesh.cell_region[c] == Region::MF) vol += mesh.geometry[c].volume;
  return s - 3.0 * vol;
}

ElasticSolution solve_elasticity(const Mesh& mesh, const LoadSet& loads, const ElasticParams& p,
                                 const ElasticConfig& cfg, const std::vector<Vec3>* initial) {
  p.validate();
  cfg.validate();
  check_loads(mesh, loads);
  require(mesh.has_tag(FaceTag::GammaF0), ErrorKind::Validation, "elasticity needs a nonempty GAMMA_F0 patch");

  ElasticSolution sol;
  sol.u.assign(mesh.num_vertices(), Vec3::Zero());
  const auto f_ext = external_loads(mesh, loads, &sol.discarded_f0_faces);
  if (sol.discarded_f0_faces > 0)
    sol.warnings.push_back("traction on " + std::to_string(sol.discarded_f0_faces) +
                           " GAMMA_F0 faces discarded (Dirichlet patch)");

  const auto in_mf = mesh.region_vertex_mask(Region::MF);
  const auto clamp = clamped_vertices(mesh);
  std::vector<char> fixed(3 * mesh.num_vertices(), 1);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    if (in_mf[v] && !clamp[v]) fixed[3 * v] = fixed[3 * v + 1] = fixed[3 * v + 2] = 0;
  const DofMap dofs = DofMap::from_fixed(fixed);

  sol.load_norm = nodal_norm(f_ext, dofs);
  if (sol.load_norm == 0.0) {
    sol.residual_trace.push_back(0.0);
    sol.incompressibility = incompressibility_diagnostic(mesh, sol.u);
    return sol;
  }
  if (cfg.warm_start && initial) {
    require(initial->size() == mesh.num_vertices(), ErrorKind::Validation, "initial guess size mismatch");
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
      if (in_mf[v] && !clamp[v]) sol.u[v] = (*initial)[v];
  }

  auto residual = [&](const std::vector<Vec3>& u, double* mj) {
    auto r = internal_forces(mesh, u, p, mj);
    for (std::size_t v = 0; v < r.size(); ++v) r[v] -= f_ext[v];
    return r;
  };
  double mj = 1.0;
  auto r = residual(sol.u, &mj);
  double rn = nodal_norm(r, dofs);
  sol.residual_trace.push_back(rn);
  const double target = cfg.tolerance * sol.load_norm;

  SymmetricSolver solver;
  bool jacobian_blocked = false;
  while (rn > target) {
    if (sol.newton_steps >= cfg.max_steps) break;
    std::vector<Triplet> trip;
    trip.reserve(144 * mesh.num_cells() / 2);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      if (mesh.cell_region[c] != Region::MF) continue;
      const auto& t = mesh.cells[c];
      const auto& g = mesh.geometry[c];
      const Mat3 G = cell_grad(mesh, c, sol.u);
      const Mat3 A = Mat3::Identity() + G;
      const Mat3 S = second_pk(strain(G), p);
      for (int b = 0; b < 4; ++b)
        for (int j = 0; j < 3; ++j) {
          const Index col = dofs.index[3 * t[b] + j];
          if (col < 0) continue;
          Mat3 dG = Mat3::Zero();
          dG.row(j) = g.grad.row(b);
          const Mat3 AdG = A.transpose() * dG;
          const Mat3 dE = 0.5 * (AdG + AdG.transpose());
          const Mat3 dP = dG * S + A * second_pk(dE, p);
          for (int a = 0; a < 4; ++a) {
            const Vec3 col_a = g.volume * (dP * g.grad.row(a).transpose());
            for (int i = 0; i < 3; ++i) {
              const Index row = dofs.index[3 * t[a] + i];
              if (row >= 0) trip.emplace_back(row, col, col_a[i]);
            }
          }
        }
    }
    SparseMatrix K(dofs.n_free, dofs.n_free);
    K.setFromTriplets(trip.begin(), trip.end());
    solver.factorize(K);
    VectorX rhs(dofs.n_free);
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
      for (int i = 0; i < 3; ++i)
        if (dofs.index[3 * v + i] >= 0) rhs[dofs.index[3 * v + i]] = -r[v][i];
    const VectorX dx = solver.solve(rhs);

    double alpha = 1.0;
    bool accepted = false;
    jacobian_blocked = false;
    std::vector<Vec3> trial = sol.u;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
        for (int i = 0; i < 3; ++i)
          if (dofs.index[3 * v + i] >= 0) trial[v][i] = sol.u[v][i] + alpha * dx[dofs.index[3 * v + i]];
      double tj = 0.0;
      auto tr = residual(trial, &tj);
      const double tn = nodal_norm(tr, dofs);
      if (!(tj > 0.0)) {
        jacobian_blocked = true;
      } else if (std::isfinite(tn) && tn < rn) {
        sol.u = trial;
        r = std::move(tr);
        rn = tn;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    ++sol.newton_steps;
    sol.residual_trace.push_back(rn);
  }
  if (rn > target) {
    std::ostringstream os;
    if (jacobian_blocked) {
      os << "inadmissible load: every trial iterate has a cell with J <= 0";
      fail(ErrorKind::Inadmissible, os.str());
    }
    os << "elasticity Newton did not converge; residual trace:";
    for (double x : sol.residual_trace) os << ' ' << x;
    fail(ErrorKind::NonConvergence, os.str());
  }
  sol.incompressibility = incompressibility_diagnostic(mesh, sol.u);
  return sol;
}

}  // namespace electroelastic
