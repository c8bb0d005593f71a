#include "electroelastic/piola.hpp"

#include "electroelastic/linear_solver.hpp"
#include "electroelastic/norms.hpp"
#include "electroelastic/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace electroelastic {

DisplacementField DisplacementField::zero(const Mesh& mesh) {
  DisplacementField d;
  d.values.assign(mesh.num_vertices(), Vec3::Zero());
  d.in_mf = mesh.region_vertex_mask(Region::MF);
  return d;
}

std::vector<Vec3> DisplacementField::mf_values() const {
  std::vector<Vec3> out(values.size(), Vec3::Zero());
  for (std::size_t i = 0; i < values.size(); ++i)
    if (in_mf[i]) out[i] = values[i];
  return out;
}

DisplacementField harmonic_extend(const Mesh& mesh, const std::vector<Vec3>& u_on_mf) {
  require(u_on_mf.size() == mesh.num_vertices(), ErrorKind::Validation,
          "harmonic_extend: displacement must be indexed by mesh vertex");
  DisplacementField d;
  d.in_mf = mesh.region_vertex_mask(Region::MF);
  d.values.assign(mesh.num_vertices(), Vec3::Zero());
  for (std::size_t v = 0; v < d.values.size(); ++v)
    if (d.in_mf[v]) {
      require(u_on_mf[v].allFinite(), ErrorKind::Validation, "harmonic_extend: non-finite displacement");
      d.values[v] = u_on_mf[v];
    }

  const auto outer = mesh.outer_vertex_mask();
  std::vector<char> in_ext(mesh.num_vertices(), 0);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    if (mesh.cell_region[c] != Region::MF)
      for (Index v : mesh.cells[c]) in_ext[v] = 1;
  std::vector<char> fixed(mesh.num_vertices(), 1);
  for (std::size_t v = 0; v < fixed.size(); ++v) fixed[v] = !(in_ext[v] && !d.in_mf[v] && !outer[v]);
  const DofMap dofs = DofMap::from_fixed(fixed);
  if (dofs.n_free == 0) return d;

  std::vector<Triplet> trip;
  Eigen::Matrix<double, Eigen::Dynamic, 3> rhs = Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(dofs.n_free, 3);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    if (mesh.cell_region[c] == Region::MF) continue;
    const auto& t = mesh.cells[c];
    const auto& g = mesh.geometry[c];
    for (int a = 0; a < 4; ++a) {
      const Index ia = dofs.index[t[a]];
      if (ia < 0) continue;
      for (int b = 0; b < 4; ++b) {
        const double k = g.volume * g.grad.row(a).dot(g.grad.row(b));
        const Index ib = dofs.index[t[b]];
        if (ib >= 0)
          trip.emplace_back(ia, ib, k);
        else
          rhs.row(ia) -= k * d.values[t[b]].transpose();
      }
    }
  }
  SparseMatrix K(dofs.n_free, dofs.n_free);
  K.setFromTriplets(trip.begin(), trip.end());
  SymmetricSolver solver;
  solver.factorize(K);
  for (int comp = 0; comp < 3; ++comp) {
    const VectorX b = rhs.col(comp);
    if (b.lpNorm<Eigen::Infinity>() == 0.0) continue;
    const VectorX x = solver.solve(b);
    const double res = (K * x - b).norm();
    if (!(res <= 1e-10 * b.norm()))
      fail(ErrorKind::Assembly, "harmonic_extend: discrete residual above tolerance");
    for (std::size_t v = 0; v < fixed.size(); ++v)
      if (dofs.index[v] >= 0) d.values[v][comp] = x[dofs.index[v]];
  }
  return d;
}

Vec3 PiolaFields::map_point(const Mesh& mesh, std::size_t cell, const std::array<double, 4>& lambda) const {
  const auto& t = mesh.cells[cell];
  Vec3 x = Vec3::Zero();
  for (int a = 0; a < 4; ++a) x += lambda[a] * (mesh.vertices[t[a]] + displacement[t[a]]);
  return x;
}

PiolaFields identity_piola(const Mesh& mesh) {
  PiolaFields p;
  p.grad_phi.assign(mesh.num_cells(), Mat3::Identity());
  p.F.assign(mesh.num_cells(), Mat3::Identity());
  p.J.assign(mesh.num_cells(), 1.0);
  p.displacement.assign(mesh.num_vertices(), Vec3::Zero());
  p.min_J = 1.0;
  p.min_J_cell = mesh.num_cells() > 0 ? 0 : -1;
  return p;
}

PiolaFields compute_piola(const Mesh& mesh, const DisplacementField& disp, double j_min) {
  require(disp.values.size() == mesh.num_vertices(), ErrorKind::Validation,
          "compute_piola: displacement size does not match the mesh");
  require(disp.continuous, ErrorKind::Validation, "compute_piola: displacement is not continuous across GAMMA_F");
  PiolaFields p = identity_piola(mesh);
  p.displacement = disp.values;
  p.min_J = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells[c];
    const auto& g = mesh.geometry[c];
    Mat3 grad_u = Mat3::Zero();
    for (int a = 0; a < 4; ++a) grad_u += disp.values[t[a]] * g.grad.row(a);
    if (grad_u.isZero(0.0)) {
      // identity, exactly
    } else {
      const Mat3 A = Mat3::Identity() + grad_u;
      const double J = A.determinant();
      p.grad_phi[c] = A;
      p.J[c] = J;
      if (J > j_min) {
        const Mat3 Ainv = A.inverse();
        Mat3 F;
        // J * Ainv * Ainv^T, evaluated entrywise in a symmetric order.
        for (int i = 0; i < 3; ++i)
          for (int j = i; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += Ainv(i, k) * Ainv(j, k);
            F(i, j) = F(j, i) = J * s;
          }
        p.F[c] = F;
      }
    }
    if (p.J[c] < p.min_J) {
      p.min_J = p.J[c];
      p.min_J_cell = static_cast<Index>(c);
    }
  }
  if (!(p.min_J > j_min)) {
    std::ostringstream os;
    os << "inadmissible deformation: cell " << p.min_J_cell << " has J = " << p.min_J << " <= " << j_min;
    fail(ErrorKind::Inadmissible, os.str());
  }
  return p;
}

AdmissibilityReport check_admissible(const Mesh& mesh, const DisplacementField& disp, double bound_M, double j_min) {
  AdmissibilityReport r;
  r.bound_M = bound_M;
  r.j_min = j_min;
  const auto mf = region_cell_mask(mesh, Region::MF);
  const auto u = disp.mf_values();

  // L4 norms of |u|, |grad u|_F and the recovered second derivative over MF.
  {
    double s = 0.0, sg = 0.0, sh = 0.0;
    std::array<std::vector<Vec3>, 3> G;
    for (int d = 0; d < 3; ++d) G[d] = recover_gradient(mesh, component(u, d), mf);
    const auto& rule = tet_rule_degree5();
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      if (!mf[c]) continue;
      const auto& t = mesh.cells[c];
      const auto& g = mesh.geometry[c];
      double cs = 0.0;
      for (std::size_t k = 0; k < rule.size(); ++k) {
        Vec3 val = Vec3::Zero();
        for (int a = 0; a < 4; ++a) val += rule.points[k][a] * u[t[a]];
        cs += rule.weights[k] * val.squaredNorm() * val.squaredNorm();
      }
      s += g.volume * cs;
      Mat3 grad_u = Mat3::Zero();
      for (int a = 0; a < 4; ++a) grad_u += u[t[a]] * g.grad.row(a);
      sg += g.volume * std::pow(grad_u.squaredNorm(), 2);
      double h2 = 0.0;
      for (int d = 0; d < 3; ++d) {
        Mat3 H = Mat3::Zero();
        for (int a = 0; a < 4; ++a) H += G[d][t[a]] * g.grad.row(a);
        h2 += H.squaredNorm();
      }
      sh += g.volume * h2 * h2;
      if (!grad_u.isZero(0.0)) {
        Eigen::JacobiSVD<Mat3> svd(grad_u);
        r.max_grad_u = std::max(r.max_grad_u, svd.singularValues()[0]);
      }
    }
    r.l4_u = std::pow(s, 0.25);
    r.l4_grad = std::pow(sg, 0.25);
    r.l4_hess = std::pow(sh, 0.25);
  }
  r.surrogate_norm = r.l4_u + r.l4_grad + r.l4_hess;

  r.min_J = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells[c];
    Mat3 grad_u = Mat3::Zero();
    for (int a = 0; a < 4; ++a) grad_u += disp.values[t[a]] * mesh.geometry[c].grad.row(a);
    const double J = grad_u.isZero(0.0) ? 1.0 : (Mat3::Identity() + grad_u).determinant();
    if (J < r.min_J) {
      r.min_J = J;
      r.min_J_cell = static_cast<Index>(c);
    }
  }
  r.norm_exceeded = !(r.surrogate_norm <= bound_M);
  r.jacobian_too_small = !(r.min_J > j_min);
  r.admissible = !r.norm_exceeded && !r.jacobian_too_small;
  return r;
}

}  // namespace electroelastic
