#include "electroelastic/pbe.hpp"

#include "electroelastic/linear_solver.hpp"
#include "electroelastic/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace electroelastic {

void PBEConfig::validate() const {
  require(tolerance > 0.0, ErrorKind::Validation, "pbe tolerance must be positive");
  require(max_steps > 0, ErrorKind::Validation, "pbe max_steps must be positive");
  require(backtrack > 0.0 && backtrack < 1.0, ErrorKind::Validation, "pbe backtracking factor must lie in (0,1)");
  require(sufficient_decrease > 0.0 && sufficient_decrease < 0.5, ErrorKind::Validation,
          "pbe sufficient-decrease constant must lie in (0, 0.5)");
  require(max_backtracks > 0, ErrorKind::Validation, "pbe max_backtracks must be positive");
}

std::vector<double> EnergyReport::energies() const {
  std::vector<double> e;
  for (const auto& s : trace) e.push_back(s.energy);
  return e;
}

double interpolate(const Mesh& mesh, const VectorX& field, const Vec3& x, Index* cell_out) {
  const auto cells = locate_point(mesh, x);
  if (cells.empty()) {
    std::ostringstream os;
    os << "point (" << x.transpose() << ") lies outside the mesh";
    fail(ErrorKind::Geometry, os.str());
  }
  const Index c = cells.front();
  if (cell_out) *cell_out = c;
  const auto l = barycentric(mesh, c, x);
  double v = 0.0;
  for (int a = 0; a < 4; ++a) v += l[a] * field[mesh.cells[c][a]];
  return v;
}

ChargeSystem map_charges(const Mesh& mesh, const PiolaFields& piola, const ChargeSystem& charges) {
  ChargeSystem out = charges;
  auto move = [&](PointCharge& c) {
    const auto cells = locate_point(mesh, c.position);
    if (cells.empty()) fail(ErrorKind::Geometry, "charge lies outside the mesh");
    c.position = piola.map_point(mesh, cells.front(), barycentric(mesh, cells.front(), c.position));
  };
  bool moved = false;
  for (const auto& d : piola.displacement)
    if (!d.isZero(0.0)) {
      moved = true;
      break;
    }
  if (!moved) return out;
  for (auto& c : out.flexible) move(c);
  for (auto& c : out.rigid) move(c);
  return out;
}

CellCoefficients cell_coefficients(const Mesh& mesh, const DielectricParams& diel) {
  CellCoefficients k;
  k.eps.resize(mesh.num_cells());
  k.screening.resize(mesh.num_cells());
  const double k2 = diel.screening();
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const Region r = mesh.cell_region[c];
    const bool solvent = r == Region::Solvent || (r == Region::MR && !diel.rigid_cavity);
    k.eps[c] = solvent ? diel.eps_s : diel.eps_m;
    k.screening[c] = solvent ? k2 : 0.0;
  }
  return k;
}

double PotentialDecomposition::G_at(std::size_t cell, const std::array<double, 4>& lambda) const {
  return eval_G(images, diel.eps_m, piola->map_point(*mesh, cell, lambda));
}

Vec3 PotentialDecomposition::grad_G_at(std::size_t cell, const std::array<double, 4>& lambda) const {
  const Vec3 y = piola->map_point(*mesh, cell, lambda);
  return piola->grad_phi[cell].transpose() * eval_grad_G(images, diel.eps_m, y);
}

namespace {

constexpr double kOverflowArg = 700.0;

// Discrete operators of the regular-component problem on a fixed mesh/map.
class PBESystem {
 public:
  PBESystem(const Mesh& mesh, const PiolaFields& piola, const ChargeSystem& charges, const DielectricParams& diel,
            PBEMode mode)
      : mesh_(mesh), piola_(piola), diel_(diel), mode_(mode), rule_(tet_rule_high()) {
    diel.validate();
    require(piola.J.size() == mesh.num_cells(), ErrorKind::Validation, "piola fields do not match the mesh");
    require(piola.min_J > 0.0, ErrorKind::Inadmissible, "piola fields are not admissible");
    images_ = map_charges(mesh, piola, charges);
    coef_ = cell_coefficients(mesh, diel);
    fixed_ = mesh.outer_vertex_mask();
    dofs_ = DofMap::from_fixed(fixed_);
    assemble_stiffness();
    assemble_source();
    assemble_datum();
    cache_G();
  }

  const DofMap& dofs() const { return dofs_; }
  const SparseMatrix& K() const { return K_; }
  const SparseMatrix& A() const { return A_; }
  const VectorX& ell() const { return ell_; }
  const VectorX& datum() const { return gD_; }
  const ChargeSystem& images() const { return images_; }
  bool has_reaction() const { return !react_cells_.empty(); }

  VectorX restrict(const VectorX& full) const {
    VectorX r(dofs_.n_free);
    for (Eigen::Index i = 0; i < full.size(); ++i)
      if (dofs_.index[i] >= 0) r[dofs_.index[i]] = full[i];
    return r;
  }
  VectorX prolong(const VectorX& free) const {
    VectorX f = VectorX::Zero(mesh_.num_vertices());
    for (Eigen::Index i = 0; i < f.size(); ++i)
      if (dofs_.index[i] >= 0) f[i] = free[dofs_.index[i]];
    return f;
  }

  /// Effective right-hand side of the linear component: ell - K g_D on free rows.
  VectorX linear_rhs() const { return restrict(ell_ - K_ * gD_); }

  double max_abs_arg(const VectorX& v) const {
    double m = 0.0;
    for (std::size_t i = 0; i < react_cells_.size(); ++i) {
      const auto& t = mesh_.cells[react_cells_[i]];
      for (std::size_t k = 0; k < rule_.size(); ++k) m = std::max(m, std::abs(arg(v, t, i, k)));
    }
    return m;
  }

  double f(double x) const { return mode_ == PBEMode::Linearized ? x : std::sinh(x); }
  double df(double x) const { return mode_ == PBEMode::Linearized ? 1.0 : std::cosh(x); }
  // cosh(x) - 1, or its quadratic part; the constant drops out of every difference.
  double F(double x) const {
    if (mode_ == PBEMode::Linearized) return 0.5 * x * x;
    const double s = std::sinh(0.5 * x);
    return 2.0 * s * s;
  }
  // F(x + d) - F(x) without cancellation.
  double dF(double x, double d) const {
    if (mode_ == PBEMode::Linearized) return d * (x + 0.5 * d);
    return 2.0 * std::sinh(x + 0.5 * d) * std::sinh(0.5 * d);
  }

  /// Reaction term residual, int J k^2 f(v + G) N_a, for all nodes.
  VectorX reaction_residual(const VectorX& v) const {
    VectorX r = VectorX::Zero(mesh_.num_vertices());
    for (std::size_t i = 0; i < react_cells_.size(); ++i) {
      const std::size_t c = react_cells_[i];
      const auto& t = mesh_.cells[c];
      const double scale = coef_.screening[c] * piola_.J[c] * mesh_.geometry[c].volume;
      for (std::size_t k = 0; k < rule_.size(); ++k) {
        const double s = scale * rule_.weights[k] * f(arg(v, t, i, k));
        for (int a = 0; a < 4; ++a) r[t[a]] += s * rule_.points[k][a];
      }
    }
    return r;
  }

  void reaction_jacobian(const VectorX& v, std::vector<Triplet>& trip) const {
    for (std::size_t i = 0; i < react_cells_.size(); ++i) {
      const std::size_t c = react_cells_[i];
      const auto& t = mesh_.cells[c];
      const double scale = coef_.screening[c] * piola_.J[c] * mesh_.geometry[c].volume;
      Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
      for (std::size_t k = 0; k < rule_.size(); ++k) {
        const double s = scale * rule_.weights[k] * df(arg(v, t, i, k));
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) M(a, b) += s * rule_.points[k][a] * rule_.points[k][b];
      }
      for (int a = 0; a < 4; ++a) {
        const Index ia = dofs_.index[t[a]];
        if (ia < 0) continue;
        for (int b = 0; b < 4; ++b) {
          const Index ib = dofs_.index[t[b]];
          if (ib >= 0) trip.emplace_back(ia, ib, M(a, b));
        }
      }
    }
  }

  double reaction_energy(const VectorX& v) const {
    double e = 0.0;
    for (std::size_t i = 0; i < react_cells_.size(); ++i) {
      const std::size_t c = react_cells_[i];
      const auto& t = mesh_.cells[c];
      double ce = 0.0;
      for (std::size_t k = 0; k < rule_.size(); ++k) ce += rule_.weights[k] * F(arg(v, t, i, k));
      e += coef_.screening[c] * piola_.J[c] * mesh_.geometry[c].volume * ce;
    }
    return e;
  }

  double reaction_energy_change(const VectorX& v, const VectorX& d) const {
    double e = 0.0;
    for (std::size_t i = 0; i < react_cells_.size(); ++i) {
      const std::size_t c = react_cells_[i];
      const auto& t = mesh_.cells[c];
      double ce = 0.0;
      for (std::size_t k = 0; k < rule_.size(); ++k) {
        double dd = 0.0;
        for (int a = 0; a < 4; ++a) dd += rule_.points[k][a] * d[t[a]];
        ce += rule_.weights[k] * dF(arg(v, t, i, k), dd);
      }
      e += coef_.screening[c] * piola_.J[c] * mesh_.geometry[c].volume * ce;
    }
    return e;
  }

  /// Full energy E(w) = 1/2 w.K w + reaction - ell.w.
  double energy(const VectorX& w) const { return 0.5 * w.dot(K_ * w) + reaction_energy(w) - ell_.dot(w); }

  const std::vector<Index>& react_cells() const { return react_cells_; }

 private:
  const Mesh& mesh_;
  const PiolaFields& piola_;
  DielectricParams diel_;
  PBEMode mode_;
  const TetRule& rule_;
  ChargeSystem images_;
  CellCoefficients coef_;
  std::vector<char> fixed_;
  DofMap dofs_;
  SparseMatrix K_, A_;
  VectorX ell_, gD_;
  std::vector<Index> react_cells_;
  std::vector<double> Gq_;  // G at quadrature points of reaction cells

  double arg(const VectorX& v, const std::array<Index, 4>& t, std::size_t i, std::size_t k) const {
    const auto& l = rule_.points[k];
    return l[0] * v[t[0]] + l[1] * v[t[1]] + l[2] * v[t[2]] + l[3] * v[t[3]] + Gq_[i * rule_.size() + k];
  }

  void assemble_stiffness() {
    std::vector<Triplet> full, free;
    full.reserve(mesh_.num_cells() * 16);
    free.reserve(mesh_.num_cells() * 16);
    for (std::size_t c = 0; c < mesh_.num_cells(); ++c) {
      const auto& t = mesh_.cells[c];
      const auto& g = mesh_.geometry[c];
      const Eigen::Matrix<double, 4, 3> FG = g.grad * piola_.F[c];
      const Eigen::Matrix4d Kc = (coef_.eps[c] * g.volume) * (FG * g.grad.transpose());
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          full.emplace_back(t[a], t[b], Kc(a, b));
          const Index ia = dofs_.index[t[a]], ib = dofs_.index[t[b]];
          if (ia >= 0 && ib >= 0) free.emplace_back(ia, ib, Kc(a, b));
        }
    }
    const Index n = static_cast<Index>(mesh_.num_vertices());
    K_.resize(n, n);
    K_.setFromTriplets(full.begin(), full.end());
    A_.resize(dofs_.n_free, dofs_.n_free);
    A_.setFromTriplets(free.begin(), free.end());
  }

  void assemble_source() {
    ell_ = VectorX::Zero(mesh_.num_vertices());
    if (images_.size() == 0) return;
    const TriangleRule& tri = triangle_rule_degree5();
    for (std::size_t i = 0; i < mesh_.faces.size(); ++i) {
      const Face& f = mesh_.faces[i];
      if (f.tag == FaceTag::Outer) continue;
      if (f.outside < 0) fail(ErrorKind::Topology, "interface face " + std::to_string(i) + " has no solvent cell");
      const std::size_t s = f.outside;
      const double jump = coef_.eps[s] - coef_.eps[f.inside];
      if (jump == 0.0) continue;
      const auto p = mesh_.face_points(f);
      const Vec3 av = triangle_area_vector(p[0], p[1], p[2]);
      const double area = av.norm();
      const Vec3 n = av / area;
      // Local positions of the face vertices in the solvent cell.
      std::array<int, 3> loc{};
      for (int j = 0; j < 3; ++j)
        for (int a = 0; a < 4; ++a)
          if (mesh_.cells[s][a] == f.v[j]) loc[j] = a;
      const Mat3 FGt = piola_.F[s] * piola_.grad_phi[s].transpose();
      for (std::size_t k = 0; k < tri.size(); ++k) {
        std::array<double, 4> lam{};
        for (int j = 0; j < 3; ++j) lam[loc[j]] = tri.points[k][j];
        const Vec3 y = piola_.map_point(mesh_, s, lam);
        const double flux = jump * (FGt * eval_grad_G(images_, diel_.eps_m, y)).dot(n);
        for (int j = 0; j < 3; ++j) ell_[f.v[j]] += tri.weights[k] * area * flux * tri.points[k][j];
      }
    }
  }

  void assemble_datum() {
    gD_ = VectorX::Zero(mesh_.num_vertices());
    if (images_.size() == 0) return;
    for (std::size_t v = 0; v < mesh_.num_vertices(); ++v) {
      if (!fixed_[v]) continue;
      const Vec3 x = mesh_.vertices[v] + piola_.displacement[v];
      gD_[v] = eval_g_boundary(images_, diel_, x) - eval_G(images_, diel_.eps_m, x);
    }
  }

  void cache_G() {
    for (std::size_t c = 0; c < mesh_.num_cells(); ++c)
      if (coef_.screening[c] > 0.0) react_cells_.push_back(static_cast<Index>(c));
    Gq_.assign(react_cells_.size() * rule_.size(), 0.0);
    if (images_.size() == 0) return;
    for (std::size_t i = 0; i < react_cells_.size(); ++i)
      for (std::size_t k = 0; k < rule_.size(); ++k)
        Gq_[i * rule_.size() + k] =
            eval_G(images_, diel_.eps_m, piola_.map_point(mesh_, react_cells_[i], rule_.points[k]));
  }
};

VectorX solve_linear(const PBESystem& sys) {
  VectorX phi = sys.datum();
  const VectorX b = sys.linear_rhs();
  if (b.size() == 0 || b.lpNorm<Eigen::Infinity>() == 0.0) return phi;
  SymmetricSolver solver;
  solver.factorize(sys.A());
  const VectorX x = solver.solve(b);
  const double res = (sys.A() * x - b).norm();
  if (!(res <= 1e-10 * b.norm())) fail(ErrorKind::Assembly, "linear component: discrete residual above tolerance");
  const VectorX full = sys.prolong(x);
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    if (sys.dofs().index[i] >= 0) phi[i] = full[i];
  return phi;
}

NonlinearResult solve_nonlinear(const PBESystem& sys, const VectorX& phi_l, const PBEConfig& cfg) {
  cfg.validate();
  NonlinearResult out;
  const std::size_t n = phi_l.size();
  out.phi_n = VectorX::Zero(n);
  EnergyReport& rep = out.energy;

  if (sys.max_abs_arg(phi_l) > kOverflowArg)
    fail(ErrorKind::Overflow, "clipped argument: |phi + G| exceeds 700 in the solvent (unphysical setup)");

  const SparseMatrix& K = sys.K();
  auto residual = [&](const VectorX& phi_n) {
    return sys.restrict(K * phi_n + sys.reaction_residual(phi_l + phi_n));
  };

  VectorX r = residual(out.phi_n);
  const double r0 = r.norm();
  double E = sys.energy(phi_l);
  rep.trace.push_back({0, r0, E, 1.0});
  const double target = cfg.tolerance * (1.0 + r0);

  SymmetricSolver solver;
  for (int it = 1; it <= cfg.max_steps + 1; ++it) {
    if (r.norm() <= target) {
      rep.converged = true;
      break;
    }
    if (it > cfg.max_steps) break;
    std::vector<Triplet> trip;
    sys.reaction_jacobian(phi_l + out.phi_n, trip);
    SparseMatrix Jm(sys.dofs().n_free, sys.dofs().n_free);
    Jm.setFromTriplets(trip.begin(), trip.end());
    Jm += sys.A();
    solver.factorize(Jm);
    const VectorX dx = sys.prolong(-solver.solve(r));
    const double slope = r.dot(sys.restrict(dx));

    double alpha = 1.0;
    bool accepted = false;
    double dE = 0.0;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      const VectorX d = alpha * dx;
      if (sys.max_abs_arg(phi_l + out.phi_n + d) <= kOverflowArg) {
        dE = 0.5 * d.dot(K * (2.0 * out.phi_n + d)) + sys.reaction_energy_change(phi_l + out.phi_n, d);
        if (std::isfinite(dE) && dE <= cfg.sufficient_decrease * alpha * slope) {
          accepted = true;
          break;
        }
      }
      ++rep.rejected_trials;
      alpha *= cfg.backtrack;
    }
    if (!accepted) break;
    out.phi_n += alpha * dx;
    E += dE;
    if (dE > 0.0) rep.monotone_nonincreasing = false;
    r = residual(out.phi_n);
    rep.trace.push_back({it, r.norm(), E, alpha});
  }
  if (!rep.converged) {
    std::ostringstream os;
    os << "nonlinear component: Newton stagnated after " << rep.trace.size() - 1 << " steps; residual trace:";
    for (const auto& s : rep.trace) os << ' ' << s.residual;
    fail(ErrorKind::NonConvergence, os.str());
  }
  return out;
}

}  // namespace

VectorX solve_linear_component(const Mesh& mesh, const PiolaFields& piola, const ChargeSystem& charges,
                               const DielectricParams& diel) {
  const PBESystem sys(mesh, piola, charges, diel, PBEMode::Nonlinear);
  return solve_linear(sys);
}

NonlinearResult solve_nonlinear_component(const Mesh& mesh, const PiolaFields& piola, const ChargeSystem& charges,
                                          const DielectricParams& diel, const VectorX& phi_l, const PBEConfig& cfg,
                                          PBEMode mode) {
  require(static_cast<std::size_t>(phi_l.size()) == mesh.num_vertices(), ErrorKind::Validation,
          "phi_l does not match the mesh");
  const PBESystem sys(mesh, piola, charges, diel, mode);
  return solve_nonlinear(sys, phi_l, cfg);
}

PotentialDecomposition solve_pbe(const Mesh& mesh, std::shared_ptr<const PiolaFields> piola,
                                 const ChargeSystem& charges, const DielectricParams& diel, const PBEConfig& cfg,
                                 PBEMode mode) {
  require(piola != nullptr, ErrorKind::Validation, "solve_pbe: missing piola fields");
  const PBESystem sys(mesh, *piola, charges, diel, mode);
  PotentialDecomposition d;
  d.mesh = &mesh;
  d.piola = piola;
  d.charges = charges;
  d.images = sys.images();
  d.diel = diel;
  d.mode = mode;
  d.phi_l = solve_linear(sys);
  NonlinearResult nl = solve_nonlinear(sys, d.phi_l, cfg);
  d.phi_n = std::move(nl.phi_n);
  d.energy = std::move(nl.energy);
  d.phi_r = d.phi_l + d.phi_n;
  enforce_linf_bound(d);
  return d;
}

double eval_energy(const Mesh& mesh, const PiolaFields& piola, const ChargeSystem& charges,
                   const DielectricParams& diel, const VectorX& w, PBEMode mode) {
  require(w.allFinite(), ErrorKind::Validation, "eval_energy: non-finite field");
  const PBESystem sys(mesh, piola, charges, diel, mode);
  if (sys.max_abs_arg(w) > kOverflowArg)
    fail(ErrorKind::Overflow, "clipped argument: |w + G| exceeds 700 in the solvent");
  return sys.energy(w);
}

LinfBound check_linf_bound(const PotentialDecomposition& d) {
  const Mesh& mesh = *d.mesh;
  const auto coef = cell_coefficients(mesh, d.diel);
  std::vector<char> solvent(mesh.num_vertices(), 0);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    if (coef.eps[c] == d.diel.eps_s && mesh.cell_region[c] != Region::MF &&
        (mesh.cell_region[c] == Region::Solvent || !d.diel.rigid_cavity))
      for (Index v : mesh.cells[c]) solvent[v] = 1;
  LinfBound b;
  b.phi_n_max = d.phi_n.lpNorm<Eigen::Infinity>();
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (!solvent[v]) continue;
    b.phi_l_solvent_max = std::max(b.phi_l_solvent_max, std::abs(d.phi_l[v]));
    if (d.images.size() > 0)
      b.G_solvent_max = std::max(
          b.G_solvent_max, std::abs(eval_G(d.images, d.diel.eps_m, mesh.vertices[v] + d.piola->displacement[v])));
  }
  b.holds = b.phi_n_max <= b.phi_l_solvent_max + b.G_solvent_max + 1e-8;
  return b;
}

void enforce_linf_bound(const PotentialDecomposition& d) {
  const LinfBound b = check_linf_bound(d);
  if (!b.holds) {
    std::ostringstream os;
    os << "L-infinity bound violated: ||phi_n|| = " << b.phi_n_max << " > " << b.phi_l_solvent_max << " + "
       << b.G_solvent_max;
    fail(ErrorKind::Consistency, os.str());
  }
}

WeakResidual pbe_weak_residual(const Mesh& mesh, const PiolaFields& piola, const ChargeSystem& charges,
                               const DielectricParams& diel, const VectorX& phi_r, PBEMode mode) {
  const PBESystem sys(mesh, piola, charges, diel, mode);
  WeakResidual w;
  const VectorX r = sys.restrict(sys.K() * phi_r + sys.reaction_residual(phi_r) - sys.ell());
  w.residual = r.norm();
  w.scale = sys.linear_rhs().norm();
  return w;
}

}  // namespace electroelastic
