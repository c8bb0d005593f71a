#include "electroelastic/forces.hpp"

#include "electroelastic/quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace electroelastic {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGLx = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                        -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                        0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGLw = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                        0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                        0.2223810344533745, 0.1012285362903763};

std::size_t flexible_cell(const PotentialDecomposition& d, const Vec3& x) {
  const auto cells = locate_point(*d.mesh, x);
  for (Index c : cells)
    if (d.mesh->cell_region[c] == Region::MF) return c;
  std::ostringstream os;
  os << "charge at (" << x.transpose() << ") is not inside the flexible molecule";
  fail(ErrorKind::Geometry, os.str());
}

ChargeSystem partners(const ChargeSystem& images, std::size_t i) {
  ChargeSystem p = images;
  p.flexible.erase(p.flexible.begin() + static_cast<std::ptrdiff_t>(i));
  return p;
}

}  // namespace

double gaussian_mass_factor(double beta) {
  // The integrand peaks at t = 0 with width ~ 1/sqrt(beta); 64 panels suffice.
  constexpr int panels = 64;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = static_cast<double>(p) / panels, half = 0.5 / panels;
    for (std::size_t k = 0; k < kGLx.size(); ++k) {
      const double t = lo + half * (1.0 + kGLx[k]);
      s += half * kGLw[k] * t * t * std::exp(beta * (1.0 - t * t));
    }
  }
  return 4.0 * kPi * s;
}

GaussianBlob fit_gaussian(double A, double R, double delta_target, int n_flexible) {
  require(R > 0.0, ErrorKind::Validation, "fit_gaussian: radius must be positive");
  require(delta_target > 0.0, ErrorKind::Validation, "fit_gaussian: delta_target must be positive");
  require(n_flexible > 0, ErrorKind::Validation, "fit_gaussian: need at least one flexible charge");
  require(std::isfinite(A), ErrorKind::Validation, "fit_gaussian: non-finite target");
  GaussianBlob b;
  b.radius = R;
  b.A = A;
  const double tail = delta_target / n_flexible;
  const double R3 = R * R * R;
  const double target = std::abs(A) / (tail * R3);  // = gaussian_mass_factor(beta)
  if (!(target > gaussian_mass_factor(0.0))) {
    b.degenerate = true;
    b.a = 0.0;
    return b;
  }
  double lo = 0.0, hi = 1.0;
  while (gaussian_mass_factor(hi) < target) {
    lo = hi;
    hi *= 2.0;
    require(hi < 1e4, ErrorKind::Overflow, "fit_gaussian: decay parameter out of range");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gaussian_mass_factor(mid) < target ? lo : hi) = mid;
  }
  const double beta = 0.5 * (lo + hi);
  b.sigma = R * R / beta;
  b.a = tail * std::exp(beta);
  return b;
}

double charge_site_potential(const PotentialDecomposition& d, std::size_t i) {
  require(i < d.charges.flexible.size(), ErrorKind::Validation, "site potential: not a flexible charge");
  const Mesh& mesh = *d.mesh;
  const Vec3& x = d.charges.flexible[i].position;
  const std::size_t c = flexible_cell(d, x);
  const auto l = barycentric(mesh, c, x);
  double v = 0.0;
  for (int a = 0; a < 4; ++a) v += l[a] * d.phi_r[mesh.cells[c][a]];
  const ChargeSystem others = partners(d.images, i);
  if (others.size() > 0) v += eval_G(others, d.diel.eps_m, d.images.flexible[i].position);
  return v;
}

Vec3 charge_site_gradient(const PotentialDecomposition& d, std::size_t i) {
  require(i < d.charges.flexible.size(), ErrorKind::Validation, "site gradient: not a flexible charge");
  const Mesh& mesh = *d.mesh;
  const Vec3& x = d.charges.flexible[i].position;
  flexible_cell(d, x);
  Vec3 g = Vec3::Zero();
  double w = 0.0;
  for (Index c : locate_point(mesh, x)) {
    if (mesh.cell_region[c] != Region::MF) continue;
    Vec3 gx = Vec3::Zero();
    for (int a = 0; a < 4; ++a) gx += d.phi_r[mesh.cells[c][a]] * mesh.geometry[c].grad.row(a).transpose();
    const double vol = mesh.geometry[c].volume;
    g += vol * d.piola->grad_phi[c].transpose().partialPivLu().solve(gx);
    w += vol;
  }
  g /= w;
  const ChargeSystem others = partners(d.images, i);
  if (others.size() > 0) g += eval_grad_G(others, d.diel.eps_m, d.images.flexible[i].position);
  return g;
}

const char* to_string(ForceState s) noexcept {
  switch (s) {
    case ForceState::State0: return "state0";
    case ForceState::State1: return "state1";
    case ForceState::State2: return "state2";
    case ForceState::State3: return "state3";
    case ForceState::Coupled: return "coupled";
  }
  return "?";
}

ForceSet ForceSet::zero(const Mesh& mesh, ForceState label) {
  ForceSet f;
  f.label = label;
  const LoadSet l = LoadSet::zero(mesh);
  f.body = l.body;
  f.surface = l.traction;
  return f;
}

LoadSet ForceSet::to_loads() const {
  LoadSet l;
  l.body = body;
  l.traction = surface;
  return l;
}

std::vector<std::vector<Vec3>> assemble_body_force(const PotentialDecomposition& d, double delta_target,
                                                   std::vector<GaussianBlob>* blobs,
                                                   std::vector<std::string>* warnings) {
  const Mesh& mesh = *d.mesh;
  const auto& rule = tet_rule_degree5();
  std::vector<std::vector<Vec3>> body(mesh.num_cells(), std::vector<Vec3>(rule.size(), Vec3::Zero()));
  const int nf = static_cast<int>(d.charges.flexible.size());
  std::vector<GaussianBlob> fitted;
  for (int i = 0; i < nf; ++i) {
    const auto& q = d.charges.flexible[i];
    const double A = q.q * charge_site_potential(d, i);
    GaussianBlob b = fit_gaussian(A, q.radius, delta_target, nf);
    b.center = q.position;
    const Vec3 g = charge_site_gradient(d, i);
    if (b.degenerate) {
      if (warnings && A != 0.0)
        warnings->push_back("charge " + std::to_string(i) + ": |A| below the tail scale, body force set to zero");
    } else if (g.norm() < 1e-12) {
      b.a = 0.0;
      b.degenerate = true;
    } else {
      b.n = (A > 0.0 ? 1.0 : -1.0) * g.normalized();
    }
    fitted.push_back(b);
  }
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    if (mesh.cell_region[c] != Region::MF) continue;
    const auto p = mesh.cell_points(c);
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const Vec3 x = barycentric_point(p, rule.points[k]);
      for (const auto& b : fitted)
        if (!b.degenerate) body[c][k] += b.value(x);
    }
  }
  if (blobs) *blobs = std::move(fitted);
  return body;
}

std::vector<Vec3> assemble_surface_force(const PotentialDecomposition& d, const PiolaFields& piola,
                                         const DielectricParams& diel, const InterfacePatch& patch) {
  const Mesh& mesh = *d.mesh;
  require(piola.F.size() == mesh.num_cells(), ErrorKind::Validation, "surface force: piola/mesh mismatch");
  const auto coef = cell_coefficients(mesh, diel);
  const TriangleRule& tri = triangle_rule_degree5();
  std::vector<Vec3> out(mesh.faces.size(), Vec3::Zero());
  for (std::size_t j = 0; j < patch.size(); ++j) {
    const Index fi = patch.faces[j];
    const Face& f = mesh.faces[fi];
    if (f.inside < 0 || f.outside < 0)
      fail(ErrorKind::Topology, "surface force: face " + std::to_string(fi) + " lacks an adjacent cell");
    const std::size_t m = f.inside, s = f.outside;
    auto local = [&](std::size_t c) {
      std::array<int, 3> loc{};
      for (int k = 0; k < 3; ++k)
        for (int a = 0; a < 4; ++a)
          if (mesh.cells[c][a] == f.v[k]) loc[k] = a;
      return loc;
    };
    const auto ls = local(s), lm = local(m);
    auto grad_r = [&](std::size_t c) {
      Vec3 g = Vec3::Zero();
      for (int a = 0; a < 4; ++a) g += d.phi_r[mesh.cells[c][a]] * mesh.geometry[c].grad.row(a).transpose();
      return g;
    };
    const Vec3 gm = grad_r(m);
    double es = 0.0, em = 0.0, phis = 0.0;
    for (std::size_t k = 0; k < tri.size(); ++k) {
      std::array<double, 4> lam_s{}, lam_m{};
      for (int v = 0; v < 3; ++v) {
        lam_s[ls[v]] = tri.points[k][v];
        lam_m[lm[v]] = tri.points[k][v];
      }
      // Solvent trace from the molecule side: shared tangential part, normal
      // part from continuity of the transformed flux.
      const Vec3& n = patch.normals[j];
      const Vec3 g_m = gm + d.grad_G_at(m, lam_m);
      const Vec3 Em = piola.F[m] * g_m;
      const Vec3 g_t = g_m - g_m.dot(n) * n;
      const Vec3 Fn = piola.F[s] * n;
      const double alpha = (coef.eps[m] / coef.eps[s] * n.dot(Em) - Fn.dot(g_t)) / n.dot(Fn);
      const Vec3 Es = piola.F[s] * (g_t + alpha * n);
      es += tri.weights[k] * Es.squaredNorm();
      em += tri.weights[k] * Em.squaredNorm();
      double pr = 0.0;
      for (int v = 0; v < 3; ++v) pr += tri.points[k][v] * d.phi_r[f.v[v]];
      phis += tri.weights[k] * (pr + d.G_at(s, lam_s));
    }
    const double maxwell = -0.5 * (coef.eps[s] * es - coef.eps[m] * em);
    const double osmotic = coef.screening[s] > 0.0 ? -coef.screening[s] * (std::cosh(phis) - 1.0) : 0.0;
    out[fi] = (maxwell + osmotic) * patch.normals[j];
  }
  return out;
}

ForceSet assemble_forces(const PotentialDecomposition& d, double delta_target, ForceState label) {
  ForceSet f;
  f.label = label;
  f.body = assemble_body_force(d, delta_target, &f.blobs, &f.warnings);
  const InterfacePatch patch = extract_interface(*d.mesh, FaceTag::GammaF);
  f.surface = assemble_surface_force(d, *d.piola, d.diel, patch);
  return f;
}

ForceSet net_forces(const ForceSet& current, const ForceSet& reference) {
  require(current.body.size() == reference.body.size() && current.surface.size() == reference.surface.size(),
          ErrorKind::Consistency, "net_forces: force layouts are not aligned");
  ForceSet out;
  out.label = current.label;
  out.body = current.body;
  for (std::size_t c = 0; c < out.body.size(); ++c) {
    require(out.body[c].size() == reference.body[c].size(), ErrorKind::Consistency,
            "net_forces: quadrature layouts are not aligned");
    for (std::size_t k = 0; k < out.body[c].size(); ++k) out.body[c][k] -= reference.body[c][k];
  }
  out.surface = current.surface;
  for (std::size_t i = 0; i < out.surface.size(); ++i) out.surface[i] -= reference.surface[i];
  return out;
}

ForceSummary summarize(const Mesh& mesh, const ForceSet& f) {
  ForceSummary s;
  const auto& rule = tet_rule_degree5();
  double b2 = 0.0, s2 = 0.0;
  for (std::size_t c = 0; c < f.body.size(); ++c) {
    if (mesh.cell_region[c] != Region::MF) continue;
    const double V = mesh.geometry[c].volume;
    for (std::size_t k = 0; k < f.body[c].size(); ++k) {
      const double w = V * rule.weights[k];
      s.body_total += w * f.body[c][k];
      s.body_abs += w * f.body[c][k].norm();
      b2 += w * f.body[c][k].squaredNorm();
    }
  }
  for (std::size_t i = 0; i < f.surface.size(); ++i) {
    if (!is_flexible_interface(mesh.faces[i].tag)) continue;
    const auto p = mesh.face_points(mesh.faces[i]);
    const double A = triangle_area_vector(p[0], p[1], p[2]).norm();
    s.surface_total += A * f.surface[i];
    s.surface_abs += A * f.surface[i].norm();
    s2 += A * f.surface[i].squaredNorm();
  }
  s.body_l2 = std::sqrt(b2);
  s.surface_l2 = std::sqrt(s2);
  return s;
}

PerturbationLedger build_perturbation_ledger(const std::vector<ForceSet>& states) {
  require(states.size() == 5, ErrorKind::Validation, "incomplete ledger: need states 0, 1, 2, 3 and coupled");
  PerturbationLedger L;
  for (int k = 0; k < 4; ++k) L.deltas[k] = net_forces(states[k + 1], states[k]);
  const ForceSet total = net_forces(states[4], states[0]);
  double r2 = 0.0;
  for (std::size_t c = 0; c < total.body.size(); ++c)
    for (std::size_t q = 0; q < total.body[c].size(); ++q) {
      Vec3 s = Vec3::Zero();
      for (const auto& d : L.deltas) s += d.body[c][q];
      r2 += (s - total.body[c][q]).squaredNorm();
    }
  for (std::size_t i = 0; i < total.surface.size(); ++i) {
    Vec3 s = Vec3::Zero();
    for (const auto& d : L.deltas) s += d.surface[i];
    r2 += (s - total.surface[i]).squaredNorm();
  }
  L.telescoping_residual = std::sqrt(r2);
  return L;
}

void write_surface_force_csv(std::ostream& os, const Mesh& mesh, const ForceSet& f) {
  os << "face,cx,cy,cz,nx,ny,nz,fx,fy,fz\n";
  char buf[512];
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    if (!is_flexible_interface(mesh.faces[i].tag)) continue;
    const auto p = mesh.face_points(mesh.faces[i]);
    const Vec3 c = (p[0] + p[1] + p[2]) / 3.0;
    const Vec3 n = triangle_area_vector(p[0], p[1], p[2]).normalized();
    const Vec3& v = f.surface[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, c.x(), c.y(),
                  c.z(), n.x(), n.y(), n.z(), v.x(), v.y(), v.z());
    os << buf;
  }
}

void write_blob_csv(std::ostream& os, const std::vector<GaussianBlob>& blobs) {
  os << "i,A,a,sigma,nx,ny,nz\n";
  char buf[256];
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const auto& b = blobs[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, b.A, b.a, b.sigma, b.n.x(),
                  b.n.y(), b.n.z());
    os << buf;
  }
}

}  // namespace electroelastic
