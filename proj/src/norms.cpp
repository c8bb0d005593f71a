#include "electroelastic/norms.hpp"

#include "electroelastic/quadrature.hpp"

#include <cmath>

namespace electroelastic {

namespace {

double root(double s, double p) { return p == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / p); }

Vec3 cell_gradient(const Mesh& mesh, std::size_t c, const VectorX& f) {
  const auto& t = mesh.cells[c];
  const auto& g = mesh.geometry[c].grad;
  Vec3 grad = Vec3::Zero();
  for (int a = 0; a < 4; ++a) grad += f[t[a]] * g.row(a).transpose();
  return grad;
}

}  // namespace

std::vector<char> region_cell_mask(const Mesh& mesh, Region r) {
  std::vector<char> m(mesh.num_cells(), 0);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) m[c] = mesh.cell_region[c] == r;
  return m;
}

VectorX component(const std::vector<Vec3>& v, int d) {
  VectorX out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i][d];
  return out;
}

double lp_norm(const Mesh& mesh, const VectorX& field, const std::vector<char>& cell_mask, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
      if (cell_mask[c])
        for (Index v : mesh.cells[c]) m = std::max(m, std::abs(field[v]));
    return m;
  }
  const TetRule& rule = p <= 2.0 ? tet_rule_degree2() : tet_rule_degree5();
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    if (!cell_mask[c]) continue;
    const auto& t = mesh.cells[c];
    double cs = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      double val = 0.0;
      for (int a = 0; a < 4; ++a) val += rule.points[k][a] * field[t[a]];
      cs += rule.weights[k] * std::pow(std::abs(val), p);
    }
    s += cs * mesh.geometry[c].volume;
  }
  return root(s, p);
}

std::vector<Vec3> recover_gradient(const Mesh& mesh, const VectorX& field, const std::vector<char>& cell_mask) {
  std::vector<Vec3> acc(mesh.num_vertices(), Vec3::Zero());
  std::vector<double> w(mesh.num_vertices(), 0.0);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    if (!cell_mask[c]) continue;
    const double vol = mesh.geometry[c].volume;
    const Vec3 g = cell_gradient(mesh, c, field);
    for (Index v : mesh.cells[c]) {
      acc[v] += vol * g;
      w[v] += vol;
    }
  }
  for (std::size_t v = 0; v < acc.size(); ++v)
    if (w[v] > 0.0) acc[v] /= w[v];
  return acc;
}

BrokenNorms broken_norm(const VectorX& field, const Mesh& mesh, double p) {
  require(p == 2.0 || p == 4.0 || std::isinf(p), ErrorKind::Validation, "broken_norm: p must be 2, 4 or infinity");
  require(static_cast<std::size_t>(field.size()) == mesh.num_vertices(), ErrorKind::Validation,
          "broken_norm: field size does not match the mesh");
  BrokenNorms out;
  out.p = p;
  std::vector<char> all(mesh.num_cells(), 1);
  out.whole_l2 = lp_norm(mesh, field, all, 2.0);

  for (Region r : {Region::MF, Region::MR, Region::Solvent}) {
    RegionNorms& rn = r == Region::MF ? out.mf : (r == Region::MR ? out.mr : out.solvent);
    const auto mask = region_cell_mask(mesh, r);
    double grad2 = 0.0, d2 = 0.0;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      if (!mask[c]) continue;
      rn.present = true;
      rn.volume += mesh.geometry[c].volume;
      grad2 += mesh.geometry[c].volume * cell_gradient(mesh, c, field).squaredNorm();
    }
    if (!rn.present) continue;
    rn.l2 = lp_norm(mesh, field, mask, 2.0);
    rn.linf = lp_norm(mesh, field, mask, kInfNorm);
    rn.lp = std::isinf(p) ? rn.linf : lp_norm(mesh, field, mask, p);
    rn.h1_semi = std::sqrt(grad2);
    rn.h1 = std::sqrt(rn.l2 * rn.l2 + grad2);

    const auto G = recover_gradient(mesh, field, mask);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      if (!mask[c]) continue;
      Mat3 H = Mat3::Zero();
      const auto& t = mesh.cells[c];
      for (int a = 0; a < 4; ++a) H += G[t[a]] * mesh.geometry[c].grad.row(a);
      const double hn = H.norm();
      d2 = std::isinf(p) ? std::max(d2, hn) : d2 + mesh.geometry[c].volume * std::pow(hn, p);
    }
    rn.d2_surrogate = std::isinf(p) ? d2 : root(d2, p);
  }

  for (const RegionNorms* rn : {&out.mf, &out.mr, &out.solvent}) {
    if (!rn->present) continue;
    out.aggregate.present = true;
    out.aggregate.volume += rn->volume;
    out.aggregate.lp += rn->lp;
    out.aggregate.linf += rn->linf;
    out.aggregate.l2 += rn->l2;
    out.aggregate.h1_semi += rn->h1_semi;
    out.aggregate.h1 += rn->h1;
    out.aggregate.d2_surrogate += rn->d2_surrogate;
  }
  return out;
}

double h1_norm(const Mesh& mesh, const std::vector<Vec3>& v, const std::vector<char>& cell_mask) {
  const TetRule& rule = tet_rule_degree2();
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    if (!cell_mask[c]) continue;
    const auto& t = mesh.cells[c];
    const auto& g = mesh.geometry[c];
    Mat3 grad = Mat3::Zero();
    for (int a = 0; a < 4; ++a) grad += v[t[a]] * g.grad.row(a);
    double l2 = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      Vec3 val = Vec3::Zero();
      for (int a = 0; a < 4; ++a) val += rule.points[k][a] * v[t[a]];
      l2 += rule.weights[k] * val.squaredNorm();
    }
    s += g.volume * (l2 + grad.squaredNorm());
  }
  return std::sqrt(s);
}

double cellwise_w1p(const Mesh& mesh, const std::vector<Mat3>& values, const std::vector<char>& cell_mask, double p) {
  std::vector<Mat3> nodal(mesh.num_vertices(), Mat3::Zero());
  std::vector<double> w(mesh.num_vertices(), 0.0);
  double s0 = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    if (!cell_mask[c]) continue;
    const double vol = mesh.geometry[c].volume;
    s0 = std::isinf(p) ? std::max(s0, values[c].norm()) : s0 + vol * std::pow(values[c].norm(), p);
    for (Index v : mesh.cells[c]) {
      nodal[v] += vol * values[c];
      w[v] += vol;
    }
  }
  for (std::size_t v = 0; v < nodal.size(); ++v)
    if (w[v] > 0.0) nodal[v] /= w[v];
  double s1 = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    if (!cell_mask[c]) continue;
    const auto& t = mesh.cells[c];
    double g2 = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Vec3 gij = Vec3::Zero();
        for (int a = 0; a < 4; ++a) gij += nodal[t[a]](i, j) * mesh.geometry[c].grad.row(a).transpose();
        g2 += gij.squaredNorm();
      }
    const double gn = std::sqrt(g2);
    s1 = std::isinf(p) ? std::max(s1, gn) : s1 + mesh.geometry[c].volume * std::pow(gn, p);
  }
  if (std::isinf(p)) return s0 + s1;
  return root(s0, p) + root(s1, p);
}

}  // namespace electroelastic
