#include "electroelastic/charges.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace electroelastic {

namespace {

constexpr double kSingularDistance = 1e-12;

double guarded_distance(const Vec3& x, const PointCharge& c) {
  const double r = (x - c.position).norm();
  if (!(r > kSingularDistance)) {
    std::ostringstream os;
    os << "singular field evaluated at charge center (" << c.position.transpose() << ")";
    fail(ErrorKind::Singularity, os.str());
  }
  return r;
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Ericson, Real-Time Collision Detection, closest point on triangle.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return ap.norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return bp.norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return (p - (a + d1 / (d1 - d3) * ab)).norm();
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return cp.norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return (p - (a + d2 / (d2 - d6) * ac)).norm();
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return (p - (b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b))).norm();
  const double denom = 1.0 / (va + vb + vc);
  return (p - (a + ab * (vb * denom) + ac * (vc * denom))).norm();
}

}  // namespace

ChargeSystem ChargeSystem::scaled(double s_flexible, double s_rigid) const {
  ChargeSystem out = *this;
  for (auto& c : out.flexible) c.q *= s_flexible;
  for (auto& c : out.rigid) c.q *= s_rigid;
  return out;
}

ChargeSystem ChargeSystem::without_rigid() const {
  ChargeSystem out;
  out.flexible = flexible;
  return out;
}

void DielectricParams::validate() const {
  require(eps_m > 0.0, ErrorKind::Validation, "eps_m must be positive");
  // equality is the homogeneous limit; user configs are held to the strict inequality
  require(eps_m <= eps_s, ErrorKind::Validation, "eps_m must not exceed eps_s");
  require(kappa >= 0.0 && std::isfinite(kappa), ErrorKind::Validation, "kappa must be finite and >= 0");
  require(kappa0 >= 0.0 && std::isfinite(kappa0), ErrorKind::Validation, "kappa0 must be finite and >= 0");
}

double eval_G(const ChargeSystem& charges, double eps_m, const Vec3& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < charges.size(); ++i) {
    const auto& c = charges[i];
    s += c.q / guarded_distance(x, c);
  }
  return s / eps_m;
}

Vec3 eval_grad_G(const ChargeSystem& charges, double eps_m, const Vec3& x) {
  Vec3 g = Vec3::Zero();
  for (std::size_t i = 0; i < charges.size(); ++i) {
    const auto& c = charges[i];
    const double r = guarded_distance(x, c);
    g -= c.q * (x - c.position) / (r * r * r);
  }
  return g / eps_m;
}

Mat3 eval_hess_G(const ChargeSystem& charges, double eps_m, const Vec3& x) {
  Mat3 H = Mat3::Zero();
  for (std::size_t i = 0; i < charges.size(); ++i) {
    const auto& c = charges[i];
    const double r = guarded_distance(x, c);
    const Vec3 d = x - c.position;
    const double r3 = r * r * r;
    H += c.q * (3.0 * d * d.transpose() / (r3 * r * r) - Mat3::Identity() / r3);
  }
  return H / eps_m;
}

double eval_g_boundary(const ChargeSystem& charges, const DielectricParams& diel, const Vec3& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < charges.size(); ++i) {
    const auto& c = charges[i];
    const double r = guarded_distance(x, c);
    s += c.q * std::exp(-diel.kappa * r) / r;
  }
  return s / diel.eps_s;
}

double exclusion_distance(const ChargeSystem& charges, const Mesh& mesh) {
  double dmin = std::numeric_limits<double>::infinity();
  for (const Face& f : mesh.faces) {
    if (f.tag == FaceTag::Outer) continue;
    const auto p = mesh.face_points(f);
    for (std::size_t i = 0; i < charges.size(); ++i)
      dmin = std::min(dmin, point_triangle_distance(charges[i].position, p[0], p[1], p[2]));
  }
  return dmin;
}

void validate_charges(const ChargeSystem& charges, const Mesh& mesh) {
  auto check = [&](const PointCharge& c, Region want, const char* what) {
    require(c.radius > 0.0, ErrorKind::Validation, std::string(what) + " charge radius must be positive");
    require(c.position.allFinite() && std::isfinite(c.q), ErrorKind::Validation,
            std::string(what) + " charge has non-finite data");
    const auto cells = locate_point(mesh, c.position);
    require(!cells.empty(), ErrorKind::Geometry, std::string(what) + " charge lies outside the mesh");
    for (Index cell : cells)
      require(mesh.cell_region[cell] == want, ErrorKind::Geometry,
              std::string(what) + " charge is not inside its molecule region");
  };
  for (const auto& c : charges.flexible) check(c, Region::MF, "flexible");
  for (const auto& c : charges.rigid) check(c, Region::MR, "rigid");
  if (charges.size() > 0)
    require(exclusion_distance(charges, mesh) > 0.0, ErrorKind::Geometry, "charge touches a molecular surface");
}

ChargeSystem read_pqr(std::istream& in) {
  ChargeSystem out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string record;
    if (!(ls >> record)) continue;
    if (record != "ATOM" && record != "HETATM") continue;
    std::string id;
    PointCharge c;
    double x, y, z;
    if (!(ls >> id >> x >> y >> z >> c.q >> c.radius))
      fail(ErrorKind::Io, "malformed PQR record at line " + std::to_string(lineno));
    c.position = Vec3(x, y, z);
    std::string mol = "flexible";
    ls >> mol;
    if (mol == "flexible")
      out.flexible.push_back(c);
    else if (mol == "rigid")
      out.rigid.push_back(c);
    else
      fail(ErrorKind::Io, "unknown molecule '" + mol + "' at line " + std::to_string(lineno));
  }
  return out;
}

ChargeSystem read_pqr_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open charge file " + path);
  return read_pqr(in);
}

void write_pqr(std::ostream& out, const ChargeSystem& charges) {
  out << std::setprecision(17);
  int id = 1;
  auto put = [&](const PointCharge& c, const char* mol) {
    out << "ATOM " << id++ << ' ' << c.position.x() << ' ' << c.position.y() << ' ' << c.position.z() << ' '
        << c.q << ' ' << c.radius << ' ' << mol << '\n';
  };
  for (const auto& c : charges.flexible) put(c, "flexible");
  for (const auto& c : charges.rigid) put(c, "rigid");
}

}  // namespace electroelastic
