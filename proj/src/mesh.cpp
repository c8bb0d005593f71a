#include "electroelastic/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace electroelastic {

const char* to_string(Region r) noexcept {
  switch (r) {
    case Region::MF: return "MF";
    case Region::MR: return "MR";
    case Region::Solvent: return "SOLVENT";
  }
  return "?";
}

const char* to_string(FaceTag t) noexcept {
  switch (t) {
    case FaceTag::GammaF: return "GAMMA_F";
    case FaceTag::GammaF0: return "GAMMA_F0";
    case FaceTag::GammaR: return "GAMMA_R";
    case FaceTag::Outer: return "OUTER";
  }
  return "?";
}

Region region_from_string(const std::string& s) {
  if (s == "MF") return Region::MF;
  if (s == "MR") return Region::MR;
  if (s == "SOLVENT") return Region::Solvent;
  fail(ErrorKind::Validation, "unknown region tag '" + s + "'");
}

FaceTag face_tag_from_string(const std::string& s) {
  if (s == "GAMMA_F") return FaceTag::GammaF;
  if (s == "GAMMA_F0") return FaceTag::GammaF0;
  if (s == "GAMMA_R") return FaceTag::GammaR;
  if (s == "OUTER") return FaceTag::Outer;
  fail(ErrorKind::Validation, "unknown face tag '" + s + "'");
}

double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

CellGeometry tet_geometry(const std::array<Vec3, 4>& p) {
  CellGeometry g;
  Mat3 M;
  M.col(0) = p[1] - p[0];
  M.col(1) = p[2] - p[0];
  M.col(2) = p[3] - p[0];
  g.volume = M.determinant() / 6.0;
  const Mat3 Minv = M.inverse();
  for (int k = 0; k < 3; ++k) g.grad.row(k + 1) = Minv.row(k);
  g.grad.row(0) = -(Minv.row(0) + Minv.row(1) + Minv.row(2));
  return g;
}

Vec3 triangle_area_vector(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a);
}

namespace {

using Key3 = std::array<Index, 3>;

Key3 sorted_key(Index a, Index b, Index c) {
  Key3 k{a, b, c};
  std::sort(k.begin(), k.end());
  return k;
}

struct Key3Hash {
  std::size_t operator()(const Key3& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (Index v : k) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

constexpr int kTetFaces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

using FaceCells = std::unordered_map<Key3, std::array<Index, 2>, Key3Hash>;

// Maps every cell face to its (at most two) cells; a third incidence is
// recorded as -2 in the second slot.
FaceCells build_face_cells(const Mesh& mesh) {
  FaceCells map;
  map.reserve(mesh.cells.size() * 3);
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& t = mesh.cells[c];
    for (const auto& lf : kTetFaces) {
      const Key3 k = sorted_key(t[lf[0]], t[lf[1]], t[lf[2]]);
      auto [it, inserted] = map.try_emplace(k, std::array<Index, 2>{static_cast<Index>(c), -1});
      if (!inserted) {
        if (it->second[1] == -1)
          it->second[1] = static_cast<Index>(c);
        else
          it->second[1] = -2;
      }
    }
  }
  return map;
}

Region molecule_of(FaceTag t) { return t == FaceTag::GammaR ? Region::MR : Region::MF; }

Index opposite_vertex(const std::array<Index, 4>& cell, const Face& f) {
  for (Index v : cell)
    if (v != f.v[0] && v != f.v[1] && v != f.v[2]) return v;
  return -1;
}

}  // namespace

void Mesh::finalize() {
  require(cell_region.size() == cells.size(), ErrorKind::Validation,
          "cell_region size does not match cell count");
  geometry.resize(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (Index v : cells[c])
      require(v >= 0 && static_cast<std::size_t>(v) < vertices.size(), ErrorKind::Validation,
              "cell " + std::to_string(c) + " references a missing vertex");
    geometry[c] = tet_geometry(cell_points(c));
  }

  const FaceCells map = build_face_cells(*this);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    Face& f = faces[i];
    auto it = map.find(sorted_key(f.v[0], f.v[1], f.v[2]));
    if (it == map.end())
      fail(ErrorKind::Topology, "tagged face " + std::to_string(i) + " is not a face of any cell");
    Index a = it->second[0];
    Index b = it->second[1] < 0 ? -1 : it->second[1];
    if (f.tag != FaceTag::Outer) {
      const Region mol = molecule_of(f.tag);
      if (b >= 0 && cell_region[a] != mol && cell_region[b] == mol) std::swap(a, b);
    }
    f.inside = a;
    f.outside = b;
    const Index opp = opposite_vertex(cells[a], f);
    const Vec3 n = (vertices[f.v[1]] - vertices[f.v[0]]).cross(vertices[f.v[2]] - vertices[f.v[0]]);
    if (n.dot(vertices[opp] - vertices[f.v[0]]) > 0.0) std::swap(f.v[1], f.v[2]);
  }
}

bool Mesh::has_region(Region r) const {
  return std::find(cell_region.begin(), cell_region.end(), r) != cell_region.end();
}

bool Mesh::has_tag(FaceTag t) const {
  return std::any_of(faces.begin(), faces.end(), [&](const Face& f) { return f.tag == t; });
}

std::vector<char> Mesh::region_vertex_mask(Region r) const {
  std::vector<char> mask(vertices.size(), 0);
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (cell_region[c] == r)
      for (Index v : cells[c]) mask[v] = 1;
  return mask;
}

std::vector<char> Mesh::outer_vertex_mask() const {
  std::vector<char> mask(vertices.size(), 0);
  for (const Face& f : faces)
    if (f.tag == FaceTag::Outer)
      for (Index v : f.v) mask[v] = 1;
  return mask;
}

std::array<double, 4> barycentric(const Mesh& mesh, std::size_t c, const Vec3& x) {
  const auto& g = mesh.geometry[c];
  const Vec3 d = x - mesh.vertices[mesh.cells[c][0]];
  std::array<double, 4> l{};
  double s = 0.0;
  for (int k = 1; k < 4; ++k) {
    l[k] = g.grad.row(k).dot(d);
    s += l[k];
  }
  l[0] = 1.0 - s;
  return l;
}

std::vector<Index> locate_point(const Mesh& mesh, const Vec3& x, double tol) {
  std::vector<Index> hits;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& t = mesh.cells[c];
    bool outside_box = false;
    for (int d = 0; d < 3 && !outside_box; ++d) {
      double lo = mesh.vertices[t[0]][d], hi = lo;
      for (int k = 1; k < 4; ++k) {
        lo = std::min(lo, mesh.vertices[t[k]][d]);
        hi = std::max(hi, mesh.vertices[t[k]][d]);
      }
      const double pad = 1e-9 * (hi - lo) + 1e-14;
      outside_box = x[d] < lo - pad || x[d] > hi + pad;
    }
    if (outside_box) continue;
    const auto l = barycentric(mesh, c, x);
    if (*std::min_element(l.begin(), l.end()) >= -tol) hits.push_back(static_cast<Index>(c));
  }
  return hits;
}

// ---------------------------------------------------------------------------
// Structured O-grid ("cubed ball") mesher.
//
// A ball is a flat core cube [-a0, a0]^3 on an n^3 lattice, surrounded by six
// hexahedral shell blocks that blend the core surface onto the sphere (inner
// shells, ball region) and then the sphere onto the enclosing box (outer
// shells, solvent). Every hex is split into six tetrahedra with a Kuhn split
// whose axes are mirrored on odd lattice positions, so the diagonal on any
// quad face depends only on the face's own lattice coordinates and adjacent
// blocks conform.

namespace {

struct BallBlock {
  Vec3 center;
  double radius = 1.0;
  Region region = Region::MF;
  int n = 2;          // lattice cells per cube side (even)
  int L_in = 1;       // inner shell layers
  int L_out = 1;      // outer shell layers
  double a0 = 0.45;   // core half width
  double grading = 1.0;
  Vec3 lo, hi;        // enclosing box of the outer shells
};

class OGridBuilder {
 public:
  std::vector<Vec3> vertices;
  std::vector<std::array<Index, 4>> cells;
  std::vector<Region> regions;

  void add_ball(const BallBlock& b) {
    block_ = b;
    m_ = b.n / 2;
    ball_index_.clear();
    build_core();
    for (int d = 0; d < 3; ++d)
      for (int sgn : {-1, 1}) build_shell_face(d, sgn);
  }

 private:
  BallBlock block_;
  int m_ = 1;
  std::unordered_map<std::uint64_t, Index> ball_index_;
  std::map<std::array<double, 3>, Index> box_index_;

  static std::uint64_t key(int s, int i, int j, int k) {
    return (static_cast<std::uint64_t>(s) << 48) | (static_cast<std::uint64_t>(i) << 32) |
           (static_cast<std::uint64_t>(j) << 16) | static_cast<std::uint64_t>(k);
  }

  static double dir_component(double q) {
    if (q == 1.0) return 1.0;
    if (q == -1.0) return -1.0;
    return std::tan(std::numbers::pi * q / 4.0);
  }

  double box_component(int d, double q) const {
    const double c = block_.center[d];
    if (q == 1.0) return block_.hi[d];
    if (q == -1.0) return block_.lo[d];
    return q >= 0.0 ? c + q * (block_.hi[d] - c) : c + q * (c - block_.lo[d]);
  }

  Vec3 position(int s, int i, int j, int k) const {
    const BallBlock& b = block_;
    const Vec3 q(static_cast<double>(i - m_) / m_, static_cast<double>(j - m_) / m_,
                 static_cast<double>(k - m_) / m_);
    if (s == 0) return b.center + b.a0 * q;
    const Vec3 dir = Vec3(dir_component(q[0]), dir_component(q[1]), dir_component(q[2])).normalized();
    const Vec3 on_sphere = b.center + b.radius * dir;
    if (s <= b.L_in) {
      if (s == b.L_in) return on_sphere;
      const double t = static_cast<double>(s) / b.L_in;
      return (1.0 - t) * (b.center + b.a0 * q) + t * on_sphere;
    }
    const int l = s - b.L_in;
    const Vec3 box(box_component(0, q[0]), box_component(1, q[1]), box_component(2, q[2]));
    if (l == b.L_out) return box;
    const double tau = b.grading == 1.0
                           ? static_cast<double>(l) / b.L_out
                           : (std::pow(b.grading, l) - 1.0) / (std::pow(b.grading, b.L_out) - 1.0);
    return (1.0 - tau) * on_sphere + tau * box;
  }

  Index vertex(int s, int i, int j, int k) {
    const std::uint64_t kk = key(s, i, j, k);
    auto it = ball_index_.find(kk);
    if (it != ball_index_.end()) return it->second;
    const Vec3 x = position(s, i, j, k);
    Index id;
    if (s == block_.L_in + block_.L_out) {
      // Box-layer vertices may coincide with those of a neighbouring ball.
      const std::array<double, 3> ck{x[0], x[1], x[2]};
      auto bit = box_index_.find(ck);
      if (bit != box_index_.end()) {
        id = bit->second;
      } else {
        id = static_cast<Index>(vertices.size());
        vertices.push_back(x);
        box_index_.emplace(ck, id);
      }
    } else {
      id = static_cast<Index>(vertices.size());
      vertices.push_back(x);
    }
    ball_index_.emplace(kk, id);
    return id;
  }

  // corner(bits) returns the vertex at local hex corner offsets (unmirrored).
  template <class CornerFn>
  void emit_hex(const std::array<int, 3>& origin, CornerFn corner, double handedness, Region region) {
    static constexpr int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
    static constexpr double perm_sign[6] = {1, 1, 1, -1, -1, -1};
    std::array<int, 3> mirror{};
    double mirror_sign = 1.0;
    for (int d = 0; d < 3; ++d) {
      mirror[d] = origin[d] & 1;
      if (mirror[d]) mirror_sign = -mirror_sign;
    }
    for (int p = 0; p < 6; ++p) {
      std::array<std::array<int, 3>, 4> local{};
      local[1][perms[p][0]] = 1;
      local[2] = local[1];
      local[2][perms[p][1]] = 1;
      local[3] = {1, 1, 1};
      std::array<Index, 4> tet{};
      for (int a = 0; a < 4; ++a)
        tet[a] = corner(local[a][0] ^ mirror[0], local[a][1] ^ mirror[1], local[a][2] ^ mirror[2]);
      if (perm_sign[p] * mirror_sign * handedness < 0.0) std::swap(tet[1], tet[2]);
      const Vec3& x0 = vertices[tet[0]];
      const Vec3& x1 = vertices[tet[1]];
      const Vec3& x2 = vertices[tet[2]];
      const Vec3& x3 = vertices[tet[3]];
      const double vol = tet_signed_volume(x0, x1, x2, x3);
      double edge = 0.0;
      for (const Vec3* e : {&x1, &x2, &x3}) edge = std::max(edge, (*e - x0).norm());
      if (!(vol > 1e-12 * edge * edge * edge)) {
        std::ostringstream os;
        os << "mesh generation produced a degenerate cell " << cells.size() << " (volume " << vol << ")";
        fail(ErrorKind::Geometry, os.str());
      }
      cells.push_back(tet);
      regions.push_back(region);
    }
  }

  void build_core() {
    const int n = block_.n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          auto corner = [&](int a, int b, int c) { return vertex(0, i + a, j + b, k + c); };
          emit_hex({i, j, k}, corner, 1.0, block_.region);
        }
  }

  void build_shell_face(int d, int sgn) {
    const int n = block_.n;
    const int a = d == 0 ? 1 : 0;
    const int b = d == 2 ? 1 : 2;
    const double handed = sgn * (d == 1 ? -1.0 : 1.0);
    const int fixed = sgn > 0 ? n : 0;
    const int layers = block_.L_in + block_.L_out;
    for (int l = 0; l < layers; ++l) {
      const Region region = l < block_.L_in ? block_.region : Region::Solvent;
      for (int ia = 0; ia < n; ++ia)
        for (int ib = 0; ib < n; ++ib) {
          auto corner = [&](int da, int db, int dl) {
            std::array<int, 3> p{};
            p[d] = fixed;
            p[a] = ia + da;
            p[b] = ib + db;
            return vertex(l + dl, p[0], p[1], p[2]);
          };
          emit_hex({ia, ib, l}, corner, handed, region);
        }
    }
  }
};

int lattice_cells(double radius, double h) {
  int n = static_cast<int>(std::ceil(std::numbers::pi * radius / (2.0 * h) - 1e-9));
  if (n < 2) n = 2;
  if (n % 2) ++n;
  return n;
}

BallBlock make_block(const Vec3& center, double radius, Region region, int n, const Vec3& lo,
                     const Vec3& hi) {
  BallBlock b;
  b.center = center;
  b.radius = radius;
  b.region = region;
  b.n = n;
  b.a0 = 0.45 * radius;
  b.lo = lo;
  b.hi = hi;
  const double ht = std::numbers::pi * radius / (2.0 * n);
  b.L_in = std::max(1, static_cast<int>(std::ceil((radius - b.a0) / ht - 1e-9)));
  // Outer layers grow geometrically so that their thickness tracks the
  // tangential spacing; the reference gap is the mean clearance to the faces.
  double gap = 0.0;
  for (int d = 0; d < 3; ++d) gap += (hi[d] - center[d] - radius) + (center[d] - lo[d] - radius);
  gap /= 6.0;
  b.grading = 1.0 + (std::numbers::pi / 2.0) / n;
  int L = 1;
  while (ht * (std::pow(b.grading, L) - 1.0) / (b.grading - 1.0) < gap) ++L;
  b.L_out = L;
  return b;
}

void tag_faces(Mesh& mesh, const Vec3& flexible_center, const CapSpec& cap) {
  const FaceCells map = build_face_cells(mesh);
  std::vector<Face> faces;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& t = mesh.cells[c];
    for (const auto& lf : kTetFaces) {
      const Key3 k = sorted_key(t[lf[0]], t[lf[1]], t[lf[2]]);
      const auto& cc = map.at(k);
      if (cc[1] == -2) fail(ErrorKind::Topology, "non-conforming mesh: face shared by more than two cells");
      Face f;
      f.v = {t[lf[0]], t[lf[1]], t[lf[2]]};
      if (cc[1] == -1) {
        f.tag = FaceTag::Outer;
      } else {
        if (cc[0] != static_cast<Index>(c)) continue;
        const Region r0 = mesh.cell_region[cc[0]], r1 = mesh.cell_region[cc[1]];
        if (r0 == r1) continue;
        const bool mf = r0 == Region::MF || r1 == Region::MF;
        const bool mr = r0 == Region::MR || r1 == Region::MR;
        if (mf && mr) fail(ErrorKind::Topology, "flexible and rigid molecules touch");
        f.tag = mf ? FaceTag::GammaF : FaceTag::GammaR;
      }
      faces.push_back(f);
    }
  }
  mesh.faces = std::move(faces);
  mesh.finalize();

  // Dirichlet cap on the flexible interface.
  const Vec3 axis = cap.axis.normalized();
  const double cos_cap = std::cos(cap.angle_deg * std::numbers::pi / 180.0);
  double best = -2.0;
  Index best_face = -1;
  bool any = false;
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    Face& f = mesh.faces[i];
    if (f.tag != FaceTag::GammaF) continue;
    const auto p = mesh.face_points(f);
    const Vec3 dir = ((p[0] + p[1] + p[2]) / 3.0 - flexible_center).normalized();
    const double cs = dir.dot(axis);
    if (cs >= cos_cap) {
      f.tag = FaceTag::GammaF0;
      any = true;
    }
    if (cs > best) {
      best = cs;
      best_face = static_cast<Index>(i);
    }
  }
  if (!any && best_face >= 0) mesh.faces[best_face].tag = FaceTag::GammaF0;
}

}  // namespace

Mesh build_ball_in_box(const Vec3& center, double radius, double box_half_width, double h, Region region,
                       const CapSpec& cap) {
  require(radius > 0.0, ErrorKind::Validation, "radius must be positive");
  require(box_half_width >= 4.0 * radius, ErrorKind::Validation,
          "box_half_width must be at least 4 * radius");
  require(h > 0.0 && h <= radius / 2.0, ErrorKind::Validation, "h must lie in (0, radius/2]");
  require(region == Region::MF || region == Region::MR, ErrorKind::Validation,
          "ball region must be MF or MR");

  const int n = lattice_cells(radius, h);
  const Vec3 half = Vec3::Constant(box_half_width);
  OGridBuilder builder;
  builder.add_ball(make_block(center, radius, region, n, center - half, center + half));

  Mesh mesh;
  mesh.vertices = std::move(builder.vertices);
  mesh.cells = std::move(builder.cells);
  mesh.cell_region = std::move(builder.regions);
  mesh.h = h;
  tag_faces(mesh, center, cap);
  return mesh;
}

Mesh build_two_balls_in_box(const TwoBallGeometry& g, double h, const CapSpec& cap) {
  const double rmax = std::max(g.flexible_radius, g.rigid_radius);
  const double rmin = std::min(g.flexible_radius, g.rigid_radius);
  require(rmin > 0.0, ErrorKind::Validation, "radii must be positive");
  require(g.separation > g.flexible_radius + g.rigid_radius, ErrorKind::Validation,
          "molecules overlap: separation must exceed the sum of radii");
  require(g.box_half_width >= 4.0 * rmax, ErrorKind::Validation,
          "box_half_width must be at least 4 * the larger radius");
  require(h > 0.0 && h <= rmin / 2.0, ErrorKind::Validation, "h must lie in (0, smaller radius/2]");

  const Vec3 cf = g.flexible_center;
  const Vec3 cr = cf + Vec3(g.separation, 0.0, 0.0);
  const double w = g.box_half_width;
  const double x_mid = 0.5 * ((cf.x() + g.flexible_radius) + (cr.x() - g.rigid_radius));
  const int n = lattice_cells(rmax, h);

  const Vec3 lo_f(cf.x() - w, cf.y() - w, cf.z() - w), hi_f(x_mid, cf.y() + w, cf.z() + w);
  const Vec3 lo_r(x_mid, cf.y() - w, cf.z() - w), hi_r(cr.x() + w, cf.y() + w, cf.z() + w);

  OGridBuilder builder;
  builder.add_ball(make_block(cf, g.flexible_radius, Region::MF, n, lo_f, hi_f));
  builder.add_ball(make_block(cr, g.rigid_radius, Region::MR, n, lo_r, hi_r));

  Mesh mesh;
  mesh.vertices = std::move(builder.vertices);
  mesh.cells = std::move(builder.cells);
  mesh.cell_region = std::move(builder.regions);
  mesh.h = h;
  tag_faces(mesh, cf, cap);
  return mesh;
}

InterfacePatch extract_interface(const Mesh& mesh, FaceTag tag) {
  InterfacePatch patch;
  patch.tag = tag;
  auto selected = [&](FaceTag t) {
    if (tag == FaceTag::GammaF) return is_flexible_interface(t);
    return t == tag;
  };
  std::map<std::pair<Index, Index>, int> edge_count;
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const Face& f = mesh.faces[i];
    if (!selected(f.tag)) continue;
    const auto p = mesh.face_points(f);
    const Vec3 av = triangle_area_vector(p[0], p[1], p[2]);
    const double area = av.norm();
    require(area > 0.0, ErrorKind::Geometry, "zero-area interface face " + std::to_string(i));
    patch.faces.push_back(static_cast<Index>(i));
    patch.normals.push_back(av / area);
    patch.areas.push_back(area);
    patch.centroids.push_back((p[0] + p[1] + p[2]) / 3.0);
    patch.inside.push_back(f.inside);
    patch.outside.push_back(f.outside);
    patch.total_area += area;
    for (int e = 0; e < 3; ++e) {
      Index a = f.v[e], b = f.v[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_count[{a, b}];
    }
  }
  if (tag != FaceTag::GammaF0) {
    for (const auto& [edge, count] : edge_count)
      if (count != 2)
        fail(ErrorKind::Topology, std::string("interface ") + to_string(tag) + " edge (" +
                                      std::to_string(edge.first) + "," + std::to_string(edge.second) +
                                      ") has " + std::to_string(count) + " incident faces");
  }
  return patch;
}

MeshReport validate_mesh(const Mesh& mesh, double debye_length) {
  MeshReport rep;
  auto violation = [&](const std::string& s) { rep.violations.push_back(s); };

  if (mesh.cell_region.size() != mesh.cells.size()) {
    violation("cell_region size does not match cell count");
    return rep;
  }
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    for (Index v : mesh.cells[c])
      if (v < 0 || static_cast<std::size_t>(v) >= mesh.vertices.size()) {
        violation("cell " + std::to_string(c) + " references a missing vertex");
        return rep;
      }
    const auto p = mesh.cell_points(c);
    const double vol = tet_signed_volume(p[0], p[1], p[2], p[3]);
    if (!(vol > 0.0)) violation("cell " + std::to_string(c) + " has non-positive volume " + std::to_string(vol));
  }

  const FaceCells map = build_face_cells(mesh);
  std::unordered_map<Key3, FaceTag, Key3Hash> tagged;
  for (const Face& f : mesh.faces) tagged.emplace(sorted_key(f.v[0], f.v[1], f.v[2]), f.tag);

  std::size_t boundary_count = 0;
  for (const auto& [k, cc] : map) {
    if (cc[1] == -2) {
      violation("face shared by more than two cells");
      continue;
    }
    auto it = tagged.find(k);
    if (cc[1] == -1) {
      ++boundary_count;
      if (it == tagged.end()) violation("untagged boundary face");
      continue;
    }
    const Region r0 = mesh.cell_region[cc[0]], r1 = mesh.cell_region[cc[1]];
    if ((r0 == Region::MF && r1 == Region::MR) || (r0 == Region::MR && r1 == Region::MF))
      violation("MF cell " + std::to_string(cc[0]) + " shares a face with MR cell " + std::to_string(cc[1]));
    if (r0 != r1 && it == tagged.end()) violation("untagged region interface face");
  }

  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const Face& f = mesh.faces[i];
    auto it = map.find(sorted_key(f.v[0], f.v[1], f.v[2]));
    if (it == map.end()) {
      violation("tagged face " + std::to_string(i) + " is not a cell face");
      continue;
    }
    const auto& cc = it->second;
    if (f.tag == FaceTag::Outer) {
      if (cc[1] != -1) violation("OUTER face " + std::to_string(i) + " is interior");
      continue;
    }
    const Region mol = molecule_of(f.tag);
    const bool ok = cc[1] >= 0 && ((mesh.cell_region[cc[0]] == mol && mesh.cell_region[cc[1]] == Region::Solvent) ||
                                   (mesh.cell_region[cc[1]] == mol && mesh.cell_region[cc[0]] == Region::Solvent));
    if (!ok)
      violation(std::string(to_string(f.tag)) + " face " + std::to_string(i) + " does not separate " +
                to_string(mol) + " from SOLVENT");
  }

  for (FaceTag t : {FaceTag::GammaF, FaceTag::GammaR}) {
    try {
      (void)extract_interface(mesh, t);
    } catch (const Error& e) {
      violation(e.what());
    }
  }

  if (mesh.has_region(Region::MF) && !mesh.has_tag(FaceTag::GammaF0))
    rep.warnings.push_back("no GAMMA_F0 faces: elasticity solves need a Dirichlet patch");

  // Box checks.
  if (boundary_count > 0 && !mesh.vertices.empty()) {
    Vec3 lo = mesh.vertices[0], hi = lo;
    for (const Vec3& x : mesh.vertices) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
    const double size = (hi - lo).maxCoeff();
    const double tol = 1e-9 * size;
    auto on_box = [&](const Vec3& x, int d) {
      return std::abs(x[d] - lo[d]) <= tol || std::abs(x[d] - hi[d]) <= tol;
    };
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
      const Face& f = mesh.faces[i];
      const auto p = mesh.face_points(f);
      if (f.tag == FaceTag::Outer) {
        bool ok = false;
        for (int d = 0; d < 3 && !ok; ++d) ok = on_box(p[0], d) && on_box(p[1], d) && on_box(p[2], d) &&
                                              std::abs(p[0][d] - p[1][d]) <= tol && std::abs(p[0][d] - p[2][d]) <= tol;
        if (!ok) violation("OUTER face " + std::to_string(i) + " does not lie on the box boundary");
      } else {
        for (const Vec3& x : p)
          for (int d = 0; d < 3; ++d) min_dist = std::min({min_dist, x[d] - lo[d], hi[d] - x[d]});
      }
    }
    double vol = 0.0;
    for (const auto& g : mesh.geometry) vol += g.volume;
    if (mesh.geometry.size() != mesh.cells.size()) {
      vol = 0.0;
      for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        const auto p = mesh.cell_points(c);
        vol += tet_signed_volume(p[0], p[1], p[2], p[3]);
      }
    }
    const double box_vol = (hi - lo).prod();
    if (std::abs(vol - box_vol) > 1e-9 * box_vol)
      violation("cell volumes sum to " + std::to_string(vol) + ", box volume is " + std::to_string(box_vol));
    rep.min_interface_outer_distance = min_dist;
    if (std::isfinite(debye_length) && debye_length > 0.0 && std::isfinite(min_dist) &&
        min_dist < 2.0 * debye_length) {
      std::ostringstream os;
      os << "interface to outer boundary distance " << min_dist << " is below two Debye lengths ("
         << 2.0 * debye_length << "); the Debye-Hueckel boundary datum may be inaccurate";
      rep.warnings.push_back(os.str());
    }
  }
  return rep;
}

}  // namespace electroelastic
