#pragma once

#include "electroelastic/common.hpp"

#include <string>
#include <vector>

namespace electroelastic {

enum class Region : std::uint8_t { MF = 0, MR = 1, Solvent = 2 };
enum class FaceTag : std::uint8_t { GammaF = 0, GammaF0 = 1, GammaR = 2, Outer = 3 };

const char* to_string(Region r) noexcept;
const char* to_string(FaceTag t) noexcept;
Region region_from_string(const std::string& s);
FaceTag face_tag_from_string(const std::string& s);

inline bool is_flexible_interface(FaceTag t) { return t == FaceTag::GammaF || t == FaceTag::GammaF0; }

/// Tagged boundary or interface triangle. Vertex order gives a normal that
/// points from `inside` (molecule, or the domain for OUTER) to `outside`.
struct Face {
  std::array<Index, 3> v{};
  FaceTag tag = FaceTag::Outer;
  Index inside = -1;
  Index outside = -1;
};

/// Affine P1 data of one tetrahedron.
struct CellGeometry {
  double volume = 0.0;                  // signed
  Eigen::Matrix<double, 4, 3> grad;     // rows: gradients of barycentric coordinates
};

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<Index, 4>> cells;
  std::vector<Region> cell_region;
  std::vector<Face> faces;
  double h = 0.0;

  // Filled by finalize().
  std::vector<CellGeometry> geometry;

  /// Computes per-cell geometry and resolves the inside/outside cells of
  /// every tagged face, reorienting interface faces outward from the
  /// molecule. Throws Topology if a tagged face is not a face of any cell.
  void finalize();

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_cells() const { return cells.size(); }

  std::array<Vec3, 4> cell_points(std::size_t c) const {
    const auto& t = cells[c];
    return {vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]};
  }
  std::array<Vec3, 3> face_points(const Face& f) const {
    return {vertices[f.v[0]], vertices[f.v[1]], vertices[f.v[2]]};
  }

  bool has_region(Region r) const;
  bool has_tag(FaceTag t) const;

  /// Vertices touched by cells of the given region.
  std::vector<char> region_vertex_mask(Region r) const;
  /// Vertices of OUTER faces.
  std::vector<char> outer_vertex_mask() const;
};

double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
CellGeometry tet_geometry(const std::array<Vec3, 4>& p);

/// Area vector (unit normal times area) of a triangle.
Vec3 triangle_area_vector(const Vec3& a, const Vec3& b, const Vec3& c);

/// Barycentric coordinates of x in cell c.
std::array<double, 4> barycentric(const Mesh& mesh, std::size_t c, const Vec3& x);

/// Cells containing x (barycentric coordinates >= -tol). Linear scan.
std::vector<Index> locate_point(const Mesh& mesh, const Vec3& x, double tol = 1e-10);

struct CapSpec {
  Vec3 axis{-1.0, 0.0, 0.0};
  double angle_deg = 30.0;
};

Mesh build_ball_in_box(const Vec3& center, double radius, double box_half_width, double h,
                       Region region, const CapSpec& cap = {});

/// Flexible ball at `flexible_center`, rigid ball displaced by `separation`
/// (center to center) along +x, in a box extending `box_half_width` beyond
/// each center.
struct TwoBallGeometry {
  Vec3 flexible_center = Vec3::Zero();
  double flexible_radius = 1.0;
  double rigid_radius = 1.0;
  double separation = 3.0;
  double box_half_width = 4.0;
};

Mesh build_two_balls_in_box(const TwoBallGeometry& geom, double h, const CapSpec& cap = {});

struct InterfacePatch {
  FaceTag tag = FaceTag::GammaF;
  std::vector<Index> faces;        // indices into mesh.faces
  std::vector<Vec3> normals;       // unit, molecule -> solvent
  std::vector<double> areas;
  std::vector<Vec3> centroids;
  std::vector<Index> inside;
  std::vector<Index> outside;
  double total_area = 0.0;

  std::size_t size() const { return faces.size(); }
};

/// GAMMA_F includes the GAMMA_F0 subset. Throws Topology on a non-manifold
/// interface edge.
InterfacePatch extract_interface(const Mesh& mesh, FaceTag tag);

struct MeshReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  double min_interface_outer_distance = 0.0;

  bool ok() const { return violations.empty(); }
};

/// Report-only check of the mesh invariants. `debye_length` <= 0 or
/// non-finite disables the clearance warning.
MeshReport validate_mesh(const Mesh& mesh, double debye_length);

}  // namespace electroelastic
