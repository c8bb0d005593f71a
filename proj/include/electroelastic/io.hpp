#pragma once

#include "electroelastic/mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace electroelastic {

/// "%.17g".
std::string fmt(double x);

/// Self-describing ASCII mesh: header, vertex table, cell table with region
/// names, face table with tag names.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);
Mesh read_mesh_file(const std::filesystem::path& p);
void write_mesh_file(const std::filesystem::path& p, const Mesh& mesh);

/// Named data array with `components` values per entity.
struct DataArray {
  int components = 1;
  std::vector<double> values;
};

struct VtkData {
  std::vector<Vec3> points;
  std::vector<std::vector<Index>> cells;  // connectivity per cell
  std::vector<int> cell_types;            // VTK codes: 10 tetra, 5 triangle
  std::map<std::string, DataArray> point_data;
  std::map<std::string, DataArray> cell_data;
};

/// Legacy-VTK ASCII unstructured grid.
void write_vtk(std::ostream& os, const VtkData& d, const std::string& title);
VtkData read_vtk(std::istream& is);

/// Volume grid of the mesh (tetrahedra) with the region as cell data.
VtkData vtk_volume(const Mesh& mesh);
/// GAMMA_F triangles; `face_ids` receives the mesh face index of each triangle.
VtkData vtk_interface(const Mesh& mesh, std::vector<Index>* face_ids = nullptr);

DataArray scalar_array(const std::vector<double>& v);
DataArray vector_array(const std::vector<Vec3>& v);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& p);

/// Reads the whole file; throws Io on failure.
std::string read_text_file(const std::filesystem::path& p);
/// Writes the whole file (creating parent directories); throws Io on failure.
void write_text_file(const std::filesystem::path& p, const std::string& text);

}  // namespace electroelastic
