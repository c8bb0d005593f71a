#include "electroelastic/io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace electroelastic {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << "electroelastic-mesh 1\n";
  os << "h " << fmt(mesh.h) << "\n";
  os << "vertices " << mesh.num_vertices() << "\n";
  for (const auto& v : mesh.vertices) os << fmt(v.x()) << ' ' << fmt(v.y()) << ' ' << fmt(v.z()) << '\n';
  os << "cells " << mesh.num_cells() << "\n";
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells[c];
    os << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << ' ' << to_string(mesh.cell_region[c]) << '\n';
  }
  os << "faces " << mesh.faces.size() << "\n";
  for (const auto& f : mesh.faces) os << f.v[0] << ' ' << f.v[1] << ' ' << f.v[2] << ' ' << to_string(f.tag) << '\n';
}

namespace {

void expect(std::istream& is, const std::string& word) {
  std::string w;
  if (!(is >> w) || w != word) fail(ErrorKind::Io, "mesh file: expected '" + word + "', found '" + w + "'");
}

std::size_t read_count(std::istream& is, const std::string& word) {
  expect(is, word);
  long long n = -1;
  if (!(is >> n) || n < 0) fail(ErrorKind::Io, "mesh file: bad " + word + " count");
  return static_cast<std::size_t>(n);
}

}  // namespace

Mesh read_mesh(std::istream& is) {
  expect(is, "electroelastic-mesh");
  int version = 0;
  if (!(is >> version) || version != 1) fail(ErrorKind::Io, "mesh file: unsupported version");
  Mesh m;
  expect(is, "h");
  if (!(is >> m.h)) fail(ErrorKind::Io, "mesh file: bad h");
  m.vertices.resize(read_count(is, "vertices"));
  for (auto& v : m.vertices)
    if (!(is >> v.x() >> v.y() >> v.z())) fail(ErrorKind::Io, "mesh file: truncated vertex table");
  const std::size_t nc = read_count(is, "cells");
  m.cells.resize(nc);
  m.cell_region.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    std::string r;
    auto& t = m.cells[c];
    if (!(is >> t[0] >> t[1] >> t[2] >> t[3] >> r)) fail(ErrorKind::Io, "mesh file: truncated cell table");
    for (Index v : t)
      if (v < 0 || static_cast<std::size_t>(v) >= m.vertices.size())
        fail(ErrorKind::Io, "mesh file: cell references a missing vertex");
    m.cell_region[c] = region_from_string(r);
  }
  m.faces.resize(read_count(is, "faces"));
  for (auto& f : m.faces) {
    std::string t;
    if (!(is >> f.v[0] >> f.v[1] >> f.v[2] >> t)) fail(ErrorKind::Io, "mesh file: truncated face table");
    f.tag = face_tag_from_string(t);
  }
  m.finalize();
  return m;
}

Mesh read_mesh_file(const std::filesystem::path& p) {
  std::istringstream is(read_text_file(p));
  return read_mesh(is);
}

void write_mesh_file(const std::filesystem::path& p, const Mesh& mesh) {
  std::ostringstream os;
  write_mesh(os, mesh);
  write_text_file(p, os.str());
}

void write_vtk(std::ostream& os, const VtkData& d, const std::string& title) {
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << d.points.size() << " double\n";
  for (const auto& p : d.points) os << fmt(p.x()) << ' ' << fmt(p.y()) << ' ' << fmt(p.z()) << '\n';
  std::size_t total = 0;
  for (const auto& c : d.cells) total += c.size() + 1;
  os << "CELLS " << d.cells.size() << ' ' << total << '\n';
  for (const auto& c : d.cells) {
    os << c.size();
    for (Index v : c) os << ' ' << v;
    os << '\n';
  }
  os << "CELL_TYPES " << d.cell_types.size() << '\n';
  for (int t : d.cell_types) os << t << '\n';
  auto block = [&](const std::map<std::string, DataArray>& data) {
    for (const auto& [name, a] : data) {
      if (a.components == 1)
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      else
        os << "VECTORS " << name << " double\n";
      for (std::size_t i = 0; i < a.values.size(); i += a.components) {
        for (int k = 0; k < a.components; ++k) os << (k ? " " : "") << fmt(a.values[i + k]);
        os << '\n';
      }
    }
  };
  if (!d.point_data.empty()) {
    os << "POINT_DATA " << d.points.size() << '\n';
    block(d.point_data);
  }
  if (!d.cell_data.empty()) {
    os << "CELL_DATA " << d.cells.size() << '\n';
    block(d.cell_data);
  }
}

VtkData read_vtk(std::istream& is) {
  VtkData d;
  std::string line;
  for (int i = 0; i < 3; ++i)
    if (!std::getline(is, line)) fail(ErrorKind::Io, "vtk: truncated header");
  if (line != "ASCII") fail(ErrorKind::Io, "vtk: only ASCII files are supported");
  std::string word;
  std::size_t n = 0;
  std::map<std::string, DataArray>* target = nullptr;
  std::size_t entities = 0;
  while (is >> word) {
    if (word == "DATASET") {
      is >> word;
      if (word != "UNSTRUCTURED_GRID") fail(ErrorKind::Io, "vtk: unsupported dataset " + word);
    } else if (word == "POINTS") {
      is >> n >> word;
      d.points.resize(n);
      for (auto& p : d.points) is >> p.x() >> p.y() >> p.z();
    } else if (word == "CELLS") {
      std::size_t total;
      is >> n >> total;
      d.cells.resize(n);
      for (auto& c : d.cells) {
        std::size_t k;
        is >> k;
        c.resize(k);
        for (auto& v : c) is >> v;
      }
    } else if (word == "CELL_TYPES") {
      is >> n;
      d.cell_types.resize(n);
      for (auto& t : d.cell_types) is >> t;
    } else if (word == "POINT_DATA" || word == "CELL_DATA") {
      is >> entities;
      target = word == "POINT_DATA" ? &d.point_data : &d.cell_data;
    } else if (word == "SCALARS" || word == "VECTORS") {
      if (!target) fail(ErrorKind::Io, "vtk: data array outside a data section");
      std::string name, type;
      is >> name >> type;
      DataArray a;
      if (word == "SCALARS") {
        is >> a.components;
        std::string lt, table;
        is >> lt >> table;
      } else {
        a.components = 3;
      }
      a.values.resize(entities * a.components);
      for (auto& v : a.values) is >> v;
      (*target)[name] = std::move(a);
    } else {
      fail(ErrorKind::Io, "vtk: unexpected keyword " + word);
    }
    if (is.fail()) fail(ErrorKind::Io, "vtk: malformed section " + word);
  }
  return d;
}

VtkData vtk_volume(const Mesh& mesh) {
  VtkData d;
  d.points = mesh.vertices;
  d.cells.reserve(mesh.num_cells());
  std::vector<double> region(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    d.cells.emplace_back(mesh.cells[c].begin(), mesh.cells[c].end());
    d.cell_types.push_back(10);
    region[c] = static_cast<double>(mesh.cell_region[c]);
  }
  d.cell_data["region"] = scalar_array(region);
  return d;
}

VtkData vtk_interface(const Mesh& mesh, std::vector<Index>* face_ids) {
  VtkData d;
  d.points = mesh.vertices;
  if (face_ids) face_ids->clear();
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    if (!is_flexible_interface(mesh.faces[i].tag)) continue;
    d.cells.emplace_back(mesh.faces[i].v.begin(), mesh.faces[i].v.end());
    d.cell_types.push_back(5);
    if (face_ids) face_ids->push_back(static_cast<Index>(i));
  }
  return d;
}

DataArray scalar_array(const std::vector<double>& v) { return DataArray{1, v}; }

DataArray vector_array(const std::vector<Vec3>& v) {
  DataArray a;
  a.components = 3;
  a.values.reserve(3 * v.size());
  for (const auto& x : v) a.values.insert(a.values.end(), {x.x(), x.y(), x.z()});
  return a;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::Io, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& p) { return sha256_hex(read_text_file(p)); }

std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot read " + p.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& p, const std::string& text) {
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot write " + p.string());
  f << text;
  if (!f) fail(ErrorKind::Io, "write failed for " + p.string());
}

}  // namespace electroelastic
