#pragma once

#include "electroelastic/common.hpp"
#include "electroelastic/mesh.hpp"

#include <vector>

namespace electroelastic {

/// Nodal displacement over the whole mesh: u on vertices of MF cells, its
/// harmonic extension w on the remaining vertices. Interface vertices carry a
/// single value, so u = w on GAMMA_F by construction.
struct DisplacementField {
  std::vector<Vec3> values;
  std::vector<char> in_mf;
  bool continuous = true;

  static DisplacementField zero(const Mesh& mesh);
  std::vector<Vec3> mf_values() const;  // values with non-MF entries zeroed
};

/// Solves the vector Laplace problem on the complement of MF with w = u on
/// MF vertices and w = 0 on OUTER. `u_on_mf` is indexed by mesh vertex; only
/// MF entries are read.
DisplacementField harmonic_extend(const Mesh& mesh, const std::vector<Vec3>& u_on_mf);

struct PiolaFields {
  std::vector<Mat3> grad_phi;
  std::vector<double> J;
  std::vector<Mat3> F;
  std::vector<Vec3> displacement;  // nodal, all vertices
  double min_J = 1.0;
  Index min_J_cell = -1;

  Vec3 map_point(const Mesh& mesh, std::size_t cell, const std::array<double, 4>& lambda) const;
};

constexpr double kDefaultJMin = 0.1;

PiolaFields identity_piola(const Mesh& mesh);

/// Per-cell grad Phi = I + grad(u or w), J = det, F = J grad Phi^-1 grad Phi^-T.
/// Throws Inadmissible when a cell has J <= j_min.
PiolaFields compute_piola(const Mesh& mesh, const DisplacementField& disp, double j_min = kDefaultJMin);

struct AdmissibilityReport {
  bool admissible = true;
  double surrogate_norm = 0.0;  // ||u||_L4 + ||grad u||_L4 + ||recovered D2 u||_L4 over MF
  double l4_u = 0.0;
  double l4_grad = 0.0;
  double l4_hess = 0.0;
  double max_grad_u = 0.0;      // max over MF cells of the spectral norm of grad u
  double min_J = 1.0;
  Index min_J_cell = -1;
  double bound_M = 0.0;
  double j_min = kDefaultJMin;
  bool norm_exceeded = false;
  bool jacobian_too_small = false;
};

AdmissibilityReport check_admissible(const Mesh& mesh, const DisplacementField& disp, double bound_M,
                                     double j_min = kDefaultJMin);

}  // namespace electroelastic
