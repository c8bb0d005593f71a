#pragma once

#include "electroelastic/common.hpp"
#include "electroelastic/mesh.hpp"

#include <limits>
#include <vector>

namespace electroelastic {

constexpr double kInfNorm = std::numeric_limits<double>::infinity();

struct RegionNorms {
  bool present = false;
  double volume = 0.0;
  double lp = 0.0;         // L^p (nodal max when p is infinite)
  double linf = 0.0;       // nodal max of |field|
  double l2 = 0.0;
  double h1_semi = 0.0;    // ||grad field||_L2
  double h1 = 0.0;         // sqrt(l2^2 + h1_semi^2)
  double d2_surrogate = 0.0;  // L^p norm of the patch-recovered second derivative
};

/// Region-restricted norms of a P1 nodal field. The aggregate entries are
/// the sums of the region values (broken direct-sum norm).
struct BrokenNorms {
  double p = 2.0;
  RegionNorms mf, mr, solvent;
  RegionNorms aggregate;
  double whole_l2 = 0.0;  // L2 over the whole mesh in one pass

  const RegionNorms& operator[](Region r) const {
    return r == Region::MF ? mf : (r == Region::MR ? mr : solvent);
  }
};

BrokenNorms broken_norm(const VectorX& field, const Mesh& mesh, double p);

/// Volume-weighted average of cell gradients at the vertices of the selected
/// cells (zero elsewhere).
std::vector<Vec3> recover_gradient(const Mesh& mesh, const VectorX& field, const std::vector<char>& cell_mask);

std::vector<char> region_cell_mask(const Mesh& mesh, Region r);

/// L^p norm of a scalar P1 field over the selected cells (exact for p = 2, 4).
double lp_norm(const Mesh& mesh, const VectorX& field, const std::vector<char>& cell_mask, double p);

/// Components of a nodal vector field.
VectorX component(const std::vector<Vec3>& v, int d);

/// Discrete H1 norm of a nodal vector field over the selected cells.
double h1_norm(const Mesh& mesh, const std::vector<Vec3>& v, const std::vector<char>& cell_mask);

/// Broken W^{1,p} surrogate of a piecewise-constant matrix field: L^p of the
/// cell values plus L^p of the gradient of their patch-recovered nodal field.
double cellwise_w1p(const Mesh& mesh, const std::vector<Mat3>& values, const std::vector<char>& cell_mask, double p);

}  // namespace electroelastic
