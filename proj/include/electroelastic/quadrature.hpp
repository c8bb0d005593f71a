#pragma once

#include "electroelastic/common.hpp"

#include <span>
#include <vector>

namespace electroelastic {

/// Quadrature on the reference simplex, stored in barycentric coordinates with
/// weights normalized to sum to one (multiply by the simplex measure).
template <int NumVertices>
struct SimplexRule {
  std::vector<std::array<double, NumVertices>> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

using TetRule = SimplexRule<4>;
using TriangleRule = SimplexRule<3>;

/// Tetrahedron rules with positive weights, exact for polynomials of the
/// given total degree.
const TetRule& tet_rule_degree1();
const TetRule& tet_rule_degree2();
const TetRule& tet_rule_degree5();

/// The rule used wherever an "order 4" integration of exponential terms is
/// required (sinh/cosh reaction terms, Gaussian body forces).
inline const TetRule& tet_rule_high() { return tet_rule_degree5(); }

const TriangleRule& triangle_rule_degree2();
const TriangleRule& triangle_rule_degree5();

/// Interpolates a point from simplex vertex coordinates.
template <std::size_t N>
Vec3 barycentric_point(const std::array<Vec3, N>& vertices, const std::array<double, N>& lambda) {
  Vec3 x = Vec3::Zero();
  for (std::size_t a = 0; a < N; ++a) x += lambda[a] * vertices[a];
  return x;
}

}  // namespace electroelastic
