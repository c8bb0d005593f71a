#pragma once

#include "electroelastic/common.hpp"

#include <iosfwd>
#include <vector>

namespace electroelastic {

/// Single charge at the center of a dielectric sphere in screened solvent.
struct RadialConfig {
  double q = 1.0;
  double R = 1.0;
  double eps_m = 2.0;
  double eps_s = 80.0;
  double kappa = 0.0;
  double R_out = 20.0;
  int grid_points = 2000;

  void validate() const;
};

struct RadialSolution {
  std::vector<double> r;        // inside nodes [0, R] followed by outside nodes [R, R_out]
  std::vector<double> phi;      // total potential (inside: q/(eps_m r) + phi_r; +inf at r = 0)
  std::vector<double> phi_r;    // phi - q/(eps_m r); finite limit at r = 0
  std::size_t n_inside = 0;     // r[0..n_inside-1] are inside nodes, r[n_inside-1] = R
  double phi_r_center = 0.0;
  double dphi_inside = 0.0;     // d(phi)/dr at R-
  double dphi_outside = 0.0;    // d(phi)/dr at R+
  double phi_surface = 0.0;     // phi(R)
  double surface_force = 0.0;
  int newton_iterations = 0;
  bool linearized = false;
};

/// phi_r(0) = q/(eps_s (1 + kappa R) R) - q/(eps_m R) for the linearized exterior.
double born_reaction_potential(const RadialConfig& cfg);

/// Second-order finite differences in psi = r phi, with ghost nodes on both
/// sides of r = R carrying the continuity and flux conditions; Newton with
/// residual backtracking. The outer datum is the exact linearized exterior.
RadialSolution solve_radial_pb(const RadialConfig& cfg, bool linearized);

/// Normal surface force per area at r = R (positive along the outward normal).
double radial_surface_force(const RadialSolution& sol, const RadialConfig& cfg);

void write_radial_profile(std::ostream& out, const RadialSolution& sol);

}  // namespace electroelastic
