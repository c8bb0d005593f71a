#pragma once

#include "electroelastic/common.hpp"
#include "electroelastic/mesh.hpp"

#include <string>
#include <vector>

namespace electroelastic {

struct ElasticParams {
  double lambda = 1.0;
  double mu = 1.0;
  void validate() const;
};

/// Body force density at the degree-5 quadrature points of every cell (only
/// MF cells are read; empty means no body force) and a traction per mesh
/// face (only GAMMA_F faces are read; empty means none).
struct LoadSet {
  std::vector<std::vector<Vec3>> body;
  std::vector<Vec3> traction;

  static LoadSet zero(const Mesh& mesh);
  bool is_zero() const;
};

struct ElasticConfig {
  double tolerance = 1e-10;  // ||r|| <= tolerance * max(||f_ext||, 1e-300)
  int max_steps = 50;
  int max_backtracks = 30;
  bool warm_start = false;
  void validate() const;
};

struct ElasticSolution {
  std::vector<Vec3> u;               // nodal, zero outside MF
  std::vector<double> residual_trace;
  int newton_steps = 0;
  double load_norm = 0.0;
  double incompressibility = 0.0;    // closed-surface integral over GAMMA_F minus 3|MF|
  int discarded_f0_faces = 0;
  std::vector<std::string> warnings;
};

Mat3 strain(const Mat3& grad_u);
Mat3 stress(const Mat3& grad_u, const ElasticParams& p);
/// Strain energy density lambda/2 tr(E)^2 + mu E:E.
double strain_energy_density(const Mat3& grad_u, const ElasticParams& p);

/// Discrete hyperelastic energy sum_c |c| W(grad u) - <f_b, u> - <f_s, u>.
double hyperelastic_energy(const Mesh& mesh, const std::vector<Vec3>& u, const LoadSet& loads,
                           const ElasticParams& p);
/// Assembled residual (T(u), grad N_a) - loads, nodal (3 per vertex), over
/// all vertices of MF cells; zero elsewhere.
std::vector<Vec3> elastic_residual(const Mesh& mesh, const std::vector<Vec3>& u, const LoadSet& loads,
                                   const ElasticParams& p);

/// Vertices carrying the homogeneous Dirichlet condition (on GAMMA_F0 faces).
std::vector<char> clamped_vertices(const Mesh& mesh);

ElasticSolution solve_elasticity(const Mesh& mesh, const LoadSet& loads, const ElasticParams& p,
                                 const ElasticConfig& cfg = {}, const std::vector<Vec3>* initial = nullptr);

/// Integral over GAMMA_F of (x + u) . cof(I + grad u) n, minus 3|MF|; equals
/// three times the volume change of MF under x -> x + u.
double incompressibility_diagnostic(const Mesh& mesh, const std::vector<Vec3>& u);

}  // namespace electroelastic
