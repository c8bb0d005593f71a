#pragma once

#include "electroelastic/charges.hpp"
#include "electroelastic/common.hpp"
#include "electroelastic/mesh.hpp"
#include "electroelastic/piola.hpp"

#include <memory>
#include <vector>

namespace electroelastic {

enum class PBEMode { Nonlinear, Linearized };

struct PBEConfig {
  double tolerance = 1e-10;   // on ||r|| / (1 + ||r_0||)
  int max_steps = 50;
  double backtrack = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 40;

  void validate() const;
};

struct NewtonStep {
  int iteration = 0;
  double residual = 0.0;
  double energy = 0.0;
  double damping = 1.0;
};

struct EnergyReport {
  std::vector<NewtonStep> trace;   // entry 0 is the initial state
  int rejected_trials = 0;
  bool monotone_nonincreasing = true;
  bool converged = false;

  std::vector<double> energies() const;
};

struct PotentialDecomposition {
  const Mesh* mesh = nullptr;
  std::shared_ptr<const PiolaFields> piola;
  ChargeSystem charges;     // reference positions
  ChargeSystem images;      // deformed positions Phi(x_i), used by G
  DielectricParams diel;
  PBEMode mode = PBEMode::Nonlinear;
  VectorX phi_l, phi_n, phi_r;
  EnergyReport energy;

  /// G composed with the map, G(Phi(X)), at reference point X in `cell`.
  double G_at(std::size_t cell, const std::array<double, 4>& lambda) const;
  /// Reference-frame gradient grad_X (G o Phi) = grad Phi^T grad G(Phi(X)).
  Vec3 grad_G_at(std::size_t cell, const std::array<double, 4>& lambda) const;
};

/// Images Phi(x_i) of the charges under the nodal displacement.
ChargeSystem map_charges(const Mesh& mesh, const PiolaFields& piola, const ChargeSystem& charges);

/// Per-cell permittivity and screening coefficient eps_s kappa^2 (zero in
/// molecule regions; MR cells are solvent when the cavity flag is off).
struct CellCoefficients {
  std::vector<double> eps;
  std::vector<double> screening;
};
CellCoefficients cell_coefficients(const Mesh& mesh, const DielectricParams& diel);

VectorX solve_linear_component(const Mesh& mesh, const PiolaFields& piola, const ChargeSystem& charges,
                               const DielectricParams& diel);

struct NonlinearResult {
  VectorX phi_n;
  EnergyReport energy;
};

NonlinearResult solve_nonlinear_component(const Mesh& mesh, const PiolaFields& piola, const ChargeSystem& charges,
                                          const DielectricParams& diel, const VectorX& phi_l, const PBEConfig& cfg,
                                          PBEMode mode = PBEMode::Nonlinear);

PotentialDecomposition solve_pbe(const Mesh& mesh, std::shared_ptr<const PiolaFields> piola,
                                 const ChargeSystem& charges, const DielectricParams& diel, const PBEConfig& cfg,
                                 PBEMode mode = PBEMode::Nonlinear);

/// E(w) = int eps/2 F grad w . grad w + J k^2 (cosh(w + G) - 1) - <f_G, w>.
double eval_energy(const Mesh& mesh, const PiolaFields& piola, const ChargeSystem& charges,
                   const DielectricParams& diel, const VectorX& w, PBEMode mode = PBEMode::Nonlinear);

struct LinfBound {
  double phi_n_max = 0.0;
  double phi_l_solvent_max = 0.0;
  double G_solvent_max = 0.0;
  bool holds = true;
};

/// ||phi_n||_inf <= ||phi_l||_inf,solvent + ||G||_inf,solvent + 1e-8 over nodes.
LinfBound check_linf_bound(const PotentialDecomposition& d);
/// Throws Consistency when the bound fails.
void enforce_linf_bound(const PotentialDecomposition& d);

struct WeakResidual {
  double residual = 0.0;   // ||r|| over free nodes
  double scale = 0.0;      // ||effective right-hand side||
  double relative() const { return residual / std::max(scale, 1e-300); }
};

/// Residual of the full regular-component weak form at (phi_r, piola),
/// against all test functions vanishing on OUTER.
WeakResidual pbe_weak_residual(const Mesh& mesh, const PiolaFields& piola, const ChargeSystem& charges,
                               const DielectricParams& diel, const VectorX& phi_r, PBEMode mode);

/// P1 interpolation of a nodal field; throws Geometry if x is outside the mesh.
double interpolate(const Mesh& mesh, const VectorX& field, const Vec3& x, Index* cell_out = nullptr);

}  // namespace electroelastic
