#pragma once

#include "electroelastic/elasticity.hpp"
#include "electroelastic/pbe.hpp"

#include <array>
#include <ostream>
#include <string>
#include <vector>

namespace electroelastic {

struct GaussianBlob {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  double A = 0.0;          // signed target q_i * site potential
  double a = 0.0;          // prefactor (force/volume)
  double sigma = 1.0;      // decay, length^2
  Vec3 n = Vec3::Zero();   // unit direction, carries the sign of A
  bool degenerate = false;

  double density(const Vec3& x) const { return a * std::exp(-(x - center).squaredNorm() / sigma); }
  Vec3 value(const Vec3& x) const { return density(x) * n; }
};

/// a e^{-R^2/sigma} = tail and 4 pi a int_0^R r^2 e^{-r^2/sigma} dr = |A|.
/// Direction is left zero; a degenerate blob (a = 0) is returned when
/// |A| <= tail * 4/3 pi R^3, with `degenerate` set.
GaussianBlob fit_gaussian(double A, double R, double delta_target, int n_flexible);

/// 4 pi int_0^1 t^2 e^{beta (1 - t^2)} dt by composite Gauss-Legendre.
double gaussian_mass_factor(double beta);

/// phi^r at the reference position of flexible charge i plus the partner
/// Coulomb potentials at its deformed image.
double charge_site_potential(const PotentialDecomposition& d, std::size_t i);
/// Gradient of the site potential in the deformed frame.
Vec3 charge_site_gradient(const PotentialDecomposition& d, std::size_t i);

enum class ForceState { State0, State1, State2, State3, Coupled };
const char* to_string(ForceState s) noexcept;

struct ForceSet {
  ForceState label = ForceState::Coupled;
  std::vector<std::vector<Vec3>> body;  // per cell, per degree-5 point; zero outside MF
  std::vector<Vec3> surface;            // per mesh face; zero off GAMMA_F
  std::vector<GaussianBlob> blobs;
  std::vector<std::string> warnings;

  static ForceSet zero(const Mesh& mesh, ForceState label);
  LoadSet to_loads() const;
};

std::vector<std::vector<Vec3>> assemble_body_force(const PotentialDecomposition& d, double delta_target,
                                                   std::vector<GaussianBlob>* blobs = nullptr,
                                                   std::vector<std::string>* warnings = nullptr);

std::vector<Vec3> assemble_surface_force(const PotentialDecomposition& d, const PiolaFields& piola,
                                         const DielectricParams& diel, const InterfacePatch& patch);

/// Body and surface forces of one state on all GAMMA_F faces.
ForceSet assemble_forces(const PotentialDecomposition& d, double delta_target, ForceState label);

ForceSet net_forces(const ForceSet& current, const ForceSet& reference);

struct ForceSummary {
  Vec3 body_total = Vec3::Zero();      // integral of f_b over MF
  Vec3 surface_total = Vec3::Zero();   // integral of f_s over GAMMA_F
  double body_l2 = 0.0;
  double surface_l2 = 0.0;             // L2 norm of f_s over GAMMA_F
  double body_abs = 0.0;               // integral of |f_b|
  double surface_abs = 0.0;            // integral of |f_s|
};
ForceSummary summarize(const Mesh& mesh, const ForceSet& f);

struct PerturbationLedger {
  std::array<ForceSet, 4> deltas;   // ionic strength, cavity, added charges, deformation
  double telescoping_residual = 0.0;
};

/// states: 0, 1, 2, 3 and the coupled state, in order.
PerturbationLedger build_perturbation_ledger(const std::vector<ForceSet>& states);

void write_surface_force_csv(std::ostream& os, const Mesh& mesh, const ForceSet& f);
void write_blob_csv(std::ostream& os, const std::vector<GaussianBlob>& blobs);

}  // namespace electroelastic
