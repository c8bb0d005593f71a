#pragma once

#include "electroelastic/elasticity.hpp"
#include "electroelastic/forces.hpp"
#include "electroelastic/norms.hpp"
#include "electroelastic/pbe.hpp"
#include "electroelastic/piola.hpp"

#include <memory>
#include <optional>
#include <ostream>
#include <vector>

namespace electroelastic {

struct FixedPointConfig {
  double relaxation = 0.5;
  double tolerance = 1e-8;      // times the flexible molecule radius
  int max_iterations = 100;
  double admissibility_M = 1.0;
  double j_min = kDefaultJMin;
  void validate() const;
};

/// Free state: u = 0, kappa = kappa0, no rigid molecule (cavity filled with
/// solvent, rigid charges removed).
struct FreeState {
  PotentialDecomposition decomp;
  ForceSet forces;
};

struct Scenario {
  std::shared_ptr<const Mesh> mesh;
  ChargeSystem charges;
  DielectricParams diel;              // target state (kappa, cavity flag)
  ElasticParams elastic;
  PBEConfig pbe;
  PBEMode mode = PBEMode::Nonlinear;
  ElasticConfig elastic_cfg;
  double delta_target = 1e-6;
  double molecule_radius = 1.0;
  std::shared_ptr<const FreeState> free;  // cached reference

  void validate() const;
  DielectricParams free_dielectric() const;
};

/// Computes and caches the free-state reference (idempotent).
void prepare_free_state(Scenario& sc);

struct MapResult {
  std::vector<Vec3> u;              // S(v), nodal, zero outside MF
  std::shared_ptr<const PiolaFields> piola;
  PotentialDecomposition decomp;
  ForceSet absolute;                // state forces before subtracting the reference
  ForceSet forces;                  // net, relative to the free state
  ElasticSolution elastic;
  AdmissibilityReport gate;
};

/// Rejects inadmissible v before any solve (ErrorKind::Inadmissible).
MapResult map_S(const Scenario& sc, const std::vector<Vec3>& v, const FixedPointConfig& cfg = {});

struct CoupledTraceRow {
  int k = 0;
  double increment = 0.0;
  double body_net = 0.0;      // L2 norm of the net body force
  double surface_net = 0.0;   // L2 norm of the net surface force
  double min_J = 1.0;
  double energy = 0.0;        // PBE energy of the state S was applied to
  double surrogate = 0.0;     // admissibility surrogate of u_{k+1}
};

struct CoupledState {
  int iterations = 0;
  bool converged = false;
  std::vector<Vec3> u;                  // u_{k+1}
  std::vector<Vec3> u_prev;             // u_k, the input of the last map
  PotentialDecomposition decomp;        // at u_k
  std::shared_ptr<const PiolaFields> piola;
  ForceSet absolute;                    // at u_k
  ForceSet forces;                      // net, at u_k
  AdmissibilityReport gate;             // of u_{k+1}
  std::vector<CoupledTraceRow> trace;
  std::vector<double> increments;

  /// Geometric mean of the ratios increments[k] / increments[k-1] for k in
  /// [first, last). (1, 6) uses the first five ratios, taken while the
  /// increments are far above the solver tolerances.
  double contraction_estimate(int first = 1, int last = -1) const;
};

CoupledState solve_coupled(Scenario& sc, const FixedPointConfig& cfg,
                           const std::vector<Vec3>* initial = nullptr);

struct ContinuationStage {
  double kappa = 0.0;
  double rigid_scale = 1.0;
  FixedPointConfig cfg;
};

/// Stages must be non-decreasing in |kappa - kappa0| and in rigid_scale; the
/// mesh and charge layout are shared, so each stage starts from the previous u.
std::vector<CoupledState> run_continuation(const Scenario& base, const std::vector<ContinuationStage>& stages);

struct WeakFormResidual {
  double pbe = 0.0;       // relative PBE weak residual at (phi_k, u_{k+1})
  double elastic = 0.0;   // relative elastic residual at (phi_k, u_{k+1})
  double total() const { return std::sqrt(pbe * pbe + elastic * elastic); }
};
WeakFormResidual residual_weak_form(const Scenario& sc, const CoupledState& state);
/// Same with an explicit displacement in place of u_{k+1}.
WeakFormResidual residual_weak_form(const Scenario& sc, const CoupledState& state, const std::vector<Vec3>& u);

struct EstimateRow {
  double kappa_shift = 0.0;
  double cavity_volume = 0.0;
  double F_minus_I_w1p = 0.0;
  double J_minus_1_inf = 0.0;
  double added_charge = 0.0;
  double body_net = 0.0;
  double surface_net = 0.0;
};
EstimateRow estimate_report(const Scenario& sc, const CoupledState& state, double p = 4.0);

/// State forces for the four-step ledger: states 0..3 at u = 0, then the
/// coupled state's absolute forces.
std::vector<ForceSet> ledger_states(Scenario& sc, const CoupledState& state);

void write_coupled_trace_csv(std::ostream& os, const CoupledState& s);

}  // namespace electroelastic
