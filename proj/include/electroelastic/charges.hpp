#pragma once

#include "electroelastic/common.hpp"
#include "electroelastic/mesh.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace electroelastic {

struct PointCharge {
  Vec3 position = Vec3::Zero();
  double q = 0.0;
  double radius = 1.0;
};

/// Flexible charges live in MF, rigid ones in MR. Singular-field evaluation
/// sums over both sets.
struct ChargeSystem {
  std::vector<PointCharge> flexible;
  std::vector<PointCharge> rigid;

  std::size_t size() const { return flexible.size() + rigid.size(); }
  const PointCharge& operator[](std::size_t i) const {
    return i < flexible.size() ? flexible[i] : rigid[i - flexible.size()];
  }

  ChargeSystem scaled(double s_flexible, double s_rigid) const;
  ChargeSystem without_rigid() const;
};

struct DielectricParams {
  double eps_m = 2.0;
  double eps_s = 80.0;
  double kappa = 0.0;    // current state
  double kappa0 = 0.0;   // free-state reference
  bool rigid_cavity = true;  // false: MR cells behave as solvent

  void validate() const;
  /// Screening coefficient multiplying sinh in the solvent, eps_s * kappa^2.
  double screening() const { return eps_s * kappa * kappa; }
};

double eval_G(const ChargeSystem& charges, double eps_m, const Vec3& x);
Vec3 eval_grad_G(const ChargeSystem& charges, double eps_m, const Vec3& x);
/// Hessian of G, used for the chain rule of the composed field.
Mat3 eval_hess_G(const ChargeSystem& charges, double eps_m, const Vec3& x);

/// Debye-Hueckel outer datum sum_i q_i exp(-kappa r_i) / (eps_s r_i).
double eval_g_boundary(const ChargeSystem& charges, const DielectricParams& diel, const Vec3& x);

/// Minimum distance from any charge to the GAMMA_F / GAMMA_R faces.
double exclusion_distance(const ChargeSystem& charges, const Mesh& mesh);

/// Checks that every flexible charge sits in an MF cell and every rigid one
/// in an MR cell, strictly away from the interface.
void validate_charges(const ChargeSystem& charges, const Mesh& mesh);

/// PQR-style records: `ATOM id x y z q radius [flexible|rigid]`.
ChargeSystem read_pqr(std::istream& in);
ChargeSystem read_pqr_file(const std::string& path);
void write_pqr(std::ostream& out, const ChargeSystem& charges);

}  // namespace electroelastic
