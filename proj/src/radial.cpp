#include "electroelastic/radial.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "electroelastic/linear_solver.hpp"

namespace electroelastic {

void RadialConfig::validate() const {
  require(R > 0.0, ErrorKind::Validation, "radial oracle: R must be positive");
  require(R_out > R, ErrorKind::Validation, "radial oracle: R_out must exceed R");
  require(eps_m > 0.0 && eps_s > 0.0, ErrorKind::Validation, "radial oracle: permittivities must be positive");
  require(kappa >= 0.0, ErrorKind::Validation, "radial oracle: kappa must be >= 0");
  require(grid_points >= 200, ErrorKind::Validation, "radial oracle: at least 200 grid points required");
}

double born_reaction_potential(const RadialConfig& cfg) {
  require(cfg.R > 0.0, ErrorKind::Validation, "radial oracle: R must be positive");
  return cfg.q / (cfg.eps_s * (1.0 + cfg.kappa * cfg.R) * cfg.R) - cfg.q / (cfg.eps_m * cfg.R);
}

namespace {

struct Layout {
  int n_in, n_out;
  double h_in, h_out;
  // psi_in[j], j = 0..n_in+1 ; psi_out[j], j = -1..n_out
  int in(int j) const { return j; }
  int out(int j) const { return n_in + 2 + (j + 1); }
  int size() const { return n_in + n_out + 4; }
};

}  // namespace

RadialSolution solve_radial_pb(const RadialConfig& cfg, bool linearized) {
  cfg.validate();
  Layout L;
  L.n_in = std::max(4, cfg.grid_points / 10);
  L.n_out = cfg.grid_points - L.n_in;
  L.h_in = cfg.R / L.n_in;
  L.h_out = (cfg.R_out - cfg.R) / L.n_out;
  const double k2 = cfg.kappa * cfg.kappa;
  const double datum = cfg.q * std::exp(-cfg.kappa * (cfg.R_out - cfg.R)) / (cfg.eps_s * (1.0 + cfg.kappa * cfg.R));
  const int N = L.size();

  auto r_out = [&](int j) { return cfg.R + j * L.h_out; };

  auto residual = [&](const VectorX& x, VectorX& F, std::vector<Triplet>* jac) {
    F.setZero(N);
    int row = 0;
    auto put = [&](int r, int c, double v) {
      if (jac) jac->emplace_back(r, c, v);
    };
    F[row] = x[L.in(0)];
    put(row, L.in(0), 1.0);
    ++row;
    const double hi2 = 1.0;  // rows scaled by h^2
    for (int j = 1; j <= L.n_in; ++j, ++row) {
      F[row] = (x[L.in(j - 1)] - 2.0 * x[L.in(j)] + x[L.in(j + 1)]) * hi2;
      put(row, L.in(j - 1), hi2);
      put(row, L.in(j), -2.0 * hi2);
      put(row, L.in(j + 1), hi2);
    }
    const double ho2 = 1.0;
    const double hh = L.h_out * L.h_out;
    for (int j = 0; j < L.n_out; ++j, ++row) {
      const double r = r_out(j);
      const double psi = x[L.out(j)];
      double react, dreact;
      if (linearized) {
        react = hh * k2 * psi;
        dreact = hh * k2;
      } else {
        react = hh * k2 * r * std::sinh(psi / r);
        dreact = hh * k2 * std::cosh(psi / r);
      }
      F[row] = (x[L.out(j - 1)] - 2.0 * psi + x[L.out(j + 1)]) * ho2 - react;
      put(row, L.out(j - 1), ho2);
      put(row, L.out(j), -2.0 * ho2 - dreact);
      put(row, L.out(j + 1), ho2);
    }
    F[row] = x[L.out(L.n_out)] - datum;
    put(row, L.out(L.n_out), 1.0);
    ++row;
    // continuity of phi
    F[row] = x[L.out(0)] - x[L.in(L.n_in)] - cfg.q / cfg.eps_m;
    put(row, L.out(0), 1.0);
    put(row, L.in(L.n_in), -1.0);
    ++row;
    // flux: eps_s (psi_out' - psi_out/R) = eps_m (psi_in' - psi_in/R) - q/R
    const double a = cfg.eps_s, b = cfg.eps_m, R = cfg.R;
    F[row] = a * ((x[L.out(1)] - x[L.out(-1)]) / (2.0 * L.h_out) - x[L.out(0)] / R) -
             b * ((x[L.in(L.n_in + 1)] - x[L.in(L.n_in - 1)]) / (2.0 * L.h_in) - x[L.in(L.n_in)] / R) + cfg.q / R;
    put(row, L.out(1), a / (2.0 * L.h_out));
    put(row, L.out(-1), -a / (2.0 * L.h_out));
    put(row, L.out(0), -a / R);
    put(row, L.in(L.n_in + 1), -b / (2.0 * L.h_in));
    put(row, L.in(L.n_in - 1), b / (2.0 * L.h_in));
    put(row, L.in(L.n_in), b / R);
    ++row;
  };

  // Initial guess: the unscreened solution.
  VectorX x = VectorX::Zero(N);
  {
    const double c = cfg.q / (cfg.eps_s * cfg.R) - cfg.q / (cfg.eps_m * cfg.R);
    for (int j = 0; j <= L.n_in + 1; ++j) x[L.in(j)] = c * j * L.h_in;
    for (int j = -1; j <= L.n_out; ++j) x[L.out(j)] = datum + (cfg.q / cfg.eps_s - datum) * (L.n_out - j) / L.n_out;
  }

  RadialSolution sol;
  sol.linearized = linearized;
  VectorX F;
  residual(x, F, nullptr);
  double fnorm = F.norm();
  const double tol = 1e-12 * (1.0 + fnorm);
  int it = 0;
  bool converged = fnorm <= tol;
  while (!converged && it < 100) {
    std::vector<Triplet> trip;
    residual(x, F, &trip);
    SparseMatrix Jm(N, N);
    Jm.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(Jm);
    if (lu.info() != Eigen::Success) fail(ErrorKind::Assembly, "radial oracle: singular Jacobian");
    const VectorX dx = lu.solve(F);
    ++it;
    const double step = dx.lpNorm<Eigen::Infinity>() / (1.0 + x.lpNorm<Eigen::Infinity>());
    if (step <= 1e-13) {
      x -= dx;
      converged = true;
      break;
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      const VectorX xt = x - alpha * dx;
      VectorX Ft;
      residual(xt, Ft, nullptr);
      const double nt = Ft.norm();
      if (std::isfinite(nt) && nt < fnorm) {
        x = xt;
        fnorm = nt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      converged = step <= 1e-9;
      break;
    }
    converged = fnorm <= tol;
  }
  if (!converged) fail(ErrorKind::NonConvergence, "radial oracle: Newton failed to converge (charge too large?)");
  sol.newton_iterations = it;

  for (int j = 0; j <= L.n_in; ++j) {
    const double r = j * L.h_in;
    sol.r.push_back(r);
    if (j == 0) {
      sol.phi.push_back(std::numeric_limits<double>::infinity());
      sol.phi_r.push_back((-3.0 * x[L.in(0)] + 4.0 * x[L.in(1)] - x[L.in(2)]) / (2.0 * L.h_in));
    } else {
      sol.phi_r.push_back(x[L.in(j)] / r);
      sol.phi.push_back(cfg.q / (cfg.eps_m * r) + x[L.in(j)] / r);
    }
  }
  sol.n_inside = sol.r.size();
  for (int j = 0; j <= L.n_out; ++j) {
    const double r = r_out(j);
    sol.r.push_back(r);
    sol.phi.push_back(x[L.out(j)] / r);
    sol.phi_r.push_back(x[L.out(j)] / r - cfg.q / (cfg.eps_m * r));
  }
  sol.phi_r_center = sol.phi_r[0];

  const double R = cfg.R;
  const double dpsi_out = (x[L.out(1)] - x[L.out(-1)]) / (2.0 * L.h_out);
  const double dpsi_in = (x[L.in(L.n_in + 1)] - x[L.in(L.n_in - 1)]) / (2.0 * L.h_in);
  sol.dphi_outside = (dpsi_out - x[L.out(0)] / R) / R;
  sol.dphi_inside = -cfg.q / (cfg.eps_m * R * R) + (dpsi_in - x[L.in(L.n_in)] / R) / R;
  sol.phi_surface = x[L.out(0)] / R;
  sol.surface_force = radial_surface_force(sol, cfg);
  return sol;
}

double radial_surface_force(const RadialSolution& sol, const RadialConfig& cfg) {
  const double k2 = cfg.eps_s * cfg.kappa * cfg.kappa;
  return -0.5 * (cfg.eps_s * sol.dphi_outside * sol.dphi_outside - cfg.eps_m * sol.dphi_inside * sol.dphi_inside) -
         k2 * (std::cosh(sol.phi_surface) - 1.0);
}

void write_radial_profile(std::ostream& out, const RadialSolution& sol) {
  out << "r,phi,phi_r\n";
  char buf[128];
  for (std::size_t i = 1; i < sol.r.size(); ++i) {
    if (i == sol.n_inside) continue;  // interface node repeated on the outside branch
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", sol.r[i], sol.phi[i], sol.phi_r[i]);
    out << buf;
  }
}

}  // namespace electroelastic
