#include "electroelastic/piola.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include <random>

using namespace electroelastic;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Mesh reference_cell() {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  m.cells = {{0, 1, 2, 3}};
  m.cell_region = {Region::MF};
  m.finalize();
  return m;
}

DisplacementField affine(const Mesh& m, const Mat3& A) {
  DisplacementField d = DisplacementField::zero(m);
  for (std::size_t v = 0; v < m.num_vertices(); ++v) d.values[v] = (A - Mat3::Identity()) * m.vertices[v];
  return d;
}

const Mesh& ball() {
  static const Mesh m = build_ball_in_box(Vec3::Zero(), 1.0, 4.0, 0.5, Region::MF);
  return m;
}

std::vector<Vec3> random_smooth(std::mt19937_64& rng, const Mesh& m) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Mat3 A;
  Vec3 k, b;
  for (int i = 0; i < 3; ++i) {
    k[i] = 2.0 * U(rng);
    b[i] = U(rng);
    for (int j = 0; j < 3; ++j) A(i, j) = U(rng);
  }
  std::vector<Vec3> u(m.num_vertices(), Vec3::Zero());
  const auto mf = m.region_vertex_mask(Region::MF);
  for (std::size_t v = 0; v < u.size(); ++v)
    if (mf[v]) {
      const Vec3& x = m.vertices[v];
      u[v] = A * Vec3(std::sin(k.dot(x) + b[0]), std::cos(k[1] * x[0] + b[1]), x[2] * x[1] + b[2]);
    }
  return u;
}

double max_cell_grad(const Mesh& m, const std::vector<Vec3>& u) {
  double mx = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    Mat3 g = Mat3::Zero();
    for (int a = 0; a < 4; ++a) g += u[m.cells[c][a]] * m.geometry[c].grad.row(a);
    if (!g.isZero(0.0)) mx = std::max(mx, Eigen::JacobiSVD<Mat3>(g).singularValues()[0]);
  }
  return mx;
}

}  // namespace

TEST_CASE("zero displacement gives the identity transform exactly", "[piola]") {
  const Mesh& m = ball();
  const DisplacementField w = harmonic_extend(m, std::vector<Vec3>(m.num_vertices(), Vec3::Zero()));
  for (const auto& v : w.values) REQUIRE(v == Vec3::Zero());
  const PiolaFields p = compute_piola(m, w);
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    REQUIRE(p.J[c] == 1.0);
    REQUIRE(p.F[c] == Mat3::Identity());
  }
  const PiolaFields id = identity_piola(m);
  CHECK(id.J == p.J);
}

TEST_CASE("uniform dilation on one cell", "[piola]") {
  const Mesh m = reference_cell();
  const PiolaFields p = compute_piola(m, affine(m, 1.1 * Mat3::Identity()));
  CHECK((p.grad_phi[0] - 1.1 * Mat3::Identity()).norm() < 1e-14);
  CHECK_THAT(p.J[0], WithinRel(1.331, 1e-14));
  CHECK((p.F[0] - 1.1 * Mat3::Identity()).norm() < 1e-14);
}

TEST_CASE("Jacobian is multiplicative under composition", "[piola]") {
  const Mesh m = reference_cell();
  Mat3 A, B;
  A << 1.1, 0.05, 0.0, -0.02, 0.95, 0.1, 0.03, 0.0, 1.05;
  B << 0.9, 0.0, 0.04, 0.1, 1.2, 0.0, 0.0, -0.05, 1.0;
  const double jA = compute_piola(m, affine(m, A)).J[0];
  const double jB = compute_piola(m, affine(m, B)).J[0];
  const double jAB = compute_piola(m, affine(m, A * B)).J[0];
  CHECK_THAT(jAB, WithinAbs(jA * jB, 1e-12));
}

TEST_CASE("small deformations give symmetric positive definite F", "[piola]") {
  const Mesh& m = ball();
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Vec3> u = random_smooth(rng, m);
    DisplacementField w = harmonic_extend(m, u);
    const double g = max_cell_grad(m, w.values);
    for (auto& v : u) v *= 0.2 / g;
    w = harmonic_extend(m, u);
    REQUIRE(max_cell_grad(m, w.values) <= 0.2 + 1e-12);
    const PiolaFields p = compute_piola(m, w);
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      REQUIRE((p.F[c] - p.F[c].transpose()).cwiseAbs().maxCoeff() <= 1e-12);
      Eigen::SelfAdjointEigenSolver<Mat3> es(p.F[c]);
      REQUIRE(es.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("harmonic extension properties", "[piola]") {
  const Mesh& m = ball();
  const auto mf = m.region_vertex_mask(Region::MF);
  const auto outer = m.outer_vertex_mask();
  std::mt19937_64 rng(5);

  SECTION("discrete maximum principle") {
    for (int trial = 0; trial < 3; ++trial) {
      const std::vector<Vec3> u = random_smooth(rng, m);
      const DisplacementField w = harmonic_extend(m, u);
      for (int d = 0; d < 3; ++d) {
        double bmax = 0.0;
        for (std::size_t v = 0; v < u.size(); ++v)
          if (mf[v]) bmax = std::max(bmax, std::abs(u[v][d]));
        for (std::size_t v = 0; v < u.size(); ++v) {
          if (mf[v]) REQUIRE(w.values[v][d] == u[v][d]);
          if (outer[v]) REQUIRE(w.values[v][d] == 0.0);
          CHECK(std::abs(w.values[v][d]) <= bmax + 1e-10);
        }
      }
    }
  }

  SECTION("constant data interpolates between c and 0") {
    const Vec3 c(0.3, -0.2, 0.1);
    std::vector<Vec3> u(m.num_vertices(), Vec3::Zero());
    for (std::size_t v = 0; v < u.size(); ++v)
      if (mf[v]) u[v] = c;
    const DisplacementField w = harmonic_extend(m, u);
    for (std::size_t v = 0; v < u.size(); ++v)
      for (int d = 0; d < 3; ++d) {
        const double lo = std::min(0.0, c[d]), hi = std::max(0.0, c[d]);
        CHECK(w.values[v][d] >= lo - 1e-12);
        CHECK(w.values[v][d] <= hi + 1e-12);
      }
  }

  SECTION("linearity") {
    const std::vector<Vec3> a = random_smooth(rng, m), b = random_smooth(rng, m);
    std::vector<Vec3> ab(a.size());
    for (std::size_t v = 0; v < a.size(); ++v) ab[v] = a[v] + b[v];
    const auto wa = harmonic_extend(m, a), wb = harmonic_extend(m, b), wab = harmonic_extend(m, ab);
    for (std::size_t v = 0; v < a.size(); ++v) CHECK((wab.values[v] - wa.values[v] - wb.values[v]).norm() <= 1e-10);
  }
}

TEST_CASE("compute_piola rejects collapsed cells", "[piola]") {
  const Mesh m = reference_cell();
  try {
    compute_piola(m, affine(m, 0.4 * Mat3::Identity()));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Inadmissible);
    CHECK(std::string(e.what()).find("cell 0") != std::string::npos);
  }
}

TEST_CASE("admissibility gate", "[piola]") {
  const Mesh& m = ball();
  const AdmissibilityReport z = check_admissible(m, DisplacementField::zero(m), 1.0);
  CHECK(z.admissible);
  CHECK(z.surrogate_norm == 0.0);

  const AdmissibilityReport dil = check_admissible(m, affine(m, 6.0 * Mat3::Identity()), 1.0);
  CHECK_FALSE(dil.admissible);
  CHECK(dil.norm_exceeded);
  CHECK_FALSE(dil.jacobian_too_small);
  CHECK_THAT(dil.max_grad_u, WithinRel(5.0, 1e-12));

  Mat3 refl = Mat3::Identity();
  refl(0, 0) = -1.0;
  const AdmissibilityReport r = check_admissible(m, affine(m, refl), 1e6);
  CHECK_FALSE(r.admissible);
  CHECK(r.jacobian_too_small);
  CHECK(r.min_J < 0.0);
}
