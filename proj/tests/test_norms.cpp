#include "electroelastic/norms.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace electroelastic;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Mesh reference_cell(double scale) {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(scale, 0, 0), Vec3(0, scale, 0), Vec3(0, 0, scale)};
  m.cells = {{0, 1, 2, 3}};
  m.cell_region = {Region::MF};
  m.finalize();
  return m;
}

const Mesh& two_balls() {
  static const Mesh m = build_two_balls_in_box(TwoBallGeometry{}, 0.5);
  return m;
}

VectorX random_field(std::mt19937_64& rng, const Mesh& m) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const Vec3 k(U(rng), U(rng), U(rng));
  VectorX f(static_cast<Eigen::Index>(m.num_vertices()));
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    f[static_cast<Eigen::Index>(v)] = std::sin(k.dot(m.vertices[v])) + 0.3 * U(rng);
  return f;
}

}  // namespace

TEST_CASE("constant field on a unit-volume region", "[norms]") {
  // reference cell scaled to unit volume
  const Mesh m = reference_cell(std::cbrt(6.0));
  REQUIRE_THAT(m.geometry[0].volume, WithinRel(1.0, 1e-14));
  const VectorX c = VectorX::Constant(4, -2.5);
  const BrokenNorms n = broken_norm(c, m, 2.0);
  CHECK_THAT(n.mf.l2, WithinRel(2.5, 1e-14));
  CHECK_THAT(n.mf.lp, WithinRel(2.5, 1e-14));
  CHECK(n.mf.linf == 2.5);
  CHECK(n.mf.h1_semi == 0.0);
  CHECK_FALSE(n.solvent.present);
  CHECK_THAT(broken_norm(c, m, 4.0).mf.lp, WithinRel(2.5, 1e-14));
}

TEST_CASE("linear field on one cell", "[norms]") {
  const Mesh m = reference_cell(1.0);
  const Vec3 g(0.3, -1.2, 2.0);
  VectorX f(4);
  for (int v = 0; v < 4; ++v) f[v] = 0.7 + g.dot(m.vertices[v]);
  const BrokenNorms n = broken_norm(f, m, 2.0);
  CHECK_THAT(n.mf.h1_semi, WithinRel(g.norm() * std::sqrt(1.0 / 6.0), 1e-14));
  // int (a + g.x)^2 over the reference tetrahedron by the degree-2 moments
  double l2sq = 0.7 * 0.7 / 6.0 + 2.0 * 0.7 * g.sum() / 24.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) l2sq += g[i] * g[j] * (i == j ? 1.0 / 60.0 : 1.0 / 120.0);
  CHECK_THAT(n.mf.l2, WithinRel(std::sqrt(l2sq), 1e-13));
}

TEST_CASE("region norms add up to the whole-domain norm", "[norms]") {
  const Mesh& m = two_balls();
  std::mt19937_64 rng(4);
  const VectorX f = random_field(rng, m);
  const BrokenNorms n = broken_norm(f, m, 2.0);
  REQUIRE(n.mf.present);
  REQUIRE(n.mr.present);
  REQUIRE(n.solvent.present);
  const double sum = n.mf.l2 * n.mf.l2 + n.mr.l2 * n.mr.l2 + n.solvent.l2 * n.solvent.l2;
  CHECK_THAT(sum, WithinRel(n.whole_l2 * n.whole_l2, 1e-12));
  CHECK_THAT(n.aggregate.l2, WithinRel(n.mf.l2 + n.mr.l2 + n.solvent.l2, 1e-14));
  CHECK_THAT(n.mf.volume + n.mr.volume + n.solvent.volume, WithinRel(n.aggregate.volume, 1e-14));
}

TEST_CASE("homogeneity and the triangle inequality", "[norms]") {
  const Mesh& m = two_balls();
  std::mt19937_64 rng(8);
  for (double p : {2.0, 4.0}) {
    const VectorX f = random_field(rng, m), g = random_field(rng, m);
    const BrokenNorms nf = broken_norm(f, m, p), ng = broken_norm(g, m, p), nfg = broken_norm(f + g, m, p);
    for (double s : {-3.0, 0.5}) {
      const BrokenNorms ns = broken_norm(s * f, m, p);
      for (Region r : {Region::MF, Region::MR, Region::Solvent}) {
        CHECK_THAT(ns[r].lp, WithinRel(std::abs(s) * nf[r].lp, 1e-12));
        CHECK_THAT(ns[r].l2, WithinRel(std::abs(s) * nf[r].l2, 1e-12));
        CHECK_THAT(ns[r].h1, WithinRel(std::abs(s) * nf[r].h1, 1e-12));
        CHECK_THAT(ns[r].linf, WithinRel(std::abs(s) * nf[r].linf, 1e-14));
      }
    }
    for (Region r : {Region::MF, Region::MR, Region::Solvent}) {
      CHECK(nfg[r].lp <= nf[r].lp + ng[r].lp + 1e-12);
      CHECK(nfg[r].h1 <= nf[r].h1 + ng[r].h1 + 1e-12);
      CHECK(nfg[r].linf <= nf[r].linf + ng[r].linf + 1e-12);
    }
  }
}

TEST_CASE("L-infinity flag and vector H1", "[norms]") {
  const Mesh& m = two_balls();
  std::mt19937_64 rng(12);
  const VectorX f = random_field(rng, m);
  const BrokenNorms n = broken_norm(f, m, kInfNorm);
  CHECK(n.mf.lp == n.mf.linf);
  CHECK_THAT(n.aggregate.linf, WithinRel(n.mf.linf + n.mr.linf + n.solvent.linf, 1e-15));
  CHECK(n.mf.linf <= f.cwiseAbs().maxCoeff());

  std::vector<Vec3> v(m.num_vertices());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = Vec3(f[static_cast<Eigen::Index>(i)], 0.0, 0.0);
  const auto mask = region_cell_mask(m, Region::MF);
  CHECK_THAT(h1_norm(m, v, mask), WithinRel(n.mf.h1, 1e-12));
}
