#include <doctest.h>

#include <cmath>
#include <random>

#include "bfly/butterfly.hpp"

using namespace bfly;

namespace {

CVector random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}

struct Setup {
  TriangleMesh mesh;
  std::vector<Support> sup;
  ClusterTree tree;
  BlockPartition part;
  OscillatoryKernel kernel;
  GalerkinAssembler as;

  Setup(int level, int leaf, StopRule rule, double kappa)
      : mesh(sphere_mesh(level)),
        sup(mesh.supports()),
        tree(build_cluster_tree(sup, leaf, 30, rule)),
        part(build_block_partition(tree, tree, 1.0)),
        kernel(helmholtz_kernel(kappa)),
        as(mesh, kernel, QuadratureConfig{}) {}
};

}  // namespace

TEST_CASE("transfer matrices") {
  const OscillatoryKernel k = helmholtz_kernel(3.0);
  const Box b({0, 0, 0}, {0.5, 0.5, 0.5});
  const std::vector<double> y{2, 2, 2};
  const CMatrix E = transfer_matrix(k, Side::x, b, b, y, y, 3);
  CHECK((E - CMatrix::Identity(64, 64)).cwiseAbs().maxCoeff() < 1e-14);

  // re-expansion is exact for kappa = 0
  const OscillatoryKernel k0 = helmholtz_kernel(0.0);
  const Box child({0, 0, 0}, {0.25, 0.25, 0.5});
  const std::vector<double> y2{3, 1, 2};
  const CMatrix E0 = transfer_matrix(k0, Side::y, child, b, y, y2, 2);
  const TensorGrid pg(b, 2), cg(child, 2);
  std::vector<double> pb(pg.size()), cb(cg.size());
  const std::vector<double> x{0.1, 0.2, 0.3};
  pg.basis(x, pb);
  cg.basis(x, cb);
  for (std::size_t p = 0; p < pg.size(); ++p) {
    Complex s = 0;
    for (std::size_t n = 0; n < cg.size(); ++n) s += cb[n] * E0(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    CHECK(std::abs(s - pb[p]) < 1e-13);
  }
}

TEST_CASE("coupling matrix") {
  const OscillatoryKernel k = helmholtz_kernel(2.0);
  const Box a({0, 0, 0}, {0.5, 0.5, 0.5}), b({2, 0, 0}, {2.5, 0.5, 0.5});
  const std::vector<double> x0 = a.center(), y0 = b.center();
  const CMatrix S = coupling_matrix(k, a, b, x0, y0, 1);
  const TensorGrid ga(a, 1), gb(b, 1);
  CHECK(S.rows() == 8);
  CHECK(std::abs(S(3, 5) - modified_kernel(k, x0, y0, ga.node(3), gb.node(5))) < 1e-16);
}

TEST_CASE("level-3 factorisation with transfers") {
  Setup s(3, 8, StopRule::all_small, 2.0);
  const ButterflyFactorization f = factorize(s.as, s.tree, s.tree, s.part, 1);
  const CMatrix D = to_dense(f);
  const Eigen::Index n = D.rows();

  SUBCASE("matvec against the block expansion, naive sum and adjoint") {
    for (int t = 0; t < 3; ++t) {
      const CVector x = random_vector(n, 100 + t);
      const CVector y = matvec(f, x);
      CHECK((y - D * x).norm() <= 1e-12 * (D * x).norm());
      CHECK((y - matvec_naive(f, x)).norm() <= 1e-13 * y.norm());
      const CVector z = matvec(f, x, Op::adjoint);
      CHECK((z - D.adjoint() * x).norm() <= 1e-12 * z.norm());
    }
    CHECK(matvec(f, CVector::Zero(n)).norm() == 0.0);
    const CVector u = random_vector(n, 1), v = random_vector(n, 2);
    const Complex al(0.3, -1.2), be(2.0, 0.5);
    CHECK((matvec(f, al * u + be * v) - al * matvec(f, u) - be * matvec(f, v)).norm() <= 1e-12 * matvec(f, u).norm());
    CHECK_THROWS(matvec(f, CVector::Zero(n + 1)));
  }
  SUBCASE("block_dense matches unit-vector probing") {
    const auto& leaf = s.part.admissible.front();
    const auto sl = s.tree.descendants_at(leaf.sigma, s.tree.depth()).front();
    const auto tl = s.tree.descendants_at(leaf.tau, s.tree.depth()).front();
    const CMatrix B = block_dense(f, sl, tl);
    const auto& ri = s.tree[sl].indices;
    const auto& ci = s.tree[tl].indices;
    for (std::size_t c = 0; c < ci.size(); ++c) {
      CVector e = CVector::Zero(n);
      e(static_cast<Eigen::Index>(ci[c])) = 1.0;
      const CVector col = matvec(f, e);
      for (std::size_t r = 0; r < ri.size(); ++r)
        CHECK(std::abs(col(static_cast<Eigen::Index>(ri[r])) - B(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))) < 1e-14);
    }
  }
  SUBCASE("storage") {
    const StorageReport r = storage_report(f);
    CHECK(r.consistent);
    CHECK(r.total_entries == r.coupling_entries + r.transfer_entries + r.leaf_entries + r.nearfield_entries);
    CHECK(r.dense_entries == static_cast<std::size_t>(n * n));
  }
}

TEST_CASE("empty chains: V S W^T") {
  Setup s(3, 32, StopRule::any_small, 2.0);
  const ButterflyFactorization f = factorize(s.as, s.tree, s.tree, s.part, 1);
  const auto& leaf = s.part.admissible.front();
  const ButterflyPlan& plan = s.part.plans[leaf.plan];
  REQUIRE(plan.steps == 0);
  const PlanFactors& pf = f.plans()[leaf.plan];
  CHECK(pf.Ex.empty());
  const CMatrix& V = pf.V.at({leaf.sigma, leaf.tau});
  const CMatrix& W = pf.W.at({leaf.tau, leaf.sigma});
  const CMatrix& S = pf.S.at({leaf.sigma, leaf.tau});
  CHECK((block_dense(f, leaf.sigma, leaf.tau) - V * S * W.transpose()).norm() < 1e-15 * V.norm() * S.norm() * W.norm());
  const std::size_t M = f.rank();
  const std::size_t ns = s.tree[leaf.sigma].size(), nt = s.tree[leaf.tau].size();
  CHECK(static_cast<std::size_t>(V.size() + W.size() + S.size()) == M * M + M * (ns + nt));
}

TEST_CASE("block error decays geometrically in m") {
  Setup s(3, 32, StopRule::any_small, 2.0);
  const CMatrix K = assemble_dense(s.mesh, s.kernel, QuadratureConfig{}, std::size_t(1) << 30);
  const auto& leaf = s.part.admissible.front();
  const auto& ri = s.tree[leaf.sigma].indices;
  const auto& ci = s.tree[leaf.tau].indices;
  CMatrix T(ri.size(), ci.size());
  for (std::size_t r = 0; r < ri.size(); ++r)
    for (std::size_t c = 0; c < ci.size(); ++c)
      T(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = K(static_cast<Eigen::Index>(ri[r]), static_cast<Eigen::Index>(ci[c]));
  std::vector<double> err;
  for (int m = 0; m <= 3; ++m) {
    const ButterflyFactorization f = factorize(s.as, s.tree, s.tree, s.part, m);
    err.push_back((block_dense(f, leaf.sigma, leaf.tau) - T).norm());
  }
  for (std::size_t i = 1; i < err.size(); ++i) CHECK(err[i] < 0.5 * err[i - 1]);
}

TEST_CASE("nestedness") {
  Setup s(4, 16, StopRule::all_small, 4.0);
  std::vector<std::array<std::size_t, 3>> triples;
  for (std::size_t p = 0; p < s.part.plans.size() && triples.size() < 12; p += 29) {
    const ButterflyPlan& plan = s.part.plans[p];
    if (plan.steps < 1) continue;
    const auto [sigma, tau] = plan.middle_blocks.front();
    triples.push_back({sigma, s.tree[sigma].sons.front(), tau});
  }
  REQUIRE(!triples.empty());

  SUBCASE("exact without phase") {
    const OscillatoryKernel k0 = helmholtz_kernel(0.0);
    const GalerkinAssembler a0(s.mesh, k0, QuadratureConfig{});
    for (const auto& [p, c, t] : triples) {
      const NestednessResidual r = nestedness_check(a0, s.tree, s.tree, p, c, t, 2);
      CHECK(r.entrywise < 1e-13);
      CHECK(r.range < 1e-13);
    }
  }
  SUBCASE("decreases with the degree") {
    double prev = 1e300;
    for (int m = 2; m <= 8; m += 2) {
      double worst = 0;
      for (const auto& [p, c, t] : triples) worst = std::max(worst, nestedness_check(s.as, s.tree, s.tree, p, c, t, m).range);
      CHECK(worst < prev);
      prev = worst;
    }
    CHECK(prev <= 1e-6);
  }
  CHECK_THROWS(nestedness_check(s.as, s.tree, s.tree, triples[0][1], triples[0][0], triples[0][2], 2));
}
