#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "bfly/analysis.hpp"

using namespace bfly;

TEST_CASE("rho1 from the quadratic") {
  CHECK(solve_rho1(2.0, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(solve_rho1(2.0, 0.5) == doctest::Approx((2.25 + std::sqrt(2.25 * 2.25 - 4.0)) / 2.0).epsilon(1e-14));
  CHECK(solve_rho1(2.0, 0.5) == doctest::Approx(1.6403882).epsilon(1e-7));
  CHECK(std::abs(solve_rho1(1e4, 0.5) / 1e4 - 0.5) < 1e-3);
  CHECK_THROWS(solve_rho1(1.0, 0.5));
  CHECK_THROWS(solve_rho1(2.0, 0.0));
  CHECK_THROWS(solve_rho1(2.0, 1.5));
}

TEST_CASE("ellipse membership") {
  const EllipseParams e({-1.0, 1.0}, 2.0);
  CHECK(e.contains({0.0, 0.0}));
  CHECK(e.contains(e.boundary(0.7)));
  CHECK_FALSE(e.contains(1.01 * e.boundary(0.7)));
  // semi-axes (rho +- 1/rho) / 2
  CHECK(e.boundary(0.0).real() == doctest::Approx(1.25));
  CHECK(e.boundary(std::numbers::pi / 2).imag() == doctest::Approx(0.75));
  const EllipseParams s({2.0, 4.0}, 2.0);
  CHECK(s.boundary(0.0).real() == doctest::Approx(3.0 + 1.25));
  CHECK_THROWS(EllipseParams({0.0, 1.0}, 1.0));
}

TEST_CASE("inclusion lemma") {
  CHECK(verify_inclusion(3.0, {-1.0, 1.0}, 3.0));
  const double r1 = solve_rho1(2.0, 0.5);
  CHECK(verify_inclusion(2.0, {-1.0, 0.0}, r1));
  CHECK_FALSE(verify_inclusion(2.0, {-1.0, 0.0}, r1 * (1.0 - 1e-3)));
  // translated sub-interval of the same length
  CHECK(verify_inclusion(2.0, {-0.25, 0.75}, r1));
}

TEST_CASE("qhat scan") {
  const double q = qhat_scan(0.5);
  CHECK(q < 1.0);
  CHECK(q > 0.5);
  CHECK(qhat_scan(0.25) < q);
}

TEST_CASE("stability constant") {
  StabilityBudget b;
  b.d = 1;
  b.rho = 3.0;
  b.gamma = 0.0;
  b.lambda_m = 1.0;
  CHECK(stability_constant_C1(b) == doctest::Approx(2.0));
  StabilityBudget g = b;
  g.gamma = 0.5;
  CHECK(stability_constant_C1(g) > stability_constant_C1(b));
  StabilityBudget l = b;
  l.lambda_m = 2.0;
  CHECK(stability_constant_C1(l) > stability_constant_C1(b));
  b.L = 3;
  b.m = 4;
  CHECK(stability_growth_bound(b, 0.5) == doctest::Approx(std::pow(1.0 + 2.0 * 0.0625, 3)));
  b.rho = 1.0;
  CHECK_THROWS(b.validate());
}

TEST_CASE("chained re-interpolation") {
  ChainConfig cfg;
  cfg.trials = 3;
  cfg.samples = 128;

  SUBCASE("empty chain") {
    cfg.levels = 0;
    const ChainTable t = iterated_reinterpolation_experiment(line_pair_kernel(cfg.kappa), cfg);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].error == 0.0);
    CHECK(t.rows[0].norm <= 1.0);
  }
  SUBCASE("no phase: exact") {
    const ChainTable t = iterated_reinterpolation_experiment(line_pair_kernel(0.0), cfg);
    for (const auto& r : t.rows) CHECK(r.error < 1e-12);
  }
  SUBCASE("envelope bounds every level") {
    const ChainTable t = iterated_reinterpolation_experiment(line_pair_kernel(cfg.kappa), cfg);
    CHECK(t.rows.size() == 7);
    for (const auto& r : t.rows) CHECK(r.error <= r.envelope * (1.0 + 1e-12) + 1e-300);
    CHECK(t.max_norm_growth < 1.5);
    std::ostringstream os;
    write_chain_csv(t, os);
    CHECK(os.str().rfind("level,measured,envelope,norm\n", 0) == 0);
  }
}

TEST_CASE("function-level butterfly") {
  const OscillatoryKernel k = helmholtz_kernel(8.0);
  const Box x({0.0, 0.0}, {1.0, 1.0}), y({3.0, 0.0}, {4.0, 1.0});

  SUBCASE("log-linear in m") {
    const ButterflyGeometry g = halving_geometry(x, y, 1);
    std::vector<double> e;
    for (int m = 0; m <= 8; m += 2) e.push_back(kernel_butterfly_error(k, g, m, 6));
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] < e[i - 1]);
  }
  SUBCASE("bounded stability factor") {
    const ButterflyGeometry g0 = halving_geometry(x, y, 0), g2 = halving_geometry(x, y, 2);
    for (int m : {6, 8}) {
      const double e0 = kernel_butterfly_error(k, g0, m, 6), e2 = kernel_butterfly_error(k, g2, m, 6);
      CHECK(e2 < 10.0 * e0);
    }
  }
  SUBCASE("no phase, polynomial amplitude: exact") {
    OscillatoryKernel p;
    p.kappa = 0.0;
    p.phase = [](PointView, PointView) { return 0.0; };
    p.amplitude = [](PointView a, PointView b) { return Complex(a[0] * a[1] * b[0] + b[1] * b[1], a[0]); };
    const ButterflyGeometry g = halving_geometry(x, y, 2);
    double scale = 0.0;
    const double e = kernel_butterfly_error(p, g, 2, 5, &scale);
    CHECK(e < 1e-12 * scale);
  }
}
