#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bfly/kernel.hpp"

using namespace bfly;

namespace {
std::vector<double> rand_point(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}
}  // namespace

TEST_CASE("helmholtz values") {
  const std::vector<double> o{0, 0, 0}, e{1, 0, 0};
  CHECK(std::abs(helmholtz_kernel(0.0)(o, e) - 1.0 / (4.0 * std::numbers::pi)) < 1e-15);
  CHECK(std::abs(helmholtz_kernel(2.0 * std::numbers::pi)(o, e) - 1.0 / (4.0 * std::numbers::pi)) < 1e-14);
  const OscillatoryKernel k = helmholtz_kernel(7.0);
  for (double r : {0.5, 1.0, 2.0}) {
    const std::vector<double> y{0.0, r, 0.0};
    CHECK(std::abs(k(o, y)) == doctest::Approx(1.0 / (4.0 * std::numbers::pi * r)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(k(o, o), SingularEvaluation);
  CHECK_THROWS(helmholtz_kernel(-1.0));
}

TEST_CASE("unimodular phase and symmetry") {
  std::mt19937_64 rng(5);
  const OscillatoryKernel k = helmholtz_kernel(3.3);
  const std::vector<double> x0{0.1, 0.1, 0.1}, y0{2.0, 2.0, 2.0};
  for (int s = 0; s < 100; ++s) {
    const auto x = rand_point(rng, 0.0, 0.5), y = rand_point(rng, 1.5, 2.5);
    CHECK(std::abs(k(x, y)) == doctest::Approx(std::abs(k.amplitude(x, y))).epsilon(1e-14));
    CHECK(k.phase(x, y) == doctest::Approx(k.phase(y, x)).epsilon(1e-15));
    const Complex mk = modified_kernel(k, x0, y0, x, y);
    CHECK(std::abs(mk) == doctest::Approx(std::abs(k.amplitude(x, y))).epsilon(1e-13));
    const Complex back = phase_factor(k, Side::x, y0, x) * phase_factor(k, Side::y, x0, y) * mk;
    CHECK(std::abs(back - k(x, y)) <= 1e-13 * std::abs(k(x, y)));
  }
  const std::vector<double> x{0.2, 0.3, 0.1}, y{1.9, 2.2, 1.7};
  CHECK(std::abs(modified_kernel(helmholtz_kernel(0.0), x0, y0, x, y) - helmholtz_kernel(0.0).amplitude(x, y)) < 1e-16);
}

TEST_CASE("phase residual") {
  const OscillatoryKernel k = helmholtz_kernel(1.0);
  const std::vector<double> x0{0, 0, 0}, y0{3, 0, 0}, x{0.2, 0.1, 0}, y{3.3, 0.2, 0.1};
  CHECK(phase_residual(k, x0, y0, x0, y) == doctest::Approx(0.0));
  CHECK(phase_residual(k, x0, y0, x, y0) == doctest::Approx(0.0));

  // 1D with ordered arguments the phase is affine-separable
  OscillatoryKernel k1 = k;
  k1.phase = [](PointView a, PointView b) { return std::abs(a[0] - b[0]); };
  const std::vector<double> a0{0.0}, b0{3.0}, a{1.0}, b{4.0};
  CHECK(std::abs(phase_residual(k1, a0, b0, a, b)) < 1e-15);

  // residual shrinks like |x-x0| |y-y0| / dist
  std::mt19937_64 rng(9);
  for (double t : {0.2, 0.1, 0.05}) {
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
      const auto dx = rand_point(rng, -t, t), dy = rand_point(rng, -t, t);
      const std::vector<double> xx{dx[0], dx[1], dx[2]}, yy{3 + dy[0], dy[1], dy[2]};
      const double bound = std::sqrt(3.0) * t * std::sqrt(3.0) * t * 2.0 / 2.0;
      worst = std::max(worst, std::abs(phase_residual(k, x0, y0, xx, yy)) / bound);
    }
    CHECK(worst <= 1.0);
  }
}

TEST_CASE("re-interpolation") {
  const OscillatoryKernel k = helmholtz_kernel(16.0);
  const Box box({0.0, 0.0, 0.0}, {0.25, 0.25, 0.25});
  const std::vector<double> z{1.5, 1.0, 0.5};
  std::mt19937_64 rng(2);

  SUBCASE("exact on E_z Q_m") {
    auto f = [&](PointView p) {
      return phase_factor(k, Side::x, z, p) * Complex(1.0 + p[0] * p[0] * p[1], p[2] * p[2] * p[2] - p[1]);
    };
    const Reinterpolated r = reinterpolate(k, Side::x, box, z, 3, f);
    for (int s = 0; s < 100; ++s) {
      const auto x = rand_point(rng, 0.0, 0.25);
      CHECK(std::abs(r(x) - f(x)) <= 1e-12 * std::abs(f(x)));
    }
  }
  SUBCASE("kappa zero is plain interpolation") {
    const OscillatoryKernel k0 = helmholtz_kernel(0.0);
    auto f = [](PointView p) { return Complex(std::cos(p[0] + 2 * p[1]), p[2]); };
    const Reinterpolated r = reinterpolate(k0, Side::y, box, z, 4, f);
    const TensorInterpolant plain = tensor_interpolate(f, box, 4);
    const auto x = rand_point(rng, 0.0, 0.25);
    CHECK(std::abs(r(x) - plain(x)) < 1e-15);
  }
  SUBCASE("geometric convergence on an admissible pair") {
    const std::vector<double> y{1.6, 1.1, 0.4};
    auto f = [&](PointView p) { return k(p, y); };
    std::vector<double> err;
    for (int m = 2; m <= 8; m += 2) {
      const Reinterpolated r = reinterpolate(k, Side::x, box, z, m, f);
      double e = 0.0;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          for (int l = 0; l < 6; ++l) {
            const std::vector<double> x{0.05 * i, 0.05 * j, 0.05 * l};
            e = std::max(e, std::abs(r(x) - f(x)));
          }
      err.push_back(e);
    }
    for (std::size_t i = 1; i < err.size(); ++i) CHECK(err[i] < 0.5 * err[i - 1]);
  }
}

TEST_CASE("real restriction of the norm extension") {
  const std::vector<double> a{3, 4, 0}, b{1, 0, 0}, c{-0.3, 0.7, 2.2};
  CHECK(real_norm_extension_check(a) == doctest::Approx(5.0));
  CHECK(real_norm_extension_check(b) == doctest::Approx(1.0));
  CHECK(real_norm_extension_check(c) == doctest::Approx(std::sqrt(0.09 + 0.49 + 4.84)).epsilon(1e-15));
  const std::vector<double> z{0, 0, 0};
  CHECK_THROWS(real_norm_extension_check(z));
}
