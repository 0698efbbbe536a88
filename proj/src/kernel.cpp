#include "bfly/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bfly {

namespace {

constexpr double kSingularTolerance = 1e-14;

double euclid(PointView x, PointView y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double norm(PointView x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double squared(PointView x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

void check_separated(const OscillatoryKernel& k, PointView x, PointView y) {
  if (!k.singular) return;
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
  // (1 + max|.|)^2 <= 2 (1 + max|.|^2), so this settles the common case without roots
  const double n2 = std::max(squared(x), squared(y));
  if (d2 > 2.0 * kSingularTolerance * kSingularTolerance * (1.0 + n2)) return;
  const double scale = 1.0 + std::max(norm(x), norm(y));
  if (euclid(x, y) <= kSingularTolerance * scale) {
    throw SingularEvaluation("singular kernel evaluated at coinciding points");
  }
}

Complex unimodular(double kappa, double phase) { return std::polar(1.0, kappa * phase); }

}  // namespace

Complex OscillatoryKernel::operator()(PointView x, PointView y) const {
  check_separated(*this, x, y);
  if (fused) return fused(x, y);
  return unimodular(kappa, phase(x, y)) * amplitude(x, y);
}

Complex eval(const OscillatoryKernel& k, PointView x, PointView y) { return k(x, y); }

Complex modified_kernel(const OscillatoryKernel& k, PointView x0, PointView y0, PointView x, PointView y) {
  check_separated(k, x, y);
  const double shifted = k.phase(x, y) - k.phase(x, y0) - k.phase(x0, y);
  return unimodular(k.kappa, shifted) * k.amplitude(x, y);
}

double phase_residual(const OscillatoryKernel& k, PointView x0, PointView y0, PointView x, PointView y) {
  return k.phase(x, y) - k.phase(x, y0) - k.phase(x0, y) + k.phase(x0, y0);
}

OscillatoryKernel helmholtz_kernel(double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("helmholtz_kernel: kappa must be nonnegative");
  OscillatoryKernel k;
  k.kappa = kappa;
  k.singular = true;
  k.phase = [](PointView x, PointView y) { return euclid(x, y); };
  k.amplitude = [](PointView x, PointView y) { return Complex(1.0 / (4.0 * std::numbers::pi * euclid(x, y)), 0.0); };
  k.fused = [kappa](PointView x, PointView y) {
    const double r = euclid(x, y);
    return std::polar(1.0 / (4.0 * std::numbers::pi * r), kappa * r);
  };
  return k;
}

Complex phase_factor(const OscillatoryKernel& k, Side side, PointView z, PointView point) {
  const double phi = side == Side::x ? k.phase(point, z) : k.phase(z, point);
  return unimodular(k.kappa, phi);
}

Reinterpolated::Reinterpolated(const OscillatoryKernel& kernel, Side side, std::vector<double> anchor,
                               TensorInterpolant interp)
    : kernel_(&kernel), side_(side), anchor_(std::move(anchor)), interp_(std::move(interp)) {}

Complex Reinterpolated::operator()(PointView x) const {
  return phase_factor(*kernel_, side_, anchor_, x) * interp_(x);
}

Reinterpolated reinterpolate(const OscillatoryKernel& kernel, Side side, const Box& box, PointView z, int m,
                             const PointFunction& f) {
  std::vector<double> anchor(z.begin(), z.end());
  auto damped = [&](PointView x) { return f(x) / phase_factor(kernel, side, anchor, x); };
  return Reinterpolated(kernel, side, anchor, tensor_interpolate(damped, box, m));
}

double real_norm_extension_check(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  if (s == 0.0) throw std::domain_error("real_norm_extension_check: zero vector");
  return std::sqrt(s);
}

}  // namespace bfly
