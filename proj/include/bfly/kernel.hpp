#pragma once

// Oscillatory kernels k(x,y) = exp(i kappa Phi(x,y)) A(x,y).
//
// The phase and the amplitude are kept as separate callables: transfer and
// leaf matrices need Phi on its own, which a k-only interface cannot give.

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bfly/interp.hpp"

namespace bfly {

using PointView = std::span<const double>;

/// Thrown when a singular kernel is evaluated at (numerically) coinciding points.
class SingularEvaluation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct OscillatoryKernel {
  double kappa = 0.0;
  std::function<double(PointView, PointView)> phase;
  std::function<Complex(PointView, PointView)> amplitude;
  /// Phi and A blow up at x == y.
  bool singular = false;
  /// Optional fused evaluation of exp(i kappa Phi) A, used by hot loops.
  /// Must agree with the two-factor form.
  std::function<Complex(PointView, PointView)> fused;

  Complex operator()(PointView x, PointView y) const;
};

Complex eval(const OscillatoryKernel& k, PointView x, PointView y);

/// k(x,y) exp(-i kappa (Phi(x,y0) + Phi(x0,y))).
Complex modified_kernel(const OscillatoryKernel& k, PointView x0, PointView y0, PointView x, PointView y);

/// Phi(x,y) - Phi(x,y0) - Phi(x0,y) + Phi(x0,y0).
double phase_residual(const OscillatoryKernel& k, PointView x0, PointView y0, PointView x, PointView y);

/// exp(i kappa ||x-y||) / (4 pi ||x-y||).
OscillatoryKernel helmholtz_kernel(double kappa);

/// Which argument of the kernel a box/anchor pair refers to.
enum class Side { x, y };

/// E_z on the given side: exp(i kappa Phi(., z)) for Side::x,
/// exp(i kappa Phi(z, .)) for Side::y.
Complex phase_factor(const OscillatoryKernel& k, Side side, PointView z, PointView point);

/// The function E_z * I_m^B[f / E_z], stored through its interpolant.
class Reinterpolated {
 public:
  Reinterpolated(const OscillatoryKernel& kernel, Side side, std::vector<double> anchor, TensorInterpolant interp);

  Complex operator()(PointView x) const;
  const TensorInterpolant& interpolant() const { return interp_; }
  const std::vector<double>& anchor() const { return anchor_; }

 private:
  const OscillatoryKernel* kernel_;
  Side side_;
  std::vector<double> anchor_;
  TensorInterpolant interp_;
};

/// Re-interpolation with phase anchor z on box B. The kernel must outlive
/// the returned object.
Reinterpolated reinterpolate(const OscillatoryKernel& kernel, Side side, const Box& box, PointView z, int m,
                             const PointFunction& f);

/// sqrt(sum x_i^2) for real x != 0: the real restriction of the analytic
/// extension of the Euclidean norm. Throws on the zero vector.
double real_norm_extension_check(std::span<const double> x);

}  // namespace bfly
