#pragma once

// Bernstein-ellipse geometry, the stability constant of iterated
// re-interpolation, and numerical harnesses that measure the error of
// chained re-interpolation and of the function-level butterfly.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bfly/interp.hpp"
#include "bfly/kernel.hpp"

namespace bfly {

struct EllipseParams {
  Interval interval{-1.0, 1.0};
  double rho = 2.0;

  EllipseParams(Interval iv, double r);
  /// Closed membership |w-1| + |w+1| <= rho + 1/rho after the affine pullback of z to [-1,1].
  bool contains(Complex z, double rel_tol = 1e-12) const;
  /// Boundary point for angle theta.
  Complex boundary(double theta) const;
};

/// Larger root of rho1^2 - g rho1 + 1 = 0, g = 2 r (1/r + h (1 - 1/r)),
/// r = (rho0 + 1/rho0) / 2. Requires rho0 > 1 and 0 < h <= 1.
double solve_rho1(double rho0, double h);

/// Samples `samples` boundary points of the ellipse for `rho0` around `sub`
/// and checks each lies in the closed reference ellipse for `rho1`.
bool verify_inclusion(double rho0, Interval sub, double rho1, std::size_t samples = 4096);

/// max over rho0 in [lo, hi] (log grid) of solve_rho1(rho0, h) / rho0.
double qhat_scan(double h, double rho_lo = 1.1, double rho_hi = 1e6, std::size_t points = 2000);

struct StabilityBudget {
  double gamma = 0.0;
  double rho = 2.0;
  int m = 0;
  int d = 1;
  int L = 0;
  double lambda_m = 1.0;

  void validate() const;
};

/// (2d/(rho-1)) (1+Lambda_m)^d exp(gamma ((rho+1/rho)/2 + 1)).
double stability_constant_C1(const StabilityBudget& b);

/// (1 + C1 qhat^m)^L.
double stability_growth_bound(const StabilityBudget& b, double qhat);

/// 1D chained re-interpolation: x boxes halve from [0, 1], anchors are the
/// centres of y boxes that double from width gamma/kappa at distance
/// `separation`, so kappa diam(B_l) diam(Y_{-l}) stays equal to gamma.
struct ChainConfig {
  double kappa = 8.0;
  double gamma = 1.0;
  double separation = 1.0;
  int m = 6;
  int levels = 6;
  int trials = 8;
  std::size_t samples = 256;
  std::uint64_t seed = 0;
};

struct ChainRow {
  int level = 0;
  /// max over trials of sup_{B_l} |E_{y0} pi - chain_l| / sup_{B_0} |E_{y0} pi|
  double error = 0.0;
  /// max over trials of sup_{B_l} |chain_l| / sup_{B_0} |E_{y0} pi|
  double norm = 0.0;
  /// (1 + eps)^l - 1 with the envelope eps
  double envelope = 0.0;
};

struct ChainTable {
  ChainConfig config;
  std::vector<ChainRow> rows;
  /// Smallest eps with error_l <= (1+eps)^l - 1 for every level (upper envelope).
  double eps = 0.0;
  /// Least-squares fit of log(1+error_l) = l log(1+eps) through the origin.
  double ls_eps = 0.0;
  /// max over l >= 1 of max(error/ls_envelope, ls_envelope/error)
  double ls_max_deviation = 0.0;
  /// max over l >= 1 of norm_l / norm_{l-1}
  double max_norm_growth = 0.0;
};

/// Phase sqrt((x-y)^2 + 1): a point on a line against a point on a parallel
/// line at unit distance. Plain |x-y| would be affine on one-sided boxes and
/// give exact re-interpolation.
OscillatoryKernel line_pair_kernel(double kappa);

/// Runs the chain for `kernel` (must accept 1D points).
ChainTable iterated_reinterpolation_experiment(const OscillatoryKernel& kernel, const ChainConfig& cfg);

void write_chain_csv(const ChainTable& t, std::ostream& os);

/// Nested box chains for the function-level butterfly: x_boxes[j] and
/// y_boxes[j] are the boxes on level j - L (j = 0..2L).
struct ButterflyGeometry {
  std::vector<Box> x_boxes;
  std::vector<Box> y_boxes;
  int L = 0;
};

/// Halving chains of 2L+1 boxes starting from the given roots, each child
/// being the half-size sub-box of its parent in the corner nearest to the
/// other root's centre.
ButterflyGeometry halving_geometry(const Box& x_root, const Box& y_root, int L);

/// sup over an s^d x s^d sample grid of X_L x Y_L of |k - k_BF| (and of |k|
/// in `scale` if non-null). k_BF uses the coupling matrix on X_0 x Y_0 and the
/// transfer chains down to X_L and Y_L.
double kernel_butterfly_error(const OscillatoryKernel& kernel, const ButterflyGeometry& geo, int m,
                              std::size_t samples_per_dim, double* scale = nullptr);

}  // namespace bfly
