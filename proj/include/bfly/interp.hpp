#pragma once

// Univariate and tensor-product Chebyshev interpolation.
//
// Nodes are Chebyshev points of the first kind, mapped affinely to an
// interval. Lagrange polynomials are evaluated in barycentric form, which
// stays well conditioned for the degrees used here (m <= ~20) and also for
// evaluation points outside the interval (transfer matrices need that).

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bfly {

using Complex = std::complex<double>;

struct Interval {
  double a;
  double b;

  Interval(double lower, double upper);

  double length() const { return b - a; }
  double midpoint() const { return 0.5 * (a + b); }
  double half_length() const { return 0.5 * (b - a); }
};

/// Axis-parallel box [lo, hi] in R^d.
class Box {
 public:
  Box() = default;
  Box(std::vector<double> lo, std::vector<double> hi);

  /// Smallest box containing all points of `pts` (each of size d).
  static Box bounding(std::span<const std::vector<double>> pts);

  std::size_t dim() const { return lo_.size(); }
  double lo(std::size_t i) const { return lo_[i]; }
  double hi(std::size_t i) const { return hi_[i]; }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }

  Interval axis(std::size_t i) const { return {lo_[i], hi_[i]}; }
  double diam_i(std::size_t i) const { return hi_[i] - lo_[i]; }
  /// Euclidean diameter.
  double diam() const;
  std::vector<double> center() const;
  bool contains(std::span<const double> x, double tol = 0.0) const;
  bool contains(const Box& other, double tol = 0.0) const;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

/// Euclidean distance between two boxes (0 when they intersect).
double dist(const Box& a, const Box& b);

class ChebGrid1D {
 public:
  ChebGrid1D(int degree, Interval iv);

  int degree() const { return degree_; }
  const Interval& interval() const { return iv_; }
  std::span<const double> nodes() const { return nodes_; }
  double node(int j) const { return nodes_[static_cast<std::size_t>(j)]; }

  /// L_j(x).
  double lagrange(int j, double x) const;
  /// All L_0(x), ..., L_m(x) at once; `out` has size m+1.
  void lagrange_all(double x, std::span<double> out) const;

 private:
  int degree_;
  Interval iv_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// m+1 Chebyshev points of the first kind on `iv`, in increasing order.
ChebGrid1D cheb_nodes(int m, Interval iv);

double lagrange_eval(const ChebGrid1D& grid, int j, double x);

/// Tensor grid of (m+1)^d Chebyshev nodes on a box. Multi-indices are
/// flattened with axis 0 running fastest.
class TensorGrid {
 public:
  TensorGrid(const Box& box, int degree);

  const Box& box() const { return box_; }
  int degree() const { return degree_; }
  std::size_t dim() const { return box_.dim(); }
  /// M = (m+1)^d.
  std::size_t size() const { return size_; }
  const ChebGrid1D& axis(std::size_t i) const { return axes_[i]; }

  std::vector<double> node(std::size_t flat) const;
  void node(std::size_t flat, std::span<double> out) const;

  /// Values of all M tensor Lagrange polynomials at x; `out` has size M.
  void basis(std::span<const double> x, std::span<double> out) const;
  double basis(std::size_t flat, std::span<const double> x) const;

 private:
  Box box_;
  int degree_;
  std::size_t size_;
  std::vector<ChebGrid1D> axes_;
};

using PointFunction = std::function<Complex(std::span<const double>)>;

/// Polynomial in Q_m given by its values at the tensor nodes.
class TensorInterpolant {
 public:
  TensorInterpolant(TensorGrid grid, std::vector<Complex> values);

  const TensorGrid& grid() const { return grid_; }
  std::span<const Complex> values() const { return values_; }

  Complex operator()(std::span<const double> x) const;

 private:
  TensorGrid grid_;
  std::vector<Complex> values_;
};

TensorInterpolant tensor_interpolate(const PointFunction& f, const Box& box, int m);

/// Estimate of the Lebesgue constant of the degree-m Chebyshev interpolant
/// by maximizing sum_j |L_j| over an equispaced grid on [-1,1].
/// `samples == 0` selects the default 10 (m+1)^2 points.
double lebesgue_constant(int m, std::size_t samples = 0);

}  // namespace bfly
