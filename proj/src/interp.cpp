#include "bfly/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bfly {

Interval::Interval(double lower, double upper) : a(lower), b(upper) {
  if (!(lower < upper)) {
    throw std::invalid_argument("Interval: need a < b, got [" + std::to_string(lower) + ", " +
                                std::to_string(upper) + "]");
  }
}

Box::Box(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size() || lo_.empty()) {
    throw std::invalid_argument("Box: lo/hi dimension mismatch");
  }
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (!(lo_[i] < hi_[i])) {
      throw std::invalid_argument("Box: need lo < hi in every direction");
    }
  }
}

Box Box::bounding(std::span<const std::vector<double>> pts) {
  if (pts.empty()) throw std::invalid_argument("Box::bounding: no points");
  std::vector<double> lo = pts.front();
  std::vector<double> hi = pts.front();
  for (const auto& p : pts) {
    for (std::size_t i = 0; i < lo.size(); ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  }
  return Box(std::move(lo), std::move(hi));
}

double Box::diam() const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) s += diam_i(i) * diam_i(i);
  return std::sqrt(s);
}

std::vector<double> Box::center() const {
  std::vector<double> c(dim());
  for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (lo_[i] + hi_[i]);
  return c;
}

bool Box::contains(std::span<const double> x, double tol) const {
  for (std::size_t i = 0; i < dim(); ++i) {
    if (x[i] < lo_[i] - tol || x[i] > hi_[i] + tol) return false;
  }
  return true;
}

bool Box::contains(const Box& other, double tol) const {
  for (std::size_t i = 0; i < dim(); ++i) {
    if (other.lo_[i] < lo_[i] - tol || other.hi_[i] > hi_[i] + tol) return false;
  }
  return true;
}

double dist(const Box& a, const Box& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double gap = std::max({0.0, a.lo(i) - b.hi(i), b.lo(i) - a.hi(i)});
    s += gap * gap;
  }
  return std::sqrt(s);
}

ChebGrid1D::ChebGrid1D(int degree, Interval iv) : degree_(degree), iv_(iv) {
  if (degree < 0) throw std::invalid_argument("ChebGrid1D: negative degree");
  const auto n = static_cast<std::size_t>(degree) + 1;
  nodes_.resize(n);
  weights_.resize(n);
  // theta_k = (2k+1) pi / (2m+2) gives decreasing cos values; store node j
  // with k = m - j so nodes increase. Barycentric weights for first-kind
  // points are (-1)^k sin(theta_k) up to a common factor.
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = n - 1 - j;
    const double theta = (2.0 * static_cast<double>(k) + 1.0) * std::numbers::pi / (2.0 * static_cast<double>(n));
    nodes_[j] = iv_.midpoint() + iv_.half_length() * std::cos(theta);
    weights_[j] = ((k % 2 == 0) ? 1.0 : -1.0) * std::sin(theta);
  }
  if (n == 1) nodes_[0] = iv_.midpoint();
}

double ChebGrid1D::lagrange(int j, double x) const {
  const auto jj = static_cast<std::size_t>(j);
  double denom = 0.0;
  double numer = 0.0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const double diff = x - nodes_[k];
    if (diff == 0.0) return k == jj ? 1.0 : 0.0;
    const double t = weights_[k] / diff;
    denom += t;
    if (k == jj) numer = t;
  }
  return numer / denom;
}

void ChebGrid1D::lagrange_all(double x, std::span<double> out) const {
  const std::size_t n = nodes_.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (x == nodes_[k]) {
      std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
      out[k] = 1.0;
      return;
    }
  }
  double denom = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = weights_[k] / (x - nodes_[k]);
    denom += out[k];
  }
  for (std::size_t k = 0; k < n; ++k) out[k] /= denom;
}

ChebGrid1D cheb_nodes(int m, Interval iv) { return ChebGrid1D(m, iv); }

double lagrange_eval(const ChebGrid1D& grid, int j, double x) {
  if (j < 0 || j > grid.degree()) throw std::out_of_range("lagrange_eval: index out of range");
  return grid.lagrange(j, x);
}

TensorGrid::TensorGrid(const Box& box, int degree) : box_(box), degree_(degree), size_(1) {
  if (degree < 0) throw std::invalid_argument("TensorGrid: negative degree");
  axes_.reserve(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) {
    axes_.emplace_back(degree, box.axis(i));
    size_ *= static_cast<std::size_t>(degree) + 1;
  }
}

void TensorGrid::node(std::size_t flat, std::span<double> out) const {
  const auto n = static_cast<std::size_t>(degree_) + 1;
  for (std::size_t i = 0; i < dim(); ++i) {
    out[i] = axes_[i].node(static_cast<int>(flat % n));
    flat /= n;
  }
}

std::vector<double> TensorGrid::node(std::size_t flat) const {
  std::vector<double> x(dim());
  node(flat, x);
  return x;
}

void TensorGrid::basis(std::span<const double> x, std::span<double> out) const {
  const auto n = static_cast<std::size_t>(degree_) + 1;
  const std::size_t d = dim();
  // per-axis values, then expand the tensor product axis by axis
  std::vector<double> axis_vals(n * d);
  for (std::size_t i = 0; i < d; ++i) {
    axes_[i].lagrange_all(x[i], std::span<double>(axis_vals).subspan(i * n, n));
  }
  out[0] = 1.0;
  std::size_t filled = 1;
  for (std::size_t i = 0; i < d; ++i) {
    // new[flat + filled*k] = old[flat] * L_k(x_i), axis 0 fastest
    for (std::size_t k = n; k-- > 0;) {
      const double v = axis_vals[i * n + k];
      for (std::size_t f = 0; f < filled; ++f) out[k * filled + f] = out[f] * v;
    }
    filled *= n;
  }
}

double TensorGrid::basis(std::size_t flat, std::span<const double> x) const {
  const auto n = static_cast<std::size_t>(degree_) + 1;
  double v = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    v *= axes_[i].lagrange(static_cast<int>(flat % n), x[i]);
    flat /= n;
  }
  return v;
}

TensorInterpolant::TensorInterpolant(TensorGrid grid, std::vector<Complex> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("TensorInterpolant: value count does not match grid size");
  }
}

Complex TensorInterpolant::operator()(std::span<const double> x) const {
  std::vector<double> b(grid_.size());
  grid_.basis(x, b);
  Complex s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) s += b[i] * values_[i];
  return s;
}

TensorInterpolant tensor_interpolate(const PointFunction& f, const Box& box, int m) {
  TensorGrid grid(box, m);
  std::vector<Complex> values(grid.size());
  std::vector<double> x(box.dim());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    grid.node(p, x);
    values[p] = f(x);
  }
  return TensorInterpolant(std::move(grid), std::move(values));
}

double lebesgue_constant(int m, std::size_t samples) {
  if (m < 0) throw std::invalid_argument("lebesgue_constant: negative degree");
  if (m == 0) return 1.0;
  const auto n = static_cast<std::size_t>(m) + 1;
  if (samples == 0) samples = 10 * n * n;
  samples = std::max<std::size_t>(samples, 2);
  const ChebGrid1D grid(m, Interval(-1.0, 1.0));
  std::vector<double> vals(n);
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double x = -1.0 + 2.0 * static_cast<double>(s) / static_cast<double>(samples - 1);
    grid.lagrange_all(x, vals);
    double sum = 0.0;
    for (double v : vals) sum += std::abs(v);
    best = std::max(best, sum);
  }
  return best;
}

}  // namespace bfly
