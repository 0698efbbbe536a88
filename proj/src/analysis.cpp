#include "bfly/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "bfly/butterfly.hpp"

namespace bfly {

EllipseParams::EllipseParams(Interval iv, double r) : interval(iv), rho(r) {
  if (!(r > 1.0)) throw std::invalid_argument("EllipseParams: rho must exceed 1");
}

bool EllipseParams::contains(Complex z, double rel_tol) const {
  const Complex w = (z - interval.midpoint()) / interval.half_length();
  const double bound = rho + 1.0 / rho;
  return std::abs(w - 1.0) + std::abs(w + 1.0) <= bound * (1.0 + rel_tol);
}

Complex EllipseParams::boundary(double theta) const {
  const Complex e = std::polar(1.0, theta);
  const Complex w = 0.5 * (rho * e + 1.0 / (rho * e));
  return interval.midpoint() + interval.half_length() * w;
}

double solve_rho1(double rho0, double h) {
  if (!(rho0 > 1.0) || !std::isfinite(rho0)) throw std::invalid_argument("solve_rho1: rho0 must be > 1");
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("solve_rho1: h must lie in (0, 1]");
  const double r = 0.5 * (rho0 + 1.0 / rho0);
  const double g = 2.0 * r * (1.0 / r + h * (1.0 - 1.0 / r));
  // g >= 2, larger root of the quadratic; written to avoid cancellation
  const double disc = std::sqrt(std::max(0.0, (g - 2.0) * (g + 2.0)));
  return std::min(rho0, 0.5 * (g + disc));
}

bool verify_inclusion(double rho0, Interval sub, double rho1, std::size_t samples) {
  if (!(rho1 > 1.0)) return false;
  const EllipseParams inner(sub, rho0);
  const EllipseParams outer(Interval(-1.0, 1.0), rho1);
  samples = std::max<std::size_t>(samples, 1000);
  for (std::size_t k = 0; k < samples; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(samples);
    if (!outer.contains(inner.boundary(theta))) return false;
  }
  return true;
}

double qhat_scan(double h, double rho_lo, double rho_hi, std::size_t points) {
  double q = 0.0;
  const double a = std::log(rho_lo), b = std::log(rho_hi);
  for (std::size_t i = 0; i < points; ++i) {
    const double rho0 = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    q = std::max(q, solve_rho1(rho0, h) / rho0);
  }
  return q;
}

void StabilityBudget::validate() const {
  if (!(gamma >= 0.0)) throw std::invalid_argument("StabilityBudget: gamma must be >= 0");
  if (!(rho > 1.0)) throw std::invalid_argument("StabilityBudget: rho must exceed 1");
  if (m < 0 || d < 1 || L < 0) throw std::invalid_argument("StabilityBudget: invalid m, d or L");
  if (!(lambda_m >= 1.0)) throw std::invalid_argument("StabilityBudget: Lebesgue constant is at least 1");
}

double stability_constant_C1(const StabilityBudget& b) {
  b.validate();
  const double dd = static_cast<double>(b.d);
  return 2.0 * dd / (b.rho - 1.0) * std::pow(1.0 + b.lambda_m, dd) *
         std::exp(b.gamma * (0.5 * (b.rho + 1.0 / b.rho) + 1.0));
}

double stability_growth_bound(const StabilityBudget& b, double qhat) {
  return std::pow(1.0 + stability_constant_C1(b) * std::pow(qhat, b.m), b.L);
}

OscillatoryKernel line_pair_kernel(double kappa) {
  OscillatoryKernel k;
  k.kappa = kappa;
  k.singular = false;
  k.phase = [](PointView x, PointView y) {
    const double t = x[0] - y[0];
    return std::sqrt(t * t + 1.0);
  };
  k.amplitude = [](PointView, PointView) { return Complex(1.0, 0.0); };
  return k;
}

ChainTable iterated_reinterpolation_experiment(const OscillatoryKernel& kernel, const ChainConfig& cfg) {
  if (cfg.m < 0 || cfg.levels < 0 || cfg.trials < 1 || cfg.samples < 2) {
    throw std::invalid_argument("iterated_reinterpolation_experiment: invalid configuration");
  }
  if (!(cfg.kappa > 0.0) || !(cfg.gamma > 0.0)) {
    throw std::invalid_argument("iterated_reinterpolation_experiment: kappa and gamma must be positive");
  }
  ChainTable table;
  table.config = cfg;
  const int L = cfg.levels;
  const double w = cfg.gamma / cfg.kappa;
  const double y_lo = 1.0 + cfg.separation;

  std::vector<Box> xb;
  std::vector<std::vector<double>> anchors;
  for (int l = 0; l <= L; ++l) {
    const double len = std::ldexp(1.0, -l);
    xb.emplace_back(std::vector<double>{0.0}, std::vector<double>{len});
    anchors.push_back({y_lo + 0.5 * w * std::ldexp(1.0, l)});
  }
  // shrinking condition per direction
  for (int l = 1; l <= L; ++l) {
    if (!xb[static_cast<std::size_t>(l - 1)].contains(xb[static_cast<std::size_t>(l)])) {
      throw std::invalid_argument("iterated_reinterpolation_experiment: boxes are not nested");
    }
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  table.rows.resize(static_cast<std::size_t>(L) + 1);
  for (int l = 0; l <= L; ++l) table.rows[static_cast<std::size_t>(l)].level = l;

  auto sample = [&](const Box& b, std::size_t s) { return b.lo(0) + b.diam_i(0) * (static_cast<double>(s) + 0.5) / static_cast<double>(cfg.samples); };

  for (int trial = 0; trial < cfg.trials; ++trial) {
    const TensorGrid g0(xb[0], cfg.m);
    std::vector<Complex> vals(g0.size());
    for (auto& v : vals) v = Complex(uni(rng), uni(rng));
    auto pi = std::make_shared<TensorInterpolant>(g0, vals);
    const std::vector<double> y0 = anchors[0];
    PointFunction f0 = [pi, &kernel, y0](PointView x) { return phase_factor(kernel, Side::x, y0, x) * (*pi)(x); };

    double ref = 0.0;
    for (std::size_t s = 0; s < cfg.samples; ++s) {
      const double x = sample(xb[0], s);
      ref = std::max(ref, std::abs(f0(PointView(&x, 1))));
    }

    PointFunction chain = f0;
    for (int l = 0; l <= L; ++l) {
      const auto li = static_cast<std::size_t>(l);
      if (l > 0) {
        auto r = std::make_shared<Reinterpolated>(reinterpolate(kernel, Side::x, xb[li], anchors[li], cfg.m, chain));
        chain = [r](PointView x) { return (*r)(x); };
      }
      double err = 0.0, nrm = 0.0;
      for (std::size_t s = 0; s < cfg.samples; ++s) {
        const double x = sample(xb[li], s);
        const PointView xv(&x, 1);
        const Complex c = chain(xv);
        err = std::max(err, std::abs(f0(xv) - c));
        nrm = std::max(nrm, std::abs(c));
      }
      table.rows[li].error = std::max(table.rows[li].error, err / ref);
      table.rows[li].norm = std::max(table.rows[li].norm, nrm / ref);
    }
  }

  double num = 0.0, den = 0.0;
  for (const auto& r : table.rows) {
    if (r.level == 0) continue;
    num += r.level * std::log1p(r.error);
    den += static_cast<double>(r.level) * r.level;
    table.eps = std::max(table.eps, std::expm1(std::log1p(r.error) / r.level));
  }
  table.ls_eps = den > 0.0 ? std::expm1(num / den) : 0.0;
  for (auto& r : table.rows) {
    r.envelope = std::expm1(r.level * std::log1p(table.eps));
    if (r.level == 0) continue;
    const auto& prev = table.rows[static_cast<std::size_t>(r.level - 1)];
    table.max_norm_growth = std::max(table.max_norm_growth, r.norm / prev.norm);
    const double ls = std::expm1(r.level * std::log1p(table.ls_eps));
    if (r.error > 0.0 && ls > 0.0) {
      table.ls_max_deviation = std::max({table.ls_max_deviation, r.error / ls, ls / r.error});
    } else if (r.error != ls) {
      table.ls_max_deviation = INFINITY;
    }
  }
  return table;
}

void write_chain_csv(const ChainTable& t, std::ostream& os) {
  os << "level,measured,envelope,norm\n";
  os.precision(17);
  for (const auto& r : t.rows) os << r.level << ',' << r.error << ',' << r.envelope << ',' << r.norm << '\n';
}

ButterflyGeometry halving_geometry(const Box& x_root, const Box& y_root, int L) {
  if (L < 0) throw std::invalid_argument("halving_geometry: L must be >= 0");
  if (x_root.dim() != y_root.dim()) throw std::invalid_argument("halving_geometry: dimension mismatch");
  ButterflyGeometry g;
  g.L = L;
  auto chain = [L](const Box& root, const std::vector<double>& target) {
    std::vector<Box> out{root};
    for (int j = 1; j <= 2 * L; ++j) {
      const Box& p = out.back();
      std::vector<double> lo(p.dim()), hi(p.dim());
      for (std::size_t i = 0; i < p.dim(); ++i) {
        const double mid = 0.5 * (p.lo(i) + p.hi(i));
        const bool upper = target[i] >= mid;
        lo[i] = upper ? mid : p.lo(i);
        hi[i] = upper ? p.hi(i) : mid;
      }
      out.emplace_back(std::move(lo), std::move(hi));
    }
    return out;
  };
  g.x_boxes = chain(x_root, y_root.center());
  g.y_boxes = chain(y_root, x_root.center());
  return g;
}

double kernel_butterfly_error(const OscillatoryKernel& kernel, const ButterflyGeometry& geo, int m,
                              std::size_t samples_per_dim, double* scale) {
  const int L = geo.L;
  const auto Lu = static_cast<std::size_t>(L);
  if (geo.x_boxes.size() != 2 * Lu + 1 || geo.y_boxes.size() != 2 * Lu + 1) {
    throw std::invalid_argument("kernel_butterfly_error: geometry needs 2L+1 boxes per side");
  }
  if (samples_per_dim < 1) throw std::invalid_argument("kernel_butterfly_error: no samples");
  const std::size_t d = geo.x_boxes[0].dim();
  auto xbox = [&](int l) -> const Box& { return geo.x_boxes[static_cast<std::size_t>(L + l)]; };
  auto ybox = [&](int l) -> const Box& { return geo.y_boxes[static_cast<std::size_t>(L + l)]; };

  const CMatrix S = coupling_matrix(kernel, xbox(0), ybox(0), xbox(0).center(), ybox(0).center(), m);
  // product E_L ... E_1 for each side; rows = finest nodes
  auto chain_product = [&](Side side) {
    CMatrix P;
    for (int l = L; l >= 1; --l) {
      const Box& child = side == Side::x ? xbox(l) : ybox(l);
      const Box& parent = side == Side::x ? xbox(l - 1) : ybox(l - 1);
      const Box& old_b = side == Side::x ? ybox(-(l - 1)) : xbox(-(l - 1));
      const Box& new_b = side == Side::x ? ybox(-l) : xbox(-l);
      const CMatrix E = transfer_matrix(kernel, side, child, parent, old_b.center(), new_b.center(), m);
      P = l == L ? E : CMatrix(P * E);
    }
    return P;
  };
  const CMatrix Px = chain_product(Side::x);
  const CMatrix Py = chain_product(Side::y);

  auto samples_of = [&](const Box& b) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= samples_per_dim;
    std::vector<std::vector<double>> pts(total, std::vector<double>(d));
    for (std::size_t s = 0; s < total; ++s) {
      std::size_t r = s;
      for (std::size_t i = 0; i < d; ++i) {
        const std::size_t k = r % samples_per_dim;
        r /= samples_per_dim;
        pts[s][i] = b.lo(i) + b.diam_i(i) * (static_cast<double>(k) + 0.5) / static_cast<double>(samples_per_dim);
      }
    }
    return pts;
  };
  // row vectors of the expansion at each sample point, mapped to the middle level
  auto expansions = [&](Side side, const std::vector<std::vector<double>>& pts) {
    const Box& leaf = side == Side::x ? xbox(L) : ybox(L);
    const Box& anchor_box = side == Side::x ? ybox(-L) : xbox(-L);
    const std::vector<double> anchor = anchor_box.center();
    const TensorGrid grid(leaf, m);
    CMatrix R(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(grid.size()));
    std::vector<double> b(grid.size());
    for (std::size_t s = 0; s < pts.size(); ++s) {
      const Complex e = phase_factor(kernel, side, anchor, pts[s]);
      grid.basis(pts[s], b);
      for (std::size_t p = 0; p < grid.size(); ++p) R(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(p)) = e * b[p];
    }
    if (L > 0) R = R * (side == Side::x ? Px : Py);
    return R;
  };
  const auto xs = samples_of(xbox(L));
  const auto ys = samples_of(ybox(L));
  const CMatrix approx = expansions(Side::x, xs) * S * expansions(Side::y, ys).transpose();
  double err = 0.0, mag = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const Complex exact = kernel(xs[i], ys[j]);
      err = std::max(err, std::abs(exact - approx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
      mag = std::max(mag, std::abs(exact));
    }
  }
  if (scale) *scale = mag;
  return err;
}

}  // namespace bfly
