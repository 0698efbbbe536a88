// One PASS/FAIL line per acceptance criterion; exit code 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "bfly/analysis.hpp"
#include "bfly/bench.hpp"

using namespace bfly;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

CVector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}

// Explicit sum of every admissible chain plus the dense nearfield.
CMatrix expand_blocks(const ButterflyFactorization& f) {
  const ClusterTree& t = f.rows();
  const auto n = static_cast<Eigen::Index>(t.index_count());
  CMatrix D = CMatrix::Zero(n, n);
  auto put = [&](std::size_t s, std::size_t u, const CMatrix& B) {
    const auto& ri = t[s].indices;
    const auto& ci = f.cols()[u].indices;
    for (std::size_t r = 0; r < ri.size(); ++r)
      for (std::size_t c = 0; c < ci.size(); ++c)
        D(static_cast<Eigen::Index>(ri[r]), static_cast<Eigen::Index>(ci[c])) +=
            B(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  };
  const auto& part = f.partition();
  for (std::size_t b = 0; b < part.inadmissible.size(); ++b)
    put(part.inadmissible[b].first, part.inadmissible[b].second, f.nearfield()[b]);
  for (const auto& leaf : part.admissible)
    for (std::size_t s : t.descendants_at(leaf.sigma, t.depth()))
      for (std::size_t u : f.cols().descendants_at(leaf.tau, f.cols().depth())) put(s, u, block_dense(f, s, u));
  return D;
}

Outcome matvec_identity(int leaf, StopRule rule, int* max_steps) {
  const TriangleMesh mesh = sphere_mesh(3);
  const auto sup = mesh.supports();
  const ClusterTree tree = build_cluster_tree(sup, leaf, 30, rule);
  const BlockPartition part = build_block_partition(tree, tree, 1.0);
  const OscillatoryKernel k = helmholtz_kernel(2.0);
  const GalerkinAssembler as(mesh, k, QuadratureConfig{});
  const ButterflyFactorization f = factorize(as, tree, tree, part, 2);
  for (const auto& p : part.plans) *max_steps = std::max(*max_steps, p.steps);
  const CMatrix D = expand_blocks(f);
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const CVector x = random_vector(D.cols(), rng);
    const CVector ref = D * x;
    worst = std::max(worst, (matvec(f, x) - ref).norm() / ref.norm());
  }
  return {worst <= 1e-12, fmt("%.2e", worst)};
}

Outcome criterion1() {
  int steps_std = 0, steps_deep = 0;
  const Outcome a = matvec_identity(32, StopRule::any_small, &steps_std);
  const Outcome b = matvec_identity(4, StopRule::all_small, &steps_deep);
  return {a.pass && b.pass, "max rel err " + a.detail + " (leaf 32, L<=" + std::to_string(steps_std) + "), " +
                                b.detail + " (leaf 4 per-cluster stop, L<=" + std::to_string(steps_deep) + ")"};
}

Outcome criterion2() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const OscillatoryKernel k = helmholtz_kernel(5.0);
  double worst_t = 0.0, worst_r = 0.0;
  for (int d = 1; d <= 3; ++d) {
    for (int m = 0; m <= 8; ++m) {
      std::vector<double> lo(d), hi(d), z(d);
      for (int i = 0; i < d; ++i) {
        lo[i] = -1.0 + u(rng);
        hi[i] = lo[i] + 0.2 + u(rng);
        z[i] = 3.0 + u(rng);
      }
      const Box box(lo, hi);
      std::size_t nc = 1;
      for (int i = 0; i < d; ++i) nc *= static_cast<std::size_t>(m + 1);
      std::vector<Complex> coef(nc);
      for (auto& c : coef) c = Complex(u(rng) - 0.5, u(rng) - 0.5);
      // random element of Q_m in scaled coordinates
      auto poly = [&](std::span<const double> x) {
        Complex s = 0.0;
        for (std::size_t flat = 0; flat < nc; ++flat) {
          std::size_t r = flat;
          double term = 1.0;
          for (int i = 0; i < d; ++i) {
            const int e = static_cast<int>(r % static_cast<std::size_t>(m + 1));
            r /= static_cast<std::size_t>(m + 1);
            term *= std::pow((x[i] - 0.5 * (lo[i] + hi[i])) / (0.5 * (hi[i] - lo[i])), e);
          }
          s += coef[flat] * term;
        }
        return s;
      };
      auto ez_poly = [&](std::span<const double> x) { return phase_factor(k, Side::x, z, x) * poly(x); };
      const TensorInterpolant p = tensor_interpolate(poly, box, m);
      const Reinterpolated r = reinterpolate(k, Side::x, box, z, m, ez_poly);
      std::vector<double> x(d);
      double et = 0, er = 0, st = 0;
      for (int s = 0; s < 100; ++s) {
        for (int i = 0; i < d; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
        const Complex f = poly(x);
        st = std::max(st, std::abs(f));
        et = std::max(et, std::abs(p(x) - f));
        er = std::max(er, std::abs(r(x) - ez_poly(x)));
      }
      worst_t = std::max(worst_t, et / st);
      worst_r = std::max(worst_r, er / st);
    }
  }
  return {worst_t <= 1e-12 && worst_r <= 1e-12,
          "tensor " + fmt("%.2e", worst_t) + ", phase re-interpolation " + fmt("%.2e", worst_r) + " (m<=8, d<=3)"};
}

Outcome criterion3() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int holds = 0, sharp = 0;
  for (int s = 0; s < 100; ++s) {
    const double rho0 = std::exp(std::log(1.1) + u(rng) * (std::log(20.0) - std::log(1.1)));
    const double h = 0.1 + 0.8 * u(rng);
    // sub-interval flush with one end of [-1, 1]
    const Interval sub = s % 2 == 0 ? Interval(-1.0, -1.0 + 2.0 * h) : Interval(1.0 - 2.0 * h, 1.0);
    const double r1 = solve_rho1(rho0, h);
    holds += verify_inclusion(rho0, sub, r1) ? 1 : 0;
    sharp += verify_inclusion(rho0, sub, r1 * 0.995) ? 0 : 1;
  }
  double lim = 0.0;
  for (double h : {0.1, 0.25, 0.5, 0.75, 0.9}) lim = std::max(lim, std::abs(solve_rho1(1e4, h) / 1e4 - h));
  return {holds == 100 && sharp >= 90 && lim <= 1e-3, "inclusion " + std::to_string(holds) + "/100, fails when shrunk " +
                                                          std::to_string(sharp) + "/100, |rho1/rho0 - h| at 1e4 " +
                                                          fmt("%.1e", lim)};
}

ErrorReport g_bench;

Outcome criterion4() {
  BenchConfig cfg;
  g_bench = bench(cfg);
  const auto& rows = g_bench.rows;
  bool decreasing = true, band = true;
  std::string factors;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    decreasing = decreasing && *rows[i].frobenius < *rows[i - 1].frobenius;
    const double fct = *rows[i].frobenius_factor;
    band = band && fct >= 5.0 && fct <= 20.0;
    factors += (i > 1 ? "," : "") + fmt("%.2f", fct);
  }
  // R^2 of log error against m
  const double n = static_cast<double>(rows.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& r : rows) {
    const double x = r.m, y = std::log(*r.frobenius);
    sx += x, sy += y, sxx += x * x, sxy += x * y, syy += y * y;
  }
  const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  const double r2 = cov * cov / (vx * vy);
  return {decreasing && band && r2 > 0.95,
          "frobenius " + fmt("%.3e", *rows.front().frobenius) + " -> " + fmt("%.3e", *rows.back().frobenius) +
              ", factors [" + factors + "], R^2 " + fmt("%.4f", r2)};
}

Outcome criterion4_long() {
  BenchConfig cfg;
  cfg.level = 6;
  cfg.kappa = 16.0;
  cfg.degrees = {0};
  cfg.report = ReportKind::spectral;
  cfg.budget_mb = 4096;
  const ErrorReport r = bench(cfg);
  const double s = *r.rows[0].spectral;
  return {s >= 3.09e-6 / 3.0 && s <= 3.09e-6 * 3.0, "spectral m=0 " + fmt("%.3e", s) + " vs 3.09e-06"};
}

Outcome criterion5() {
  if (g_bench.rows.empty()) g_bench = bench(BenchConfig{});
  double worst_gap = -INFINITY, worst_restart = 0.0;
  for (const auto& r : g_bench.rows) {
    worst_gap = std::max(worst_gap, *r.spectral - *r.frobenius);
    worst_restart = std::max(worst_restart, std::abs(*r.spectral - *r.spectral_restart) / *r.spectral);
  }
  return {worst_gap <= 1e-12 && worst_restart <= 0.01,
          "max(spectral - frobenius) " + fmt("%.2e", worst_gap) + ", restart spread " + fmt("%.2e", worst_restart)};
}

Outcome criterion6() {
  ChainConfig cfg;
  cfg.m = 6;
  cfg.levels = 6;
  const ChainTable t = iterated_reinterpolation_experiment(line_pair_kernel(cfg.kappa), cfg);
  // one-step error predicts every deeper level
  const double eps1 = t.rows[1].error;
  bool form = true;
  for (const auto& r : t.rows) form = form && r.error <= std::expm1(r.level * std::log1p(eps1)) * (1.0 + 1e-9);
  const bool norm_ok = t.max_norm_growth <= 1.1;

  std::vector<double> eps;
  for (int m : {2, 4, 6, 8}) {
    ChainConfig c = cfg;
    c.m = m;
    eps.push_back(iterated_reinterpolation_experiment(line_pair_kernel(c.kappa), c).eps);
  }
  double worst_ratio = 0.0;
  for (std::size_t i = 1; i < eps.size(); ++i) worst_ratio = std::max(worst_ratio, eps[i] / eps[i - 1]);
  return {form && norm_ok && worst_ratio <= 0.7,
          "norm growth " + fmt("%.4f", t.max_norm_growth) + ", eps_6 " + fmt("%.2e", t.eps) + ", (1+eps)^L-1 bound " +
              (form ? "holds" : "violated") + ", max eps_{m+2}/eps_m " + fmt("%.3f", worst_ratio)};
}

Outcome criterion7() {
  const TriangleMesh mesh = sphere_mesh(4);
  const auto sup = mesh.supports();
  const ClusterTree tree = build_cluster_tree(sup, 32);
  const BlockPartition part = build_block_partition(tree, tree, 1.0);
  const PartitionStats st = partition_stats(part, tree, tree);
  const std::size_t n = mesh.size();
  const bool cover = st.covered_entries == n * n;

  // transfers only exist with a deeper tree
  const ClusterTree deep = build_cluster_tree(sup, 16, 30, StopRule::all_small);
  const BlockPartition dpart = build_block_partition(deep, deep, 1.0);
  const OscillatoryKernel k = helmholtz_kernel(4.0);
  const GalerkinAssembler as(mesh, k, QuadratureConfig{});
  double range = 0.0, entrywise = 0.0;
  std::size_t checked = 0;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t p = 0; p < dpart.plans.size() && checked < 120; p += 13) {
    const ButterflyPlan& plan = dpart.plans[p];
    if (plan.steps < 1) continue;
    for (const auto& [sigma, tau] : plan.middle_blocks) {
      if (!seen.insert({sigma, tau}).second) continue;
      for (std::size_t son : deep[sigma].sons) {
        const NestednessResidual r = nestedness_check(as, deep, deep, sigma, son, tau, 8);
        range = std::max(range, r.range);
        entrywise = std::max(entrywise, r.entrywise);
        ++checked;
      }
      break;
    }
  }
  return {cover && checked > 0 && range <= 1e-6,
          "cover " + std::to_string(st.covered_entries) + " = N^2 " + (cover ? "yes" : "no") + ", nestedness m=8 " +
              fmt("%.2e", range) + " over " + std::to_string(checked) + " son/anchor pairs (entrywise " +
              fmt("%.2e", entrywise) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  bool run_long = false;
  std::vector<int> only;
  app.add_flag("--long", run_long, "also run the level-6 reference comparison");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  struct Item {
    std::string id;
    std::function<Outcome()> run;
    double limit;
  };
  const std::vector<Item> items{{"1", criterion1, 30},  {"2", criterion2, 10},  {"3", criterion3, 10},
                                {"4", criterion4, 600}, {"5", criterion5, 600}, {"6", criterion6, 60},
                                {"7", criterion7, 60}};
  int failed = 0;
  for (const auto& it : items) {
    const int num = std::stoi(it.id);
    if (!only.empty() && std::find(only.begin(), only.end(), num) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = it.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    // criterion 5 reuses the bench of criterion 4
    const bool in_time = secs <= it.limit;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << it.id << ": " << o.detail << " [" << fmt("%.1f", secs)
              << " s, limit " << fmt("%.0f", it.limit) << " s]" << std::endl;

    if (num == 4) {
      if (!run_long) {
        std::cout << "SKIP criterion 4 (long): level 6, kappa 16 not requested (--long)" << std::endl;
      } else {
        try {
          const Outcome l = criterion4_long();
          failed += l.pass ? 0 : 1;
          std::cout << (l.pass ? "PASS" : "FAIL") << " criterion 4 (long): " << l.detail << std::endl;
        } catch (const BudgetExceeded& e) {
          std::cout << "SKIP criterion 4 (long): " << e.what() << std::endl;
        }
      }
    }
  }
  return failed == 0 ? 0 : 1;
}
