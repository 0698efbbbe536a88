#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "bfly/analysis.hpp"
#include "bfly/bench.hpp"

namespace bfly {

namespace {

class Collector {
 public:
  Collector(std::string suite, std::vector<VerifyResult>& out, std::ostream* log)
      : suite_(std::move(suite)), out_(out), log_(log) {}

  void check(const std::string& name, bool pass, double value) {
    out_.push_back({suite_, name, pass, value});
    if (log_) *log_ << (pass ? "ok   " : "FAIL ") << suite_ << '/' << name << "  " << value << '\n';
  }

 private:
  std::string suite_;
  std::vector<VerifyResult>& out_;
  std::ostream* log_;
};

double rel_diff(const CVector& a, const CVector& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

CVector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}

void suite_interp(Collector& c) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int d = 1; d <= 3; ++d) {
    std::vector<double> lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
      lo[i] = -0.5 - 0.3 * i;
      hi[i] = 0.7 + 0.2 * i;
    }
    const Box box(lo, hi);
    for (int m : {0, 3, 8}) {
      std::vector<double> coef(static_cast<std::size_t>(std::pow(m + 1, d)));
      for (auto& a : coef) a = u(rng);
      auto poly = [&](std::span<const double> x) {
        Complex s = 0.0;
        std::size_t k = 0;
        std::vector<int> e(d, 0);
        for (std::size_t t = 0; t < coef.size(); ++t) {
          double term = coef[k++];
          for (int i = 0; i < d; ++i) term *= std::pow(x[i], e[i]);
          s += term;
          for (int i = 0; i < d; ++i) {
            if (++e[i] <= m) break;
            e[i] = 0;
          }
        }
        return s;
      };
      const TensorInterpolant p = tensor_interpolate(poly, box, m);
      std::vector<double> x(d);
      for (int s = 0; s < 20; ++s) {
        for (int i = 0; i < d; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * 0.5 * (u(rng) + 1.0);
        worst = std::max(worst, std::abs(p(x) - poly(x)) / std::max(1.0, std::abs(poly(x))));
      }
    }
  }
  c.check("tensor_reproduces_Qm", worst <= 1e-12, worst);

  const double lam = lebesgue_constant(8);
  c.check("lebesgue_m8_below_log_bound", lam <= 2.0 / std::numbers::pi * std::log(9.0) + 1.0, lam);

  const ChebGrid1D g = cheb_nodes(6, {0.0, 2.0});
  double unity = 0.0;
  for (double x : {0.1, 0.9, 1.7, 2.5}) {
    double s = 0.0;
    for (int j = 0; j <= 6; ++j) s += g.lagrange(j, x);
    unity = std::max(unity, std::abs(s - 1.0));
  }
  c.check("partition_of_unity", unity <= 1e-12, unity);
}

void suite_kernel(Collector& c) {
  const OscillatoryKernel k = helmholtz_kernel(4.0);
  const std::vector<double> x{0.1, 0.2, 0.3}, y{1.5, -0.4, 0.8};
  const double sym = std::abs(k(x, y) - k(y, x));
  c.check("helmholtz_symmetric", sym <= 1e-15, sym);

  const double r = std::sqrt(1.4 * 1.4 + 0.6 * 0.6 + 0.5 * 0.5);
  const Complex ref = std::exp(Complex(0.0, 4.0 * r)) / (4.0 * std::numbers::pi * r);
  const double val = std::abs(k(x, y) - ref);
  c.check("helmholtz_value", val <= 1e-15, val);

  const std::vector<double> x0{0.0, 0.0, 0.0}, y0{1.0, 0.0, 1.0};
  const Complex mk = modified_kernel(k, x0, y0, x, y);
  const Complex mk_ref =
      k(x, y) * std::exp(Complex(0.0, -4.0 * (k.phase(x, y0) + k.phase(x0, y))));
  const double mod = std::abs(mk - mk_ref);
  c.check("modified_kernel_identity", mod <= 1e-15, mod);

  const double res = phase_residual(k, x0, y0, x0, y);
  c.check("phase_residual_vanishes_at_anchor", std::abs(res) <= 1e-14, std::abs(res));

  // E_z * I[f / E_z] is exact when f / E_z is a polynomial
  const Box box({0.0, 0.0, 0.0}, {0.5, 0.5, 0.5});
  const std::vector<double> z{2.0, 1.0, 1.5};
  auto f = [&](std::span<const double> p) {
    return phase_factor(k, Side::x, z, p) * Complex(1.0 + p[0] * p[1] - p[2] * p[2], p[0]);
  };
  const Reinterpolated ri = reinterpolate(k, Side::x, box, z, 2, f);
  const std::vector<double> p{0.13, 0.41, 0.22};
  const double exact = std::abs(ri(p) - f(p));
  c.check("reinterpolation_exact_on_phase_times_Qm", exact <= 1e-13, exact);

  bool threw = false;
  try {
    (void)k(x, x);
  } catch (const SingularEvaluation&) {
    threw = true;
  }
  c.check("singular_diagonal_raises", threw, threw ? 1.0 : 0.0);
}

void suite_clustering(Collector& c) {
  const TriangleMesh mesh = sphere_mesh(3);
  const auto sup = mesh.supports();
  const ClusterTree tree = build_cluster_tree(sup, 32);
  const BlockPartition part = build_block_partition(tree, tree, 1.0);
  const PartitionStats st = partition_stats(part, tree, tree);
  const double n = static_cast<double>(mesh.size());
  c.check("cover_count_is_N2", static_cast<double>(st.covered_entries) == n * n, static_cast<double>(st.covered_entries));

  bool leaves_same_level = true;
  std::size_t leaf_indices = 0;
  for (std::size_t id : tree.level(tree.depth())) leaf_indices += tree[id].size();
  for (std::size_t id = 0; id < tree.size(); ++id)
    if (tree[id].is_leaf() && tree[id].level != tree.depth()) leaves_same_level = false;
  c.check("leaves_share_one_level", leaves_same_level, tree.depth());
  c.check("leaves_partition_indices", leaf_indices == mesh.size(), static_cast<double>(leaf_indices));

  bool admissible_ok = true;
  for (const auto& leaf : part.admissible)
    admissible_ok = admissible_ok && standard_admissible(tree[leaf.sigma].bbox, tree[leaf.tau].bbox, 1.0);
  c.check("admissible_leaves_satisfy_condition", admissible_ok, static_cast<double>(part.admissible.size()));

  const Eta2Report rep = check_assumption_eta2(part, tree, tree, 4.0);
  c.check("eta2_finite", std::isfinite(rep.eta2), rep.eta2);
}

void suite_galerkin(Collector& c) {
  const TriangleRule tr = triangle_rule(5);
  double ts = 0.0;
  for (double w : tr.w) ts += w;
  c.check("triangle_rule_weight_sum", std::abs(ts - 0.5) <= 1e-14, ts);

  double worst_pair = 0.0;
  for (PairKind kind : {PairKind::identical, PairKind::common_edge, PairKind::common_vertex}) {
    const PairRule pr = singular_rule(kind, 4);
    double s = 0.0;
    for (double w : pr.w) s += w;
    worst_pair = std::max(worst_pair, std::abs(s - 0.25));
  }
  c.check("singular_rule_weight_sums", worst_pair <= 1e-13, worst_pair);

  const TriangleMesh mesh = sphere_mesh(2);
  const double area_err = std::abs(mesh.total_area() - 4.0 * std::numbers::pi) / (4.0 * std::numbers::pi);
  c.check("sphere_area_close_to_4pi", area_err <= 0.05, mesh.total_area());

  const CMatrix K = assemble_dense(mesh, helmholtz_kernel(2.0), QuadratureConfig{}, std::size_t(1) << 30);
  const double asym = (K - K.transpose()).norm() / K.norm();
  c.check("dense_symmetric", asym <= 1e-8, asym);

  bool refused = false;
  try {
    (void)assemble_dense(mesh, helmholtz_kernel(2.0), QuadratureConfig{}, 1024);
  } catch (const BudgetExceeded&) {
    refused = true;
  }
  c.check("budget_refusal", refused, refused ? 1.0 : 0.0);
}

void suite_butterfly(Collector& c) {
  const TriangleMesh mesh = sphere_mesh(3);
  const auto sup = mesh.supports();
  const ClusterTree tree = build_cluster_tree(sup, 8, 30, StopRule::all_small);
  const BlockPartition part = build_block_partition(tree, tree, 1.0);
  const OscillatoryKernel kernel = helmholtz_kernel(2.0);
  const GalerkinAssembler as(mesh, kernel, QuadratureConfig{});
  const ButterflyFactorization f = factorize(as, tree, tree, part, 2);

  const CMatrix D = to_dense(f);
  std::mt19937_64 rng(7);
  double fast = 0.0, adj = 0.0;
  for (int t = 0; t < 3; ++t) {
    const CVector x = random_vector(D.cols(), rng);
    fast = std::max(fast, rel_diff(matvec(f, x), D * x));
    adj = std::max(adj, rel_diff(matvec(f, x, Op::adjoint), D.adjoint() * x));
  }
  c.check("matvec_matches_expansion", fast <= 1e-12, fast);
  c.check("adjoint_matvec_matches_expansion", adj <= 1e-12, adj);

  const StorageReport st = storage_report(f);
  c.check("storage_counts_consistent", st.consistent, static_cast<double>(st.total_entries));

  // transfers need a deeper tree than the one above
  const TriangleMesh fine = sphere_mesh(4);
  const auto fsup = fine.supports();
  const ClusterTree ftree = build_cluster_tree(fsup, 16, 30, StopRule::all_small);
  const BlockPartition fpart = build_block_partition(ftree, ftree, 1.0);
  const OscillatoryKernel k4 = helmholtz_kernel(4.0);
  const GalerkinAssembler fas(fine, k4, QuadratureConfig{});
  double nest = 0.0;
  std::size_t checked = 0;
  for (std::size_t p = 0; p < fpart.plans.size() && checked < 24; p += 11) {
    const ButterflyPlan& plan = fpart.plans[p];
    if (plan.steps < 1) continue;
    const auto [sigma, tau] = plan.middle_blocks.front();
    for (std::size_t son : ftree[sigma].sons) {
      nest = std::max(nest, nestedness_check(fas, ftree, ftree, sigma, son, tau, 6).range);
      ++checked;
    }
  }
  c.check("nestedness_residual_small", checked > 0 && nest <= 1e-6, nest);
}

void suite_analysis(Collector& c) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int pass = 0;
  for (int s = 0; s < 20; ++s) {
    const double rho0 = 1.05 + 20.0 * u(rng);
    const double h = 0.05 + 0.9 * u(rng);
    const double r1 = solve_rho1(rho0, h);
    if (verify_inclusion(rho0, {-1.0, -1.0 + 2.0 * h}, r1)) ++pass;
  }
  c.check("inclusion_holds", pass == 20, pass);

  const double q = qhat_scan(0.5);
  c.check("qhat_below_one", q < 1.0, q);

  const double lim = solve_rho1(1e4, 0.5) / 1e4;
  c.check("rho_ratio_limit", std::abs(lim - 0.5) <= 1e-3, lim);

  ChainConfig cfg;
  cfg.trials = 2;
  cfg.samples = 128;
  const ChainTable t = iterated_reinterpolation_experiment(line_pair_kernel(cfg.kappa), cfg);
  c.check("chain_norm_growth_bounded", t.max_norm_growth <= 1.5, t.max_norm_growth);
}

}  // namespace

std::vector<VerifyResult> verify(const std::string& suite, std::ostream* log) {
  static const std::vector<std::string> all{"interp", "kernel", "clustering", "galerkin", "butterfly", "analysis"};
  std::vector<std::string> run;
  if (suite == "all") {
    run = all;
  } else if (std::find(all.begin(), all.end(), suite) != all.end()) {
    run = {suite};
  } else {
    throw std::invalid_argument("unknown suite: " + suite);
  }
  std::vector<VerifyResult> out;
  for (const auto& s : run) {
    Collector c(s, out, log);
    if (s == "interp") suite_interp(c);
    if (s == "kernel") suite_kernel(c);
    if (s == "clustering") suite_clustering(c);
    if (s == "galerkin") suite_galerkin(c);
    if (s == "butterfly") suite_butterfly(c);
    if (s == "analysis") suite_analysis(c);
  }
  return out;
}

}  // namespace bfly
