#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bfly/bench.hpp"

namespace {

int write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream os(path);
  if (!os) {
    std::cerr << "cannot open " << path << '\n';
    return 2;
  }
  os << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Butterfly approximation of oscillatory boundary-element matrices"};
  app.require_subcommand(1);

  bfly::BenchConfig cfg;
  std::vector<int> degrees;
  std::string report = "both";
  std::string stop = "any_small";
  bool quiet = false;

  auto add_geometry = [&](CLI::App* sub) {
    sub->add_option("--level", cfg.level, "sphere refinement level (8*4^level triangles)")->check(CLI::Range(0, 8));
    sub->add_option("--kappa", cfg.kappa, "wave number")->check(CLI::NonNegativeNumber);
    sub->add_option("--eta1", cfg.eta1, "admissibility parameter")->check(CLI::PositiveNumber);
    sub->add_option("--leaf-size", cfg.leaf_size, "cluster leaf size")->check(CLI::PositiveNumber);
    sub->add_option("--stop-rule", stop, "level stop rule")->check(CLI::IsMember({"any_small", "all_small"}));
  };

  CLI::App* bench = app.add_subcommand("bench", "error of the approximation against the dense matrix");
  add_geometry(bench);
  bench->add_option("--degree", degrees, "interpolation degree (repeatable)")->check(CLI::NonNegativeNumber);
  bench->add_option("--report", report, "error norms to report")->check(CLI::IsMember({"spectral", "frobenius", "both"}));
  bench->add_option("--out", cfg.out, "output file (stdout if omitted)");
  bench->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  bench->add_option("--seed", cfg.seed, "power iteration seed");
  bench->add_option("--quad-order", cfg.quad.regular_order, "regular quadrature order")->check(CLI::PositiveNumber);
  bench->add_option("--singular-order", cfg.quad.singular_order, "singular quadrature order")
      ->check(CLI::PositiveNumber);
  bench->add_option("--budget-mb", cfg.budget_mb, "memory budget for the dense matrix");
  bench->add_option("--power-iterations", cfg.power_iterations, "power iteration cap")->check(CLI::PositiveNumber);
  bench->add_flag("--quiet", quiet, "no progress on stderr");

  std::string suite = "all";
  CLI::App* verify = app.add_subcommand("verify", "run invariant checks");
  verify->add_option("suite", suite, "suite name")
      ->check(CLI::IsMember({"interp", "kernel", "clustering", "galerkin", "butterfly", "analysis", "all"}));

  std::string part_out;
  CLI::App* partition = app.add_subcommand("partition", "cluster tree and block partition statistics as JSON");
  add_geometry(partition);
  partition->add_option("--out", part_out, "output file");

  std::string mesh_out;
  CLI::App* mesh = app.add_subcommand("mesh", "write the sphere mesh as OBJ");
  mesh->add_option("--level", cfg.level, "refinement level")->check(CLI::Range(0, 8));
  mesh->add_option("--out", mesh_out, "output file");

  std::string dense_out;
  CLI::App* dense = app.add_subcommand("dense", "assemble and export the dense Galerkin matrix");
  dense->add_option("--level", cfg.level, "refinement level")->check(CLI::Range(0, 8));
  dense->add_option("--kappa", cfg.kappa, "wave number")->check(CLI::NonNegativeNumber);
  dense->add_option("--quad-order", cfg.quad.regular_order, "regular quadrature order")->check(CLI::PositiveNumber);
  dense->add_option("--singular-order", cfg.quad.singular_order, "singular quadrature order")
      ->check(CLI::PositiveNumber);
  dense->add_option("--budget-mb", cfg.budget_mb, "memory budget");
  dense->add_option("--out", dense_out, "binary output path (a .json sidecar is written next to it)")->required();

  CLI11_PARSE(app, argc, argv);
  cfg.stop = stop == "all_small" ? bfly::StopRule::all_small : bfly::StopRule::any_small;

  try {
    if (*bench) {
      if (!degrees.empty()) cfg.degrees = degrees;
      cfg.report = bfly::parse_report_kind(report);
      const bfly::ErrorReport rep = bfly::bench(cfg, quiet ? nullptr : &std::cerr);
      std::string text;
      if (cfg.format == "json") {
        text = bfly::report_json(rep) + "\n";
      } else {
        std::ostringstream os;
        bfly::write_csv(rep, os);
        text = os.str();
      }
      return write_or_print(cfg.out, text);
    }
    if (*verify) {
      const auto results = bfly::verify(suite, &std::cout);
      std::size_t failed = 0;
      for (const auto& r : results) failed += r.pass ? 0 : 1;
      std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
      return failed == 0 ? 0 : 1;
    }
    if (*partition) {
      const bfly::TriangleMesh m = bfly::sphere_mesh(cfg.level);
      const auto sup = m.supports();
      const bfly::ClusterTree tree = bfly::build_cluster_tree(sup, cfg.leaf_size, 30, cfg.stop);
      const bfly::BlockPartition part = bfly::build_block_partition(tree, tree, cfg.eta1);
      const auto eta = bfly::check_assumption_eta2(part, tree, tree, cfg.kappa);
      return write_or_print(part_out, bfly::partition_json(part, tree, tree, eta) + "\n");
    }
    if (*mesh) {
      std::ostringstream os;
      bfly::write_obj(bfly::sphere_mesh(cfg.level), os);
      return write_or_print(mesh_out, os.str());
    }
    if (*dense) {
      cfg.quad.validate();
      const bfly::TriangleMesh m = bfly::sphere_mesh(cfg.level);
      const bfly::CMatrix K =
          bfly::assemble_dense(m, bfly::helmholtz_kernel(cfg.kappa), cfg.quad, cfg.budget_mb * 1024 * 1024);
      bfly::export_dense(K, dense_out, cfg.kappa, cfg.level);
      return 0;
    }
  } catch (const bfly::BudgetExceeded& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
