#include "bfly/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bfly {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ReportKind parse_report_kind(const std::string& s) {
  if (s == "spectral") return ReportKind::spectral;
  if (s == "frobenius") return ReportKind::frobenius;
  if (s == "both") return ReportKind::both;
  throw std::invalid_argument("unknown report kind: " + s);
}

std::string to_string(ReportKind k) {
  switch (k) {
    case ReportKind::spectral:
      return "spectral";
    case ReportKind::frobenius:
      return "frobenius";
    case ReportKind::both:
      break;
  }
  return "both";
}

void BenchConfig::validate() const {
  if (level < 0 || level > 8) throw std::invalid_argument("level must be in [0, 8]");
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
  if (degrees.empty()) throw std::invalid_argument("at least one degree is required");
  for (int m : degrees)
    if (m < 0) throw std::invalid_argument("degrees must be >= 0");
  if (!(eta1 > 0.0)) throw std::invalid_argument("eta1 must be > 0");
  if (leaf_size < 1) throw std::invalid_argument("leaf size must be >= 1");
  if (format != "csv" && format != "json") throw std::invalid_argument("format must be csv or json");
  if (power_iterations < 1 || !(power_tolerance > 0.0)) throw std::invalid_argument("invalid power iteration settings");
  quad.validate();
}

SpectralEstimate spectral_error(const CMatrix& dense, const ButterflyFactorization& fact, int max_iterations,
                                double rel_tolerance, std::uint64_t seed) {
  const Eigen::Index n = dense.cols();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  v.normalize();

  SpectralEstimate est;
  double lambda = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    const CVector w = dense * v - matvec(fact, v);
    const CVector z = dense.adjoint() * w - matvec(fact, w, Op::adjoint);
    // Rayleigh quotient v^H E^H E v with |v| = 1
    const double next = w.squaredNorm();
    est.iterations = it;
    const double zn = z.norm();
    if (zn == 0.0) {
      lambda = next;
      est.converged = true;
      break;
    }
    const bool done = it > 1 && std::abs(next - lambda) <= rel_tolerance * next;
    lambda = next;
    v = z / zn;
    if (done) {
      est.converged = true;
      break;
    }
  }
  est.value = std::sqrt(lambda);
  return est;
}

double frobenius_error(const CMatrix& dense, const ButterflyFactorization& fact) {
  const ClusterTree& rows = fact.rows();
  const ClusterTree& cols = fact.cols();
  double sum = 0.0;
  auto accumulate = [&](const std::vector<std::size_t>& ri, const std::vector<std::size_t>& ci, const CMatrix& B) {
    for (std::size_t r = 0; r < ri.size(); ++r) {
      for (std::size_t c = 0; c < ci.size(); ++c) {
        sum += std::norm(dense(static_cast<Eigen::Index>(ri[r]), static_cast<Eigen::Index>(ci[c])) -
                         B(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      }
    }
  };
  const auto& part = fact.partition();
  for (std::size_t b = 0; b < part.inadmissible.size(); ++b) {
    const auto& [s, t] = part.inadmissible[b];
    accumulate(rows[s].indices, cols[t].indices, fact.nearfield()[b]);
  }
  for (const auto& leaf : part.admissible) {
    for (std::size_t sl : rows.descendants_at(leaf.sigma, rows.depth())) {
      for (std::size_t tl : cols.descendants_at(leaf.tau, cols.depth())) {
        accumulate(rows[sl].indices, cols[tl].indices, block_dense(fact, sl, tl));
      }
    }
  }
  return std::sqrt(sum);
}

ErrorReport bench(const BenchConfig& cfg, std::ostream* log) {
  cfg.validate();
  ErrorReport rep;
  rep.config = cfg;

  const TriangleMesh mesh = sphere_mesh(cfg.level);
  // refuse before the partition work; assemble_dense checks again
  const double dense_bytes = static_cast<double>(mesh.size()) * static_cast<double>(mesh.size()) * sizeof(Complex);
  if (dense_bytes > static_cast<double>(cfg.budget_mb) * 1024.0 * 1024.0) {
    throw BudgetExceeded("dense matrix needs " + std::to_string(static_cast<long long>(dense_bytes / (1024.0 * 1024.0))) +
                         " MiB, budget is " + std::to_string(cfg.budget_mb) + " MiB");
  }
  const auto supports = mesh.supports();
  const ClusterTree tree = build_cluster_tree(supports, cfg.leaf_size, 30, cfg.stop);
  const BlockPartition part = build_block_partition(tree, tree, cfg.eta1);
  const Eta2Report eta = check_assumption_eta2(part, tree, tree, cfg.kappa);
  rep.n = mesh.size();
  rep.depth = tree.depth();
  rep.plans = part.plans.size();
  rep.admissible = part.admissible.size();
  rep.inadmissible = part.inadmissible.size();
  rep.eta2 = eta.eta2;
  rep.qbar = eta.qbar;
  if (log) *log << "n=" << rep.n << " depth=" << rep.depth << " plans=" << rep.plans << '\n';

  const OscillatoryKernel kernel = helmholtz_kernel(cfg.kappa);
  auto t0 = std::chrono::steady_clock::now();
  const CMatrix dense = assemble_dense(mesh, kernel, cfg.quad, cfg.budget_mb * 1024 * 1024);
  rep.dense_seconds = seconds_since(t0);
  rep.dense_norm = dense.norm();
  if (log) *log << "dense assembly " << rep.dense_seconds << " s\n";

  const GalerkinAssembler assembler(mesh, kernel, cfg.quad);
  const bool want_spec = cfg.report != ReportKind::frobenius;
  const bool want_frob = cfg.report != ReportKind::spectral;
  for (int m : cfg.degrees) {
    ErrorRow row;
    row.m = m;
    t0 = std::chrono::steady_clock::now();
    const ButterflyFactorization fact = factorize(assembler, tree, tree, part, m);
    row.factor_seconds = seconds_since(t0);
    const StorageReport st = storage_report(fact);
    row.storage_entries = st.total_entries;
    row.compression = st.compression_ratio();

    t0 = std::chrono::steady_clock::now();
    if (want_spec) {
      const SpectralEstimate a = spectral_error(dense, fact, cfg.power_iterations, cfg.power_tolerance, cfg.seed);
      const SpectralEstimate b = spectral_error(dense, fact, cfg.power_iterations, cfg.power_tolerance, cfg.seed + 1);
      row.spectral = a.value;
      row.spectral_restart = b.value;
      row.spectral_converged = a.converged && b.converged;
      if (log && !row.spectral_converged) *log << "warning: power iteration did not converge for m=" << m << '\n';
    }
    if (want_frob) row.frobenius = frobenius_error(dense, fact);
    row.error_seconds = seconds_since(t0);

    if (!rep.rows.empty()) {
      const ErrorRow& prev = rep.rows.back();
      if (row.spectral && prev.spectral && *row.spectral > 0.0) row.spectral_factor = *prev.spectral / *row.spectral;
      if (row.frobenius && prev.frobenius && *row.frobenius > 0.0) row.frobenius_factor = *prev.frobenius / *row.frobenius;
    }
    if (log) {
      *log << "m=" << m;
      if (row.spectral) *log << " spectral=" << *row.spectral;
      if (row.frobenius) *log << " frobenius=" << *row.frobenius;
      *log << " (" << row.factor_seconds << " s + " << row.error_seconds << " s)\n";
    }
    rep.rows.push_back(row);
  }
  return rep;
}

namespace {

const char* kCsvHeader =
    "m,spectral,spectral_restart,spectral_factor,frobenius,frobenius_factor,spectral_converged,storage_entries,"
    "compression,factor_seconds,error_seconds";

std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

}  // namespace

void write_csv(const ErrorReport& r, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& row : r.rows) {
    os << row.m << ',' << opt(row.spectral) << ',' << opt(row.spectral_restart) << ',' << opt(row.spectral_factor) << ','
       << opt(row.frobenius) << ',' << opt(row.frobenius_factor) << ',' << (row.spectral_converged ? 1 : 0) << ','
       << row.storage_entries << ',' << fmt(row.compression) << ',' << fmt(row.factor_seconds) << ','
       << fmt(row.error_seconds) << '\n';
  }
}

std::vector<ErrorRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw std::runtime_error("read_csv: unexpected header");
  std::vector<ErrorRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 11) throw std::runtime_error("read_csv: expected 11 columns");
    ErrorRow r;
    r.m = std::stoi(cells[0]);
    r.spectral = parse_opt(cells[1]);
    r.spectral_restart = parse_opt(cells[2]);
    r.spectral_factor = parse_opt(cells[3]);
    r.frobenius = parse_opt(cells[4]);
    r.frobenius_factor = parse_opt(cells[5]);
    r.spectral_converged = cells[6] == "1";
    r.storage_entries = std::stoull(cells[7]);
    r.compression = std::stod(cells[8]);
    r.factor_seconds = std::stod(cells[9]);
    r.error_seconds = std::stod(cells[10]);
    rows.push_back(r);
  }
  return rows;
}

std::string report_json(const ErrorReport& r) {
  using nlohmann::json;
  const BenchConfig& c = r.config;
  json j;
  j["config"] = {{"level", c.level},
                 {"kappa", c.kappa},
                 {"degrees", c.degrees},
                 {"eta1", c.eta1},
                 {"leaf_size", c.leaf_size},
                 {"stop_rule", c.stop == StopRule::any_small ? "any_small" : "all_small"},
                 {"regular_order", c.quad.regular_order},
                 {"singular_order", c.quad.singular_order},
                 {"singular_scheme", c.quad.singular_scheme},
                 {"report", to_string(c.report)},
                 {"seed", c.seed},
                 {"budget_mb", c.budget_mb},
                 {"power_iterations", c.power_iterations},
                 {"power_tolerance", c.power_tolerance}};
  j["n"] = r.n;
  j["depth"] = r.depth;
  j["plans"] = r.plans;
  j["admissible_leaves"] = r.admissible;
  j["inadmissible_leaves"] = r.inadmissible;
  j["eta2"] = r.eta2;
  j["qbar"] = r.qbar;
  j["dense_frobenius_norm"] = r.dense_norm;
  j["dense_seconds"] = r.dense_seconds;
  j["basis"] = "characteristic functions of the triangles (unnormalised)";
  json rows = json::array();
  auto put = [](json& o, const char* key, const std::optional<double>& v) { o[key] = v ? json(*v) : json(nullptr); };
  for (const auto& row : r.rows) {
    json o;
    o["m"] = row.m;
    put(o, "spectral", row.spectral);
    put(o, "spectral_restart", row.spectral_restart);
    put(o, "spectral_factor", row.spectral_factor);
    put(o, "frobenius", row.frobenius);
    put(o, "frobenius_factor", row.frobenius_factor);
    o["spectral_converged"] = row.spectral_converged;
    o["storage_entries"] = row.storage_entries;
    o["compression"] = row.compression;
    o["factor_seconds"] = row.factor_seconds;
    o["error_seconds"] = row.error_seconds;
    rows.push_back(o);
  }
  j["rows"] = rows;
  return j.dump(2);
}

}  // namespace bfly
