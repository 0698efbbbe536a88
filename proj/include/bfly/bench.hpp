#pragma once

// Error benchmark on the sphere (spectral and Frobenius errors of the
// butterfly approximation against the dense Galerkin matrix) and the
// invariant suites behind `bfly verify`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bfly/butterfly.hpp"
#include "bfly/clustering.hpp"
#include "bfly/galerkin.hpp"

namespace bfly {

enum class ReportKind { spectral, frobenius, both };

ReportKind parse_report_kind(const std::string& s);
std::string to_string(ReportKind k);

struct BenchConfig {
  int level = 4;
  double kappa = 4.0;
  std::vector<int> degrees{0, 1, 2, 3, 4};
  double eta1 = 1.0;
  int leaf_size = 32;
  StopRule stop = StopRule::any_small;
  QuadratureConfig quad;
  ReportKind report = ReportKind::both;
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 0;
  std::size_t budget_mb = 2048;
  int power_iterations = 200;
  double power_tolerance = 1e-4;

  void validate() const;
};

struct SpectralEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// sqrt of the Rayleigh quotient of E^H E, E = K - K~, by power iteration
/// from a seeded complex Gaussian start. Never larger than ||E||_2.
SpectralEstimate spectral_error(const CMatrix& dense, const ButterflyFactorization& fact, int max_iterations = 200,
                                double rel_tolerance = 1e-4, std::uint64_t seed = 0);

/// ||K - K~||_F, evaluated block by block.
double frobenius_error(const CMatrix& dense, const ButterflyFactorization& fact);

struct ErrorRow {
  int m = 0;
  std::optional<double> spectral;
  /// Second estimate from an independent start (seed + 1).
  std::optional<double> spectral_restart;
  std::optional<double> spectral_factor;
  std::optional<double> frobenius;
  std::optional<double> frobenius_factor;
  bool spectral_converged = true;
  std::size_t storage_entries = 0;
  double compression = 0.0;
  double factor_seconds = 0.0;
  double error_seconds = 0.0;
};

struct ErrorReport {
  BenchConfig config;
  std::size_t n = 0;
  int depth = 0;
  std::size_t plans = 0;
  std::size_t admissible = 0;
  std::size_t inadmissible = 0;
  double eta2 = 0.0;
  double qbar = 0.0;
  double dense_norm = 0.0;
  double dense_seconds = 0.0;
  std::vector<ErrorRow> rows;
};

/// Builds mesh, trees, partition and dense oracle, then one factorisation
/// per degree. Throws BudgetExceeded if the dense matrix does not fit.
ErrorReport bench(const BenchConfig& cfg, std::ostream* log = nullptr);

void write_csv(const ErrorReport& r, std::ostream& os);
std::vector<ErrorRow> read_csv(std::istream& is);
std::string report_json(const ErrorReport& r);

struct VerifyResult {
  std::string suite;
  std::string check;
  bool pass = false;
  double value = 0.0;
};

/// Suites: interp, kernel, clustering, galerkin, butterfly, analysis, all.
std::vector<VerifyResult> verify(const std::string& suite, std::ostream* log = nullptr);

}  // namespace bfly
