#pragma once

// Butterfly factorisation of a Galerkin matrix: coupling matrices on the
// middle level, phase-corrected transfer matrices on both sides, and leaf
// moments V/W; inadmissible blocks are kept dense.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bfly/clustering.hpp"
#include "bfly/galerkin.hpp"
#include "bfly/matrix.hpp"

namespace bfly {

using ClusterPair = std::pair<std::size_t, std::size_t>;

struct PlanFactors {
  /// (sigma_0, tau_0) on the middle level.
  std::map<ClusterPair, CMatrix> S;
  /// Row side, keyed by (sigma_{l+1}, tau_{-l}); rows = child nodes, cols = parent nodes.
  std::map<ClusterPair, CMatrix> Ex;
  /// Column side, keyed by (tau_{l+1}, sigma_{-l}).
  std::map<ClusterPair, CMatrix> Ey;
  /// (sigma_L, tau_{-L}) -> |sigma_L| x M.
  std::map<ClusterPair, CMatrix> V;
  /// (tau_L, sigma_{-L}) -> |tau_L| x M.
  std::map<ClusterPair, CMatrix> W;
};

enum class Op { none, adjoint };

class ButterflyFactorization {
 public:
  ButterflyFactorization(const ClusterTree& rows, const ClusterTree& cols, const BlockPartition& partition, int degree);

  const ClusterTree& rows() const { return *rows_; }
  const ClusterTree& cols() const { return *cols_; }
  const BlockPartition& partition() const { return *partition_; }
  int degree() const { return degree_; }
  /// M = (m+1)^d.
  std::size_t rank() const { return rank_; }

  std::vector<PlanFactors>& plans() { return plans_; }
  const std::vector<PlanFactors>& plans() const { return plans_; }
  /// Dense blocks, aligned with partition().inadmissible.
  std::vector<CMatrix>& nearfield() { return near_; }
  const std::vector<CMatrix>& nearfield() const { return near_; }

  /// Plan owning the leaf pair (sigma_L, tau_L), and its middle block.
  std::pair<std::size_t, ClusterPair> locate(std::size_t sigma_leaf, std::size_t tau_leaf) const;

 private:
  const ClusterTree* rows_;
  const ClusterTree* cols_;
  const BlockPartition* partition_;
  int degree_;
  std::size_t rank_;
  std::vector<PlanFactors> plans_;
  std::vector<CMatrix> near_;
  std::map<ClusterPair, std::size_t> middle_owner_;
};

/// Transfer matrix re-expanding the basis of `parent` with anchor `old_anchor`
/// into the basis of `child` with anchor `new_anchor`:
/// E(n,p) = exp(i kappa (Phi(xi_n, old) - Phi(xi_n, new))) L_p^{parent}(xi_n) on the row side,
/// with Phi's arguments swapped on the column side.
CMatrix transfer_matrix(const OscillatoryKernel& kernel, Side side, const Box& child, const Box& parent,
                        std::span<const double> old_anchor, std::span<const double> new_anchor, int m);

/// S(p,q) = k_{x0,y0}(xi_p, xi_q) on the tensor grids of the two boxes.
CMatrix coupling_matrix(const OscillatoryKernel& kernel, const Box& row_box, const Box& col_box,
                        std::span<const double> x0, std::span<const double> y0, int m);

/// All S, E, V, W for every plan and the dense inadmissible blocks.
ButterflyFactorization factorize(const GalerkinAssembler& assembler, const ClusterTree& rows, const ClusterTree& cols,
                                 const BlockPartition& partition, int degree);

/// y = K~ x (Op::none) or y = K~^H x (Op::adjoint), with shared chain prefixes
/// evaluated once.
CVector matvec(const ButterflyFactorization& fact, const CVector& x, Op op = Op::none);

/// Reference product summing every chain separately.
CVector matvec_naive(const ButterflyFactorization& fact, const CVector& x);

/// V E ... E S E^T ... E^T W^T for a pair of leaf clusters inside an admissible block.
CMatrix block_dense(const ButterflyFactorization& fact, std::size_t sigma_leaf, std::size_t tau_leaf);

/// Full N x M matrix of the factorisation.
CMatrix to_dense(const ButterflyFactorization& fact);

struct NestednessResidual {
  /// Relative deviation on kernel columns k(., y) / E_{y_tau}, y at the corners
  /// and centre of tau's box. Decays with the degree like the re-interpolation error.
  double range = 0.0;
  /// Max entrywise deviation relative to the largest direct moment. Saturates
  /// in m once kappa > 0: E_{y_tau} / E_{y_father(tau)} times a degree-m Lagrange
  /// polynomial is not in Q_m.
  double entrywise = 0.0;
};

/// Compares the moments of `parent`'s basis (anchor y_tau) restricted to the
/// son with the son's moments (anchor y_father(tau)) times the transfer matrix.
NestednessResidual nestedness_check(const GalerkinAssembler& assembler, const ClusterTree& rows,
                                    const ClusterTree& cols, std::size_t parent, std::size_t son, std::size_t tau,
                                    int degree);
/// Same check, reusing the stored transfer matrix of the factorisation.
NestednessResidual nestedness_check(const GalerkinAssembler& assembler, const ButterflyFactorization& fact,
                                    std::size_t plan, std::size_t son, std::size_t tau);

struct StorageReport {
  std::size_t coupling_matrices = 0;
  std::size_t transfer_matrices = 0;
  std::size_t leaf_matrices = 0;
  std::size_t coupling_entries = 0;
  std::size_t transfer_entries = 0;
  std::size_t leaf_entries = 0;
  std::size_t nearfield_entries = 0;
  std::size_t total_entries = 0;
  std::size_t dense_entries = 0;
  /// Entry counts predicted from cluster counts per level; equal to the enumerated ones.
  std::size_t predicted_coupling_entries = 0;
  std::size_t predicted_transfer_entries = 0;
  std::size_t predicted_leaf_entries = 0;
  bool consistent = false;
  double compression_ratio() const {
    return dense_entries == 0 ? 0.0 : static_cast<double>(total_entries) / static_cast<double>(dense_entries);
  }
};

StorageReport storage_report(const ButterflyFactorization& fact);

std::string factorization_json(const ButterflyFactorization& fact);

}  // namespace bfly
