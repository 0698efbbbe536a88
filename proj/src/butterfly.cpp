#include "bfly/butterfly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace bfly {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

double side_phase(const OscillatoryKernel& k, Side side, std::span<const double> anchor, std::span<const double> p) {
  return side == Side::x ? k.phase(p, anchor) : k.phase(anchor, p);
}

CVector gather(const CVector& x, const std::vector<std::size_t>& idx) {
  CVector out(ix(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(ix(i)) = x(ix(idx[i]));
  return out;
}

void scatter_add(CVector& y, const std::vector<std::size_t>& idx, const CVector& v) {
  for (std::size_t i = 0; i < idx.size(); ++i) y(ix(idx[i])) += v(ix(i));
}

const CMatrix& lookup(const std::map<ClusterPair, CMatrix>& m, ClusterPair key, const char* what) {
  auto it = m.find(key);
  if (it == m.end()) throw std::logic_error(std::string("butterfly: missing ") + what + " matrix");
  return it->second;
}

}  // namespace

ButterflyFactorization::ButterflyFactorization(const ClusterTree& rows, const ClusterTree& cols,
                                               const BlockPartition& partition, int degree)
    : rows_(&rows), cols_(&cols), partition_(&partition), degree_(degree), rank_(1) {
  if (degree < 0) throw std::invalid_argument("butterfly: negative degree");
  for (std::size_t i = 0; i < rows.root().bbox.dim(); ++i) rank_ *= static_cast<std::size_t>(degree) + 1;
  plans_.resize(partition.plans.size());
  for (const auto& leaf : partition.admissible) middle_owner_[{leaf.sigma, leaf.tau}] = leaf.plan;
}

std::pair<std::size_t, ClusterPair> ButterflyFactorization::locate(std::size_t sigma_leaf, std::size_t tau_leaf) const {
  const int lev = (*rows_)[sigma_leaf].level;
  if (lev != rows_->depth() || (*cols_)[tau_leaf].level != cols_->depth()) {
    throw std::invalid_argument("block_dense: clusters are not leaves");
  }
  for (int l = lev; l >= 0; --l) {
    const ClusterPair key{rows_->ancestor(sigma_leaf, l), cols_->ancestor(tau_leaf, l)};
    auto it = middle_owner_.find(key);
    if (it != middle_owner_.end()) return {it->second, key};
  }
  throw std::invalid_argument("block_dense: leaf pair is not covered by any admissible block");
}

CMatrix transfer_matrix(const OscillatoryKernel& kernel, Side side, const Box& child, const Box& parent,
                        std::span<const double> old_anchor, std::span<const double> new_anchor, int m) {
  const TensorGrid cg(child, m);
  const TensorGrid pg(parent, m);
  const std::size_t M = cg.size();
  CMatrix E(ix(M), ix(M));
  std::vector<double> xi(child.dim());
  std::vector<double> basis(M);
  for (std::size_t n = 0; n < M; ++n) {
    cg.node(n, xi);
    const double dphi = side_phase(kernel, side, old_anchor, xi) - side_phase(kernel, side, new_anchor, xi);
    const Complex f = std::polar(1.0, kernel.kappa * dphi);
    pg.basis(xi, basis);
    for (std::size_t p = 0; p < M; ++p) E(ix(n), ix(p)) = f * basis[p];
  }
  return E;
}

CMatrix coupling_matrix(const OscillatoryKernel& kernel, const Box& row_box, const Box& col_box,
                        std::span<const double> x0, std::span<const double> y0, int m) {
  const TensorGrid rg(row_box, m);
  const TensorGrid cg(col_box, m);
  CMatrix S(ix(rg.size()), ix(cg.size()));
  std::vector<std::vector<double>> cnodes(cg.size());
  std::vector<Complex> col_phase(cg.size());
  for (std::size_t q = 0; q < cg.size(); ++q) {
    cnodes[q] = cg.node(q);
    col_phase[q] = std::polar(1.0, -kernel.kappa * kernel.phase(x0, cnodes[q]));
  }
  std::vector<double> xp(row_box.dim());
  for (std::size_t p = 0; p < rg.size(); ++p) {
    rg.node(p, xp);
    const Complex row_phase = std::polar(1.0, -kernel.kappa * kernel.phase(xp, y0));
    // admissible boxes are separated, so the fused form can skip the coincidence check
    for (std::size_t q = 0; q < cg.size(); ++q) {
      const Complex kv = kernel.fused ? kernel.fused(xp, cnodes[q]) : kernel(xp, cnodes[q]);
      S(ix(p), ix(q)) = kv * (row_phase * col_phase[q]);
    }
  }
  return S;
}

ButterflyFactorization factorize(const GalerkinAssembler& assembler, const ClusterTree& rows, const ClusterTree& cols,
                                 const BlockPartition& partition, int degree) {
  ButterflyFactorization fact(rows, cols, partition, degree);
  const OscillatoryKernel& k = assembler.kernel();
  const int depth = rows.depth();

  for (std::size_t pi = 0; pi < partition.plans.size(); ++pi) {
    const ButterflyPlan& plan = partition.plans[pi];
    PlanFactors& f = fact.plans()[pi];
    const int mid = plan.middle_level;
    const int L = plan.steps;

    for (const auto& [s0, t0] : plan.middle_blocks) {
      f.S.emplace(ClusterPair{s0, t0},
                  coupling_matrix(k, rows[s0].bbox, cols[t0].bbox, rows[s0].proxy_point, cols[t0].proxy_point, degree));
    }

    for (int l = 0; l < L; ++l) {
      for (std::size_t sc : rows.descendants_at(plan.sigma_hat, mid + l + 1)) {
        const std::size_t sp = *rows[sc].father;
        for (std::size_t ta : cols.descendants_at(plan.tau_hat, mid - l)) {
          const std::size_t tn = *cols[ta].father;
          f.Ex.emplace(ClusterPair{sc, ta}, transfer_matrix(k, Side::x, rows[sc].bbox, rows[sp].bbox,
                                                           cols[ta].proxy_point, cols[tn].proxy_point, degree));
        }
      }
      for (std::size_t tc : cols.descendants_at(plan.tau_hat, mid + l + 1)) {
        const std::size_t tp = *cols[tc].father;
        for (std::size_t sa : rows.descendants_at(plan.sigma_hat, mid - l)) {
          const std::size_t sn = *rows[sa].father;
          f.Ey.emplace(ClusterPair{tc, sa}, transfer_matrix(k, Side::y, cols[tc].bbox, cols[tp].bbox,
                                                           rows[sa].proxy_point, rows[sn].proxy_point, degree));
        }
      }
    }

    const auto col_anchors = cols.descendants_at(plan.tau_hat, mid - L);
    const auto row_anchors = rows.descendants_at(plan.sigma_hat, mid - L);
    std::vector<std::vector<double>> ya, xa;
    for (std::size_t ta : col_anchors) ya.push_back(cols[ta].proxy_point);
    for (std::size_t sa : row_anchors) xa.push_back(rows[sa].proxy_point);
    for (std::size_t sl : rows.descendants_at(plan.sigma_hat, depth)) {
      auto V = assembler.leaf_moments(rows[sl].indices, TensorGrid(rows[sl].bbox, degree), ya, Side::x);
      for (std::size_t i = 0; i < col_anchors.size(); ++i) f.V.emplace(ClusterPair{sl, col_anchors[i]}, std::move(V[i]));
    }
    for (std::size_t tl : cols.descendants_at(plan.tau_hat, depth)) {
      auto W = assembler.leaf_moments(cols[tl].indices, TensorGrid(cols[tl].bbox, degree), xa, Side::y);
      for (std::size_t i = 0; i < row_anchors.size(); ++i) f.W.emplace(ClusterPair{tl, row_anchors[i]}, std::move(W[i]));
    }
  }

  fact.nearfield().reserve(partition.inadmissible.size());
  for (const auto& [s, t] : partition.inadmissible) {
    fact.nearfield().push_back(assembler.block(rows[s].indices, cols[t].indices));
  }
  return fact;
}

namespace {

// One plan, y += K~|plan x. Coefficient maps are keyed (cluster on the
// expanding side, anchor cluster on the other side).
void plan_apply(const ButterflyFactorization& fact, std::size_t pi, const CVector& x, CVector& y) {
  const ClusterTree& rows = fact.rows();
  const ClusterTree& cols = fact.cols();
  const ButterflyPlan& plan = fact.partition().plans[pi];
  const PlanFactors& f = fact.plans()[pi];
  const int depth = rows.depth();
  const int mid = plan.middle_level;
  const int L = plan.steps;

  std::map<ClusterPair, CVector> c;
  for (std::size_t tl : cols.descendants_at(plan.tau_hat, depth)) {
    const CVector xs = gather(x, cols[tl].indices);
    for (std::size_t sa : rows.descendants_at(plan.sigma_hat, mid - L)) {
      c[{tl, sa}] = lookup(f.W, {tl, sa}, "W").transpose() * xs;
    }
  }
  for (int l = L - 1; l >= 0; --l) {
    std::map<ClusterPair, CVector> up;
    for (std::size_t tp : cols.descendants_at(plan.tau_hat, mid + l)) {
      for (std::size_t sa : rows.descendants_at(plan.sigma_hat, mid - l)) {
        CVector acc = CVector::Zero(ix(fact.rank()));
        for (std::size_t tc : cols[tp].sons) {
          acc += lookup(f.Ey, {tc, sa}, "Ey").transpose() * c.at({tc, *rows[sa].father});
        }
        up[{tp, sa}] = std::move(acc);
      }
    }
    c = std::move(up);
  }

  std::map<ClusterPair, CVector> d;
  for (const auto& [s0, t0] : plan.middle_blocks) d[{s0, t0}] = lookup(f.S, {s0, t0}, "S") * c.at({t0, s0});

  for (int l = 0; l < L; ++l) {
    std::map<ClusterPair, CVector> down;
    for (std::size_t sc : rows.descendants_at(plan.sigma_hat, mid + l + 1)) {
      const std::size_t sp = *rows[sc].father;
      for (std::size_t tn : cols.descendants_at(plan.tau_hat, mid - l - 1)) {
        CVector acc = CVector::Zero(ix(fact.rank()));
        for (std::size_t ta : cols[tn].sons) acc += lookup(f.Ex, {sc, ta}, "Ex") * d.at({sp, ta});
        down[{sc, tn}] = std::move(acc);
      }
    }
    d = std::move(down);
  }

  for (std::size_t sl : rows.descendants_at(plan.sigma_hat, depth)) {
    CVector acc = CVector::Zero(ix(rows[sl].size()));
    for (std::size_t ta : cols.descendants_at(plan.tau_hat, mid - L)) acc += lookup(f.V, {sl, ta}, "V") * d.at({sl, ta});
    scatter_add(y, rows[sl].indices, acc);
  }
}

// y += (K~|plan)^H x, the same sweep run from the row side.
void plan_apply_adjoint(const ButterflyFactorization& fact, std::size_t pi, const CVector& x, CVector& y) {
  const ClusterTree& rows = fact.rows();
  const ClusterTree& cols = fact.cols();
  const ButterflyPlan& plan = fact.partition().plans[pi];
  const PlanFactors& f = fact.plans()[pi];
  const int depth = rows.depth();
  const int mid = plan.middle_level;
  const int L = plan.steps;

  std::map<ClusterPair, CVector> c;
  for (std::size_t sl : rows.descendants_at(plan.sigma_hat, depth)) {
    const CVector xs = gather(x, rows[sl].indices);
    for (std::size_t ta : cols.descendants_at(plan.tau_hat, mid - L)) {
      c[{sl, ta}] = lookup(f.V, {sl, ta}, "V").adjoint() * xs;
    }
  }
  for (int l = L - 1; l >= 0; --l) {
    std::map<ClusterPair, CVector> up;
    for (std::size_t sp : rows.descendants_at(plan.sigma_hat, mid + l)) {
      for (std::size_t ta : cols.descendants_at(plan.tau_hat, mid - l)) {
        CVector acc = CVector::Zero(ix(fact.rank()));
        for (std::size_t sc : rows[sp].sons) {
          acc += lookup(f.Ex, {sc, ta}, "Ex").adjoint() * c.at({sc, *cols[ta].father});
        }
        up[{sp, ta}] = std::move(acc);
      }
    }
    c = std::move(up);
  }

  std::map<ClusterPair, CVector> d;
  for (const auto& [s0, t0] : plan.middle_blocks) d[{t0, s0}] = lookup(f.S, {s0, t0}, "S").adjoint() * c.at({s0, t0});

  for (int l = 0; l < L; ++l) {
    std::map<ClusterPair, CVector> down;
    for (std::size_t tc : cols.descendants_at(plan.tau_hat, mid + l + 1)) {
      const std::size_t tp = *cols[tc].father;
      for (std::size_t sn : rows.descendants_at(plan.sigma_hat, mid - l - 1)) {
        CVector acc = CVector::Zero(ix(fact.rank()));
        for (std::size_t sa : rows[sn].sons) acc += lookup(f.Ey, {tc, sa}, "Ey").conjugate() * d.at({tp, sa});
        down[{tc, sn}] = std::move(acc);
      }
    }
    d = std::move(down);
  }

  for (std::size_t tl : cols.descendants_at(plan.tau_hat, depth)) {
    CVector acc = CVector::Zero(ix(cols[tl].size()));
    for (std::size_t sa : rows.descendants_at(plan.sigma_hat, mid - L)) {
      acc += lookup(f.W, {tl, sa}, "W").conjugate() * d.at({tl, sa});
    }
    scatter_add(y, cols[tl].indices, acc);
  }
}

}  // namespace

CVector matvec(const ButterflyFactorization& fact, const CVector& x, Op op) {
  const std::size_t n_in = op == Op::none ? fact.cols().index_count() : fact.rows().index_count();
  const std::size_t n_out = op == Op::none ? fact.rows().index_count() : fact.cols().index_count();
  if (static_cast<std::size_t>(x.size()) != n_in) throw std::invalid_argument("matvec: dimension mismatch");
  CVector y = CVector::Zero(ix(n_out));
  const auto& part = fact.partition();
  for (std::size_t b = 0; b < part.inadmissible.size(); ++b) {
    const auto& [s, t] = part.inadmissible[b];
    const CMatrix& B = fact.nearfield()[b];
    if (op == Op::none) {
      scatter_add(y, fact.rows()[s].indices, B * gather(x, fact.cols()[t].indices));
    } else {
      scatter_add(y, fact.cols()[t].indices, B.adjoint() * gather(x, fact.rows()[s].indices));
    }
  }
  for (std::size_t pi = 0; pi < part.plans.size(); ++pi) {
    if (op == Op::none) {
      plan_apply(fact, pi, x, y);
    } else {
      plan_apply_adjoint(fact, pi, x, y);
    }
  }
  return y;
}

CMatrix block_dense(const ButterflyFactorization& fact, std::size_t sigma_leaf, std::size_t tau_leaf) {
  const auto [pi, middle] = fact.locate(sigma_leaf, tau_leaf);
  const ClusterTree& rows = fact.rows();
  const ClusterTree& cols = fact.cols();
  const ButterflyPlan& plan = fact.partition().plans[pi];
  const PlanFactors& f = fact.plans()[pi];
  const int mid = plan.middle_level;
  const int L = plan.steps;
  const auto [s0, t0] = middle;

  // sigma_l = ancestor of the leaf on level mid+l, sigma_{-l} = ancestor of sigma_0 on level mid-l
  auto sig = [&](int l) { return l >= 0 ? rows.ancestor(sigma_leaf, mid + l) : rows.ancestor(s0, mid + l); };
  auto tau = [&](int l) { return l >= 0 ? cols.ancestor(tau_leaf, mid + l) : cols.ancestor(t0, mid + l); };

  CMatrix left = lookup(f.V, {sig(L), tau(-L)}, "V");
  for (int l = L - 1; l >= 0; --l) left = left * lookup(f.Ex, {sig(l + 1), tau(-l)}, "Ex");
  CMatrix right = lookup(f.W, {tau(L), sig(-L)}, "W");
  for (int l = L - 1; l >= 0; --l) right = right * lookup(f.Ey, {tau(l + 1), sig(-l)}, "Ey");
  return left * lookup(f.S, {s0, t0}, "S") * right.transpose();
}

CVector matvec_naive(const ButterflyFactorization& fact, const CVector& x) {
  const ClusterTree& rows = fact.rows();
  const ClusterTree& cols = fact.cols();
  if (static_cast<std::size_t>(x.size()) != cols.index_count()) throw std::invalid_argument("matvec: dimension mismatch");
  CVector y = CVector::Zero(ix(rows.index_count()));
  const auto& part = fact.partition();
  for (std::size_t b = 0; b < part.inadmissible.size(); ++b) {
    const auto& [s, t] = part.inadmissible[b];
    scatter_add(y, rows[s].indices, fact.nearfield()[b] * gather(x, cols[t].indices));
  }
  for (const auto& leaf : part.admissible) {
    for (std::size_t sl : rows.descendants_at(leaf.sigma, rows.depth())) {
      for (std::size_t tl : cols.descendants_at(leaf.tau, cols.depth())) {
        scatter_add(y, rows[sl].indices, block_dense(fact, sl, tl) * gather(x, cols[tl].indices));
      }
    }
  }
  return y;
}

CMatrix to_dense(const ButterflyFactorization& fact) {
  const ClusterTree& rows = fact.rows();
  const ClusterTree& cols = fact.cols();
  CMatrix K = CMatrix::Zero(ix(rows.index_count()), ix(cols.index_count()));
  auto put = [&K](const std::vector<std::size_t>& ri, const std::vector<std::size_t>& ci, const CMatrix& B) {
    for (std::size_t r = 0; r < ri.size(); ++r)
      for (std::size_t c = 0; c < ci.size(); ++c) K(ix(ri[r]), ix(ci[c])) = B(ix(r), ix(c));
  };
  const auto& part = fact.partition();
  for (std::size_t b = 0; b < part.inadmissible.size(); ++b) {
    const auto& [s, t] = part.inadmissible[b];
    put(rows[s].indices, cols[t].indices, fact.nearfield()[b]);
  }
  for (const auto& leaf : part.admissible) {
    for (std::size_t sl : rows.descendants_at(leaf.sigma, rows.depth())) {
      for (std::size_t tl : cols.descendants_at(leaf.tau, cols.depth())) {
        put(rows[sl].indices, cols[tl].indices, block_dense(fact, sl, tl));
      }
    }
  }
  return K;
}

namespace {

// Residual on the columns k(., y) / E_{y_tau} sampled at the parent nodes,
// y running over the corners and centre of tau's box: the vectors the
// factorisation actually feeds into the parent basis.
NestednessResidual compare(const CMatrix& direct, const CMatrix& nested, const TensorGrid& pgrid,
                           const OscillatoryKernel& kernel, const Cluster& tau) {
  NestednessResidual r;
  r.entrywise = (direct - nested).cwiseAbs().maxCoeff() / direct.cwiseAbs().maxCoeff();
  const Box& tb = tau.bbox;
  const std::size_t d = tb.dim();
  const std::size_t corners = std::size_t(1) << d;
  CMatrix probes(static_cast<Eigen::Index>(pgrid.size()), static_cast<Eigen::Index>(corners + 1));
  std::vector<double> xi(pgrid.dim());
  for (std::size_t c = 0; c <= corners; ++c) {
    std::vector<double> y = tb.center();
    if (c < corners)
      for (std::size_t i = 0; i < d; ++i) y[i] = (c >> i & 1) ? tb.hi(i) : tb.lo(i);
    for (std::size_t q = 0; q < pgrid.size(); ++q) {
      pgrid.node(q, xi);
      probes(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(c)) =
          kernel(xi, y) / phase_factor(kernel, Side::x, tau.proxy_point, xi);
    }
  }
  const CMatrix a = direct * probes;
  const CMatrix b = nested * probes;
  r.range = (a - b).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff();
  return r;
}

}  // namespace

NestednessResidual nestedness_check(const GalerkinAssembler& assembler, const ClusterTree& rows,
                                    const ClusterTree& cols, std::size_t parent, std::size_t son, std::size_t tau,
                                    int degree) {
  if (rows[son].father != parent) throw std::invalid_argument("nestedness_check: son is not a son of parent");
  if (!cols[tau].father) throw std::invalid_argument("nestedness_check: anchor cluster has no father");
  const std::size_t tau_up = *cols[tau].father;
  const TensorGrid pgrid(rows[parent].bbox, degree);
  const TensorGrid sgrid(rows[son].bbox, degree);
  const CMatrix direct = assembler.leaf_moments(rows[son].indices, pgrid, cols[tau].proxy_point, Side::x);
  const CMatrix E = transfer_matrix(assembler.kernel(), Side::x, rows[son].bbox, rows[parent].bbox,
                                    cols[tau].proxy_point, cols[tau_up].proxy_point, degree);
  const CMatrix nested = assembler.leaf_moments(rows[son].indices, sgrid, cols[tau_up].proxy_point, Side::x) * E;
  return compare(direct, nested, pgrid, assembler.kernel(), cols[tau]);
}

NestednessResidual nestedness_check(const GalerkinAssembler& assembler, const ButterflyFactorization& fact,
                                    std::size_t plan, std::size_t son, std::size_t tau) {
  const ClusterTree& rows = fact.rows();
  const ClusterTree& cols = fact.cols();
  if (!rows[son].father || !cols[tau].father) throw std::invalid_argument("nestedness_check: missing father");
  const CMatrix& E = lookup(fact.plans().at(plan).Ex, {son, tau}, "Ex");
  const std::size_t parent = *rows[son].father;
  const std::size_t tau_up = *cols[tau].father;
  const TensorGrid pgrid(rows[parent].bbox, fact.degree());
  const TensorGrid sgrid(rows[son].bbox, fact.degree());
  const CMatrix direct = assembler.leaf_moments(rows[son].indices, pgrid, cols[tau].proxy_point, Side::x);
  const CMatrix nested = assembler.leaf_moments(rows[son].indices, sgrid, cols[tau_up].proxy_point, Side::x) * E;
  return compare(direct, nested, pgrid, assembler.kernel(), cols[tau]);
}

StorageReport storage_report(const ButterflyFactorization& fact) {
  StorageReport r;
  const ClusterTree& rows = fact.rows();
  const ClusterTree& cols = fact.cols();
  const std::size_t M = fact.rank();
  for (std::size_t pi = 0; pi < fact.plans().size(); ++pi) {
    const PlanFactors& f = fact.plans()[pi];
    const ButterflyPlan& plan = fact.partition().plans[pi];
    r.coupling_matrices += f.S.size();
    r.transfer_matrices += f.Ex.size() + f.Ey.size();
    r.leaf_matrices += f.V.size() + f.W.size();
    for (const auto& [key, S] : f.S) r.coupling_entries += static_cast<std::size_t>(S.size());
    for (const auto& [key, E] : f.Ex) r.transfer_entries += static_cast<std::size_t>(E.size());
    for (const auto& [key, E] : f.Ey) r.transfer_entries += static_cast<std::size_t>(E.size());
    for (const auto& [key, V] : f.V) r.leaf_entries += static_cast<std::size_t>(V.size());
    for (const auto& [key, W] : f.W) r.leaf_entries += static_cast<std::size_t>(W.size());

    const int mid = plan.middle_level;
    const int L = plan.steps;
    auto count = [](const ClusterTree& t, std::size_t root, int l) { return t.descendants_at(root, l).size(); };
    r.predicted_coupling_entries += M * M * count(rows, plan.sigma_hat, mid) * count(cols, plan.tau_hat, mid);
    for (int l = 0; l < L; ++l) {
      r.predicted_transfer_entries += M * M * count(rows, plan.sigma_hat, mid + l + 1) * count(cols, plan.tau_hat, mid - l);
      r.predicted_transfer_entries += M * M * count(rows, plan.sigma_hat, mid - l) * count(cols, plan.tau_hat, mid + l + 1);
    }
    const std::size_t row_anchors = count(rows, plan.sigma_hat, mid - L);
    const std::size_t col_anchors = count(cols, plan.tau_hat, mid - L);
    r.predicted_leaf_entries += M * rows[plan.sigma_hat].size() * col_anchors;
    r.predicted_leaf_entries += M * cols[plan.tau_hat].size() * row_anchors;
  }
  for (const auto& B : fact.nearfield()) r.nearfield_entries += static_cast<std::size_t>(B.size());
  r.total_entries = r.coupling_entries + r.transfer_entries + r.leaf_entries + r.nearfield_entries;
  r.dense_entries = rows.index_count() * cols.index_count();
  r.consistent = r.predicted_coupling_entries == r.coupling_entries &&
                 r.predicted_transfer_entries == r.transfer_entries && r.predicted_leaf_entries == r.leaf_entries;
  return r;
}

std::string factorization_json(const ButterflyFactorization& fact) {
  const StorageReport r = storage_report(fact);
  nlohmann::json j;
  j["degree"] = fact.degree();
  j["rank"] = fact.rank();
  j["plans"] = fact.plans().size();
  j["admissible_leaves"] = fact.partition().admissible.size();
  j["inadmissible_leaves"] = fact.partition().inadmissible.size();
  j["storage"] = {{"coupling_matrices", r.coupling_matrices}, {"transfer_matrices", r.transfer_matrices},
                  {"leaf_matrices", r.leaf_matrices},         {"coupling_entries", r.coupling_entries},
                  {"transfer_entries", r.transfer_entries},   {"leaf_entries", r.leaf_entries},
                  {"nearfield_entries", r.nearfield_entries}, {"total_entries", r.total_entries},
                  {"dense_entries", r.dense_entries},         {"compression_ratio", r.compression_ratio()},
                  {"consistent", r.consistent}};
  return j.dump(2);
}

}  // namespace bfly
