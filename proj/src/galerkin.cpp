#include "bfly/galerkin.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>

#include <json.hpp>

namespace bfly {

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

}  // namespace

double TriangleMesh::total_area() const {
  double s = 0.0;
  for (double a : areas) s += a;
  return s;
}

void TriangleMesh::update_geometry() {
  areas.resize(triangles.size());
  centroids.resize(triangles.size());
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const Vec3& a = vertices[triangles[t][0]];
    const Vec3& b = vertices[triangles[t][1]];
    const Vec3& c = vertices[triangles[t][2]];
    areas[t] = 0.5 * norm(cross(sub(b, a), sub(c, a)));
    for (int i = 0; i < 3; ++i) centroids[t][i] = (a[i] + b[i] + c[i]) / 3.0;
  }
}

std::vector<Support> TriangleMesh::supports() const {
  std::vector<Support> out;
  out.reserve(triangles.size());
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    std::vector<double> lo(3), hi(3);
    for (int i = 0; i < 3; ++i) {
      lo[i] = std::min({vertices[triangles[t][0]][i], vertices[triangles[t][1]][i], vertices[triangles[t][2]][i]});
      hi[i] = std::max({vertices[triangles[t][0]][i], vertices[triangles[t][1]][i], vertices[triangles[t][2]][i]});
      // axis-aligned edges would give a flat box
      if (hi[i] - lo[i] < 1e-13) {
        lo[i] -= 5e-14;
        hi[i] += 5e-14;
      }
    }
    out.push_back({{centroids[t][0], centroids[t][1], centroids[t][2]}, Box(std::move(lo), std::move(hi))});
  }
  return out;
}

Vec3 TriangleMesh::point(std::size_t t, double x1, double x2) const {
  const Vec3& a = vertices[triangles[t][0]];
  const Vec3& b = vertices[triangles[t][1]];
  const Vec3& c = vertices[triangles[t][2]];
  const double l0 = 1.0 - x1, l1 = x1 - x2;
  return {l0 * a[0] + l1 * b[0] + x2 * c[0], l0 * a[1] + l1 * b[1] + x2 * c[1], l0 * a[2] + l1 * b[2] + x2 * c[2]};
}

TriangleMesh sphere_mesh(int level) {
  if (level < 0 || level > 8) throw std::invalid_argument("sphere_mesh: level must be in [0, 8]");
  const int n = 1 << level;
  TriangleMesh mesh;
  // lattice points of the octahedron have integer coordinates in units of 1/n
  std::map<std::array<int, 3>, std::size_t> index;
  auto vertex = [&](std::array<int, 3> key) {
    auto [it, inserted] = index.try_emplace(key, mesh.vertices.size());
    if (inserted) {
      Vec3 p{static_cast<double>(key[0]), static_cast<double>(key[1]), static_cast<double>(key[2])};
      const double r = norm(p);
      mesh.vertices.push_back({p[0] / r, p[1] / r, p[2] / r});
    }
    return it->second;
  };

  for (int s = 0; s < 8; ++s) {
    const int sx = (s & 1) ? -1 : 1;
    const int sy = (s & 2) ? -1 : 1;
    const int sz = (s & 4) ? -1 : 1;
    auto at = [&](int a, int b) { return vertex({sx * (n - a - b), sy * a, sz * b}); };
    for (int b = 0; b < n; ++b) {
      for (int a = 0; a + b < n; ++a) {
        mesh.triangles.push_back({at(a, b), at(a + 1, b), at(a, b + 1)});
        if (a + b + 2 <= n) mesh.triangles.push_back({at(a + 1, b), at(a + 1, b + 1), at(a, b + 1)});
      }
    }
  }

  for (auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3 nrm = cross(sub(mesh.vertices[t[1]], a), sub(mesh.vertices[t[2]], a));
    const Vec3 c{a[0] + mesh.vertices[t[1]][0] + mesh.vertices[t[2]][0], a[1] + mesh.vertices[t[1]][1] + mesh.vertices[t[2]][1],
                 a[2] + mesh.vertices[t[1]][2] + mesh.vertices[t[2]][2]};
    if (dot(nrm, c) < 0.0) std::swap(t[1], t[2]);
  }
  mesh.update_geometry();
  return mesh;
}

void write_obj(const TriangleMesh& mesh, std::ostream& os) {
  os.precision(17);
  for (const auto& v : mesh.vertices) os << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void QuadratureConfig::validate() const {
  if (regular_order < 1 || singular_order < 1) throw std::invalid_argument("quadrature orders must be >= 1");
  if (singular_scheme != "sauter-schwab") throw std::invalid_argument("unknown singular scheme: " + singular_scheme);
}

void gauss_legendre01(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("gauss_legendre01: n must be >= 1");
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const auto j = static_cast<std::size_t>(n - 1 - i);
    x[j] = 0.5 * (1.0 + z);
    w[j] = 1.0 / ((1.0 - z * z) * dp * dp);  // half of the [-1,1] weight
  }
}

TriangleRule triangle_rule(int order) {
  std::vector<double> g, gw;
  gauss_legendre01(order, g, gw);
  TriangleRule r;
  for (std::size_t a = 0; a < g.size(); ++a) {
    for (std::size_t b = 0; b < g.size(); ++b) {
      r.x1.push_back(g[a]);
      r.x2.push_back(g[a] * g[b]);
      r.w.push_back(gw[a] * gw[b] * g[a]);
    }
  }
  return r;
}

PairRule regular_pair_rule(int order) {
  const TriangleRule t = triangle_rule(order);
  PairRule r;
  for (std::size_t a = 0; a < t.size(); ++a) {
    for (std::size_t b = 0; b < t.size(); ++b) {
      r.x1.push_back(t.x1[a]);
      r.x2.push_back(t.x2[a]);
      r.y1.push_back(t.x1[b]);
      r.y2.push_back(t.x2[b]);
      r.w.push_back(t.w[a] * t.w[b]);
    }
  }
  return r;
}

PairRule singular_rule(PairKind kind, int order) {
  if (kind == PairKind::disjoint) return regular_pair_rule(order);
  std::vector<double> g, gw;
  gauss_legendre01(order, g, gw);
  PairRule r;
  auto add = [&r](double x1, double x2, double y1, double y2, double w) {
    r.x1.push_back(x1);
    r.x2.push_back(x2);
    r.y1.push_back(y1);
    r.y2.push_back(y2);
    r.w.push_back(w);
  };
  auto add_sym = [&](double x1, double x2, double y1, double y2, double w) {
    add(x1, x2, y1, y2, w);
    add(y1, y2, x1, x2, w);
  };
  const std::size_t n = g.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t e = 0; e < n; ++e) {
          const double xi = g[a], h1 = g[b], h2 = g[c], h3 = g[e];
          const double base = gw[a] * gw[b] * gw[c] * gw[e];
          switch (kind) {
            case PairKind::identical: {
              const double w = base * xi * xi * xi * h1 * h1 * h2;
              add_sym(xi, xi * (1.0 - h1 + h1 * h2), xi * (1.0 - h1 * h2 * h3), xi * (1.0 - h1), w);
              add_sym(xi, xi * h1 * (1.0 - h2 + h2 * h3), xi * (1.0 - h1 * h2), xi * h1 * (1.0 - h2), w);
              add_sym(xi * (1.0 - h1 * h2 * h3), xi * h1 * (1.0 - h2 * h3), xi, xi * h1 * (1.0 - h2), w);
              break;
            }
            case PairKind::common_edge: {
              const double w1 = base * xi * xi * xi * h1 * h1;
              const double w = w1 * h2;
              add(xi, xi * h1 * h3, xi * (1.0 - h1 * h2), xi * h1 * (1.0 - h2), w1);
              add(xi, xi * h1, xi * (1.0 - h1 * h2 * h3), xi * h1 * h2 * (1.0 - h3), w);
              add(xi * (1.0 - h1 * h2), xi * h1 * (1.0 - h2), xi, xi * h1 * h2 * h3, w);
              add(xi * (1.0 - h1 * h2 * h3), xi * h1 * h2 * (1.0 - h3), xi, xi * h1, w);
              add(xi * (1.0 - h1 * h2 * h3), xi * h1 * (1.0 - h2 * h3), xi, xi * h1 * h2, w);
              break;
            }
            case PairKind::common_vertex: {
              const double w = base * xi * xi * xi * h2;
              add_sym(xi, xi * h1, xi * h2, xi * h2 * h3, w);
              break;
            }
            case PairKind::disjoint:
              break;
          }
        }
      }
    }
  }
  return r;
}

namespace {

int shared_count(const Triangle& a, const Triangle& b) {
  int s = 0;
  for (auto u : a)
    for (auto v : b) s += (u == v);
  return s;
}

// Reorders both triangles so the shared vertices come first, in the same order.
void align_shared(Triangle& a, Triangle& b) {
  Triangle na{}, nb{};
  std::size_t k = 0;
  for (auto u : a) {
    if (std::find(b.begin(), b.end(), u) != b.end()) {
      na[k] = u;
      nb[k] = u;
      ++k;
    }
  }
  const std::size_t shared = k;
  for (auto u : a)
    if (std::find(na.begin(), na.begin() + static_cast<std::ptrdiff_t>(shared), u) == na.begin() + static_cast<std::ptrdiff_t>(shared)) na[k++] = u;
  k = shared;
  for (auto v : b)
    if (std::find(nb.begin(), nb.begin() + static_cast<std::ptrdiff_t>(shared), v) == nb.begin() + static_cast<std::ptrdiff_t>(shared)) nb[k++] = v;
  a = na;
  b = nb;
}

Box triangle_box(const TriangleMesh& mesh, std::size_t t) {
  std::vector<double> lo(3), hi(3);
  for (int i = 0; i < 3; ++i) {
    lo[i] = std::min({mesh.vertices[mesh.triangles[t][0]][i], mesh.vertices[mesh.triangles[t][1]][i],
                      mesh.vertices[mesh.triangles[t][2]][i]});
    hi[i] = std::max({mesh.vertices[mesh.triangles[t][0]][i], mesh.vertices[mesh.triangles[t][1]][i],
                      mesh.vertices[mesh.triangles[t][2]][i]});
    if (hi[i] - lo[i] < 1e-13) {
      lo[i] -= 5e-14;
      hi[i] += 5e-14;
    }
  }
  return Box(std::move(lo), std::move(hi));
}

Vec3 map_point(const TriangleMesh& mesh, const Triangle& t, double x1, double x2) {
  const Vec3& a = mesh.vertices[t[0]];
  const Vec3& b = mesh.vertices[t[1]];
  const Vec3& c = mesh.vertices[t[2]];
  const double l0 = 1.0 - x1, l1 = x1 - x2;
  return {l0 * a[0] + l1 * b[0] + x2 * c[0], l0 * a[1] + l1 * b[1] + x2 * c[1], l0 * a[2] + l1 * b[2] + x2 * c[2]};
}

}  // namespace

GalerkinAssembler::GalerkinAssembler(const TriangleMesh& mesh, const OscillatoryKernel& kernel, QuadratureConfig quad)
    : mesh_(&mesh), kernel_(&kernel), quad_(std::move(quad)) {
  quad_.validate();
  tri_boxes_.reserve(mesh.size());
  tri_diam_.reserve(mesh.size());
  for (std::size_t t = 0; t < mesh.size(); ++t) {
    tri_boxes_.push_back(triangle_box(mesh, t));
    tri_diam_.push_back(tri_boxes_.back().diam());
  }
  const TriangleRule reg = triangle_rule(quad_.regular_order);
  const TriangleRule elev = triangle_rule(2 * quad_.regular_order);
  regular_n_ = reg.size();
  elevated_n_ = elev.size();
  regular_ = make_points(reg);
  elevated_ = make_points(elev);
  identical_ = singular_rule(PairKind::identical, quad_.singular_order);
  edge_ = singular_rule(PairKind::common_edge, quad_.singular_order);
  vertex_ = singular_rule(PairKind::common_vertex, quad_.singular_order);
}

GalerkinAssembler::PointSet GalerkinAssembler::make_points(const TriangleRule& rule) const {
  PointSet ps;
  const std::size_t q = rule.size();
  ps.xyz.resize(mesh_->size() * q * 3);
  ps.w.resize(mesh_->size() * q);
  for (std::size_t t = 0; t < mesh_->size(); ++t) {
    for (std::size_t k = 0; k < q; ++k) {
      const Vec3 p = mesh_->point(t, rule.x1[k], rule.x2[k]);
      std::copy(p.begin(), p.end(), ps.xyz.begin() + static_cast<std::ptrdiff_t>((t * q + k) * 3));
      ps.w[t * q + k] = 2.0 * mesh_->areas[t] * rule.w[k];
    }
  }
  return ps;
}

Complex GalerkinAssembler::eval(const double* x, const double* y) const {
  const PointView xv(x, 3), yv(y, 3);
  if (kernel_->fused) return kernel_->fused(xv, yv);
  return std::polar(1.0, kernel_->kappa * kernel_->phase(xv, yv)) * kernel_->amplitude(xv, yv);
}

bool GalerkinAssembler::is_near(std::size_t i, std::size_t j) const {
  if (shared_count(mesh_->triangles[i], mesh_->triangles[j]) > 0) return false;
  return dist(tri_boxes_[i], tri_boxes_[j]) < std::max(tri_diam_[i], tri_diam_[j]);
}

Complex GalerkinAssembler::singular_entry(std::size_t i, std::size_t j, PairKind kind, const Triangle& ti,
                                          const Triangle& tj) const {
  const PairRule& r = kind == PairKind::identical ? identical_ : kind == PairKind::common_edge ? edge_ : vertex_;
  // the lower index always takes the first rule slot, so K_ij and K_ji see
  // the same points for symmetric kernels
  const bool flip = i > j;
  const Triangle& ta = flip ? tj : ti;
  const Triangle& tb = flip ? ti : tj;
  Complex s = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const Vec3 a = map_point(*mesh_, ta, r.x1[k], r.x2[k]);
    const Vec3 b = map_point(*mesh_, tb, r.y1[k], r.y2[k]);
    s += r.w[k] * (flip ? eval(b.data(), a.data()) : eval(a.data(), b.data()));
  }
  return 4.0 * mesh_->areas[i] * mesh_->areas[j] * s;
}

Complex GalerkinAssembler::entry(std::size_t i, std::size_t j) const {
  Triangle ti = mesh_->triangles[i];
  Triangle tj = mesh_->triangles[j];
  if (i == j) return singular_entry(i, j, PairKind::identical, ti, tj);
  const int shared = shared_count(ti, tj);
  if (shared > 0) {
    if (i < j) {
      align_shared(ti, tj);
    } else {
      align_shared(tj, ti);
    }
    return singular_entry(i, j, shared == 3 ? PairKind::identical : shared == 2 ? PairKind::common_edge : PairKind::common_vertex,
                          ti, tj);
  }
  const bool near = dist(tri_boxes_[i], tri_boxes_[j]) < std::max(tri_diam_[i], tri_diam_[j]);
  const PointSet& ps = near ? elevated_ : regular_;
  const std::size_t q = near ? elevated_n_ : regular_n_;
  Complex s = 0.0;
  for (std::size_t a = 0; a < q; ++a) {
    const double* x = &ps.xyz[(i * q + a) * 3];
    Complex inner = 0.0;
    for (std::size_t b = 0; b < q; ++b) inner += ps.w[j * q + b] * eval(x, &ps.xyz[(j * q + b) * 3]);
    s += ps.w[i * q + a] * inner;
  }
  return s;
}

CMatrix GalerkinAssembler::block(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const {
  CMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = entry(rows[r], cols[c]);
    }
  }
  return out;
}

CMatrix GalerkinAssembler::leaf_moments(std::span<const std::size_t> indices, const TensorGrid& grid,
                                        std::span<const double> anchor, Side side) const {
  const std::vector<double> a(anchor.begin(), anchor.end());
  return std::move(leaf_moments(indices, grid, std::span<const std::vector<double>>(&a, 1), side).front());
}

std::vector<CMatrix> GalerkinAssembler::leaf_moments(std::span<const std::size_t> indices, const TensorGrid& grid,
                                                     std::span<const std::vector<double>> anchors, Side side) const {
  const std::size_t q = regular_n_;
  const std::size_t M = grid.size();
  const auto rows = static_cast<Eigen::Index>(indices.size());
  // basis values times weights, one row per quadrature point
  Eigen::MatrixXd B(static_cast<Eigen::Index>(indices.size() * q), static_cast<Eigen::Index>(M));
  std::vector<double> basis(M);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t t = indices[r];
    for (std::size_t a = 0; a < q; ++a) {
      grid.basis(PointView(&regular_.xyz[(t * q + a) * 3], 3), basis);
      const double w = regular_.w[t * q + a];
      for (std::size_t p = 0; p < M; ++p) B(static_cast<Eigen::Index>(r * q + a), static_cast<Eigen::Index>(p)) = w * basis[p];
    }
  }
  std::vector<CMatrix> out;
  out.reserve(anchors.size());
  for (const auto& anchor : anchors) {
    CMatrix V = CMatrix::Zero(rows, static_cast<Eigen::Index>(M));
    for (std::size_t r = 0; r < indices.size(); ++r) {
      const std::size_t t = indices[r];
      for (std::size_t a = 0; a < q; ++a) {
        const PointView x(&regular_.xyz[(t * q + a) * 3], 3);
        const double phi = side == Side::x ? kernel_->phase(x, anchor) : kernel_->phase(anchor, x);
        V.row(static_cast<Eigen::Index>(r)) += std::polar(1.0, kernel_->kappa * phi) *
                                               B.row(static_cast<Eigen::Index>(r * q + a)).cast<Complex>();
      }
    }
    out.push_back(std::move(V));
  }
  return out;
}

Complex quad_pair(const TriangleMesh& mesh, std::size_t i, std::size_t j, const OscillatoryKernel& kernel,
                  const QuadratureConfig& quad) {
  return GalerkinAssembler(mesh, kernel, quad).entry(i, j);
}

CMatrix assemble_dense(const TriangleMesh& mesh, const OscillatoryKernel& kernel, const QuadratureConfig& quad,
                       std::size_t budget_bytes) {
  const std::size_t n = mesh.size();
  const double bytes = static_cast<double>(n) * static_cast<double>(n) * sizeof(Complex);
  if (bytes > static_cast<double>(budget_bytes)) {
    throw BudgetExceeded("dense matrix needs " + std::to_string(static_cast<long long>(bytes / (1024.0 * 1024.0))) +
                         " MiB, budget is " + std::to_string(budget_bytes / (1024 * 1024)) + " MiB");
  }
  GalerkinAssembler as(mesh, kernel, quad);
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  return as.block(all, all);
}

void export_dense(const CMatrix& k, const std::filesystem::path& path, double kappa, int level) {
  if constexpr (std::endian::native != std::endian::little) {
    throw std::runtime_error("export_dense: big-endian hosts are not supported");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("export_dense: cannot open " + path.string());
  const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = k;
  os.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(Complex)));
  nlohmann::json meta{{"rows", k.rows()}, {"cols", k.cols()},         {"dtype", "complex128"},
                      {"order", "row-major"}, {"endianness", "little"}, {"kappa", kappa},
                      {"level", level}};
  std::ofstream js(path.string() + ".json");
  js << meta.dump(2) << '\n';
}

}  // namespace bfly
