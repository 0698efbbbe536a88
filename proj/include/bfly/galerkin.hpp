#pragma once

// Piecewise-constant Galerkin discretisation on flat triangle meshes of the
// unit sphere: mesh generation, regular and singular quadrature, dense and
// blockwise assembly, and leaf moments for the butterfly factors.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bfly/clustering.hpp"
#include "bfly/kernel.hpp"
#include "bfly/matrix.hpp"

namespace bfly {

using Vec3 = std::array<double, 3>;
using Triangle = std::array<std::size_t, 3>;

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<double> areas;
  std::vector<Vec3> centroids;

  std::size_t size() const { return triangles.size(); }
  double total_area() const;
  /// Proxy = centroid, box = bounding box of the three vertices.
  std::vector<Support> supports() const;
  /// (1-x1) v0 + (x1-x2) v1 + x2 v2 for (x1,x2) in the reference triangle 0 <= x2 <= x1 <= 1.
  Vec3 point(std::size_t t, double x1, double x2) const;
  /// Fills areas and centroids from vertices/triangles.
  void update_geometry();
};

/// Octahedron |x|_1 = 1 with regularly refined faces (2^level subdivisions per
/// edge), vertices projected radially onto the unit sphere. 8 * 4^level
/// triangles, outward orientation.
TriangleMesh sphere_mesh(int level);

void write_obj(const TriangleMesh& mesh, std::ostream& os);

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureConfig {
  /// Gauss points per direction of the collapsed (Duffy) triangle rule.
  int regular_order = 3;
  /// Gauss points per direction in each of the four relative coordinates.
  int singular_order = 4;
  std::string singular_scheme = "sauter-schwab";

  void validate() const;
};

/// Points (x1, x2) on the reference triangle with weights summing to 1/2.
struct TriangleRule {
  std::vector<double> x1, x2, w;
  std::size_t size() const { return w.size(); }
};

/// Gauss-Legendre rule on [0,1].
void gauss_legendre01(int n, std::vector<double>& x, std::vector<double>& w);

TriangleRule triangle_rule(int order);

/// Points on the reference pair T x T with weights summing to 1/4.
struct PairRule {
  std::vector<double> x1, x2, y1, y2, w;
  std::size_t size() const { return w.size(); }
};

enum class PairKind { identical, common_edge, common_vertex, disjoint };

/// Relative-coordinate rules. For common_edge both triangles share v0, v1 (same
/// order); for common_vertex they share v0.
PairRule singular_rule(PairKind kind, int order);
PairRule regular_pair_rule(int order);

/// Integral of k(x,y) over T_i x T_j (characteristic-function basis).
Complex quad_pair(const TriangleMesh& mesh, std::size_t i, std::size_t j, const OscillatoryKernel& kernel,
                  const QuadratureConfig& quad);

/// Caches quadrature rules and per-triangle physical points for repeated
/// entry evaluation. Read-only after construction.
class GalerkinAssembler {
 public:
  /// Mesh and kernel are referenced, not copied.
  GalerkinAssembler(const TriangleMesh& mesh, const OscillatoryKernel& kernel, QuadratureConfig quad);
  GalerkinAssembler(const TriangleMesh&, OscillatoryKernel&&, QuadratureConfig) = delete;
  GalerkinAssembler(TriangleMesh&&, const OscillatoryKernel&, QuadratureConfig) = delete;

  Complex entry(std::size_t i, std::size_t j) const;
  CMatrix block(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const;

  /// Moments int exp(i kappa Phi(x, anchor)) L_p(x) phi_i(x) dx (Side::x) or
  /// int exp(i kappa Phi(anchor, y)) L_q(y) psi_j(y) dy (Side::y); |indices| x M.
  CMatrix leaf_moments(std::span<const std::size_t> indices, const TensorGrid& grid, std::span<const double> anchor,
                       Side side) const;
  /// Same moments for several anchors, sharing the basis evaluations.
  std::vector<CMatrix> leaf_moments(std::span<const std::size_t> indices, const TensorGrid& grid,
                                    std::span<const std::vector<double>> anchors, Side side) const;

  /// True if the pair is integrated with the elevated regular order.
  bool is_near(std::size_t i, std::size_t j) const;

  const TriangleMesh& mesh() const { return *mesh_; }
  const OscillatoryKernel& kernel() const { return *kernel_; }
  const QuadratureConfig& quadrature() const { return quad_; }

 private:
  struct PointSet {
    std::vector<double> xyz;  // 3 per point
    std::vector<double> w;    // includes the Jacobian 2|T|
  };
  PointSet make_points(const TriangleRule& rule) const;
  Complex singular_entry(std::size_t i, std::size_t j, PairKind kind, const Triangle& ti, const Triangle& tj) const;
  Complex eval(const double* x, const double* y) const;

  const TriangleMesh* mesh_;
  const OscillatoryKernel* kernel_;
  QuadratureConfig quad_;
  std::vector<Box> tri_boxes_;
  std::vector<double> tri_diam_;
  PointSet regular_;
  PointSet elevated_;
  std::size_t regular_n_ = 0;
  std::size_t elevated_n_ = 0;
  PairRule identical_, edge_, vertex_;
};

/// Dense Galerkin matrix; refuses with BudgetExceeded when N*N*16 bytes
/// exceed `budget_bytes`.
CMatrix assemble_dense(const TriangleMesh& mesh, const OscillatoryKernel& kernel, const QuadratureConfig& quad,
                       std::size_t budget_bytes);

/// Writes raw little-endian complex128 (row-major) plus `<path>.json` with shape, kappa, level.
void export_dense(const CMatrix& k, const std::filesystem::path& path, double kappa, int level);

}  // namespace bfly
