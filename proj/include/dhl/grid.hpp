#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dhl/error.hpp"
#include "dhl/smallmat.hpp"

namespace dhl::grid {

using ScalarFn = std::function<double(std::span<const double>)>;

struct Box {
  Vec lo;
  Vec hi;
};

/// Domain descriptor: rectangle, disk, ellipsoid section
/// (sum_i coeff_i x_i^2 < radius^2), or the positive set of a level function.
class Domain {
 public:
  enum class Kind { rectangle, disk, ellipsoid_section, sublevel };

  static Domain rectangle(Vec lo, Vec hi);
  static Domain disk(Vec center, double radius);
  static Domain ellipsoid_section(Vec center, Vec coeffs, double radius);
  static Domain sublevel(ScalarFn level, Box bounds);

  int dim() const { return static_cast<int>(bounds_.lo.size()); }
  Kind kind() const { return kind_; }
  const Box& bounds() const { return bounds_; }

  /// Strict interior test.
  bool inside(std::span<const double> x) const;

 private:
  Domain() = default;
  Kind kind_ = Kind::rectangle;
  Box bounds_;
  Vec center_, coeffs_;
  double radius_ = 0.0;
  ScalarFn level_;
};

enum class NodeClass : std::uint8_t { outside = 0, interior = 1, boundary = 2 };

struct BoundaryNode {
  int node = -1;
  double value = 0.0;
};

/// Axis arm from an interior node whose neighbor is a boundary collocation
/// node: `t` is the crossing fraction of the true boundary along the arm
/// (1 when the collocation node sits on it) and `value` the Dirichlet datum
/// at the crossing.
struct Arm {
  int neighbor = -1;
  double t = 1.0;
  double value = 0.0;
  bool to_boundary = false;
};

/// Uniform masked lattice with Dirichlet collocation data. Interior nodes
/// are strictly inside the domain (never on the lattice edge); boundary
/// nodes are the non-interior nodes within one cell of an interior node and
/// carry the boundary expression evaluated at the node.
class Grid {
 public:
  int dim() const { return dim_; }
  double spacing() const { return h_; }
  const std::vector<int>& dims() const { return dims_; }
  const Vec& origin() const { return origin_; }
  int node_count() const { return node_count_; }

  NodeClass node_class(int node) const { return cls_[static_cast<std::size_t>(node)]; }
  bool in_mask(int node) const { return cls_[static_cast<std::size_t>(node)] != NodeClass::outside; }

  int interior_count() const { return static_cast<int>(interior_nodes_.size()); }
  const std::vector<int>& interior_nodes() const { return interior_nodes_; }
  /// -1 when the node is not interior.
  int interior_index(int node) const { return interior_index_[static_cast<std::size_t>(node)]; }

  const std::vector<BoundaryNode>& boundary_nodes() const { return boundary_nodes_; }
  double boundary_value(int node) const { return bvalue_[static_cast<std::size_t>(node)]; }
  /// True when the collocation node sits on the boundary itself.
  bool boundary_exact(int node) const { return bexact_[static_cast<std::size_t>(node)] != 0; }

  Vec position(int node) const;
  void node_coords(int node, std::span<int> out) const;
  int node_id(std::span<const int> coords) const;
  int neighbor(int node, int axis, int dir) const;  // dir is +1 / -1

  /// Arm data for interior node (by interior index), axis in [0,dim),
  /// side 0 = -1 direction, 1 = +1 direction.
  const Arm& arm(int interior_idx, int axis, int side) const;
  /// True when every diagonal neighbor needed by the symmetric cross
  /// stencils carries a value.
  bool stencil_clean(int interior_idx) const { return clean_[static_cast<std::size_t>(interior_idx)] != 0; }

 private:
  friend class GridBuilder;
  int dim_ = 0;
  double h_ = 0.0;
  std::vector<int> dims_;
  Vec origin_;
  int node_count_ = 0;
  std::vector<NodeClass> cls_;
  std::vector<int> interior_index_;
  std::vector<int> interior_nodes_;
  std::vector<BoundaryNode> boundary_nodes_;
  std::vector<double> bvalue_;
  std::vector<std::uint8_t> bexact_;
  std::vector<Arm> arms_;  // 2 * dim per interior node
  std::vector<std::uint8_t> clean_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Masks the lattice of `resolution` nodes along the first axis of the
/// domain's bounding box (resolution >= 9) and collocates phi on the
/// boundary nodes and arm crossings.
GridPtr build_grid(const Domain& dom, int resolution, const ScalarFn& phi);

/// Nodal values over a grid; finite on interior and boundary nodes.
struct ScalarField {
  GridPtr grid;
  Vec values;  // one per lattice node

  double operator[](int node) const { return values[static_cast<std::size_t>(node)]; }
};

ScalarField make_field(GridPtr grid, const ScalarFn& fn);
ScalarField constant_field(GridPtr grid, double value);

/// Level-set subdomain of `usub` above `eps` on the same lattice:
/// the mask is {usub > eps}; its nodes adjacent to non-mask nodes form the
/// Dirichlet band carrying the value eps. Fails when the remaining interior
/// is empty.
struct LevelSet {
  std::vector<std::uint8_t> mask;   // usub > eps, one per lattice node
  std::vector<int> band;            // mask nodes adjacent to non-mask nodes
  double eps = 0.0;
};

LevelSet level_set_domain(const ScalarField& usub, double eps);

/// Grid whose interior is the level-set mask minus the band, with the band
/// as Dirichlet collocation at value eps.
GridPtr build_level_set_grid(const ScalarField& usub, double eps);

}  // namespace dhl::grid
