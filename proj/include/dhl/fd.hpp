#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "dhl/grid.hpp"
#include "dhl/smallmat.hpp"

namespace dhl::grid {

/// Linear functional over the interior unknowns plus a constant; small fixed
/// capacity (one stencil entry touches at most a handful of nodes).
struct StencilExpr {
  struct Tap {
    int col = -1;  // interior index
    double w = 0.0;
  };
  double c = 0.0;
  int count = 0;
  std::array<Tap, 8> taps{};

  void add(int col, double w);
  void add_const(double v) { c += v; }
  double eval(std::span<const double> u) const;
};

// --- field mode: plain nodal values on interior and boundary nodes ---------

/// Central second differences; cross terms by the symmetric 4-point stencil
/// where the diagonal neighbors carry values, falling back to a one-cell
/// corner stencil (still exact on quadratics) where they do not.
SymMatrix hessian_at(const ScalarField& f, int interior_idx);
Vec gradient_at(const ScalarField& f, int interior_idx);

std::vector<SymMatrix> hessian_central(const ScalarField& f);
std::vector<Vec> gradient_central(const ScalarField& f);

// --- Dirichlet mode: interior unknowns + collocation data ------------------
//
// Values on shortened arms come from linear interpolation through the
// boundary crossing (ghost values), which pins the Dirichlet data on the
// true boundary; cross terms avoid misplaced nodal data by preferring
// interior-only corner stencils near the cut.

StencilExpr dirichlet_d2(const Grid& g, int interior_idx, int a, int b);
StencilExpr dirichlet_d1(const Grid& g, int interior_idx, int a);

SymMatrix dirichlet_hessian_at(const Grid& g, std::span<const double> u, int interior_idx);
Vec dirichlet_gradient_at(const Grid& g, std::span<const double> u, int interior_idx);

// --- distance and serialization --------------------------------------------

/// Euclidean distance to the nearest boundary collocation node, propagated
/// by raster sweeps over the mask; accurate to within 2h.
ScalarField distance_field(const GridPtr& g);

/// CSV rows "x,y[,z],value" over interior and boundary nodes, 17 significant
/// digits, lexicographic node order.
void write_field_csv(const ScalarField& f, std::ostream& os);

/// 8-byte magic "DHLFLD01" followed by the full lattice in column-major
/// (axis-0 fastest) order as little-endian 64-bit floats.
void write_field_binary(const ScalarField& f, std::ostream& os);
ScalarField read_field_binary(GridPtr g, std::istream& is);

void write_field_csv_file(const ScalarField& f, const std::string& path);
void write_field_binary_file(const ScalarField& f, const std::string& path);
ScalarField read_field_binary_file(GridPtr g, const std::string& path);

}  // namespace dhl::grid
