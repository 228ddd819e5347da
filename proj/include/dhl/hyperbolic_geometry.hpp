#pragma once

#include "dhl/graph_geometry.hpp"
#include "dhl/grid.hpp"

namespace dhl::hyp {

/// Half-space-model curvature data of the graph at height u > 0:
/// a = (1/w)(I + u gamma_up d2u gamma_up) whose eigenvalues are the
/// hyperbolic principal curvatures, the second fundamental form
/// h_tilde = (1/(u^2 w))(delta_ij + u_i u_j + u u_ij), and the metric
/// g_tilde = (1/u^2)(delta_ij + u_i u_j).
struct HypCurvature {
  SymMatrix a;
  sym::Spectrum kappa;
  SymMatrix h;
  SymMatrix g;
  sym::ConeStatus cone;
};

HypCurvature curvature_matrix(const graph::Jet2& jet, int k, double tol = sym::kConeTol);

/// max(ubar^2 - u^2 - c, 0) nodewise on a shared grid.
grid::ScalarField pogorelov_weight(const grid::ScalarField& ubar,
                                   const grid::ScalarField& u, double c);

}  // namespace dhl::hyp
