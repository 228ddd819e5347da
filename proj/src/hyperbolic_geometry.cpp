#include "dhl/hyperbolic_geometry.hpp"

#include <algorithm>
#include <cmath>

namespace dhl::hyp {

HypCurvature curvature_matrix(const graph::Jet2& jet, int k, double tol) {
  graph::check_jet(jet);
  require(jet.u > 0.0, ErrorKind::domain, "hyperbolic curvature: height must be positive");
  const graph::Frame fr = graph::graph_frame(jet);
  const int n = jet.n();

  HypCurvature out;
  const SymMatrix proj = sandwich(fr.gamma_up, jet.d2u);
  out.a = SymMatrix(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      out.a.set(i, j, fr.v * ((i == j ? 1.0 : 0.0) + jet.u * proj(i, j)));
  out.kappa = sym::eigen_sym(out.a).spectrum;

  const double u2 = jet.u * jet.u;
  out.h = SymMatrix(n);
  out.g = SymMatrix(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double uij = jet.du[static_cast<std::size_t>(i)] * jet.du[static_cast<std::size_t>(j)];
      const double d = (i == j) ? 1.0 : 0.0;
      out.h.set(i, j, (d + uij + jet.u * jet.d2u(i, j)) / (u2 * fr.w));
      out.g.set(i, j, (d + uij) / u2);
    }
  out.cone = sym::cone_status(out.kappa.values, k, tol);
  return out;
}

grid::ScalarField pogorelov_weight(const grid::ScalarField& ubar,
                                   const grid::ScalarField& u, double c) {
  require(ubar.grid != nullptr && ubar.grid == u.grid, ErrorKind::argument,
          "pogorelov_weight: fields must share a grid");
  grid::ScalarField out;
  out.grid = u.grid;
  out.values.assign(u.values.size(), 0.0);
  for (int id = 0; id < u.grid->node_count(); ++id) {
    if (!u.grid->in_mask(id)) continue;
    const double v = ubar[id] * ubar[id] - u[id] * u[id] - c;
    out.values[static_cast<std::size_t>(id)] = std::max(v, 0.0);
  }
  return out;
}

}  // namespace dhl::hyp
