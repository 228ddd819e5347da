#pragma once

#include <vector>

#include "dhl/smallmat.hpp"
#include "dhl/symfn.hpp"

namespace dhl::graph {

/// Pointwise second-order data of a graph function: value, gradient, Hessian.
struct Jet2 {
  double u = 0.0;
  Vec du;
  SymMatrix d2u;

  int n() const { return d2u.n(); }
};

void check_jet(const Jet2& jet);

/// Metric data of the graph at one point: w = sqrt(1 + |du|^2), the
/// projection matrices gamma^{ij} = delta_ij - u_i u_j / (w (1 + w)) and
/// gamma_ij = delta_ij + u_i u_j / (1 + w) (the square root of the metric),
/// the induced metric g = I + du du^T, and the upward unit normal.
struct Frame {
  double w = 1.0;
  double v = 1.0;  // 1/w, the vertical normal component
  SymMatrix gamma_up;
  SymMatrix gamma_down;
  SymMatrix metric;
  Vec normal;  // length n + 1
};

Frame graph_frame(const Jet2& jet);

/// Curvature matrix a = (1/w) gamma_up d2u gamma_up, its spectrum (the
/// principal curvatures, descending), the scaled Hessian h = d2u / w, and the
/// cone classification of the spectrum at order k.
struct CurvatureData {
  SymMatrix a;
  sym::Spectrum kappa;
  SymMatrix h;
  sym::ConeStatus cone;
};

CurvatureData curvature_matrix(const Jet2& jet, int k, double tol = sym::kConeTol);

/// tvt = gamma_up d2v gamma_up together with the projection margins
/// sigma_j(lambda(tvt)) - sigma_j(lambda(d2v)) / w^2 for j = 1..k, which are
/// nonnegative whenever lambda(d2v) lies in the closed order-(k+1) cone.
struct ProjectionReport {
  SymMatrix tvt;
  std::vector<double> margins;
};

ProjectionReport projected_hessian(const Jet2& jet, const SymMatrix& d2v, int k,
                                   double tol = sym::kConeTol);

/// Cone classification of the graph's principal curvatures at order k.
sym::ConeStatus admissible(const Jet2& jet, int k, double tol = sym::kConeTol);

}  // namespace dhl::graph
