#include "dhl/graph_geometry.hpp"

#include <cmath>
#include <string>

namespace dhl::graph {

void check_jet(const Jet2& jet) {
  const int n = jet.d2u.n();
  require(n >= 1 && n <= sym::kMaxDim, ErrorKind::argument, "jet: bad dimension");
  require(static_cast<int>(jet.du.size()) == n, ErrorKind::argument,
          "jet: gradient length does not match Hessian dimension");
  require(std::isfinite(jet.u) && all_finite(jet.du) && all_finite(jet.d2u.raw()),
          ErrorKind::argument, "jet: non-finite entries");
}

Frame graph_frame(const Jet2& jet) {
  check_jet(jet);
  const int n = jet.n();
  Frame f;
  const double g2 = dot(jet.du, jet.du);
  f.w = std::sqrt(1.0 + g2);
  f.v = 1.0 / f.w;
  f.gamma_up = SymMatrix(n);
  f.gamma_down = SymMatrix(n);
  f.metric = SymMatrix(n);
  const double cu = 1.0 / (f.w * (1.0 + f.w));
  const double cd = 1.0 / (1.0 + f.w);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double uij = jet.du[static_cast<std::size_t>(i)] * jet.du[static_cast<std::size_t>(j)];
      const double d = (i == j) ? 1.0 : 0.0;
      f.gamma_up.set(i, j, d - cu * uij);
      f.gamma_down.set(i, j, d + cd * uij);
      f.metric.set(i, j, d + uij);
    }
  f.normal.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 0; i < n; ++i) f.normal[static_cast<std::size_t>(i)] = -jet.du[static_cast<std::size_t>(i)] * f.v;
  f.normal[static_cast<std::size_t>(n)] = f.v;
  return f;
}

CurvatureData curvature_matrix(const Jet2& jet, int k, double tol) {
  const Frame fr = graph_frame(jet);
  CurvatureData out;
  out.a = scaled(sandwich(fr.gamma_up, jet.d2u), fr.v);
  out.kappa = sym::eigen_sym(out.a).spectrum;
  out.h = scaled(jet.d2u, fr.v);
  out.cone = sym::cone_status(out.kappa.values, k, tol);
  return out;
}

ProjectionReport projected_hessian(const Jet2& jet, const SymMatrix& d2v, int k,
                                   double tol) {
  const Frame fr = graph_frame(jet);
  const int n = jet.n();
  require(d2v.n() == n, ErrorKind::argument, "projected_hessian: dimension mismatch");
  require(k >= 1 && k <= n, ErrorKind::argument, "projected_hessian: order out of range");

  const sym::Spectrum lam_v = sym::eigen_sym(d2v).spectrum;
  const int cone_order = std::min(k + 1, n);
  const std::vector<double> sig = sym::sigma_all(lam_v.values, cone_order);
  for (int m = 1; m <= cone_order; ++m)
    if (sig[static_cast<std::size_t>(m)] < -tol)
      fail(ErrorKind::precondition,
           "projected_hessian: input Hessian leaves the closed cone, sigma_" +
               std::to_string(m) + " = " + std::to_string(sig[static_cast<std::size_t>(m)]));

  ProjectionReport rep;
  rep.tvt = sandwich(fr.gamma_up, d2v);
  const sym::Spectrum lam_t = sym::eigen_sym(rep.tvt).spectrum;
  const double w2 = fr.w * fr.w;
  rep.margins.resize(static_cast<std::size_t>(k));
  for (int j = 1; j <= k; ++j)
    rep.margins[static_cast<std::size_t>(j - 1)] =
        sym::sigma(lam_t.values, j) - sym::sigma(lam_v.values, j) / w2;
  return rep;
}

sym::ConeStatus admissible(const Jet2& jet, int k, double tol) {
  return curvature_matrix(jet, k, tol).cone;
}

}  // namespace dhl::graph
