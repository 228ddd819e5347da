#include "dhl/solver.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

#include "dhl/parallel.hpp"
#include "dhl/symfn.hpp"

namespace dhl::solver {

double cutoff_eta(double t, double theta0) {
  require(t >= 0.0, ErrorKind::argument, "cutoff_eta: t must be >= 0");
  require(theta0 > 0.0, ErrorKind::argument, "cutoff_eta: theta0 must be positive");
  const double a = theta0 / 4.0;
  if (t <= a) return 1.0;
  if (t >= 2.0 * a) return 0.0;
  const double s = (t - a) / a;
  const double s3 = s * s * s;
  return 1.0 - (10.0 * s3 - 15.0 * s3 * s + 6.0 * s3 * s * s);
}

double f_epsilon(double f_tilde, double eps, int k, double theta0) {
  require(k >= 2, ErrorKind::argument, "f_epsilon: requires k >= 2");
  require(f_tilde >= 0.0, ErrorKind::argument, "f_epsilon: f_tilde must be >= 0");
  require(eps >= 0.0, ErrorKind::argument, "f_epsilon: eps must be >= 0");
  const double base = f_tilde + eps * cutoff_eta(f_tilde, theta0);
  double r = 1.0;
  for (int i = 0; i < k - 1; ++i) r *= base;
  return r;
}

double j_regularized_rhs(double f, long j) {
  require(f >= 0.0, ErrorKind::argument, "j_regularized_rhs: f must be >= 0");
  require(j >= 1, ErrorKind::argument, "j_regularized_rhs: j must be >= 1");
  return f + 1.0 / static_cast<double>(j);
}

namespace {

double rhs_value(const Problem& p, const Rhs& r, std::span<const double> x, double uval,
                 int node) {
  switch (r.mode) {
    case Rhs::Mode::raw:
      return p.f(x, uval);
    case Rhs::Mode::f_eps: {
      const double fv = std::max(p.f(x, uval), 0.0);
      const double ft = p.k == 2 ? fv : std::pow(fv, 1.0 / (p.k - 1));
      return f_epsilon(ft, r.eps, p.k, r.theta0);
    }
    case Rhs::Mode::j_reg:
      return j_regularized_rhs(std::max(p.f(x, uval), 0.0), r.j);
    case Rhs::Mode::field:
      return (*r.field)[node];
  }
  return 0.0;
}

double rhs_du(const Problem& p, const Rhs& r, std::span<const double> x, double uval,
              int node) {
  if (r.mode == Rhs::Mode::field) return 0.0;
  const double d = 1e-6 * (1.0 + std::abs(uval));
  return (rhs_value(p, r, x, uval + d, node) - rhs_value(p, r, x, uval - d, node)) /
         (2.0 * d);
}

/// Kind matrix and spectrum at one node.
struct KindEval {
  SymMatrix a;
  sym::Spectrum lam;
  double sigma_k = 0.0;
  double margin = -1e300;
  bool ok = false;
  graph::Frame frame;  // curvature / hyperbolic only
  SymMatrix proj;      // gamma d2u gamma, hyperbolic only
};

KindEval eval_kind(const Problem& p, double uval, const Vec& du, const SymMatrix& d2u) {
  KindEval ke;
  switch (p.kind) {
    case Kind::hessian:
      ke.a = d2u;
      break;
    case Kind::curvature: {
      graph::Jet2 jet{uval, du, d2u};
      ke.frame = graph::graph_frame(jet);
      ke.a = scaled(sandwich(ke.frame.gamma_up, d2u), ke.frame.v);
      break;
    }
    case Kind::hyperbolic: {
      if (uval <= 0.0) return ke;  // below the ideal boundary: inadmissible
      graph::Jet2 jet{uval, du, d2u};
      ke.frame = graph::graph_frame(jet);
      ke.proj = sandwich(ke.frame.gamma_up, d2u);
      ke.a = SymMatrix(d2u.n());
      for (int i = 0; i < d2u.n(); ++i)
        for (int j = i; j < d2u.n(); ++j)
          ke.a.set(i, j, ke.frame.v * ((i == j ? 1.0 : 0.0) + uval * ke.proj(i, j)));
      break;
    }
  }
  ke.lam = sym::eigen_sym(ke.a).spectrum;
  const std::vector<double> sig = sym::sigma_all(ke.lam.values, p.k);
  ke.sigma_k = sig[static_cast<std::size_t>(p.k)];
  ke.margin = sig[1];
  for (int m = 2; m <= p.k; ++m) ke.margin = std::min(ke.margin, sig[static_cast<std::size_t>(m)]);
  ke.ok = true;
  return ke;
}

struct EvalState {
  Vec res;
  double rinf = 0.0;
  double margin = -1e300;
  double sup_rhs = 0.0;
};

/// Residual and cone margins of the discrete system at the interior values U.
EvalState eval_state(const Problem& p, const Rhs& rhs, const grid::Grid& g,
                     const std::vector<Vec>& pos, std::span<const double> U) {
  const int m = g.interior_count();
  EvalState st;
  st.res.assign(static_cast<std::size_t>(m), 0.0);
  Vec margins(static_cast<std::size_t>(m), 0.0);
  Vec rhs_abs(static_cast<std::size_t>(m), 0.0);
  const bool need_grad = p.kind != Kind::hessian;

  parallel_for(m, [&](int i) {
    const int d = g.dim();
    SymMatrix d2u(d);
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) d2u.set(a, b, grid::dirichlet_d2(g, i, a, b).eval(U));
    Vec du(static_cast<std::size_t>(d), 0.0);
    if (need_grad)
      for (int a = 0; a < d; ++a) du[static_cast<std::size_t>(a)] = grid::dirichlet_d1(g, i, a).eval(U);
    const double uval = U[static_cast<std::size_t>(i)];
    const KindEval ke = eval_kind(p, uval, du, d2u);
    if (!ke.ok) {
      margins[static_cast<std::size_t>(i)] = -1e300;
      st.res[static_cast<std::size_t>(i)] = 1e300;
      return;
    }
    const int node = g.interior_nodes()[static_cast<std::size_t>(i)];
    const double r = rhs_value(p, rhs, pos[static_cast<std::size_t>(i)], uval, node);
    st.res[static_cast<std::size_t>(i)] = ke.sigma_k - r;
    margins[static_cast<std::size_t>(i)] = ke.margin;
    rhs_abs[static_cast<std::size_t>(i)] = std::abs(r);
  });

  st.margin = margins[0];
  for (double v : margins) st.margin = std::min(st.margin, v);
  for (double v : rhs_abs) st.sup_rhs = std::max(st.sup_rhs, v);
  for (double v : st.res) {
    if (!std::isfinite(v)) {
      st.rinf = std::numeric_limits<double>::infinity();
      return st;
    }
    st.rinf = std::max(st.rinf, std::abs(v));
  }
  return st;
}

std::vector<Vec> interior_positions(const grid::Grid& g) {
  std::vector<Vec> pos(static_cast<std::size_t>(g.interior_count()));
  for (int i = 0; i < g.interior_count(); ++i)
    pos[static_cast<std::size_t>(i)] = g.position(g.interior_nodes()[static_cast<std::size_t>(i)]);
  return pos;
}

grid::ScalarField complete_field(const grid::GridPtr& gp, std::span<const double> U) {
  grid::ScalarField f;
  f.grid = gp;
  f.values.assign(static_cast<std::size_t>(gp->node_count()), 0.0);
  for (int i = 0; i < gp->interior_count(); ++i)
    f.values[static_cast<std::size_t>(gp->interior_nodes()[static_cast<std::size_t>(i)])] =
        U[static_cast<std::size_t>(i)];
  for (const grid::BoundaryNode& b : gp->boundary_nodes())
    f.values[static_cast<std::size_t>(b.node)] = b.value;
  return f;
}

/// J d = -res with SparseLU; a scaled diagonal shift is added when the
/// factorization fails or the solve is inaccurate (degenerating sigma_k^{ij}
/// near the cone boundary makes the system nearly singular).
Vec solve_linear(int m, std::vector<Eigen::Triplet<double>>& trips, const Vec& res,
                 double lm_shift) {
  using Sparse = Eigen::SparseMatrix<double>;
  Eigen::VectorXd rhs(m);
  double rnorm = 0.0;
  for (int i = 0; i < m; ++i) {
    rhs(i) = -res[static_cast<std::size_t>(i)];
    rnorm = std::max(rnorm, std::abs(rhs(i)));
  }
  double trace = 0.0;
  for (const auto& t : trips)
    if (t.row() == t.col()) trace += t.value();
  const double shift_base = lm_shift * (trace != 0.0 ? trace / m : 1.0);

  for (int attempt = 0; attempt < 5; ++attempt) {
    Sparse J(m, m);
    std::vector<Eigen::Triplet<double>> work = trips;
    if (attempt > 0) {
      const double s = shift_base * std::pow(10.0, attempt - 1);
      for (int i = 0; i < m; ++i) work.emplace_back(i, i, s);
    }
    J.setFromTriplets(work.begin(), work.end());
    Eigen::SparseLU<Sparse, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(J);
    lu.factorize(J);
    if (lu.info() != Eigen::Success) continue;
    Eigen::VectorXd d = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !d.allFinite()) continue;
    const double resid = (J * d - rhs).cwiseAbs().maxCoeff();
    if (rnorm > 0.0 && resid / rnorm > 1e-10) continue;
    Vec out(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = d(i);
    return out;
  }
  fail(ErrorKind::numeric, "linear solve failed beyond the shifted retries");
}

}  // namespace

ResidualField residual(const Problem& p, const grid::ScalarField& u, const Rhs& rhs) {
  require(u.grid != nullptr, ErrorKind::argument, "residual: field has no grid");
  const grid::Grid& g = *u.grid;
  require(g.dim() == p.n, ErrorKind::argument, "residual: dimension mismatch");
  ResidualField out;
  out.values.grid = u.grid;
  out.values.values.assign(static_cast<std::size_t>(g.node_count()), 0.0);
  out.min_margin = 1e300;

  for (int i = 0; i < g.interior_count(); ++i) {
    const int node = g.interior_nodes()[static_cast<std::size_t>(i)];
    const SymMatrix d2u = grid::hessian_at(u, i);
    const Vec du = gradient_at(u, i);
    const KindEval ke = eval_kind(p, u[node], du, d2u);
    if (!ke.ok) {
      out.inadmissible.push_back(i);
      out.min_margin = std::min(out.min_margin, -1.0);
      continue;
    }
    const double r = rhs_value(p, rhs, g.position(node), u[node], node);
    out.values.values[static_cast<std::size_t>(node)] = ke.sigma_k - r;
    out.sup_rhs = std::max(out.sup_rhs, std::abs(r));
    out.min_margin = std::min(out.min_margin, ke.margin);
    if (ke.margin <= 0.0) out.inadmissible.push_back(i);
  }
  return out;
}

SolveResult newton_solve(const Problem& p, const Config& c, const Rhs& rhs,
                         const grid::ScalarField& warm) {
  require(warm.grid != nullptr, ErrorKind::argument, "newton_solve: warm start has no grid");
  const grid::GridPtr gp = warm.grid;
  const grid::Grid& g = *gp;
  require(g.dim() == p.n, ErrorKind::argument, "newton_solve: dimension mismatch");
  require(p.k >= 1 && p.k <= p.n, ErrorKind::argument, "newton_solve: order out of range");

  const int m = g.interior_count();
  const std::vector<Vec> pos = interior_positions(g);
  Vec U(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    U[static_cast<std::size_t>(i)] = warm[g.interior_nodes()[static_cast<std::size_t>(i)]];

  EvalState st = eval_state(p, rhs, g, pos, U);
  require(st.margin > 0.0, ErrorKind::precondition,
          "newton_solve: warm start is not strictly admissible (margin " +
              std::to_string(st.margin) + ")");

  const int d = g.dim();
  for (int iter = 0; iter <= c.max_newton_iters; ++iter) {
    const double tol = c.newton_tol_abs + c.newton_tol_rel * st.sup_rhs;
    if (st.rinf <= tol) {
      SolveResult r;
      r.u = complete_field(gp, U);
      r.residual_inf = st.rinf;
      r.admissibility_margin = st.margin;
      r.newton_iters = iter;
      r.converged = true;
      return r;
    }
    if (iter == c.max_newton_iters) break;

    // Jacobian: sigma_k differentiated through the second derivatives with
    // the gradient factors frozen; the explicit u-dependence of the
    // hyperbolic matrix and of the right-hand side go on the diagonal.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(m) * 12);
    for (int i = 0; i < m; ++i) {
      SymMatrix d2u(d);
      for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) d2u.set(a, b, grid::dirichlet_d2(g, i, a, b).eval(U));
      Vec du(static_cast<std::size_t>(d), 0.0);
      if (p.kind != Kind::hessian)
        for (int a = 0; a < d; ++a)
          du[static_cast<std::size_t>(a)] = grid::dirichlet_d1(g, i, a).eval(U);
      const double uval = U[static_cast<std::size_t>(i)];
      const KindEval ke = eval_kind(p, uval, du, d2u);
      require(ke.ok, ErrorKind::numeric, "newton_solve: iterate left the domain");

      const SymMatrix t = sym::sigma_gradient(ke.a, p.k);
      SymMatrix chain(d);
      double du_coeff = 0.0;
      switch (p.kind) {
        case Kind::hessian:
          chain = t;
          break;
        case Kind::curvature:
          chain = scaled(sandwich(ke.frame.gamma_up, t), ke.frame.v);
          break;
        case Kind::hyperbolic:
          chain = scaled(sandwich(ke.frame.gamma_up, t), uval * ke.frame.v);
          du_coeff = ke.frame.v * sym_dot(t, ke.proj);
          break;
      }
      for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
          const double coeff = chain(a, b) * (a == b ? 1.0 : 2.0);
          if (coeff == 0.0) continue;
          const grid::StencilExpr e = grid::dirichlet_d2(g, i, a, b);
          for (int tpi = 0; tpi < e.count; ++tpi)
            trips.emplace_back(i, e.taps[static_cast<std::size_t>(tpi)].col,
                               coeff * e.taps[static_cast<std::size_t>(tpi)].w);
        }
      const int node = g.interior_nodes()[static_cast<std::size_t>(i)];
      const double extra = du_coeff - rhs_du(p, rhs, pos[static_cast<std::size_t>(i)], uval, node);
      if (extra != 0.0) trips.emplace_back(i, i, extra);
    }

    const Vec step = solve_linear(m, trips, st.res, c.lm_shift);

    double tau = 1.0;
    bool accepted = false;
    Vec trial(U.size());
    EvalState ts;
    while (tau >= c.damping_min) {
      for (std::size_t i = 0; i < U.size(); ++i) trial[i] = U[i] + tau * step[i];
      ts = eval_state(p, rhs, g, pos, trial);
      if (ts.margin > 0.0 && ts.rinf <= st.rinf) {
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) {
      SolveResult last;
      last.u = complete_field(gp, U);
      last.residual_inf = st.rinf;
      last.admissibility_margin = st.margin;
      last.newton_iters = iter;
      last.converged = false;
      throw SolveFailure("newton_solve: damping floor reached at residual " +
                             std::to_string(st.rinf), std::move(last));
    }
    U.swap(trial);
    st = ts;
  }

  SolveResult last;
  last.u = complete_field(gp, U);
  last.residual_inf = st.rinf;
  last.admissibility_margin = st.margin;
  last.newton_iters = c.max_newton_iters;
  last.converged = false;
  throw SolveFailure("newton_solve: iteration cap reached at residual " +
                         std::to_string(st.rinf), std::move(last));
}

namespace {

Vec box_center(const grid::Domain& dom) {
  Vec c(dom.bounds().lo.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = 0.5 * (dom.bounds().lo[i] + dom.bounds().hi[i]);
  return c;
}

double max_radius_to_boundary(const grid::Grid& g, const Vec& center) {
  double r = 0.0;
  for (const grid::BoundaryNode& b : g.boundary_nodes()) {
    const Vec x = g.position(b.node);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double dv = x[i] - center[i];
      s += dv * dv;
    }
    r = std::max(r, std::sqrt(s));
  }
  return r;
}

Vec phi_gradient(const grid::ScalarFn& phi, const Vec& center, double h) {
  Vec gphi(center.size(), 0.0);
  Vec xp = center, xm = center;
  for (std::size_t a = 0; a < center.size(); ++a) {
    xp = center;
    xm = center;
    xp[a] += h;
    xm[a] -= h;
    gphi[a] = (phi(xp) - phi(xm)) / (2.0 * h);
  }
  return gphi;
}

double min_curvature_slack(const Problem& p, const grid::Grid& g, const Vec& center,
                           double r0, double amp) {
  const Vec gphi = phi_gradient(p.phi, center, g.spacing());
  double worst = 1e300;
  for (int i = 0; i < g.interior_count(); ++i) {
    const Vec x = g.position(g.interior_nodes()[static_cast<std::size_t>(i)]);
    double q = 0.0;
    Vec du(x.size());
    for (std::size_t a = 0; a < x.size(); ++a) {
      const double dv = x[a] - center[a];
      q += dv * dv;
      du[a] = amp * dv + gphi[a];
    }
    const double uval = p.phi(x) + 0.5 * amp * (q - r0 * r0);
    graph::Jet2 jet{uval, du, scaled(SymMatrix::identity(g.dim()), amp)};
    const graph::CurvatureData cd = graph::curvature_matrix(jet, p.k);
    worst = std::min(worst, cd.cone.margin >= -1e300
                                ? sym::sigma(cd.kappa.values, p.k) - p.f(x, uval)
                                : -1e300);
  }
  return worst;
}

}  // namespace

Subsolution subsolution_quadratic(const Problem& p, const grid::GridPtr& g, double f_bound) {
  require(std::isfinite(f_bound) && f_bound >= 0.0, ErrorKind::argument,
          "subsolution_quadratic: bad f bound");
  require(p.kind != Kind::hyperbolic, ErrorKind::argument,
          "subsolution_quadratic: not defined for the hyperbolic kind");
  Subsolution s;
  s.center = box_center(p.dom);
  s.circumradius = max_radius_to_boundary(*g, s.center);

  if (p.kind == Kind::hessian) {
    s.amplitude = std::pow((f_bound + 1.0) / sym::binomial(p.n, p.k), 1.0 / p.k);
  } else {
    double found = -1.0;
    for (int j = -10; j <= 20; ++j) {
      const double amp = std::pow(2.0, j);
      if (min_curvature_slack(p, *g, s.center, s.circumradius, amp) >= 0.0) {
        found = amp;
        break;
      }
    }
    require(found > 0.0, ErrorKind::numeric,
            "subsolution_quadratic: no admissible amplitude (degenerate configuration)");
    s.amplitude = found;
  }
  require(s.amplitude <= 1e6, ErrorKind::numeric,
          "subsolution_quadratic: amplitude exceeds 1e6 (degenerate configuration)");

  const double amp = s.amplitude;
  const Vec center = s.center;
  const double r0 = s.circumradius;
  const grid::ScalarFn phi = p.phi;
  s.field = grid::make_field(g, [amp, center, r0, phi](std::span<const double> x) {
    double q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double dv = x[i] - center[i];
      q += dv * dv;
    }
    return phi(x) + 0.5 * amp * (q - r0 * r0);
  });
  return s;
}

namespace {

/// Direct solve of the discrete Laplace problem with constant right-hand
/// side; the sigma_1 bridge of the initial-guess builder is linear.
grid::ScalarField poisson_solve(const grid::GridPtr& g, double rhs_value) {
  const grid::Grid& gg = *g;
  const int m = gg.interior_count();
  const int d = gg.dim();
  std::vector<Eigen::Triplet<double>> trips;
  Vec rhs(static_cast<std::size_t>(m), rhs_value);
  for (int i = 0; i < m; ++i)
    for (int a = 0; a < d; ++a) {
      const grid::StencilExpr e = grid::dirichlet_d2(gg, i, a, a);
      for (int t = 0; t < e.count; ++t)
        trips.emplace_back(i, e.taps[static_cast<std::size_t>(t)].col,
                           e.taps[static_cast<std::size_t>(t)].w);
      rhs[static_cast<std::size_t>(i)] -= e.c;
    }
  Vec neg(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) neg[static_cast<std::size_t>(i)] = -rhs[static_cast<std::size_t>(i)];
  const Vec u = solve_linear(m, trips, neg, 1e-10);
  grid::ScalarField out = complete_field(g, u);
  return out;
}

bool phi_is_affine(const grid::ScalarFn& phi, const grid::Grid& g) {
  // second differences of phi at a few interior nodes
  const int m = g.interior_count();
  double scale = 1.0;
  double worst = 0.0;
  const int samples = std::min(m, 7);
  for (int s = 0; s < samples; ++s) {
    const int i = (s * m) / samples;
    const int node = g.interior_nodes()[static_cast<std::size_t>(i)];
    const Vec x = g.position(node);
    scale = std::max(scale, std::abs(phi(x)));
    for (int a = 0; a < g.dim(); ++a) {
      Vec xp = x, xm = x;
      xp[static_cast<std::size_t>(a)] += g.spacing();
      xm[static_cast<std::size_t>(a)] -= g.spacing();
      worst = std::max(worst, std::abs(phi(xp) - 2.0 * phi(x) + phi(xm)));
    }
    for (int a = 0; a < g.dim(); ++a)
      for (int b = a + 1; b < g.dim(); ++b) {
        Vec xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[static_cast<std::size_t>(a)] += g.spacing();
        xpp[static_cast<std::size_t>(b)] += g.spacing();
        xpm[static_cast<std::size_t>(a)] += g.spacing();
        xpm[static_cast<std::size_t>(b)] -= g.spacing();
        xmp[static_cast<std::size_t>(a)] -= g.spacing();
        xmp[static_cast<std::size_t>(b)] += g.spacing();
        xmm[static_cast<std::size_t>(a)] -= g.spacing();
        xmm[static_cast<std::size_t>(b)] -= g.spacing();
        worst = std::max(worst, std::abs(phi(xpp) - phi(xpm) - phi(xmp) + phi(xmm)));
      }
  }
  return worst <= 1e-9 * scale;
}

double eval_margin(const Problem& p, const grid::Grid& g, const std::vector<Vec>& pos,
                   std::span<const double> U) {
  Rhs dummy = Rhs::nodal(nullptr);
  // margins do not involve the right-hand side; reuse eval_state with a zero field
  grid::ScalarField zero;
  zero.values.assign(static_cast<std::size_t>(g.node_count()), 0.0);
  dummy.field = &zero;
  // grid pointer unused by rhs_value for field mode
  return eval_state(p, dummy, g, pos, U).margin;
}

}  // namespace

grid::ScalarField initial_guess(const Problem& p, const Config& c, const grid::GridPtr& g,
                                double f_bound) {
  (void)c;
  grid::ScalarField start;
  // The quadratic subsolution undershoots the boundary data at the arm
  // crossings; the Hessian linearization absorbs that, the curvature one
  // does not, so the curvature kind starts from the Poisson solve instead.
  if (p.usub) {
    start = grid::make_field(g, p.usub);
  } else if (p.kind == Kind::hessian && phi_is_affine(p.phi, *g)) {
    start = subsolution_quadratic(p, g, f_bound).field;
  } else {
    // Poisson-type start: sigma_1 = n (sup f)^{1/k} C(n,k)^{-1/k}; the linear
    // solve meets the collocation data exactly
    const double rhs1 = p.n * std::pow(std::max(f_bound, 1e-8), 1.0 / p.k) /
                        std::pow(sym::binomial(p.n, p.k), 1.0 / p.k);
    start = poisson_solve(g, rhs1);
  }

  // lift until strictly admissible for the discrete operator
  const grid::Grid& gg = *g;
  const std::vector<Vec> pos = interior_positions(gg);
  const Vec center = box_center(p.dom);
  const int m = gg.interior_count();
  Vec U(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    U[static_cast<std::size_t>(i)] = start[gg.interior_nodes()[static_cast<std::size_t>(i)]];

  for (int step = -1; step <= 26; ++step) {
    const double mu = step < 0 ? 0.0 : std::pow(2.0, step - 6);
    Vec lifted = U;
    if (mu > 0.0)
      for (int i = 0; i < m; ++i) {
        double q = 0.0;
        for (std::size_t a = 0; a < pos[static_cast<std::size_t>(i)].size(); ++a) {
          const double dv = pos[static_cast<std::size_t>(i)][a] - center[a];
          q += dv * dv;
        }
        lifted[static_cast<std::size_t>(i)] += 0.5 * mu * q;
      }
    if (eval_margin(p, gg, pos, lifted) > 0.0) {
      grid::ScalarField out = start;
      for (int i = 0; i < m; ++i)
        out.values[static_cast<std::size_t>(gg.interior_nodes()[static_cast<std::size_t>(i)])] =
            lifted[static_cast<std::size_t>(i)];
      return out;
    }
    if (mu > 1e6) break;
  }
  fail(ErrorKind::precondition, "initial_guess: could not reach a strictly admissible start");
}

double default_theta0(const Problem& p, const Config& c, const grid::GridPtr& g,
                      const grid::ScalarField& usub) {
  if (c.theta0 > 0.0) return c.theta0;
  double mn = 1e300;
  for (const grid::BoundaryNode& b : g->boundary_nodes()) {
    const Vec x = g->position(b.node);
    const double fv = std::max(p.f(x, usub[b.node]), 0.0);
    const double ft = p.k == 2 ? fv : std::pow(fv, 1.0 / (p.k - 1));
    mn = std::min(mn, ft);
  }
  return std::max(1e-3, 0.5 * mn);
}

namespace {

double sup_f_bound(const Problem& p, const grid::Grid& g) {
  double s = 0.0;
  for (int id = 0; id < g.node_count(); ++id) {
    if (!g.in_mask(id)) continue;
    const Vec x = g.position(id);
    s = std::max(s, p.f(x, p.phi(x)));
  }
  return s;
}

/// First hyperbolic solve on a level-set grid: start from the flat graph at
/// the level value (curvatures all one, so it solves sigma_k = C(n,k)
/// exactly) and bridge the right-hand side down to the target.
SolveResult hyperbolic_bridge_solve(const Problem& p, const Config& c,
                                    const grid::GridPtr& g, const Rhs& target,
                                    const grid::ScalarField* warm_hint) {
  const double eps = g->boundary_nodes().front().value;
  grid::ScalarField flat = grid::constant_field(g, eps);

  grid::ScalarField warm = warm_hint ? *warm_hint : flat;
  if (warm_hint) {
    // blend toward the flat graph until strictly admissible
    const std::vector<Vec> pos = interior_positions(*g);
    const int m = g->interior_count();
    for (double s = 0.0; s <= 1.0; s += 0.25) {
      Vec U(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        const int node = g->interior_nodes()[static_cast<std::size_t>(i)];
        U[static_cast<std::size_t>(i)] = (1.0 - s) * (*warm_hint)[node] + s * eps;
      }
      if (eval_state(p, target, *g, pos, U).margin > 0.0) {
        warm = flat;
        for (int i = 0; i < m; ++i)
          warm.values[static_cast<std::size_t>(g->interior_nodes()[static_cast<std::size_t>(i)])] =
              U[static_cast<std::size_t>(i)];
        break;
      }
    }
    try {
      return newton_solve(p, c, target, warm);
    } catch (const Error&) {
      warm = flat;  // fall through to the bridged path
    }
  }

  const double horo = sym::binomial(p.n, p.k);
  SolveResult r;
  const double blends[] = {0.0, 0.5, 0.75, 0.875, 1.0};
  grid::ScalarField w = warm;
  for (double s : blends) {
    Problem blend = p;
    const auto base_f = p.f;
    blend.f = [s, horo, base_f](std::span<const double> x, double u) {
      return (1.0 - s) * horo + s * base_f(x, u);
    };
    Rhs rb = target;
    if (target.mode == Rhs::Mode::field && s < 1.0) rb = Rhs::raw();
    r = newton_solve(blend, c, s == 1.0 ? target : rb, w);
    w = r.u;
  }
  return r;
}

}  // namespace

ContinuationResult continuation_solve(const Problem& p, const Config& c, int resolution) {
  require(!c.eps_schedule.empty(), ErrorKind::argument,
          "continuation_solve: empty schedule");
  for (std::size_t i = 1; i < c.eps_schedule.size(); ++i)
    require(c.eps_schedule[i] < c.eps_schedule[i - 1], ErrorKind::argument,
            "continuation_solve: schedule must be strictly decreasing");
  require(p.k >= 2, ErrorKind::argument,
          "continuation_solve: k = 1 is out of scope (quasilinear case)");

  ContinuationResult out;

  if (p.kind == Kind::hyperbolic) {
    require(static_cast<bool>(p.usub), ErrorKind::validation,
            "continuation_solve: the hyperbolic kind requires a subsolution");
    out.base_grid = grid::build_grid(p.dom, resolution,
                                     [](std::span<const double>) { return 0.0; });
    out.subsolution = grid::make_field(out.base_grid, p.usub);
    out.theta0 = c.theta0 > 0.0 ? c.theta0 : 1.0;

    const grid::ScalarField* prev = nullptr;
    for (double eps : c.eps_schedule) {
      grid::GridPtr ge;
      try {
        ge = grid::build_level_set_grid(out.subsolution, eps);
      } catch (const Error&) {
        if (out.steps.empty()) throw;
        break;
      }
      grid::ScalarField warm_hint;
      if (prev) {
        warm_hint = grid::constant_field(ge, eps);
        for (int i = 0; i < ge->interior_count(); ++i) {
          const int node = ge->interior_nodes()[static_cast<std::size_t>(i)];
          if (prev->grid->in_mask(node))
            warm_hint.values[static_cast<std::size_t>(node)] = (*prev)[node];
        }
      }
      try {
        SolveResult r = hyperbolic_bridge_solve(p, c, ge, Rhs::raw(),
                                                prev ? &warm_hint : nullptr);
        out.steps.push_back({eps, std::move(r)});
        prev = &out.steps.back().result.u;
        out.grid = ge;
      } catch (const Error& e) {
        if (out.steps.empty())
          fail(ErrorKind::nonconvergence,
               std::string("continuation_solve: first step failed: ") + e.what());
        return out;
      }
    }
    out.completed = out.steps.size() == c.eps_schedule.size();
    return out;
  }

  out.grid = grid::build_grid(p.dom, resolution, p.phi);
  out.base_grid = out.grid;
  const double f_bound = sup_f_bound(p, *out.grid);
  grid::ScalarField start = initial_guess(p, c, out.grid, f_bound + c.eps_schedule.front());
  out.subsolution = start;
  out.theta0 = default_theta0(p, c, out.grid, start);

  const grid::ScalarField* warm = &start;
  for (double eps : c.eps_schedule) {
    try {
      SolveResult r = newton_solve(p, c, Rhs::feps(eps, out.theta0), *warm);
      out.steps.push_back({eps, std::move(r)});
      warm = &out.steps.back().result.u;
    } catch (const Error& e) {
      if (out.steps.empty())
        fail(ErrorKind::nonconvergence,
             std::string("continuation_solve: first step failed: ") + e.what());
      return out;
    }
  }
  out.completed = true;
  return out;
}

grid::ScalarField homogeneous_barrier(const Problem& p, const Config& c,
                                      const grid::GridPtr& g, double delta) {
  require(delta > 0.0, ErrorKind::argument, "homogeneous_barrier: delta must be positive");

  if (p.kind == Kind::hyperbolic) {
    Problem ph = p;
    SolveResult r;
    const grid::ScalarField* warm = nullptr;
    grid::ScalarField w;
    double v = sym::binomial(p.n, p.k);
    for (;;) {
      ph.f = [v](std::span<const double>, double) { return v; };
      if (!warm) {
        r = hyperbolic_bridge_solve(ph, c, g, Rhs::raw(), nullptr);
      } else {
        r = newton_solve(ph, c, Rhs::raw(), *warm);
      }
      w = r.u;
      warm = &w;
      if (v <= delta) break;
      v = std::max(delta, v / 4.0);
    }
    return w;
  }

  Problem pc = p;
  double v = std::max(delta, 0.1);
  pc.f = [v](std::span<const double>, double) { return v; };
  grid::ScalarField warm = initial_guess(pc, c, g, v);
  for (;;) {
    pc.f = [v](std::span<const double>, double) { return v; };
    warm = newton_solve(pc, c, Rhs::raw(), warm).u;
    if (v <= delta) break;
    v = std::max(delta, v / 4.0);
  }
  return warm;
}

double comparison_check(const grid::ScalarField& lower, const grid::ScalarField& mid,
                        const grid::ScalarField& upper) {
  require(lower.grid != nullptr && lower.grid == mid.grid && mid.grid == upper.grid,
          ErrorKind::argument, "comparison_check: fields must share a grid");
  double worst = 0.0;
  for (int id = 0; id < lower.grid->node_count(); ++id) {
    if (!lower.grid->in_mask(id)) continue;
    worst = std::max(worst, lower[id] - mid[id]);
    worst = std::max(worst, mid[id] - upper[id]);
  }
  return std::max(worst, 0.0);
}

}  // namespace dhl::solver
