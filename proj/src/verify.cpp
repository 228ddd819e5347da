#include "dhl/verify.hpp"

#include <algorithm>
#include <cmath>

#include "dhl/graph_geometry.hpp"
#include "dhl/hyperbolic_geometry.hpp"
#include "dhl/symfn.hpp"

namespace dhl::verify {

double default_alpha_hessian(int k) {
  require(k >= 2, ErrorKind::argument, "alpha: k must be >= 2");
  return k == 2 ? 2.0 : static_cast<double>(k - 1);
}

double default_alpha_curvature(int k) {
  require(k >= 2, ErrorKind::argument, "alpha: k must be >= 2");
  return std::max(3.0, static_cast<double>(k - 1));
}

namespace {

void check_pair(const grid::ScalarField& u, const grid::ScalarField& ubar) {
  require(u.grid != nullptr && u.grid == ubar.grid, ErrorKind::argument,
          "pogorelov: fields must share a grid");
  for (int node : u.grid->interior_nodes())
    require(ubar[node] >= u[node] - 1e-8, ErrorKind::precondition,
            "pogorelov: ubar < u beyond tolerance at node " + std::to_string(node));
}

}  // namespace

PogorelovRecord pogorelov_hessian(const grid::ScalarField& u, const grid::ScalarField& ubar,
                                  int k, std::optional<double> alpha_override) {
  check_pair(u, ubar);
  PogorelovRecord rec;
  rec.alpha = alpha_override.value_or(default_alpha_hessian(k));
  const grid::Grid& g = *u.grid;
  for (int i = 0; i < g.interior_count(); ++i) {
    const int node = g.interior_nodes()[static_cast<std::size_t>(i)];
    const SymMatrix d2u = grid::hessian_at(u, i);
    const double lmax = sym::eigen_sym(d2u).spectrum.values.front();
    const double w = std::max(ubar[node] - u[node], 0.0);
    const double q = std::pow(w, rec.alpha) * std::max(lmax, 0.0);
    if (q > rec.quantity) {
      rec.quantity = q;
      rec.argmax_node = node;
    }
  }
  return rec;
}

PogorelovRecord pogorelov_curvature(const grid::ScalarField& u, const grid::ScalarField& ubar,
                                    int k, std::optional<double> alpha_override) {
  check_pair(u, ubar);
  PogorelovRecord rec;
  rec.alpha = alpha_override.value_or(default_alpha_curvature(k));
  const grid::Grid& g = *u.grid;
  for (int i = 0; i < g.interior_count(); ++i) {
    const int node = g.interior_nodes()[static_cast<std::size_t>(i)];
    const SymMatrix d2u = grid::hessian_at(u, i);
    const Vec du = grid::gradient_at(u, i);
    const double wslope = std::sqrt(1.0 + dot(du, du));
    const double hnorm = d2u.frobenius() / wslope;
    const double w = std::max(ubar[node] - u[node], 0.0);
    const double q = std::pow(w, rec.alpha) * hnorm;
    if (q > rec.quantity) {
      rec.quantity = q;
      rec.argmax_node = node;
    }
  }
  return rec;
}

PogorelovRecord pogorelov_hyperbolic(const grid::ScalarField& u, const grid::ScalarField& ubar,
                                     double c, double alpha) {
  require(u.grid != nullptr && u.grid == ubar.grid, ErrorKind::argument,
          "pogorelov: fields must share a grid");
  require(alpha > 0.0, ErrorKind::argument, "pogorelov: alpha must be positive");
  PogorelovRecord rec;
  rec.alpha = alpha;
  const grid::Grid& g = *u.grid;
  const grid::ScalarField weight = hyp::pogorelov_weight(ubar, u, c);
  for (int i = 0; i < g.interior_count(); ++i) {
    const int node = g.interior_nodes()[static_cast<std::size_t>(i)];
    if (weight[node] <= 0.0 || u[node] <= 0.0) continue;
    graph::Jet2 jet{u[node], grid::gradient_at(u, i), grid::hessian_at(u, i)};
    const hyp::HypCurvature hc = hyp::curvature_matrix(jet, 1);
    const double q = std::pow(weight[node], alpha) * hc.h.frobenius();
    if (q > rec.quantity) {
      rec.quantity = q;
      rec.argmax_node = node;
    }
  }
  return rec;
}

BlockiReport blocki_check(const grid::ScalarField& psi, const grid::ScalarField& dist) {
  require(psi.grid != nullptr && psi.grid == dist.grid, ErrorKind::argument,
          "blocki_check: fields must share a grid");
  const grid::Grid& g = *psi.grid;
  for (int id = 0; id < g.node_count(); ++id)
    if (g.in_mask(id))
      require(psi[id] >= -1e-12, ErrorKind::precondition,
              "blocki_check: psi is negative beyond tolerance at node " + std::to_string(id));

  double sup_lmax = 0.0;
  std::vector<double> grad_norm(static_cast<std::size_t>(g.interior_count()), 0.0);
  for (int i = 0; i < g.interior_count(); ++i) {
    const SymMatrix d2 = grid::hessian_at(psi, i);
    sup_lmax = std::max(sup_lmax, sym::eigen_sym(d2).spectrum.values.front());
    grad_norm[static_cast<std::size_t>(i)] = norm2(grid::gradient_at(psi, i));
  }

  BlockiReport rep;
  rep.slack = 10.0 * g.spacing() * (1.0 + sup_lmax);
  rep.violation = -1e300;
  for (int i = 0; i < g.interior_count(); ++i) {
    const int node = g.interior_nodes()[static_cast<std::size_t>(i)];
    const double gn = grad_norm[static_cast<std::size_t>(i)];
    const double d = std::max(dist[node], 1e-12);
    const double bound = std::max(gn / d, 1.0 + sup_lmax) * std::sqrt(std::max(psi[node], 0.0));
    const double viol = gn - bound;
    if (viol > rep.violation) {
      rep.violation = viol;
      rep.argmax_node = node;
    }
  }
  return rep;
}

double distance_comparison(const grid::ScalarField& ubar, const grid::ScalarField& u,
                           const grid::ScalarField& dist) {
  require(u.grid != nullptr && u.grid == ubar.grid && u.grid == dist.grid,
          ErrorKind::argument, "distance_comparison: fields must share a grid");
  const grid::Grid& g = *u.grid;
  for (int node : g.interior_nodes())
    require(ubar[node] >= u[node] - 1e-8, ErrorKind::precondition,
            "distance_comparison: ubar < u beyond tolerance");
  double b = 0.0;
  for (int i = 0; i < g.interior_count(); ++i) {
    const int node = g.interior_nodes()[static_cast<std::size_t>(i)];
    b = std::max(b, std::max(ubar[node] - u[node], 0.0) /
                        std::max(dist[node], g.spacing()));
  }
  return b;
}

SweepReport sweep_verdict(std::vector<PogorelovRecord> records, double factor) {
  require(records.size() >= 3, ErrorKind::argument, "sweep_verdict: need at least 3 records");
  require(factor >= 1.0, ErrorKind::argument, "sweep_verdict: factor must be >= 1");
  for (std::size_t i = 1; i < records.size(); ++i)
    require(records[i].eps < records[i - 1].eps, ErrorKind::argument,
            "sweep_verdict: records must be ordered by decreasing eps");

  SweepReport rep;
  const double q0 = records.front().quantity;
  double qmax = 0.0;
  for (const PogorelovRecord& r : records) qmax = std::max(qmax, r.quantity);
  rep.ratio = q0 > 0.0 ? qmax / q0 : (qmax > 0.0 ? 1e300 : 1.0);

  double tail_min = 1e300, tail_max = 0.0;
  for (std::size_t i = records.size() - 3; i < records.size(); ++i) {
    tail_min = std::min(tail_min, records[i].quantity);
    tail_max = std::max(tail_max, records[i].quantity);
  }
  const bool head_ok = qmax <= factor * q0 || qmax == 0.0;
  const bool plateau_ok = tail_max <= factor * std::max(tail_min, 0.0) ||
                          (tail_max == 0.0 && tail_min == 0.0);
  rep.bounded = head_ok && plateau_ok;
  rep.records = std::move(records);
  return rep;
}

}  // namespace dhl::verify
