#include "dhl/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "dhl/expression.hpp"
#include "dhl/fd.hpp"
#include "dhl/hyperbolic_geometry.hpp"
#include "dhl/symfn.hpp"
#include "dhl/verify.hpp"

namespace dhl::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

grid::Domain build_domain(const RunConfig& cfg) {
  const int n = cfg.n;
  Vec center = cfg.center;
  if (center.empty()) center.assign(static_cast<std::size_t>(n), 0.0);
  if (cfg.domain == "rectangle") return grid::Domain::rectangle(cfg.lo, cfg.hi);
  if (cfg.domain == "disk") return grid::Domain::disk(center, cfg.radius);
  if (cfg.domain == "ellipsoid-section")
    return grid::Domain::ellipsoid_section(center, cfg.coeffs, cfg.radius);
  // sublevel
  auto level = expr::Expression::parse(cfg.levelset);
  return grid::Domain::sublevel(
      [level](std::span<const double> x) { return level.eval(x, 0.0); },
      grid::Box{cfg.box_lo, cfg.box_hi});
}

solver::Kind kind_of(const RunConfig& cfg) {
  if (cfg.kind == "hessian") return solver::Kind::hessian;
  if (cfg.kind == "curvature") return solver::Kind::curvature;
  return solver::Kind::hyperbolic;
}

/// Sampled nonnegativity of f along the boundary data; guards solves early.
void check_f_nonnegative(const solver::Problem& p, const grid::Grid& g) {
  for (int id = 0; id < g.node_count(); ++id) {
    if (!g.in_mask(id)) continue;
    const Vec x = g.position(id);
    const double phi = p.phi(x);
    require(p.f(x, phi) >= -1e-12, ErrorKind::validation,
            "problem: f is negative at a sampled point");
    require(p.f(x, phi - 1.0) >= -1e-12, ErrorKind::validation,
            "problem: f is negative at a sampled point");
  }
}

struct RhsPolicy {
  solver::Rhs head;   // right-hand side at the schedule head
  double theta0 = 0.0;
};

RhsPolicy make_rhs(const RunConfig& cfg, const solver::Problem& p, const solver::Config& sc,
                   const grid::GridPtr& g, const grid::ScalarField& usub_proxy) {
  RhsPolicy pol;
  pol.theta0 = solver::default_theta0(p, sc, g, usub_proxy);
  if (cfg.rhs_mode == "raw")
    pol.head = solver::Rhs::raw();
  else if (cfg.rhs_mode == "jreg")
    pol.head = solver::Rhs::jreg(cfg.jreg);
  else
    pol.head = solver::Rhs::feps(sc.eps_schedule.front(), pol.theta0);
  return pol;
}

void write_records_csv(const std::string& path, solver::Kind kind,
                       const std::vector<solver::ContinuationStep>& steps,
                       const std::vector<verify::PogorelovRecord>& recs) {
  std::ofstream os(path);
  require(os.good(), ErrorKind::io, "cannot open " + path);
  const char* qcol = kind == solver::Kind::hessian ? "pogorelov_h" : "pogorelov_c";
  os << "eps,iter,residual_inf,margin," << qcol << "\n";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    os << fmt(steps[i].eps) << ',' << steps[i].result.newton_iters << ','
       << fmt(steps[i].result.residual_inf) << ','
       << fmt(steps[i].result.admissibility_margin) << ',' << fmt(recs[i].quantity) << "\n";
  }
}

void write_report_csv(const std::string& path, const verify::SweepReport& rep) {
  std::ofstream os(path);
  require(os.good(), ErrorKind::io, "cannot open " + path);
  os << "eps,alpha,quantity,argmax_node,ratio,bounded\n";
  for (const verify::PogorelovRecord& r : rep.records)
    os << fmt(r.eps) << ',' << fmt(r.alpha) << ',' << fmt(r.quantity) << ','
       << r.argmax_node << ',' << fmt(rep.ratio) << ',' << (rep.bounded ? 1 : 0) << "\n";
}

void print_verdict(const verify::SweepReport& rep, std::size_t planned) {
  std::cout << "sweep report\n";
  std::cout << "  steps: " << rep.records.size() << " of " << planned << "\n";
  if (!rep.records.empty()) {
    std::cout << "  alpha: " << rep.records.front().alpha << "\n";
    std::cout << "  quantity at largest eps: " << fmt(rep.records.front().quantity) << "\n";
    double qmax = 0.0;
    for (const auto& r : rep.records) qmax = std::max(qmax, r.quantity);
    std::cout << "  max quantity: " << fmt(qmax) << "\n";
    std::cout << "  ratio: " << fmt(rep.ratio) << "\n";
  }
  std::cout << "  bounded: " << (rep.bounded ? "yes" : "no") << "\n";
}

std::string step_name(std::size_t i, const char* stem, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", stem, i, ext);
  return buf;
}

/// ubar restricted onto a (sub)grid sharing the lattice.
grid::ScalarField transfer(const grid::ScalarField& src, const grid::GridPtr& dst) {
  grid::ScalarField out;
  out.grid = dst;
  out.values.assign(static_cast<std::size_t>(dst->node_count()), 0.0);
  for (int id = 0; id < dst->node_count(); ++id)
    if (dst->in_mask(id)) out.values[static_cast<std::size_t>(id)] = src[id];
  return out;
}

std::optional<double> alpha_override(const RunConfig& cfg) {
  if (cfg.alpha == "auto") return std::nullopt;
  return std::stod(cfg.alpha);
}

verify::PogorelovRecord monitor_step(const RunConfig& cfg, solver::Kind kind, int k,
                                     const grid::ScalarField& u,
                                     const grid::ScalarField& ubar, double hyp_c) {
  switch (kind) {
    case solver::Kind::hessian:
      return verify::pogorelov_hessian(u, ubar, k, alpha_override(cfg));
    case solver::Kind::curvature:
      return verify::pogorelov_curvature(u, ubar, k, alpha_override(cfg));
    case solver::Kind::hyperbolic: {
      const double a = cfg.alpha == "auto" ? cfg.hyperbolic_alpha : std::stod(cfg.alpha);
      return verify::pogorelov_hyperbolic(u, ubar, hyp_c, a);
    }
  }
  return {};
}

void cmd_solve(const RunConfig& cfg, const solver::Problem& p, const solver::Config& sc,
               const std::string& out) {
  if (p.kind == solver::Kind::hyperbolic) {
    solver::ContinuationResult cr;
    solver::Config one = sc;
    one.eps_schedule = {sc.eps_schedule.front()};
    cr = solver::continuation_solve(p, one, cfg.resolution);
    const solver::SolveResult& r = cr.steps.front().result;
    grid::write_field_csv_file(r.u, out + "/u.csv");
    grid::write_field_binary_file(r.u, out + "/u.bin");
    std::ofstream os(out + "/records.csv");
    os << "eps,iter,residual_inf,margin\n"
       << fmt(cr.steps.front().eps) << ',' << r.newton_iters << ',' << fmt(r.residual_inf)
       << ',' << fmt(r.admissibility_margin) << "\n";
    std::cout << "solve: converged in " << r.newton_iters << " iterations, residual "
              << fmt(r.residual_inf) << ", margin " << fmt(r.admissibility_margin) << "\n";
    return;
  }

  grid::GridPtr g = grid::build_grid(p.dom, cfg.resolution, p.phi);
  check_f_nonnegative(p, *g);
  const double fb = [&] {
    double s = 0.0;
    for (int id = 0; id < g->node_count(); ++id)
      if (g->in_mask(id)) {
        const Vec x = g->position(id);
        s = std::max(s, p.f(x, p.phi(x)));
      }
    return s;
  }();
  grid::ScalarField start = solver::initial_guess(p, sc, g, fb + sc.eps_schedule.front());
  const RhsPolicy pol = make_rhs(cfg, p, sc, g, start);
  const solver::SolveResult r = solver::newton_solve(p, sc, pol.head, start);
  grid::write_field_csv_file(r.u, out + "/u.csv");
  grid::write_field_binary_file(r.u, out + "/u.bin");
  std::ofstream os(out + "/records.csv");
  require(os.good(), ErrorKind::io, "cannot open " + out + "/records.csv");
  os << "eps,iter,residual_inf,margin\n"
     << fmt(sc.eps_schedule.front()) << ',' << r.newton_iters << ',' << fmt(r.residual_inf)
     << ',' << fmt(r.admissibility_margin) << "\n";
  std::cout << "solve: converged in " << r.newton_iters << " iterations, residual "
            << fmt(r.residual_inf) << ", margin " << fmt(r.admissibility_margin) << "\n";
}

double resolve_hyp_c(const RunConfig& cfg, const solver::ContinuationResult& cr,
                     const grid::ScalarField& ubar) {
  if (cfg.pogorelov_c != "auto") return std::stod(cfg.pogorelov_c);
  // 0.9 * min over the first step's interior of (ubar^2 - u^2)
  const solver::SolveResult& first = cr.steps.front().result;
  const grid::GridPtr& g0 = first.u.grid;
  double mn = 1e300;
  for (int i = 0; i < g0->interior_count(); ++i) {
    const int node = g0->interior_nodes()[static_cast<std::size_t>(i)];
    mn = std::min(mn, ubar[node] * ubar[node] - first.u[node] * first.u[node]);
  }
  return 0.9 * std::max(mn, 0.0);
}

void cmd_sweep(const RunConfig& cfg, const solver::Problem& p, const solver::Config& sc,
               const std::string& out) {
  solver::ContinuationResult cr = solver::continuation_solve(p, sc, cfg.resolution);
  {
    // largest solved domain carries the supersolution
    grid::ScalarField ubar = solver::homogeneous_barrier(p, sc, cr.grid, sc.barrier_delta);
    grid::write_field_binary_file(ubar, out + "/ubar.bin");
    grid::write_field_binary_file(cr.subsolution, out + "/usub.bin");

    double hyp_c = 0.0;
    if (p.kind == solver::Kind::hyperbolic) {
      grid::ScalarField ubar0 = transfer(ubar, cr.steps.front().result.u.grid);
      hyp_c = resolve_hyp_c(cfg, cr, ubar0);
    }

    std::vector<verify::PogorelovRecord> recs;
    std::ofstream cmp(out + "/comparison.csv");
    require(cmp.good(), ErrorKind::io, "cannot open " + out + "/comparison.csv");
    cmp << "eps,sandwich_violation\n";
    for (std::size_t i = 0; i < cr.steps.size(); ++i) {
      const solver::ContinuationStep& st = cr.steps[i];
      const grid::GridPtr& gs = st.result.u.grid;
      grid::ScalarField ubar_s = p.kind == solver::Kind::hyperbolic ? transfer(ubar, gs) : ubar;
      verify::PogorelovRecord rec = monitor_step(cfg, p.kind, p.k, st.result.u, ubar_s, hyp_c);
      rec.eps = st.eps;
      recs.push_back(rec);

      if (p.kind != solver::Kind::hyperbolic) {
        grid::ScalarField phi_field = grid::make_field(gs, p.phi);
        cmp << fmt(st.eps) << ','
            << fmt(solver::comparison_check(cr.subsolution, st.result.u, phi_field)) << "\n";
      } else {
        cmp << fmt(st.eps) << ",0\n";
      }
      grid::write_field_binary_file(st.result.u, out + "/" + step_name(i, "u_eps", "bin"));
      grid::write_field_csv_file(st.result.u, out + "/" + step_name(i, "u_eps", "csv"));
    }
    write_records_csv(out + "/records.csv", p.kind, cr.steps, recs);

    if (recs.size() >= 3) {
      verify::SweepReport rep = verify::sweep_verdict(recs, cfg.factor);
      write_report_csv(out + "/report.csv", rep);
      print_verdict(rep, sc.eps_schedule.size());
      if (!cr.completed)
        fail(ErrorKind::nonconvergence,
             "continuation stalled after " + std::to_string(cr.steps.size()) + " steps");
      require(rep.bounded, ErrorKind::verification, "sweep verdict: not bounded");
    } else {
      if (!cr.completed)
        fail(ErrorKind::nonconvergence,
             "continuation stalled after " + std::to_string(cr.steps.size()) + " steps");
      fail(ErrorKind::verification, "sweep verdict: fewer than 3 records");
    }
  }
}

void cmd_verify(const RunConfig& cfg, const solver::Problem& p, const solver::Config& sc,
                const std::string& out) {
  // recompute the monitors from dumped fields
  if (p.kind == solver::Kind::hyperbolic) {
    grid::GridPtr base = grid::build_grid(p.dom, cfg.resolution,
                                          [](std::span<const double>) { return 0.0; });
    grid::ScalarField usub = grid::make_field(base, p.usub);
    std::vector<verify::PogorelovRecord> recs;
    grid::GridPtr glast;
    std::vector<grid::GridPtr> grids;
    std::vector<double> eps_list;
    for (std::size_t i = 0; i < sc.eps_schedule.size(); ++i) {
      const std::string path = out + "/" + step_name(i, "u_eps", "bin");
      if (!fs::exists(path)) break;
      grids.push_back(grid::build_level_set_grid(usub, sc.eps_schedule[i]));
      eps_list.push_back(sc.eps_schedule[i]);
      glast = grids.back();
    }
    require(!grids.empty(), ErrorKind::io, "verify: no dumped fields in " + out);
    grid::ScalarField ubar = grid::read_field_binary_file(glast, out + "/ubar.bin");
    double hyp_c = cfg.pogorelov_c == "auto" ? 0.0 : std::stod(cfg.pogorelov_c);
    for (std::size_t i = 0; i < grids.size(); ++i) {
      grid::ScalarField u = grid::read_field_binary_file(grids[i],
                                                         out + "/" + step_name(i, "u_eps", "bin"));
      if (i == 0 && cfg.pogorelov_c == "auto") {
        double mn = 1e300;
        for (int ii = 0; ii < grids[i]->interior_count(); ++ii) {
          const int node = grids[i]->interior_nodes()[static_cast<std::size_t>(ii)];
          mn = std::min(mn, ubar[node] * ubar[node] - u[node] * u[node]);
        }
        hyp_c = 0.9 * std::max(mn, 0.0);
      }
      grid::ScalarField ubar_s = transfer(ubar, grids[i]);
      verify::PogorelovRecord rec = monitor_step(cfg, p.kind, p.k, u, ubar_s, hyp_c);
      rec.eps = eps_list[i];
      recs.push_back(rec);
    }
    verify::SweepReport rep = verify::sweep_verdict(recs, cfg.factor);
    write_report_csv(out + "/report.csv", rep);
    print_verdict(rep, recs.size());
    require(rep.bounded, ErrorKind::verification, "sweep verdict: not bounded");
    return;
  }

  grid::GridPtr g = grid::build_grid(p.dom, cfg.resolution, p.phi);
  grid::ScalarField ubar = grid::read_field_binary_file(g, out + "/ubar.bin");
  std::vector<verify::PogorelovRecord> recs;
  for (std::size_t i = 0; i < sc.eps_schedule.size(); ++i) {
    const std::string path = out + "/" + step_name(i, "u_eps", "bin");
    if (!fs::exists(path)) break;
    grid::ScalarField u = grid::read_field_binary_file(g, path);
    verify::PogorelovRecord rec = monitor_step(cfg, p.kind, p.k, u, ubar, 0.0);
    rec.eps = sc.eps_schedule[i];
    recs.push_back(rec);
  }
  require(!recs.empty(), ErrorKind::io, "verify: no dumped fields in " + out);
  verify::SweepReport rep = verify::sweep_verdict(recs, cfg.factor);
  write_report_csv(out + "/report.csv", rep);
  print_verdict(rep, recs.size());
  require(rep.bounded, ErrorKind::verification, "sweep verdict: not bounded");
}

void cmd_geometry(const RunConfig& cfg, const std::string& out) {
  require(!cfg.geometry_expr.empty(), ErrorKind::validation,
          "geometry: [geometry] expr is required");
  require(!cfg.geometry_points.empty(), ErrorKind::validation,
          "geometry: [geometry] points are required");
  const expr::Expression e = expr::Expression::parse(cfg.geometry_expr);
  const int n = cfg.n;
  std::vector<expr::Expression> d1;
  std::vector<std::vector<expr::Expression>> d2;
  for (int a = 0; a < n; ++a) d1.push_back(e.derivative(a));
  for (int a = 0; a < n; ++a) {
    d2.emplace_back();
    for (int b = 0; b <= a; ++b) d2.back().push_back(d1[static_cast<std::size_t>(a)].derivative(b));
  }

  std::ofstream os(out + "/geometry.csv");
  require(os.good(), ErrorKind::io, "cannot open " + out + "/geometry.csv");
  std::string head;
  for (int a = 0; a < n; ++a) head += "x" + std::to_string(a + 1) + ",";
  head += "u";
  for (int a = 0; a < n; ++a) head += ",kappa" + std::to_string(a + 1);
  head += ",cone";
  for (int a = 0; a < n; ++a) head += ",kappa_tilde" + std::to_string(a + 1);
  head += ",cone_tilde";
  os << head << "\n";
  std::cout << head << "\n";

  for (const Vec& x : cfg.geometry_points) {
    const double uval = e.eval(x, 0.0);
    graph::Jet2 jet;
    jet.u = uval;
    jet.du.assign(static_cast<std::size_t>(n), 0.0);
    jet.d2u = SymMatrix(n);
    for (int a = 0; a < n; ++a) jet.du[static_cast<std::size_t>(a)] = d1[static_cast<std::size_t>(a)].eval(x, 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b <= a; ++b)
        jet.d2u.set(a, b, d2[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].eval(x, 0.0));

    const graph::CurvatureData cd = graph::curvature_matrix(jet, cfg.k);
    std::string line;
    for (int a = 0; a < n; ++a) line += fmt(x[static_cast<std::size_t>(a)]) + ",";
    line += fmt(uval);
    for (double kv : cd.kappa.values) line += "," + fmt(kv);
    line += std::string(",") + sym::to_string(cd.cone.label);
    if (uval > 0.0) {
      const hyp::HypCurvature hc = hyp::curvature_matrix(jet, cfg.k);
      for (double kv : hc.kappa.values) line += "," + fmt(kv);
      line += std::string(",") + sym::to_string(hc.cone.label);
    } else {
      for (int a = 0; a < n; ++a) line += ",nan";
      line += ",nan";
    }
    os << line << "\n";
    std::cout << line << "\n";
  }
}

}  // namespace

solver::Problem build_problem(const RunConfig& cfg) {
  cfg.validate();
  solver::Problem p;
  p.n = cfg.n;
  p.k = cfg.k;
  p.kind = kind_of(cfg);
  p.dom = build_domain(cfg);
  const expr::Expression fe = expr::Expression::parse(cfg.f);
  p.f = [fe](std::span<const double> x, double u) { return fe.eval(x, u); };
  const expr::Expression pe = expr::Expression::parse(cfg.phi);
  p.phi = [pe](std::span<const double> x) { return pe.eval(x, 0.0); };
  if (!cfg.usub.empty()) {
    const expr::Expression se = expr::Expression::parse(cfg.usub);
    p.usub = [se](std::span<const double> x) { return se.eval(x, 0.0); };
  }
  return p;
}

solver::Config build_solver_config(const RunConfig& cfg) {
  solver::Config sc;
  sc.eps_schedule = cfg.eps_schedule;
  sc.newton_tol_abs = cfg.newton_tol_abs;
  sc.newton_tol_rel = cfg.newton_tol_rel;
  sc.max_newton_iters = cfg.max_newton_iters;
  sc.damping_min = cfg.damping_min;
  sc.lm_shift = cfg.lm_shift;
  sc.theta0 = cfg.theta0 == "auto" ? 0.0 : std::stod(cfg.theta0);
  sc.barrier_delta = cfg.barrier_delta;
  return sc;
}

void run(const RunConfig& cfg, const std::string& command,
         const std::string& out_dir_override) {
  const solver::Problem p = build_problem(cfg);
  const solver::Config sc = build_solver_config(cfg);
  const std::string out = out_dir_override.empty() ? cfg.out_dir : out_dir_override;
  std::error_code ec;
  fs::create_directories(out, ec);
  require(!ec, ErrorKind::io, "cannot create output directory " + out);

  if (command == "solve")
    cmd_solve(cfg, p, sc, out);
  else if (command == "sweep")
    cmd_sweep(cfg, p, sc, out);
  else if (command == "verify")
    cmd_verify(cfg, p, sc, out);
  else if (command == "geometry")
    cmd_geometry(cfg, out);
  else
    fail(ErrorKind::validation, "unknown command '" + command + "'");
}

}  // namespace dhl::cli
