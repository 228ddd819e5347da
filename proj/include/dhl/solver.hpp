#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dhl/fd.hpp"
#include "dhl/graph_geometry.hpp"
#include "dhl/grid.hpp"
#include "dhl/hyperbolic_geometry.hpp"

namespace dhl::solver {

enum class Kind { hessian, curvature, hyperbolic };

constexpr const char* to_string(Kind k) {
  switch (k) {
    case Kind::hessian: return "hessian";
    case Kind::curvature: return "curvature";
    case Kind::hyperbolic: return "hyperbolic";
  }
  return "unknown";
}

/// Dirichlet problem data. `f` is the right-hand side f(x, u) >= 0; `usub`
/// is an optional subsolution (mandatory for the hyperbolic kind, where it
/// defines the level-set subdomains).
struct Problem {
  int n = 2;
  int k = 2;
  Kind kind = Kind::hessian;
  std::function<double(std::span<const double>, double)> f;
  grid::ScalarFn phi;
  grid::Domain dom = grid::Domain::rectangle({0, 0}, {1, 1});
  grid::ScalarFn usub;  // may be empty for hessian/curvature
};

struct Config {
  std::vector<double> eps_schedule{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  double newton_tol_abs = 1e-9;
  double newton_tol_rel = 1e-12;
  int max_newton_iters = 50;
  double damping_min = 1.0 / 1024.0;
  double lm_shift = 1e-8;
  double theta0 = 0.0;  // 0 = derive from the subsolution
  double barrier_delta = 1e-4;
};

/// C^2 cutoff: 1 on [0, theta0/4], 0 on [theta0/2, inf), quintic blend in
/// between with |eta'| <= 100/theta0 and |eta''| <= 100/theta0^2.
double cutoff_eta(double t, double theta0);

/// [f_tilde + eps * eta(f_tilde)]^{k-1}; strictly positive for eps > 0.
/// f_tilde is the (k-1)-th root of the right-hand side; k >= 2.
double f_epsilon(double f_tilde, double eps, int k, double theta0);

/// f + 1/j.
double j_regularized_rhs(double f, long j);

/// Right-hand side policy for residual evaluation and solves.
struct Rhs {
  enum class Mode { raw, f_eps, j_reg, field };
  Mode mode = Mode::raw;
  double eps = 0.0;
  long j = 1;
  double theta0 = 1.0;
  const grid::ScalarField* field = nullptr;  // nodal rhs, independent of u

  static Rhs raw() { return {}; }
  static Rhs feps(double eps, double theta0) {
    Rhs r;
    r.mode = Mode::f_eps;
    r.eps = eps;
    r.theta0 = theta0;
    return r;
  }
  static Rhs jreg(long j) {
    Rhs r;
    r.mode = Mode::j_reg;
    r.j = j;
    return r;
  }
  static Rhs nodal(const grid::ScalarField* f) {
    Rhs r;
    r.mode = Mode::field;
    r.field = f;
    return r;
  }
};

/// Nodewise sigma_k of the kind's matrix minus the (regularized) right-hand
/// side, evaluated from plain nodal stencils. Non-admissible nodes are
/// flagged, not thrown.
struct ResidualField {
  grid::ScalarField values;
  std::vector<int> inadmissible;  // interior indices with cone margin <= 0
  double min_margin = 0.0;
  double sup_rhs = 0.0;
};

ResidualField residual(const Problem& p, const grid::ScalarField& u, const Rhs& rhs);

struct SolveResult {
  grid::ScalarField u;
  double residual_inf = 0.0;
  double admissibility_margin = 0.0;
  int newton_iters = 0;
  bool converged = false;
};

/// Nonconvergence error carrying the last accepted iterate.
class SolveFailure : public Error {
 public:
  SolveFailure(const std::string& message, SolveResult last)
      : Error(ErrorKind::nonconvergence, message), last_(std::move(last)) {}
  const SolveResult& last() const { return last_; }

 private:
  SolveResult last_;
};

/// Damped Newton on the nodal system with the boundary data taken from the
/// warm start's grid. The linearization differentiates sigma_k in the second
/// derivatives only (gradient dependence lagged); steps halve until the cone
/// margin stays positive and the residual sup-norm does not increase.
SolveResult newton_solve(const Problem& p, const Config& c, const Rhs& rhs,
                         const grid::ScalarField& warm);

/// Smallest-amplitude quadratic below the boundary data whose operator value
/// dominates f_bound (+1 margin for the hessian kind).
struct Subsolution {
  grid::ScalarField field;
  double amplitude = 0.0;
  Vec center;
  double circumradius = 0.0;
};

Subsolution subsolution_quadratic(const Problem& p, const grid::GridPtr& g, double f_bound);

/// Initial guess: explicit usub when provided, the quadratic subsolution for
/// affine boundary data, otherwise a Poisson-type solve; in every case the
/// result is lifted by mu |x - x0|^2 / 2 (mu in {0, 2^-6, 2^-5, ...}) until
/// strictly admissible for the discrete operator.
grid::ScalarField initial_guess(const Problem& p, const Config& c, const grid::GridPtr& g,
                                double f_bound);

/// theta0 = max(1e-3, 0.5 * min over boundary nodes of f^{1/(k-1)} along the
/// subsolution graph), unless the config pins a value.
double default_theta0(const Problem& p, const Config& c, const grid::GridPtr& g,
                      const grid::ScalarField& usub);

struct ContinuationStep {
  double eps = 0.0;
  SolveResult result;
};

struct ContinuationResult {
  std::vector<ContinuationStep> steps;
  bool completed = false;
  double theta0 = 0.0;
  grid::GridPtr grid;              // solve grid (largest level-set domain for hyperbolic)
  grid::GridPtr base_grid;         // full-domain lattice
  grid::ScalarField subsolution;   // on base_grid
};

/// Continuation over the schedule: the hessian/curvature kinds regularize the
/// right-hand side at fixed domain; the hyperbolic kind walks the subsolution
/// level sets with boundary value eps and the raw right-hand side. Warm
/// starts chain along the schedule; a stalled step aborts the remainder.
ContinuationResult continuation_solve(const Problem& p, const Config& c, int resolution);

/// Solution of the kind's equation with constant right-hand side delta
/// (approximating the homogeneous problem) and the problem's boundary data,
/// reached by a decreasing chain of constant right-hand sides. For the
/// hyperbolic kind, `g` must be a level-set grid and the chain descends from
/// the horospherical value C(n,k).
grid::ScalarField homogeneous_barrier(const Problem& p, const Config& c,
                                      const grid::GridPtr& g, double delta);

/// max(0, sup(lower - mid), sup(mid - upper)) over mask nodes.
double comparison_check(const grid::ScalarField& lower, const grid::ScalarField& mid,
                        const grid::ScalarField& upper);

}  // namespace dhl::solver
