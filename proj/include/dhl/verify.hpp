#pragma once

#include <optional>
#include <vector>

#include "dhl/fd.hpp"
#include "dhl/grid.hpp"

namespace dhl::verify {

/// Default interior-estimate exponents: 2 for k = 2 and k - 1 beyond for the
/// Hessian kind; max(3, k - 1) for the curvature kind.
double default_alpha_hessian(int k);
double default_alpha_curvature(int k);

struct PogorelovRecord {
  double eps = 0.0;    // filled by the sweep
  double alpha = 0.0;
  double quantity = 0.0;
  int argmax_node = -1;
};

/// sup over interior nodes of (ubar - u)^alpha * max(lambda_max(D2u), 0).
PogorelovRecord pogorelov_hessian(const grid::ScalarField& u, const grid::ScalarField& ubar,
                                  int k, std::optional<double> alpha_override = {});

/// sup of (ubar - u)^alpha * |h|_F with h = D2u / w.
PogorelovRecord pogorelov_curvature(const grid::ScalarField& u, const grid::ScalarField& ubar,
                                    int k, std::optional<double> alpha_override = {});

/// sup of max(ubar^2 - u^2 - c, 0)^alpha * |h_tilde|_F; alpha is supplied by
/// the caller (configuration, default 4).
PogorelovRecord pogorelov_hyperbolic(const grid::ScalarField& u, const grid::ScalarField& ubar,
                                     double c, double alpha);

/// Gradient bound for nonnegative psi:
/// |D psi| <= max(|D psi| / dist, 1 + sup lambda_max(D2 psi)) sqrt(psi).
/// `violation` is the worst excess of the left side over the right;
/// `slack` = 10 h (1 + sup lambda_max) covers the discrete derivatives.
struct BlockiReport {
  double violation = 0.0;
  double slack = 0.0;
  int argmax_node = -1;
};

BlockiReport blocki_check(const grid::ScalarField& psi, const grid::ScalarField& dist);

/// Fitted constant B = sup (ubar - u) / max(dist, h); callers check it
/// against 2 sup |D(ubar - u)|.
double distance_comparison(const grid::ScalarField& ubar, const grid::ScalarField& u,
                           const grid::ScalarField& dist);

struct SweepReport {
  std::vector<PogorelovRecord> records;
  bool bounded = false;
  double ratio = 0.0;  // max quantity over the quantity at the largest eps
};

/// Bounded iff the largest quantity stays within `factor` of the first
/// record and the last three records stay within `factor` of each other.
SweepReport sweep_verdict(std::vector<PogorelovRecord> records, double factor = 2.0);

}  // namespace dhl::verify
