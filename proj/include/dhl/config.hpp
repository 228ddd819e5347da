#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dhl/error.hpp"
#include "dhl/smallmat.hpp"

namespace dhl::cli {

/// Flat key=value configuration with bracketed sections. Unknown sections or
/// keys are rejected; serialize() emits the canonical form, which re-parses
/// to an identical configuration.
struct RunConfig {
  // [problem]
  std::string kind = "hessian";  // hessian | curvature | hyperbolic
  int n = 2;
  int k = 2;
  std::string f;
  std::string phi = "0";
  std::string usub;  // required for the hyperbolic kind
  std::string domain = "disk";  // rectangle | disk | ellipsoid-section | sublevel
  Vec center;
  double radius = 1.0;
  Vec lo, hi;          // rectangle corners
  Vec coeffs;          // ellipsoid-section coefficients
  std::string levelset;  // sublevel expression (> 0 inside)
  Vec box_lo, box_hi;    // sublevel bounding box
  int resolution = 65;

  // [solver]
  std::vector<double> eps_schedule{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  double newton_tol_abs = 1e-9;
  double newton_tol_rel = 1e-12;
  int max_newton_iters = 50;
  double damping_min = 1.0 / 1024.0;
  double lm_shift = 1e-8;
  std::string theta0 = "auto";
  double barrier_delta = 1e-4;
  std::string rhs_mode = "feps";  // feps | raw | jreg
  long jreg = 10;

  // [verify]
  std::string alpha = "auto";
  double hyperbolic_alpha = 4.0;
  double factor = 2.0;
  std::string pogorelov_c = "auto";

  // [geometry]
  std::string geometry_expr;
  std::vector<Vec> geometry_points;

  // [output]
  std::string out_dir = "out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::string& path);
  std::string serialize() const;

  /// Dotted override, e.g. set("problem.resolution", "65").
  void set(const std::string& dotted_key, const std::string& value);

  /// Structural validation (kinds, ranges, expression syntax); throws
  /// Error(validation).
  void validate() const;
};

}  // namespace dhl::cli
