#pragma once

#include <string>

#include "dhl/config.hpp"
#include "dhl/solver.hpp"

namespace dhl::cli {

/// Commands: solve (single Newton solve at the schedule head), sweep
/// (continuation + monitors + verdict), verify (recompute monitors from
/// dumped fields), geometry (pointwise curvature queries). Failures are
/// reported as Error; the C API maps their kinds onto exit codes.
void run(const RunConfig& cfg, const std::string& command,
         const std::string& out_dir_override);

/// Problem assembled from a validated configuration (expressions compiled,
/// domain constructed).
solver::Problem build_problem(const RunConfig& cfg);
solver::Config build_solver_config(const RunConfig& cfg);

}  // namespace dhl::cli
