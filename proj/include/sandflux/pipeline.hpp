#pragma once

#include <filesystem>
#include <iosfwd>

#include "sandflux/analysis.hpp"
#include "sandflux/config.hpp"
#include "sandflux/solver.hpp"

namespace sandflux {

struct PreparedProblem {
  ProblemFields fields;
  SolverParams params;  ///< eps resolved
};

/// Rasterizes and balances the sources, builds k and u0. Relative u0 paths
/// are resolved against `base_dir`.
PreparedProblem prepare_problem(const RunConfig& config, const std::filesystem::path& base_dir = {});

struct RunOutput {
  PreparedProblem problem;
  SolveResult result;
  DiagnosticThresholds thresholds;
  DiagnosticsReport report;
  double tol_div = 0.0;  ///< absolute divergence gate
};

RunOutput solve_config(const RunConfig& config, const std::filesystem::path& base_dir = {});

/// Writes the enabled output files into `out_dir` (created if missing).
void export_fields(const RunOutput& output, const RunConfig& config,
                   const std::filesystem::path& out_dir);

/// Creates `dir` and checks that a file can be written there.
void ensure_writable_dir(const std::filesystem::path& dir);

/// Whole pipeline. Returns 0 when converged, 2 when not, 1 on error (the
/// message goes to `err`). Progress lines go to `log`.
int run(const RunConfig& config, const std::filesystem::path& base_dir, std::ostream& log,
        std::ostream& err);

}  // namespace sandflux
