#include "sandflux/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "sandflux/io.hpp"

namespace sandflux {

namespace {

bool close(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * scale; }

CellField load_u0(const std::filesystem::path& path, const Grid& grid) {
  const CellFieldFile file = read_cell_field(path);
  const double scale = grid.h * std::max(grid.nx, grid.ny);
  if (file.grid.nx != grid.nx || file.grid.ny != grid.ny || !close(file.grid.h, grid.h, grid.h) ||
      !close(file.grid.x0, grid.x0, scale) || !close(file.grid.y0, grid.y0, scale)) {
    throw Error("u0 file '" + path.string() + "' does not match the problem grid");
  }
  return file.field;
}

}  // namespace

PreparedProblem prepare_problem(const RunConfig& config, const std::filesystem::path& base_dir) {
  config.validate();
  const Grid grid = make_grid(config.problem.domain, config.resolution);

  CellField f = rasterize_sources(config.problem, grid, config.subsample);
  const MassSplit mass = mass_split(f, grid);
  // f = 0 is a valid (trivial) problem; one-sided data is rejected by balance_mass
  if (mass.positive > 0.0 || mass.negative > 0.0) f = balance_mass(f, grid);
  if (config.margin_check) check_source_margin(f, grid, 2);

  CellField k = rasterize_k(config.problem, grid);
  CellField u0(grid);
  if (!config.problem.u0_path.empty()) {
    std::filesystem::path path = config.problem.u0_path;
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    u0 = load_u0(path, grid);
  }

  PreparedProblem out{ProblemFields{grid, std::move(f), std::move(u0), std::move(k)}, config.solver};
  out.params.eps = config.eps ? *config.eps : default_eps(out.fields.f, grid);
  return out;
}

RunOutput solve_config(const RunConfig& config, const std::filesystem::path& base_dir) {
  RunOutput out{prepare_problem(config, base_dir), {}, {}, {}, 0.0};
  const ProblemFields& pf = out.problem.fields;
  out.result = run_to_stationary(pf, out.problem.params);

  out.thresholds = DiagnosticThresholds::defaults(config.problem.k_base, pf.grid);
  if (config.tol_slope) out.thresholds.tol_slope = *config.tol_slope;
  out.thresholds.theta_a = config.theta_a;
  out.report = diagnostics(out.result.state.q, out.result.u, pf.f, pf.k, pf.grid, out.thresholds);
  out.tol_div = config.tol_div * pf.f.max_abs();
  return out;
}

void ensure_writable_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  const std::filesystem::path probe = dir / ".sandflux_write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw Error("output directory '" + dir.string() + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

void export_fields(const RunOutput& output, const RunConfig& config,
                   const std::filesystem::path& out_dir) {
  ensure_writable_dir(out_dir);
  const ProblemFields& pf = output.problem.fields;
  const Grid& g = pf.grid;
  if (config.write_fields) {
    write_cell_field(out_dir / "u.csv", output.result.u, g);
    write_cell_field(out_dir / "a.csv", output.result.a, g);
    write_cell_field(out_dir / "f.csv", pf.f, g);
    write_cell_field(out_dir / "k.csv", pf.k, g);
    write_flux_fields(out_dir / "qx.csv", out_dir / "qy.csv", output.result.state.q, g);
  }
  if (config.write_history) write_history(out_dir / "history.csv", output.result.state.history);
  if (config.write_diagnostics) {
    const DiagnosticsReport& r = output.report;
    const auto n = format_number;
    write_key_values(out_dir / "diagnostics.txt",
                     {
                         {"converged", output.result.converged ? "true" : "false"},
                         {"steps", std::to_string(output.result.steps)},
                         {"t", n(output.result.state.t)},
                         {"nx", std::to_string(g.nx)},
                         {"ny", std::to_string(g.ny)},
                         {"h", n(g.h)},
                         {"eps", n(output.problem.params.eps)},
                         {"div_residual_inf", n(r.div_residual_inf)},
                         {"tol_div", n(output.tol_div)},
                         {"slope_violation_fraction", n(r.slope_violation_fraction)},
                         {"complementarity_violation_fraction", n(r.complementarity_violation_fraction)},
                         {"tol_slope", n(output.thresholds.tol_slope)},
                         {"theta_a", n(output.thresholds.theta_a)},
                         {"total_cost", n(r.total_cost)},
                         {"mass_balance", n(r.mass_balance)},
                         {"min_a", n(r.min_a)},
                         {"max_a", n(r.max_a)},
                         {"max_slope_excess", n(r.max_slope_excess)},
                     });
  }
}

int run(const RunConfig& config, const std::filesystem::path& base_dir, std::ostream& log,
        std::ostream& err) {
  try {
    ensure_writable_dir(config.out_dir);
    const RunOutput output = solve_config(config, base_dir);
    export_fields(output, config, config.out_dir);
    const Grid& g = output.problem.fields.grid;
    log << (output.result.converged ? "converged" : "not converged") << " after "
        << output.result.steps << " steps on " << g.nx << "x" << g.ny
        << " cells; total cost " << format_number(output.report.total_cost) << "\n";
    return output.result.converged ? 0 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sandflux
