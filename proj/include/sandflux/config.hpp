#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sandflux/geometry.hpp"
#include "sandflux/solver.hpp"

namespace sandflux {

struct RunConfig {
  ProblemSpec problem;
  SolverParams solver;
  /// Unset means default_eps of the rasterized f.
  std::optional<double> eps;
  /// Cells along the shorter side of the domain box.
  int resolution = 64;
  int subsample = kDefaultSubsample;
  /// Reject sources within two cells of the grid boundary.
  bool margin_check = true;
  std::string out_dir = "out";
  bool write_fields = true;
  bool write_history = true;
  bool write_diagnostics = true;
  /// Divergence residual gate as a fraction of max|f|.
  double tol_div = 1e-3;
  std::optional<double> tol_slope;
  double theta_a = 0.05;
  std::string preset;

  void validate() const;
};

/// Names accepted by the `preset` key.
const std::vector<std::string>& preset_names();
/// Config text of a shipped preset; throws for unknown names.
const std::string& preset_text(const std::string& name);

/// Parses the line-based `key = value` format. A `preset` key (or
/// `preset_override`) is applied first and the remaining keys on top of it.
RunConfig parse_config(const std::string& text,
                       const std::optional<std::string>& preset_override = std::nullopt);

/// Applies the keys of `text` to an existing config.
void apply_config_text(RunConfig& config, const std::string& text);

/// Square grid covering the domain box with `resolution` cells on the short
/// side; the box is padded symmetrically to whole cells.
Grid make_grid(const Box& domain, int resolution);

}  // namespace sandflux
