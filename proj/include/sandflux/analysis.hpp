#pragma once

#include "sandflux/grid.hpp"

namespace sandflux {

/// u = u0 + t f - div W.
CellField recover_potential(const FluxField& W, const CellField& f, const CellField& u0, double t,
                            const Grid& grid);

/// a = |q| / k using the unregularized cell-sampled magnitude. `eps` is
/// accepted for symmetry with cell_speed and ignored.
CellField transport_density(const FluxField& q, const CellField& k, const Grid& grid,
                            double eps = 0.0);

/// Largest face-neighbor difference quotient |u_c' - u_c| / h per cell.
CellField slope_field(const CellField& u, const Grid& grid);

/// Cell-centered gradient magnitude built from face difference quotients
/// (the two faces of each axis averaged, one-sided at the boundary).
CellField gradient_magnitude(const CellField& u, const Grid& grid);

struct DiagnosticThresholds {
  double tol_slope = 0.05;
  double theta_a = 0.05;

  /// tol_slope = 0.05 k_base + 2h, theta_a = 0.05.
  static DiagnosticThresholds defaults(double k_base, const Grid& grid);
};

struct DiagnosticsReport {
  double div_residual_inf = 0.0;
  double slope_violation_fraction = 0.0;
  double complementarity_violation_fraction = 0.0;
  double total_cost = 0.0;
  double mass_balance = 0.0;  ///< sum f_c h^2
  double min_a = 0.0;
  double max_a = 0.0;
  double max_slope_excess = 0.0;  ///< max over face pairs of slope - k_pair
};

DiagnosticsReport diagnostics(const FluxField& q, const CellField& u, const CellField& f,
                              const CellField& k, const Grid& grid,
                              const DiagnosticThresholds& thresholds);

}  // namespace sandflux
