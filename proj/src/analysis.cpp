#include "sandflux/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sandflux {

CellField recover_potential(const FluxField& W, const CellField& f, const CellField& u0, double t,
                            const Grid& grid) {
  const CellField div = divergence(W, grid);
  CellField u(grid);
  for (std::size_t c = 0; c < u.size(); ++c) u[c] = u0[c] + t * f[c] - div[c];
  return u;
}

CellField transport_density(const FluxField& q, const CellField& k, const Grid& grid,
                            double /*eps*/) {
  CellField a = cell_speed(q, grid, 0.0);
  for (std::size_t c = 0; c < a.size(); ++c) a[c] /= k[c];
  return a;
}

CellField slope_field(const CellField& u, const Grid& grid) {
  CellField slope(grid);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      double m = 0.0;
      const double uc = u(i, j);
      if (i > 0) m = std::max(m, std::abs(u(i - 1, j) - uc));
      if (i + 1 < grid.nx) m = std::max(m, std::abs(u(i + 1, j) - uc));
      if (j > 0) m = std::max(m, std::abs(u(i, j - 1) - uc));
      if (j + 1 < grid.ny) m = std::max(m, std::abs(u(i, j + 1) - uc));
      slope(i, j) = m / grid.h;
    }
  }
  return slope;
}

CellField gradient_magnitude(const CellField& u, const Grid& grid) {
  CellField grad(grid);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      double gx = 0.0;
      int nx = 0;
      if (i > 0) { gx += u(i, j) - u(i - 1, j); ++nx; }
      if (i + 1 < grid.nx) { gx += u(i + 1, j) - u(i, j); ++nx; }
      double gy = 0.0;
      int ny = 0;
      if (j > 0) { gy += u(i, j) - u(i, j - 1); ++ny; }
      if (j + 1 < grid.ny) { gy += u(i, j + 1) - u(i, j); ++ny; }
      gx = nx > 0 ? gx / (nx * grid.h) : 0.0;
      gy = ny > 0 ? gy / (ny * grid.h) : 0.0;
      grad(i, j) = std::hypot(gx, gy);
    }
  }
  return grad;
}

DiagnosticThresholds DiagnosticThresholds::defaults(double k_base, const Grid& grid) {
  DiagnosticThresholds t;
  t.tol_slope = 0.05 * k_base + 2.0 * grid.h;
  t.theta_a = 0.05;
  return t;
}

DiagnosticsReport diagnostics(const FluxField& q, const CellField& u, const CellField& f,
                              const CellField& k, const Grid& grid,
                              const DiagnosticThresholds& thresholds) {
  DiagnosticsReport r;
  const std::size_t n = grid.cell_count();

  const CellField div = divergence(q, grid);
  for (std::size_t c = 0; c < n; ++c) {
    r.div_residual_inf = std::max(r.div_residual_inf, std::abs(div[c] - f[c]));
  }

  const CellField a = transport_density(q, k, grid);
  r.min_a = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < n; ++c) {
    r.min_a = std::min(r.min_a, a[c]);
    r.max_a = std::max(r.max_a, a[c]);
    r.total_cost += k[c] * a[c];
    r.mass_balance += f[c];
  }
  r.total_cost *= grid.cell_area();
  r.mass_balance *= grid.cell_area();

  // Face pairs are checked against the mean of the two slope bounds, which is
  // the bound the face update enforces at equilibrium.
  std::size_t slope_bad = 0;
  r.max_slope_excess = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      double worst = -std::numeric_limits<double>::infinity();
      auto visit = [&](int i1, int j1) {
        const double s = std::abs(u(i1, j1) - u(i, j)) / grid.h;
        worst = std::max(worst, s - 0.5 * (k(i, j) + k(i1, j1)));
      };
      if (i > 0) visit(i - 1, j);
      if (i + 1 < grid.nx) visit(i + 1, j);
      if (j > 0) visit(i, j - 1);
      if (j + 1 < grid.ny) visit(i, j + 1);
      r.max_slope_excess = std::max(r.max_slope_excess, worst);
      if (worst > thresholds.tol_slope) ++slope_bad;
    }
  }

  const CellField grad = gradient_magnitude(u, grid);
  std::size_t comp_bad = 0;
  const double a_cut = thresholds.theta_a * r.max_a;
  for (std::size_t c = 0; c < n; ++c) {
    if (r.max_a > 0.0 && a[c] > a_cut && grad[c] < k[c] - thresholds.tol_slope) ++comp_bad;
  }

  r.slope_violation_fraction = static_cast<double>(slope_bad) / static_cast<double>(n);
  r.complementarity_violation_fraction = static_cast<double>(comp_bad) / static_cast<double>(n);
  return r;
}

}  // namespace sandflux
