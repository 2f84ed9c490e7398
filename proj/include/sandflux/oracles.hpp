#pragma once

#include <vector>

#include "sandflux/grid.hpp"

namespace sandflux {

/// Source on [a_start, a_end] with the given density, sink on
/// [b_start, b_end] with the density that balances it.
struct Layout1D {
  double a_start = 0.0;
  double a_end = 1.0;
  double b_start = 2.0;
  double b_end = 3.0;
  double density = 1.0;
};

/// Stationary state of the translation-invariant two-block problem.
class Oracle1D {
 public:
  Oracle1D(const Layout1D& layout, double k);

  double sink_density() const { return sink_density_; }
  double f(double x) const;
  /// Running integral of f.
  double q(double x) const;
  double a(double x) const { return q(x) / k_; }
  /// Potential with u(a_start) = 0 and slope -k across the transport region,
  /// extended by constants outside it.
  double u(double x) const;
  /// k * integral of a dx per unit transverse length.
  double total_cost() const { return total_cost_; }

 private:
  Layout1D l_;
  double k_;
  double sink_density_;
  double total_cost_;
};

/// Uniform source rho on the disk r < R1, balancing sink on R1 < r < R2.
class OracleRadial {
 public:
  OracleRadial(double r1, double r2, double k, double rho = 1.0);

  double sink_density() const;
  double f(double r) const;
  /// Radial flux component.
  double q(double r) const;
  double a(double r) const { return q(r) / k_; }
  /// Integral of q_r over the plane.
  double total_cost() const;

 private:
  double r1_, r2_, k_, rho_;
};

struct McfArc {
  std::size_t from = 0;  ///< cell index
  std::size_t to = 0;
  double flow = 0.0;
  double unit_cost = 0.0;
};

struct McfResult {
  double cost = 0.0;
  std::vector<McfArc> edge_flows;  ///< arcs with positive flow only
};

/// Exact min-cost flow on the 8-neighbor cell graph with supplies f h^2 and
/// arc costs h k_mean (axis) or h sqrt(2) k_mean (diagonal).
McfResult mcf_reference(const CellField& f, const CellField& k, const Grid& grid);

}  // namespace sandflux
