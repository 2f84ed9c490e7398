#pragma once

#include <random>

#include "sandflux/geometry.hpp"
#include "sandflux/grid.hpp"
#include "sandflux/solver.hpp"

namespace sandflux::testing {

/// Uniform random values on interior faces, zero on the boundary.
inline FluxField random_flux(const Grid& g, std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  FluxField q(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) q.qx(i, j) = dist(rng);
  }
  for (int j = 1; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) q.qy(i, j) = dist(rng);
  }
  return q;
}

inline CellField random_cells(const Grid& g, std::mt19937& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  CellField c(g);
  for (double& v : c.values()) v = dist(rng);
  return c;
}

/// Source block [0,1]x[0,1], sink block [2,3]x[0,1], k = 1, on [0,3]x[0,1]
/// with `res` cells per unit length.
inline ProblemFields two_block_problem(int res) {
  ProblemSpec spec;
  spec.domain = {0.0, 0.0, 3.0, 1.0};
  spec.sources.push_back(ShapeSpec::rectangle(0.5, 0.5, 0.5, 0.5, 0.0, 1.0));
  spec.sources.push_back(ShapeSpec::rectangle(2.5, 0.5, 0.5, 0.5, 0.0, -1.0));
  const Grid g(3 * res, res, 1.0 / res);
  CellField f = balance_mass(rasterize_sources(spec, g), g);
  CellField k = rasterize_k(spec, g);
  return {g, std::move(f), CellField(g), std::move(k)};
}

/// A mid-solve state: random cumulative flux, random step flux, time t.
inline SolveState random_state(const ProblemFields& pf, const SolverParams& p, std::mt19937& rng,
                               double t = 3.0) {
  SolveState s = SolveState::initial(pf);
  s.W = random_flux(pf.grid, rng, 0.5);
  s.q = random_flux(pf.grid, rng, 0.5);
  s.t = t;
  const CellField div_w = divergence(s.W, pf.grid);
  const CellField div_q = divergence(s.q, pf.grid);
  for (std::size_t c = 0; c < s.F.size(); ++c) {
    s.F[c] = pf.u0[c] + t * pf.f[c];
    s.u[c] = s.F[c] - div_w[c] - p.dt * div_q[c];
  }
  return s;
}

}  // namespace sandflux::testing
