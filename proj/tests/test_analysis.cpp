#include <cmath>
#include <random>

#include "doctest.h"
#include "sandflux/analysis.hpp"
#include "sandflux/oracles.hpp"
#include "sandflux/solver.hpp"
#include "support.hpp"

using namespace sandflux;

namespace {

CellField linear_field(const Grid& g, double ax, double ay) {
  CellField u(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Point p = g.cell_center(i, j);
      u(i, j) = ax * p.x + ay * p.y;
    }
  }
  return u;
}

const SolveResult& solved_two_block() {
  static const SolveResult r = [] {
    const ProblemFields pf = testing::two_block_problem(16);
    SolverParams p;
    p.eps = default_eps(pf.f, pf.grid);
    return run_to_stationary(pf, p);
  }();
  return r;
}

}  // namespace

TEST_CASE("recover_potential") {
  std::mt19937 rng(3);
  const Grid g(7, 5, 0.2);
  const CellField f = testing::random_cells(g, rng, -1.0, 1.0);
  const CellField u0 = testing::random_cells(g, rng, -0.1, 0.1);

  const CellField plain = recover_potential(FluxField(g), f, u0, 2.5, g);
  for (std::size_t c = 0; c < plain.size(); ++c) CHECK(plain[c] == doctest::Approx(u0[c] + 2.5 * f[c]));

  const FluxField W = testing::random_flux(g, rng);
  const CellField u = recover_potential(W, f, u0, 2.5, g);
  const CellField div = divergence(W, g);
  for (std::size_t c = 0; c < u.size(); ++c) {
    CHECK(u[c] == doctest::Approx(u0[c] + 2.5 * f[c] - div[c]));
  }
}

TEST_CASE("recover_potential is linear and starts at u0") {
  std::mt19937 rng(4);
  const Grid g(6, 6, 0.3);
  const CellField f1 = testing::random_cells(g, rng, -1.0, 1.0);
  const CellField f2 = testing::random_cells(g, rng, -1.0, 1.0);
  const CellField u1 = testing::random_cells(g, rng, -1.0, 1.0);
  const CellField u2 = testing::random_cells(g, rng, -1.0, 1.0);
  const FluxField w1 = testing::random_flux(g, rng);
  const FluxField w2 = testing::random_flux(g, rng);
  CellField f(g), u0(g);
  FluxField w(g);
  for (std::size_t c = 0; c < f.size(); ++c) {
    f[c] = 2.0 * f1[c] - f2[c];
    u0[c] = 2.0 * u1[c] - u2[c];
  }
  for (std::size_t n = 0; n < w.qx_values().size(); ++n) {
    w.qx_values()[n] = 2.0 * w1.qx_values()[n] - w2.qx_values()[n];
  }
  for (std::size_t n = 0; n < w.qy_values().size(); ++n) {
    w.qy_values()[n] = 2.0 * w1.qy_values()[n] - w2.qy_values()[n];
  }
  const CellField a = recover_potential(w1, f1, u1, 1.7, g);
  const CellField b = recover_potential(w2, f2, u2, 1.7, g);
  const CellField combined = recover_potential(w, f, u0, 1.7, g);
  for (std::size_t c = 0; c < a.size(); ++c) {
    CHECK(combined[c] == doctest::Approx(2.0 * a[c] - b[c]));
  }
  CHECK(recover_potential(FluxField(g), f1, u1, 0.0, g) == u1);
}

TEST_CASE("adding a constant to u0 only shifts u") {
  // compared over a fixed number of steps; the stopping gate scales with max|u|.
  // Inner face solves stop at a relative slope of 1e-8, which sets the tolerance.
  const ProblemFields base_pf = testing::two_block_problem(8);
  ProblemFields shifted_pf = base_pf;
  for (double& v : shifted_pf.u0.values()) v += 0.75;
  SolverParams p;
  p.eps = default_eps(base_pf.f, base_pf.grid);
  SolveState base = SolveState::initial(base_pf);
  SolveState shifted = SolveState::initial(shifted_pf);
  for (int n = 0; n < 30; ++n) {
    advance_step(base, base_pf, p);
    advance_step(shifted, shifted_pf, p);
  }
  const double scale = base.q.max_abs();
  REQUIRE(scale > 0.0);
  for (std::size_t n = 0; n < base.q.qx_values().size(); ++n) {
    CHECK(std::abs(shifted.q.qx_values()[n] - base.q.qx_values()[n]) <= 1e-7 * scale);
  }
  for (std::size_t n = 0; n < base.q.qy_values().size(); ++n) {
    CHECK(std::abs(shifted.q.qy_values()[n] - base.q.qy_values()[n]) <= 1e-7 * scale);
  }
  const double u_scale = base.u.max_abs();
  for (std::size_t c = 0; c < base.u.size(); ++c) {
    CHECK(std::abs(shifted.u[c] - base.u[c] - 0.75) <= 1e-7 * u_scale);
  }
}

TEST_CASE("transport_density of uniform flux") {
  const Grid g(5, 5, 0.1);
  FluxField q(g);
  for (double& v : q.qx_values()) v = 3.0;
  for (double& v : q.qy_values()) v = 4.0;
  const CellField a = transport_density(q, CellField(g, 2.0), g);
  for (double v : a.values()) CHECK(v == doctest::Approx(2.5));
  const CellField zero = transport_density(FluxField(g), CellField(g, 2.0), g, 1e-3);
  CHECK(zero.max_abs() == 0.0);
}

TEST_CASE("slope and gradient of linear surfaces") {
  const Grid g(8, 6, 0.25);
  const CellField flat(g, 7.0);
  CHECK(slope_field(flat, g).max_abs() == 0.0);
  CHECK(gradient_magnitude(flat, g).max_abs() == 0.0);

  const CellField tilted = linear_field(g, 3.0, -4.0);
  const CellField slope = slope_field(tilted, g);
  const CellField grad = gradient_magnitude(tilted, g);
  for (std::size_t c = 0; c < slope.size(); ++c) {
    CHECK(slope[c] == doctest::Approx(4.0));
    CHECK(grad[c] == doctest::Approx(5.0));
  }
}

TEST_CASE("diagnostics of the empty state") {
  const Grid g(6, 6, 0.1);
  const CellField zero(g);
  const DiagnosticsReport r = diagnostics(FluxField(g), zero, zero, CellField(g, 1.0), g,
                                          DiagnosticThresholds::defaults(1.0, g));
  CHECK(r.div_residual_inf == 0.0);
  CHECK(r.slope_violation_fraction == 0.0);
  CHECK(r.complementarity_violation_fraction == 0.0);
  CHECK(r.total_cost == 0.0);
  CHECK(r.mass_balance == 0.0);
  CHECK(r.min_a == 0.0);
  CHECK(r.max_a == 0.0);
}

TEST_CASE("default thresholds") {
  const DiagnosticThresholds t = DiagnosticThresholds::defaults(2.0, Grid(10, 10, 0.01));
  CHECK(t.tol_slope == doctest::Approx(0.12));
  CHECK(t.theta_a == doctest::Approx(0.05));
}

TEST_CASE("diagnostics flag steep surfaces and idle transport") {
  const Grid g(10, 10, 0.1);
  const CellField k(g, 1.0);
  const CellField f(g);
  const DiagnosticThresholds th = DiagnosticThresholds::defaults(1.0, g);

  const DiagnosticsReport steep = diagnostics(FluxField(g), linear_field(g, 2.0, 0.0), f, k, g, th);
  CHECK(steep.slope_violation_fraction == 1.0);
  CHECK(steep.max_slope_excess == doctest::Approx(1.0));

  const DiagnosticsReport ok = diagnostics(FluxField(g), linear_field(g, 0.6, 0.8), f, k, g, th);
  CHECK(ok.slope_violation_fraction == 0.0);
  CHECK(ok.max_slope_excess == doctest::Approx(-0.2));

  // transport on a flat surface violates complementarity everywhere it flows
  FluxField q(g);
  for (double& v : q.qx_values()) v = 1.0;
  const DiagnosticsReport idle = diagnostics(q, CellField(g), f, k, g, th);
  CHECK(idle.complementarity_violation_fraction == 1.0);
  const DiagnosticsReport busy = diagnostics(q, linear_field(g, -1.0, 0.0), f, k, g, th);
  CHECK(busy.complementarity_violation_fraction == 0.0);
  CHECK(busy.total_cost == doctest::Approx(1.0));
}

TEST_CASE("converged two-block solution passes the diagnostics") {
  const SolveResult& r = solved_two_block();
  REQUIRE(r.converged);
  const ProblemFields pf = testing::two_block_problem(16);
  const DiagnosticThresholds th = DiagnosticThresholds::defaults(1.0, pf.grid);
  const DiagnosticsReport d = diagnostics(r.state.q, r.u, pf.f, pf.k, pf.grid, th);
  CHECK(d.div_residual_inf <= 1e-3 * pf.f.max_abs());
  CHECK(d.slope_violation_fraction <= 0.01);
  CHECK(d.complementarity_violation_fraction <= 0.05);
  CHECK(std::abs(d.mass_balance) <= 1e-12);
  CHECK(d.min_a >= 0.0);
  CHECK(d.total_cost == doctest::Approx(Oracle1D({0.0, 1.0, 2.0, 3.0, 1.0}, 1.0).total_cost())
                            .epsilon(0.05));

  // between the blocks the surface falls with slope k
  const CellField grad = gradient_magnitude(r.u, pf.grid);
  for (int i = 17; i < 31; ++i) CHECK(grad(i, 8) == doctest::Approx(1.0).epsilon(0.05));

  // the potential is the divergence of the accumulated flux
  const CellField u = recover_potential(r.state.W, pf.f, pf.u0, r.state.t, pf.grid);
  for (std::size_t c = 0; c < u.size(); ++c) CHECK(u[c] == doctest::Approx(r.u[c]).epsilon(1e-9));
}

TEST_CASE("corrupted solutions fail the diagnostics") {
  const SolveResult& r = solved_two_block();
  const ProblemFields pf = testing::two_block_problem(16);
  const DiagnosticThresholds th = DiagnosticThresholds::defaults(1.0, pf.grid);
  const DiagnosticsReport clean = diagnostics(r.state.q, r.u, pf.f, pf.k, pf.grid, th);

  std::mt19937 rng(5);
  CellField noisy = r.u;
  std::uniform_real_distribution<double> noise(-10.0 * pf.grid.h, 10.0 * pf.grid.h);
  for (double& v : noisy.values()) v += noise(rng);
  const DiagnosticsReport rough = diagnostics(r.state.q, noisy, pf.f, pf.k, pf.grid, th);
  CHECK(rough.slope_violation_fraction > clean.slope_violation_fraction + 0.1);

  FluxField bent = r.state.q;
  bent.qx(20, 8) += 0.5;
  const DiagnosticsReport leaky = diagnostics(bent, r.u, pf.f, pf.k, pf.grid, th);
  CHECK(leaky.div_residual_inf >= 0.5 / pf.grid.h - clean.div_residual_inf);
}
