#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sandflux/oracles.hpp"

using namespace sandflux;

namespace {

// Composite trapezoid rule; exact for piecewise-linear integrands whose kinks
// fall on nodes.
template <class Fn>
double trapezoid(Fn fn, double a, double b, int n) {
  const double dx = (b - a) / n;
  double s = 0.5 * (fn(a) + fn(b));
  for (int i = 1; i < n; ++i) s += fn(a + i * dx);
  return s * dx;
}

// Net outflow of every cell from the reported arcs.
std::vector<double> net_outflow(const McfResult& r, std::size_t n) {
  std::vector<double> out(n, 0.0);
  for (const McfArc& a : r.edge_flows) {
    out[a.from] += a.flow;
    out[a.to] -= a.flow;
  }
  return out;
}

}  // namespace

TEST_CASE("1D oracle on the unit layout") {
  const Oracle1D o({0.0, 1.0, 2.0, 3.0, 1.0}, 1.0);
  CHECK(o.sink_density() == 1.0);
  CHECK(o.f(0.5) == 1.0);
  CHECK(o.f(1.5) == 0.0);
  CHECK(o.f(2.5) == -1.0);
  CHECK(o.q(0.0) == 0.0);
  CHECK(o.q(0.5) == 0.5);
  CHECK(o.q(1.5) == 1.0);
  CHECK(o.q(2.5) == 0.5);
  CHECK(o.q(3.0) == 0.0);
  CHECK(o.q(-1.0) == 0.0);
  CHECK(o.u(-1.0) == 0.0);
  CHECK(o.u(1.5) == -1.5);
  CHECK(o.u(4.0) == -3.0);
  CHECK(o.total_cost() == 2.0);
}

TEST_CASE("1D oracle identities") {
  const Layout1D l{0.2, 0.9, 1.4, 2.8, 1.7};
  const Oracle1D o(l, 2.5);
  CHECK(o.sink_density() * (l.b_end - l.b_start) == doctest::Approx(l.density * (l.a_end - l.a_start)));
  // cost = k * integral of a
  const double integral = trapezoid([&](double x) { return o.a(x); }, 0.0, 2.8, 2800);
  CHECK(std::abs(2.5 * integral - o.total_cost()) <= 1e-12 * o.total_cost());
  // q' = f away from the breakpoints
  for (double x : {0.5, 1.1, 2.0, 2.5}) {
    const double d = 1e-6;
    CHECK((o.q(x + d) - o.q(x - d)) / (2 * d) == doctest::Approx(o.f(x)).epsilon(1e-7));
  }
  // u falls with slope k exactly where mass moves
  CHECK((o.u(1.2) - o.u(1.0)) / 0.2 == doctest::Approx(-2.5));
}

TEST_CASE("1D oracle scaling with k") {
  const Layout1D l{};
  const Oracle1D one(l, 1.0);
  const Oracle1D four(l, 4.0);
  for (double x : {0.3, 1.5, 2.2}) {
    CHECK(four.a(x) == doctest::Approx(one.a(x) / 4.0));
    CHECK(four.u(x) == doctest::Approx(4.0 * one.u(x)));
    CHECK(four.q(x) == one.q(x));
  }
  CHECK(four.total_cost() == one.total_cost());
}

TEST_CASE("1D oracle rejects bad layouts") {
  CHECK_THROWS_AS(Oracle1D({0.0, 2.0, 1.0, 3.0, 1.0}, 1.0), Error);
  CHECK_THROWS_AS(Oracle1D({2.0, 3.0, 0.0, 1.0, 1.0}, 1.0), Error);
  CHECK_THROWS_AS(Oracle1D({0.0, 0.0, 1.0, 2.0, 1.0}, 1.0), Error);
  CHECK_THROWS_AS(Oracle1D({}, 0.0), Error);
  CHECK_THROWS_AS(Oracle1D({0.0, 1.0, 2.0, 3.0, -1.0}, 1.0), Error);
  // touching blocks are allowed
  const Oracle1D touch({0.0, 1.0, 1.0, 2.0, 1.0}, 1.0);
  CHECK(touch.total_cost() == doctest::Approx(1.0));
}

TEST_CASE("radial oracle") {
  const OracleRadial o(0.25, 0.5, 1.0);
  CHECK(o.sink_density() == doctest::Approx(1.0 / 3.0));
  CHECK(o.total_cost() == doctest::Approx(0.043633).epsilon(1e-5));
  CHECK(o.q(0.25) == doctest::Approx(0.125));
  CHECK(o.q(0.5) == 0.0);
  CHECK(o.q(0.7) == 0.0);
  // (1/r) d(r q)/dr = f
  for (double r : {0.1, 0.2, 0.3, 0.45}) {
    const double d = 1e-6;
    const double div = ((r + d) * o.q(r + d) - (r - d) * o.q(r - d)) / (2 * d * r);
    CHECK(div == doctest::Approx(o.f(r)).epsilon(1e-6));
  }
  const double cost = 2.0 * std::numbers::pi *
                      (trapezoid([&](double r) { return r * o.q(r); }, 0.0, 0.25, 20000) +
                       trapezoid([&](double r) { return r * o.q(r); }, 0.25, 0.5, 20000));
  CHECK(cost == doctest::Approx(o.total_cost()).epsilon(1e-8));
  CHECK(OracleRadial(0.25, 0.5, 3.0).a(0.3) == doctest::Approx(o.a(0.3) / 3.0));
  CHECK_THROWS_AS(OracleRadial(0.5, 0.25, 1.0), Error);
  CHECK_THROWS_AS(OracleRadial(0.25, 0.5, 0.0), Error);
}

TEST_CASE("min-cost flow between two atoms is the octile distance") {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> pick(0, 11);
  for (int trial = 0; trial < 50; ++trial) {
    const Grid g(12, 12, 0.5);
    CellField f(g);
    const int i0 = pick(rng), j0 = pick(rng);
    int i1 = pick(rng), j1 = pick(rng);
    if (i0 == i1 && j0 == j1) i1 = (i1 + 1) % 12;
    f(i0, j0) = 4.0;
    f(i1, j1) = -4.0;
    const McfResult r = mcf_reference(f, CellField(g, 1.0), g);
    const int di = std::abs(i1 - i0), dj = std::abs(j1 - j0);
    const double octile = std::max(di, dj) + (std::numbers::sqrt2 - 1.0) * std::min(di, dj);
    const double mass = 4.0 * g.cell_area();
    CHECK(r.cost == doctest::Approx(mass * g.h * octile).epsilon(1e-12));
    // octile length overestimates the straight line by at most 8.3%
    CHECK(r.cost >= mass * g.h * std::hypot(di, dj) * (1.0 - 1e-12));
    CHECK(r.cost <= 1.0824 * mass * g.h * std::hypot(di, dj));
  }
  const Grid g = Grid::unchecked(10, 1, 1.0);
  CellField f(g);
  f(0, 0) = 1.0;
  f(5, 0) = -1.0;
  CHECK(mcf_reference(f, CellField(g, 1.0), g).cost == doctest::Approx(5.0));
}

TEST_CASE("min-cost flow on random supplies") {
  std::mt19937 rng(23);
  const Grid g(16, 12, 0.25);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    CellField f(g);
    double sum = 0.0;
    for (double& v : f.values()) {
      v = dist(rng) > 0.6 ? dist(rng) : 0.0;
      sum += v;
    }
    f(3, 3) -= sum;  // balance
    const CellField k(g, 1.5);
    const McfResult r = mcf_reference(f, k, g);

    const std::vector<double> out = net_outflow(r, g.cell_count());
    double total = 0.0;
    for (std::size_t c = 0; c < out.size(); ++c) {
      CHECK(std::abs(out[c] - f[c] * g.cell_area()) <= 1e-12);
      total += std::abs(f[c]) * g.cell_area();
    }
    double cost = 0.0;
    for (const McfArc& a : r.edge_flows) {
      CHECK(a.flow > 0.0);
      cost += a.flow * a.unit_cost;
    }
    CHECK(cost == doctest::Approx(r.cost).epsilon(1e-12));
    // any k-Lipschitz linear potential bounds the cost from below
    for (double angle = 0.0; angle < 6.3; angle += 0.5) {
      double bound = 0.0;
      for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
          const Point p = g.cell_center(i, j);
          bound -= 1.5 * (std::cos(angle) * p.x + std::sin(angle) * p.y) * f(i, j) * g.cell_area();
        }
      }
      CHECK(r.cost >= bound - 1e-12);
    }
    // and shipping everything through one cell bounds it from above
    double star = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const int di = std::abs(i - 8), dj = std::abs(j - 6);
        const double octile = std::max(di, dj) + (std::numbers::sqrt2 - 1.0) * std::min(di, dj);
        star += std::abs(f(i, j)) * g.cell_area() * 1.5 * g.h * octile;
      }
    }
    CHECK(r.cost <= star * (1.0 + 1e-12));
    CHECK(total > 0.0);
  }
}

TEST_CASE("min-cost flow routes around an obstacle") {
  const Grid g = Grid::unchecked(5, 3, 1.0);
  CellField f(g);
  f(0, 1) = 1.0;
  f(4, 1) = -1.0;
  CellField k(g, 1.0);
  k(2, 0) = 1e6;
  k(2, 1) = 1e6;
  const McfResult r = mcf_reference(f, k, g);
  CHECK(r.cost == doctest::Approx(2.0 + 2.0 * std::numbers::sqrt2).epsilon(1e-12));
  for (const McfArc& a : r.edge_flows) {
    CHECK(a.from != g.cell_index(2, 1));
    CHECK(a.to != g.cell_index(2, 1));
  }
}

TEST_CASE("min-cost flow input checks") {
  const Grid g(4, 4, 1.0);
  CellField f(g);
  CHECK(mcf_reference(f, CellField(g, 1.0), g).cost == 0.0);
  f(0, 0) = 1.0;
  CHECK_THROWS_WITH_AS(mcf_reference(f, CellField(g, 1.0), g), "unbalanced supplies", Error);
}
