#include "sandflux/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sandflux/analysis.hpp"

namespace sandflux {

DivergenceError::DivergenceError(std::int64_t step)
    : Error("divergence of iteration at step " + std::to_string(step)), step_(step) {}

void SolverParams::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("dt must be positive");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error("eps must be positive");
  if (!(omega > 0.0 && omega < 2.0)) throw Error("omega must lie in (0, 2)");
  if (sweeps_per_step < 1) throw Error("sweeps_per_step must be at least 1");
  if (newton_iters < 1) throw Error("newton_iters must be at least 1");
  if (!(tol_stationary > 0.0)) throw Error("tol_stationary must be positive");
  if (stationary_patience < 1) throw Error("stationary_patience must be at least 1");
  if (max_steps < 1) throw Error("max_steps must be at least 1");
  if (levels < 0) throw Error("levels must be non-negative");
  if (coarse_sweeps < 0) throw Error("coarse_sweeps must be non-negative");
}

double default_eps(const CellField& f, const Grid& grid) {
  double mass = 0.0;
  for (double v : f.values()) mass += std::max(v, 0.0);
  mass *= grid.cell_area();
  const double diagonal = grid.h * std::hypot(grid.nx, grid.ny);
  return 1e-6 * (mass > 0.0 ? mass : 1.0) / diagonal;
}

SolveState SolveState::initial(const ProblemFields& fields) {
  SolveState s;
  s.W = FluxField(fields.grid);
  s.q = FluxField(fields.grid);
  s.F = fields.u0;
  s.u = fields.u0;
  return s;
}

double step_objective(const FluxField& q_trial, const SolveState& state,
                      const ProblemFields& fields, const SolverParams& p) {
  const Grid& g = fields.grid;
  FluxField total = state.W;
  total.axpy(p.dt, q_trial);
  const CellField div = divergence(total, g);
  double quad = 0.0;
  for (std::size_t c = 0; c < div.size(); ++c) {
    const double r = div[c] - state.F[c];
    quad += r * r;
  }
  quad *= 0.5 * g.cell_area();
  return quad + p.dt * phi_eps(q_trial, fields.k, g, p.eps);
}

namespace {

// Data of the (at most two) cells sharing one face. "lo" is the cell on the
// negative side of the face, "hi" the cell on the positive side.
struct FaceStencil {
  bool has_lo = false;
  bool has_hi = false;
  std::size_t lo = 0;
  std::size_t hi = 0;
  double other_lo = 0.0;  // opposite face of the lo cell, same axis
  double other_hi = 0.0;
  double trans_lo = 0.0;  // transverse face average of the lo cell
  double trans_hi = 0.0;
  double s0 = 0.0;        // current face value
};

FaceStencil stencil(const Edge& e, const FluxField& q, const Grid& g) {
  FaceStencil st;
  if (e.axis == Axis::x) {
    const int i = e.i;
    const int j = e.j;
    st.s0 = q.qx(i, j);
    if (i > 0) {
      st.has_lo = true;
      st.lo = g.cell_index(i - 1, j);
      st.other_lo = q.qx(i - 1, j);
      st.trans_lo = 0.5 * (q.qy(i - 1, j) + q.qy(i - 1, j + 1));
    }
    if (i < g.nx) {
      st.has_hi = true;
      st.hi = g.cell_index(i, j);
      st.other_hi = q.qx(i + 1, j);
      st.trans_hi = 0.5 * (q.qy(i, j) + q.qy(i, j + 1));
    }
  } else {
    const int i = e.i;
    const int j = e.j;
    st.s0 = q.qy(i, j);
    if (j > 0) {
      st.has_lo = true;
      st.lo = g.cell_index(i, j - 1);
      st.other_lo = q.qy(i, j - 1);
      st.trans_lo = 0.5 * (q.qx(i, j - 1) + q.qx(i + 1, j - 1));
    }
    if (j < g.ny) {
      st.has_hi = true;
      st.hi = g.cell_index(i, j);
      st.other_hi = q.qy(i, j + 1);
      st.trans_hi = 0.5 * (q.qx(i, j) + q.qx(i + 1, j));
    }
  }
  return st;
}

// Inner iterations continue past newton_iters until the slope residual drops
// below kInnerTol times its scale.
constexpr int kMaxInnerIters = 50;
constexpr double kInnerTol = 1e-8;

// J(s0 + delta) - J(s0) and its first two derivatives, all divided by dt.
struct LocalProblem {
  double h = 0.0;
  double dt = 0.0;
  double eps2 = 0.0;
  double u_lo = 0.0;
  double u_hi = 0.0;
  double k_lo = 0.0;  // zero when the cell does not exist
  double k_hi = 0.0;
  double m_lo0 = 0.0;  // face-normal cell averages at delta = 0
  double m_hi0 = 0.0;
  double t_lo2 = 0.0;  // transverse average squared plus eps^2
  double t_hi2 = 0.0;

  LocalProblem(const FaceStencil& st, const SolveState& state, const ProblemFields& fields,
               const SolverParams& p)
      : h(fields.grid.h), dt(p.dt), eps2(p.eps * p.eps) {
    if (st.has_lo) {
      u_lo = state.u[st.lo];
      k_lo = fields.k[st.lo];
      m_lo0 = 0.5 * (st.other_lo + st.s0);
      t_lo2 = st.trans_lo * st.trans_lo + eps2;
    }
    if (st.has_hi) {
      u_hi = state.u[st.hi];
      k_hi = fields.k[st.hi];
      m_hi0 = 0.5 * (st.s0 + st.other_hi);
      t_hi2 = st.trans_hi * st.trans_hi + eps2;
    }
  }

  double value(double delta) const {
    double v = h * delta * (u_hi - u_lo) + dt * delta * delta;
    v += h * h * (k_lo * speed_change(m_lo0, t_lo2, delta) + k_hi * speed_change(m_hi0, t_hi2, delta));
    return v;
  }

  double slope(double delta) const {
    double g = h * (u_hi - u_lo) + 2.0 * dt * delta;
    if (k_lo > 0.0) {
      const double m = m_lo0 + 0.5 * delta;
      g += h * h * k_lo * 0.5 * m / std::sqrt(m * m + t_lo2);
    }
    if (k_hi > 0.0) {
      const double m = m_hi0 + 0.5 * delta;
      g += h * h * k_hi * 0.5 * m / std::sqrt(m * m + t_hi2);
    }
    return g;
  }

  double curvature(double delta) const {
    double c = 2.0 * dt;
    if (k_lo > 0.0) {
      const double m = m_lo0 + 0.5 * delta;
      const double s2 = m * m + t_lo2;
      c += h * h * k_lo * 0.25 * t_lo2 / (s2 * std::sqrt(s2));
    }
    if (k_hi > 0.0) {
      const double m = m_hi0 + 0.5 * delta;
      const double s2 = m * m + t_hi2;
      c += h * h * k_hi * 0.25 * t_hi2 / (s2 * std::sqrt(s2));
    }
    return c;
  }

  // |(m0 + delta/2, t)| - |(m0, t)| in cancellation-free form.
  static double speed_change(double m0, double t2, double delta) {
    const double m1 = m0 + 0.5 * delta;
    const double s0 = std::sqrt(m0 * m0 + t2);
    const double s1 = std::sqrt(m1 * m1 + t2);
    const double denom = s0 + s1;
    if (denom == 0.0) return 0.0;
    return (m1 - m0) * (m1 + m0) / denom;
  }
};

std::size_t face_count(const Grid& g) {
  return static_cast<std::size_t>(g.nx - 1) * g.ny + static_cast<std::size_t>(g.nx) * (g.ny - 1);
}

Edge face_at(std::size_t n, const Grid& g) {
  const std::size_t nxf = static_cast<std::size_t>(g.nx - 1) * g.ny;
  if (n < nxf) {
    const int j = static_cast<int>(n / (g.nx - 1));
    const int i = static_cast<int>(n % (g.nx - 1)) + 1;
    return {Axis::x, i, j};
  }
  n -= nxf;
  const int j = static_cast<int>(n / g.nx) + 1;
  const int i = static_cast<int>(n % g.nx);
  return {Axis::y, i, j};
}

}  // namespace

EdgeLocal edge_local(const Edge& e, double s, const SolveState& state,
                     const ProblemFields& fields, const SolverParams& p) {
  const FaceStencil st = stencil(e, state.q, fields.grid);
  const LocalProblem lp(st, state, fields, p);
  const double delta = s - st.s0;
  return {p.dt * lp.value(delta), p.dt * lp.slope(delta), p.dt * lp.curvature(delta)};
}

double edge_update(const Edge& e, const SolveState& state, const ProblemFields& fields,
                   const SolverParams& p) {
  const FaceStencil st = stencil(e, state.q, fields.grid);
  const LocalProblem lp(st, state, fields, p);

  // The nonlinear part of the slope is bounded by h^2 (k_lo + k_hi) / 2, which
  // brackets the root of the (monotone) slope.
  const double h = fields.grid.h;
  const double c0 = h * (lp.u_hi - lp.u_lo);
  const double bound = 0.5 * h * h * (lp.k_lo + lp.k_hi);
  double lo = (-c0 - bound) / (2.0 * p.dt);
  double hi = (-c0 + bound) / (2.0 * p.dt);

  const double tol = kInnerTol * (std::abs(c0) + bound);
  double delta = std::clamp(0.0, lo, hi);
  for (int it = 0; it < kMaxInnerIters; ++it) {
    const double g = lp.slope(delta);
    if (g == 0.0 || (it >= p.newton_iters && std::abs(g) <= tol)) break;
    if (g > 0.0) {
      hi = std::min(hi, delta);
    } else {
      lo = std::max(lo, delta);
    }
    const double next = delta - g / lp.curvature(delta);
    if (next > lo && next < hi) {
      delta = next;
    } else {
      delta = 0.5 * (lo + hi);
    }
  }

  double step = p.omega * delta;
  for (int halving = 0; halving < 30; ++halving) {
    if (lp.value(step) <= 0.0) return st.s0 + step;
    step *= 0.5;
  }
  return st.s0;
}

void apply_edge(const Edge& e, double value, SolveState& state, const Grid& grid, double dt) {
  double& slot = state.q.at(e);
  const double change = dt * (value - slot) / grid.h;
  slot = value;
  if (e.axis == Axis::x) {
    if (e.i > 0) state.u(e.i - 1, e.j) -= change;
    if (e.i < grid.nx) state.u(e.i, e.j) += change;
  } else {
    if (e.j > 0) state.u(e.i, e.j - 1) -= change;
    if (e.j < grid.ny) state.u(e.i, e.j) += change;
  }
}

int effective_levels(const Grid& grid, int requested) {
  int available = 1;
  while ((2 << available) <= std::min(grid.nx, grid.ny)) ++available;
  return requested > 0 ? std::min(requested, available) : available;
}

namespace {

struct BlockCell {
  std::size_t index = 0;
  double k = 0.0;
  double mu = 0.0;  // d(face-normal average)/d(step)
  double m0 = 0.0;
  double t2 = 0.0;
};

// Cell (along, transverse) -> (i, j).
std::pair<int, int> cell_of(Axis axis, int along, int trans) {
  return axis == Axis::x ? std::pair{along, trans} : std::pair{trans, along};
}

double& face_of(FluxField& q, Axis axis, int along, int trans) {
  return axis == Axis::x ? q.qx(along, trans) : q.qy(trans, along);
}


double transverse_average(const FluxField& q, Axis axis, int i, int j) {
  return axis == Axis::x ? 0.5 * (q.qy(i, j) + q.qy(i, j + 1))
                         : 0.5 * (q.qx(i, j) + q.qx(i + 1, j));
}

}  // namespace

double block_update(const BlockDirection& d, SolveState& state, const ProblemFields& fields,
                    const SolverParams& p) {
  const Grid& g = fields.grid;
  const double h = g.h;
  const int b1 = d.mid - d.lo_begin;
  const int b2 = d.hi_end - d.mid;
  const int rows = d.t_end - d.t_begin;
  auto weight = [&](int a) {
    return a <= d.mid ? static_cast<double>(a - d.lo_begin) / b1
                      : static_cast<double>(d.hi_end - a) / b2;
  };

  thread_local std::vector<BlockCell> cells;
  cells.clear();
  double sum_lo = 0.0;
  double sum_hi = 0.0;
  const double eps2 = p.eps * p.eps;
  for (int t = d.t_begin; t < d.t_end; ++t) {
    for (int a = d.lo_begin; a < d.hi_end; ++a) {
      const auto [i, j] = cell_of(d.axis, a, t);
      BlockCell c;
      c.index = g.cell_index(i, j);
      c.k = fields.k[c.index];
      c.mu = 0.5 * (weight(a) + weight(a + 1));
      c.m0 = 0.5 * (face_of(state.q, d.axis, a, t) + face_of(state.q, d.axis, a + 1, t));
      const double tr = transverse_average(state.q, d.axis, i, j);
      c.t2 = tr * tr + eps2;
      cells.push_back(c);
      (a < d.mid ? sum_lo : sum_hi) += state.u[c.index];
    }
  }

  const double beta_lo = 1.0 / (b1 * h);
  const double beta_hi = 1.0 / (b2 * h);
  const double h2 = h * h;
  const double c0 = h2 * (beta_hi * sum_hi - beta_lo * sum_lo);
  const double quad = h2 * p.dt * rows * (b1 * beta_lo * beta_lo + b2 * beta_hi * beta_hi);

  auto slope = [&](double delta) {
    double s = c0 + quad * delta;
    for (const BlockCell& c : cells) {
      const double m = c.m0 + c.mu * delta;
      s += h2 * c.k * c.mu * m / std::sqrt(m * m + c.t2);
    }
    return s;
  };
  auto curvature = [&](double delta) {
    double v = quad;
    for (const BlockCell& c : cells) {
      const double m = c.m0 + c.mu * delta;
      const double s2 = m * m + c.t2;
      v += h2 * c.k * c.mu * c.mu * c.t2 / (s2 * std::sqrt(s2));
    }
    return v;
  };
  auto value = [&](double delta) {
    double v = c0 * delta + 0.5 * quad * delta * delta;
    for (const BlockCell& c : cells) {
      v += h2 * c.k * LocalProblem::speed_change(c.m0, c.t2, 2.0 * c.mu * delta);
    }
    return v;
  };

  double bound = 0.0;
  for (const BlockCell& c : cells) bound += h2 * c.k * std::abs(c.mu);
  double lo = (-c0 - bound) / quad;
  double hi = (-c0 + bound) / quad;

  const double tol = kInnerTol * (std::abs(c0) + bound);
  double delta = std::clamp(0.0, lo, hi);
  for (int it = 0; it < kMaxInnerIters; ++it) {
    const double gval = slope(delta);
    if (gval == 0.0 || (it >= p.newton_iters && std::abs(gval) <= tol)) break;
    if (gval > 0.0) {
      hi = std::min(hi, delta);
    } else {
      lo = std::max(lo, delta);
    }
    const double next = delta - gval / curvature(delta);
    delta = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
  }

  double step = p.omega * delta;
  int halving = 0;
  while (halving < 30 && value(step) > 0.0) {
    step *= 0.5;
    ++halving;
  }
  if (halving == 30 || step == 0.0) return 0.0;

  for (int t = d.t_begin; t < d.t_end; ++t) {
    for (int a = d.lo_begin + 1; a < d.hi_end; ++a) face_of(state.q, d.axis, a, t) += step * weight(a);
  }
  const double du_lo = p.dt * step * beta_lo;
  const double du_hi = p.dt * step * beta_hi;
  for (int t = d.t_begin; t < d.t_end; ++t) {
    for (int a = d.lo_begin; a < d.hi_end; ++a) {
      const auto [i, j] = cell_of(d.axis, a, t);
      if (a < d.mid) {
        state.u(i, j) -= du_lo;
      } else {
        state.u(i, j) += du_hi;
      }
    }
  }
  return step;
}

double loop_update(const LoopDirection& d, SolveState& state, const ProblemFields& fields,
                   const SolverParams& p) {
  const Grid& g = fields.grid;
  const int b = 1 << d.level;
  const int i0 = std::max(0, d.vi - b);
  const int i1 = std::min(g.nx, d.vi + b);
  const int j0 = std::max(0, d.vj - b);
  const int j1 = std::min(g.ny, d.vj + b);
  auto psi = [&](int vi, int vj) {
    const double wx = std::max(0.0, 1.0 - std::abs(vi - d.vi) / static_cast<double>(b));
    const double wy = std::max(0.0, 1.0 - std::abs(vj - d.vj) / static_cast<double>(b));
    return wx * wy;
  };

  struct LoopCell {
    double k, mx, my, ax, ay, e2;
  };
  thread_local std::vector<LoopCell> cells;
  cells.clear();
  const double eps2 = p.eps * p.eps;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double scale = 0.0;
  for (int j = j0; j < j1; ++j) {
    for (int i = i0; i < i1; ++i) {
      const double ax = 0.5 * ((psi(i, j + 1) - psi(i, j)) + (psi(i + 1, j + 1) - psi(i + 1, j)));
      const double ay = -0.5 * ((psi(i + 1, j) - psi(i, j)) + (psi(i + 1, j + 1) - psi(i, j + 1)));
      const double a2 = ax * ax + ay * ay;
      if (a2 == 0.0) continue;
      LoopCell c{fields.k(i, j),
                 0.5 * (state.q.qx(i, j) + state.q.qx(i + 1, j)),
                 0.5 * (state.q.qy(i, j) + state.q.qy(i, j + 1)),
                 ax, ay, eps2};
      // each speed term is smallest here; the sum is minimized in [lo, hi]
      const double own = -(c.mx * ax + c.my * ay) / a2;
      lo = std::min(lo, own);
      hi = std::max(hi, own);
      scale += c.k * std::sqrt(a2);
      cells.push_back(c);
    }
  }
  if (cells.empty() || !(lo < hi)) return 0.0;

  auto slope = [&](double delta) {
    double s = 0.0;
    for (const LoopCell& c : cells) {
      const double mx = c.mx + delta * c.ax;
      const double my = c.my + delta * c.ay;
      s += c.k * (mx * c.ax + my * c.ay) / std::sqrt(mx * mx + my * my + c.e2);
    }
    return s;
  };
  auto curvature = [&](double delta) {
    double v = 0.0;
    for (const LoopCell& c : cells) {
      const double mx = c.mx + delta * c.ax;
      const double my = c.my + delta * c.ay;
      const double s2 = mx * mx + my * my + c.e2;
      const double along = mx * c.ax + my * c.ay;
      v += c.k * ((c.ax * c.ax + c.ay * c.ay) * s2 - along * along) / (s2 * std::sqrt(s2));
    }
    return v;
  };
  auto value = [&](double delta) {
    double v = 0.0;
    for (const LoopCell& c : cells) {
      const double s0 = std::sqrt(c.mx * c.mx + c.my * c.my + c.e2);
      const double mx = c.mx + delta * c.ax;
      const double my = c.my + delta * c.ay;
      const double s1 = std::sqrt(mx * mx + my * my + c.e2);
      const double along = c.mx * c.ax + c.my * c.ay;
      const double a2 = c.ax * c.ax + c.ay * c.ay;
      v += c.k * delta * (2.0 * along + delta * a2) / (s0 + s1);
    }
    return v;
  };

  const double tol = kInnerTol * scale;
  double delta = std::clamp(0.0, lo, hi);
  for (int it = 0; it < kMaxInnerIters; ++it) {
    const double gval = slope(delta);
    if (gval == 0.0 || (it >= p.newton_iters && std::abs(gval) <= tol)) break;
    if (gval > 0.0) {
      hi = std::min(hi, delta);
    } else {
      lo = std::max(lo, delta);
    }
    const double c = curvature(delta);
    const double next = c > 0.0 ? delta - gval / c : 0.5 * (lo + hi);
    delta = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
  }

  double step = p.omega * delta;
  int halving = 0;
  while (halving < 30 && value(step) > 0.0) {
    step *= 0.5;
    ++halving;
  }
  if (halving == 30 || step == 0.0) return 0.0;

  // boundary vertices have psi = 0, so boundary faces stay untouched
  for (int j = j0; j < j1; ++j) {
    for (int i = std::max(1, i0); i <= std::min(g.nx - 1, i1); ++i) {
      state.q.qx(i, j) += step * (psi(i, j + 1) - psi(i, j));
    }
  }
  for (int j = std::max(1, j0); j <= std::min(g.ny - 1, j1); ++j) {
    for (int i = i0; i < i1; ++i) {
      state.q.qy(i, j) -= step * (psi(i + 1, j) - psi(i, j));
    }
  }
  return step;
}

namespace {

std::vector<BlockDirection> level_directions(const Grid& g, int level) {
  std::vector<BlockDirection> dirs;
  const int b = 1 << level;
  for (Axis axis : {Axis::x, Axis::y}) {
    const int n_along = axis == Axis::x ? g.nx : g.ny;
    const int n_trans = axis == Axis::x ? g.ny : g.nx;
    for (int t = 0; t < n_trans; t += b) {
      for (int a = b; a < n_along; a += b) {
        BlockDirection d;
        d.axis = axis;
        d.lo_begin = a - b;
        d.mid = a;
        d.hi_end = std::min(a + b, n_along);
        d.t_begin = t;
        d.t_end = std::min(t + b, n_trans);
        dirs.push_back(d);
      }
    }
  }
  return dirs;
}

std::vector<LoopDirection> loop_directions(const Grid& g, int level) {
  std::vector<LoopDirection> dirs;
  const int b = 1 << level;
  for (int vj = b; vj + b <= g.ny; vj += b) {
    for (int vi = b; vi + b <= g.nx; vi += b) dirs.push_back({level, vi, vj});
  }
  return dirs;
}

}  // namespace

void sweep(SolveState& state, const ProblemFields& fields, const SolverParams& p, bool reverse,
           bool coarse_levels) {
  const Grid& g = fields.grid;
  const int levels = coarse_levels ? effective_levels(g, p.levels) : 1;
  const int loop_levels = coarse_levels && p.circulation ? levels : 0;
  auto fine = [&] {
    const std::size_t n = face_count(g);
    for (std::size_t k = 0; k < n; ++k) {
      const Edge e = face_at(reverse ? n - 1 - k : k, g);
      apply_edge(e, edge_update(e, state, fields, p), state, g, p.dt);
    }
  };
  auto coarse = [&](int level) {
    const std::vector<BlockDirection> dirs = level_directions(g, level);
    if (reverse) {
      for (auto it = dirs.rbegin(); it != dirs.rend(); ++it) block_update(*it, state, fields, p);
    } else {
      for (const BlockDirection& d : dirs) block_update(d, state, fields, p);
    }
  };
  auto loops = [&](int level) {
    const std::vector<LoopDirection> dirs = loop_directions(g, level);
    if (reverse) {
      for (auto it = dirs.rbegin(); it != dirs.rend(); ++it) loop_update(*it, state, fields, p);
    } else {
      for (const LoopDirection& d : dirs) loop_update(d, state, fields, p);
    }
  };
  if (!reverse) {
    fine();
    for (int l = 1; l < levels; ++l) coarse(l);
    for (int l = 0; l < loop_levels; ++l) loops(l);
  } else {
    for (int l = loop_levels - 1; l >= 0; --l) loops(l);
    for (int l = levels - 1; l >= 1; --l) coarse(l);
    fine();
  }
}

void advance_step(SolveState& state, const ProblemFields& fields, const SolverParams& p) {
  const Grid& g = fields.grid;
  const CellField u_prev = state.u;
  const FluxField q_prev = state.q;

  state.step += 1;
  state.t = static_cast<double>(state.step) * p.dt;
  for (std::size_t c = 0; c < state.F.size(); ++c) {
    state.F[c] = fields.u0[c] + state.t * fields.f[c];
  }
  {
    FluxField total = state.W;
    total.axpy(p.dt, state.q);
    const CellField div = divergence(total, g);
    for (std::size_t c = 0; c < state.u.size(); ++c) state.u[c] = state.F[c] - div[c];
  }

  StepRecord rec;
  rec.step = state.step;
  rec.t = state.t;

  double previous = p.track_sweep_objective ? step_objective(state.q, state, fields, p) : 0.0;
  for (int s = 0; s < p.sweeps_per_step; ++s) {
    const bool reverse = p.order == SweepOrder::symmetric && (s % 2 == 1);
    sweep(state, fields, p, reverse, s < p.coarse_sweeps);
    if (p.track_sweep_objective) {
      const double current = step_objective(state.q, state, fields, p);
      rec.sweep_increase = std::max(rec.sweep_increase, current - previous);
      previous = current;
    }
  }

  if (!state.q.all_finite() || !state.u.all_finite()) throw DivergenceError(state.step);

  rec.objective = p.track_sweep_objective ? previous : step_objective(state.q, state, fields, p);
  state.W.axpy(p.dt, state.q);

  for (std::size_t c = 0; c < state.u.size(); ++c) {
    rec.max_du_dt = std::max(rec.max_du_dt, std::abs(state.u[c] - u_prev[c]) / p.dt);
  }
  const auto& qx = state.q.qx_values();
  const auto& qy = state.q.qy_values();
  for (std::size_t e = 0; e < qx.size(); ++e) {
    rec.max_dq = std::max(rec.max_dq, std::abs(qx[e] - q_prev.qx_values()[e]));
  }
  for (std::size_t e = 0; e < qy.size(); ++e) {
    rec.max_dq = std::max(rec.max_dq, std::abs(qy[e] - q_prev.qy_values()[e]));
  }
  rec.total_cost = phi_eps(state.q, fields.k, g, 0.0);
  state.history.push_back(rec);
}

void check_initial_surface(const ProblemFields& fields) {
  const Grid& g = fields.grid;
  const CellField& u = fields.u0;
  const CellField& k = fields.k;
  auto check = [&](int i0, int j0, int i1, int j1) {
    const double slope = std::abs(u(i1, j1) - u(i0, j0)) / g.h;
    const double bound = 0.5 * (k(i0, j0) + k(i1, j1));
    if (slope > bound * (1.0 + 1e-9)) {
      throw Error("initial surface violates the slope bound between cells (" +
                  std::to_string(i0) + ", " + std::to_string(j0) + ") and (" +
                  std::to_string(i1) + ", " + std::to_string(j1) + ")");
    }
  };
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (i + 1 < g.nx) check(i, j, i + 1, j);
      if (j + 1 < g.ny) check(i, j, i, j + 1);
    }
  }
}

SolveResult run_to_stationary(const ProblemFields& fields, const SolverParams& p) {
  p.validate();
  check_initial_surface(fields);

  SolveResult result;
  result.state = SolveState::initial(fields);
  SolveState& state = result.state;

  int quiet = 0;
  while (state.step < p.max_steps) {
    advance_step(state, fields, p);
    const double u_scale = std::max(1.0, state.u.max_abs());
    if (state.history.back().max_du_dt <= p.tol_stationary * u_scale) {
      ++quiet;
    } else {
      quiet = 0;
    }
    if (quiet >= p.stationary_patience) {
      result.converged = true;
      break;
    }
  }

  result.steps = state.step;
  result.u = recover_potential(state.W, fields.f, fields.u0, state.t, fields.grid);
  result.a = transport_density(state.q, fields.k, fields.grid, p.eps);
  return result;
}

}  // namespace sandflux
