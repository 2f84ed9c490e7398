#pragma once

#include <cstdint>
#include <vector>

#include "sandflux/grid.hpp"

namespace sandflux {

/// Raised when the iteration produces non-finite values.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::int64_t step);
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

enum class SweepOrder { lexicographic, symmetric };

struct SolverParams {
  double dt = 1.0;
  double eps = 1e-6;
  double omega = 1.5;
  int sweeps_per_step = 5;
  int newton_iters = 2;
  double tol_stationary = 1e-5;
  int stationary_patience = 5;
  std::int64_t max_steps = 100000;
  SweepOrder order = SweepOrder::lexicographic;
  /// Number of block levels visited by each sweep (1 = single faces only,
  /// 0 = as many as fit the grid). Level l moves mass between neighboring
  /// blocks of 2^l x 2^l cells.
  int levels = 0;
  /// Leading sweeps of each step that include the block levels; later
  /// sweeps visit single faces only.
  int coarse_sweeps = 1;
  /// Coarse sweeps also visit divergence-free loop directions, which reroute
  /// flux without moving mass.
  bool circulation = true;
  /// Evaluate the step objective after every sweep and record increases.
  bool track_sweep_objective = false;

  void validate() const;
};

/// eps = 1e-6 * M / L with M the positive mass and L the domain diagonal.
double default_eps(const CellField& f, const Grid& grid);

/// Time-independent data of one problem.
struct ProblemFields {
  Grid grid;
  CellField f;
  CellField u0;
  CellField k;
};

struct StepRecord {
  std::int64_t step = 0;
  double t = 0.0;
  double objective = 0.0;
  double max_du_dt = 0.0;
  double total_cost = 0.0;
  /// max |q_new - q_old| over faces; reported only.
  double max_dq = 0.0;
  /// Largest increase of the step objective across one sweep (0 when monotone).
  double sweep_increase = 0.0;
};

struct SolveState {
  FluxField W;  ///< cumulative flux, integral of q over [0, t]
  FluxField q;  ///< flux of the current step
  CellField F;  ///< u0 + t f
  CellField u;  ///< F - div(W + dt q), kept in sync with q during sweeps
  double t = 0.0;
  std::int64_t step = 0;
  std::vector<StepRecord> history;

  static SolveState initial(const ProblemFields& fields);
};

/// J(q) = 1/2 ||div(W + dt q) - F||^2 + dt phi_eps(q), ||v||^2 = sum v_c^2 h^2.
double step_objective(const FluxField& q_trial, const SolveState& state,
                      const ProblemFields& fields, const SolverParams& p);

/// Restriction of J to one face value s, all other faces frozen, relative to
/// the current value: value = J(s) - J(s_current).
struct EdgeLocal {
  double value = 0.0;
  double slope = 0.0;      ///< dJ/ds
  double curvature = 0.0;  ///< d2J/ds2
};

EdgeLocal edge_local(const Edge& e, double s, const SolveState& state,
                     const ProblemFields& fields, const SolverParams& p);

/// Relaxed, safeguarded 1D minimization of J along one interior face.
/// Returns the new face value; `state` is not modified.
double edge_update(const Edge& e, const SolveState& state, const ProblemFields& fields,
                   const SolverParams& p);

/// Writes a new face value into state.q and updates state.u accordingly.
void apply_edge(const Edge& e, double value, SolveState& state, const Grid& grid,
                double dt);

/// Coarse search direction: unit transfer of mass between two neighboring
/// blocks of cells, carried by a flux that ramps linearly across both blocks.
struct BlockDirection {
  Axis axis = Axis::x;
  int lo_begin = 0;  ///< first cell index of the lower block along `axis`
  int mid = 0;       ///< first cell index of the upper block along `axis`
  int hi_end = 0;    ///< one past the last cell of the upper block
  int t_begin = 0;   ///< transverse cell range [t_begin, t_end)
  int t_end = 0;
};

/// Safeguarded relaxed 1D minimization of J along a block direction; applies
/// the result to state.q and state.u and returns the step length taken.
double block_update(const BlockDirection& d, SolveState& state, const ProblemFields& fields,
                    const SolverParams& p);

/// Divergence-free direction: discrete curl of a bilinear hat stream
/// function of half-width 2^level centered on vertex (vi, vj).
struct LoopDirection {
  int level = 0;
  int vi = 0;
  int vj = 0;
};

/// Safeguarded relaxed minimization of J along a loop direction; only the
/// regularized cost changes. Applies the step to state.q and returns it.
double loop_update(const LoopDirection& d, SolveState& state, const ProblemFields& fields,
                   const SolverParams& p);

/// Number of levels a sweep visits on this grid for the given parameter.
int effective_levels(const Grid& grid, int requested);

/// One full sweep over interior faces; `reverse` runs the order backwards.
void sweep(SolveState& state, const ProblemFields& fields, const SolverParams& p,
           bool reverse = false, bool coarse_levels = true);

/// Advances one time level and appends a history record.
void advance_step(SolveState& state, const ProblemFields& fields, const SolverParams& p);

struct SolveResult {
  SolveState state;
  CellField u;
  CellField a;
  bool converged = false;
  std::int64_t steps = 0;
};

/// Time-steps until max|du|/dt <= tol * max(1, max|u|) holds for
/// stationary_patience consecutive steps, or max_steps is reached.
SolveResult run_to_stationary(const ProblemFields& fields, const SolverParams& p);

/// Checks |slope(u0)| <= k on every face pair (with a small relative slack).
void check_initial_surface(const ProblemFields& fields);

}  // namespace sandflux
