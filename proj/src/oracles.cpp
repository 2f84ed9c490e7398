#include "sandflux/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

namespace sandflux {

Oracle1D::Oracle1D(const Layout1D& layout, double k) : l_(layout), k_(k) {
  if (!(k > 0.0)) throw Error("oracle_1d needs k > 0");
  if (!(layout.density > 0.0)) throw Error("oracle_1d needs a positive density");
  if (!(l_.a_start < l_.a_end) || !(l_.b_start < l_.b_end)) {
    throw Error("oracle_1d intervals must have positive length");
  }
  if (l_.b_start < l_.a_end) throw Error("oracle_1d intervals overlap or are out of order");
  const double mass = l_.density * (l_.a_end - l_.a_start);
  sink_density_ = mass / (l_.b_end - l_.b_start);
  total_cost_ = mass * (0.5 * (l_.a_end - l_.a_start) + (l_.b_start - l_.a_end) +
                        0.5 * (l_.b_end - l_.b_start));
}

double Oracle1D::f(double x) const {
  if (x >= l_.a_start && x <= l_.a_end) return l_.density;
  if (x >= l_.b_start && x <= l_.b_end) return -sink_density_;
  return 0.0;
}

double Oracle1D::q(double x) const {
  const double mass = l_.density * (l_.a_end - l_.a_start);
  if (x <= l_.a_start || x >= l_.b_end) return 0.0;
  if (x <= l_.a_end) return l_.density * (x - l_.a_start);
  if (x <= l_.b_start) return mass;
  return mass - sink_density_ * (x - l_.b_start);
}

double Oracle1D::u(double x) const {
  return -k_ * (std::clamp(x, l_.a_start, l_.b_end) - l_.a_start);
}

OracleRadial::OracleRadial(double r1, double r2, double k, double rho)
    : r1_(r1), r2_(r2), k_(k), rho_(rho) {
  if (!(r1 > 0.0) || !(r2 > r1)) throw Error("oracle_radial needs 0 < R1 < R2");
  if (!(k > 0.0)) throw Error("oracle_radial needs k > 0");
  if (!(rho > 0.0)) throw Error("oracle_radial needs a positive density");
}

double OracleRadial::sink_density() const { return rho_ * r1_ * r1_ / (r2_ * r2_ - r1_ * r1_); }

double OracleRadial::f(double r) const {
  if (r <= r1_) return rho_;
  if (r <= r2_) return -sink_density();
  return 0.0;
}

double OracleRadial::q(double r) const {
  if (r <= r1_) return 0.5 * rho_ * r;
  if (r >= r2_) return 0.0;
  return rho_ * r1_ * r1_ * (r2_ * r2_ - r * r) / (2.0 * r * (r2_ * r2_ - r1_ * r1_));
}

double OracleRadial::total_cost() const {
  const double pi = std::numbers::pi;
  const double inner = pi * rho_ * r1_ * r1_ * r1_ / 3.0;
  const double outer = pi * rho_ * r1_ * r1_ / (r2_ * r2_ - r1_ * r1_) *
                       (2.0 * r2_ * r2_ * r2_ / 3.0 - r2_ * r2_ * r1_ + r1_ * r1_ * r1_ / 3.0);
  return inner + outer;
}

namespace {

constexpr int kDirs = 8;
constexpr int kDi[kDirs] = {1, -1, 0, 0, 1, -1, 1, -1};
constexpr int kDj[kDirs] = {0, 0, 1, -1, 1, -1, -1, 1};
constexpr int kOpposite[kDirs] = {1, 0, 3, 2, 5, 4, 7, 6};

struct Label {
  double dist;
  std::size_t node;
  bool operator>(const Label& o) const { return dist > o.dist; }
};

}  // namespace

// Successive shortest paths with node potentials. Every cell with excess is a
// Dijkstra root; the search stops at the first settled cell with a deficit.
McfResult mcf_reference(const CellField& f, const CellField& k, const Grid& grid) {
  const std::size_t n = grid.cell_count();
  const double h2 = grid.cell_area();

  std::vector<double> excess(n);
  double total = 0.0;
  double sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    excess[c] = f[c] * h2;
    total += std::abs(excess[c]);
    sum += excess[c];
  }
  if (std::abs(sum) > 1e-9 * std::max(total, std::numeric_limits<double>::min())) {
    throw Error("unbalanced supplies");
  }
  McfResult result;
  if (total == 0.0) return result;
  const double zero = 1e-13 * total;

  auto neighbor = [&](std::size_t c, int d, std::size_t& out) {
    const int i = static_cast<int>(c % grid.nx) + kDi[d];
    const int j = static_cast<int>(c / grid.nx) + kDj[d];
    if (i < 0 || j < 0 || i >= grid.nx || j >= grid.ny) return false;
    out = grid.cell_index(i, j);
    return true;
  };
  auto arc_cost = [&](std::size_t a, std::size_t b, int d) {
    const double len = d < 4 ? grid.h : grid.h * std::numbers::sqrt2;
    return len * 0.5 * (k[a] + k[b]);
  };

  std::vector<double> flow(n * kDirs, 0.0);  // flow[c * 8 + d] leaves c in direction d
  std::vector<double> potential(n, 0.0);
  std::vector<double> dist(n);
  std::vector<std::size_t> parent(n);
  std::vector<signed char> parent_dir(n);  // direction taken into the node; +8 marks a cancel
  std::vector<char> settled(n);
  std::vector<std::size_t> touched;
  const double inf = std::numeric_limits<double>::infinity();
  std::fill(dist.begin(), dist.end(), inf);

  for (;;) {
    std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
    for (std::size_t c = 0; c < n; ++c) {
      if (excess[c] > zero) {
        dist[c] = 0.0;
        parent[c] = c;
        parent_dir[c] = -1;
        touched.push_back(c);
        heap.push({0.0, c});
      }
    }
    if (heap.empty()) break;

    std::size_t target = n;
    while (!heap.empty()) {
      const Label top = heap.top();
      heap.pop();
      if (settled[top.node] || top.dist > dist[top.node]) continue;
      settled[top.node] = 1;
      if (excess[top.node] < -zero) {
        target = top.node;
        break;
      }
      const std::size_t c = top.node;
      for (int d = 0; d < kDirs; ++d) {
        std::size_t m = 0;
        if (!neighbor(c, d, m) || settled[m]) continue;
        const double base = arc_cost(c, m, d);
        // cancelling flow m -> c is cheaper than any forward push
        const bool cancel = flow[m * kDirs + kOpposite[d]] > 0.0;
        const double cost = (cancel ? -base : base) + potential[c] - potential[m];
        const double nd = top.dist + std::max(cost, 0.0);
        if (nd < dist[m]) {
          if (dist[m] == inf) touched.push_back(m);
          dist[m] = nd;
          parent[m] = c;
          parent_dir[m] = static_cast<signed char>(cancel ? d + kDirs : d);
          heap.push({nd, m});
        }
      }
    }
    if (target == n) throw Error("min-cost flow infeasible");

    double amount = -excess[target];
    std::size_t root = target;
    for (std::size_t v = target; parent_dir[v] >= 0; v = parent[v]) {
      if (parent_dir[v] >= kDirs) {
        amount = std::min(amount, flow[v * kDirs + kOpposite[parent_dir[v] - kDirs]]);
      }
      root = parent[v];
    }
    amount = std::min(amount, excess[root]);

    for (std::size_t v = target; parent_dir[v] >= 0; v = parent[v]) {
      const std::size_t u = parent[v];
      if (parent_dir[v] >= kDirs) {
        double& back = flow[v * kDirs + kOpposite[parent_dir[v] - kDirs]];
        back = std::max(0.0, back - amount);
      } else {
        flow[u * kDirs + parent_dir[v]] += amount;
      }
    }
    excess[root] -= amount;
    excess[target] += amount;

    const double dt = dist[target];
    for (std::size_t v = 0; v < n; ++v) potential[v] += std::min(dist[v], dt);
    for (std::size_t v : touched) {
      dist[v] = inf;
      settled[v] = 0;
    }
    touched.clear();
  }

  for (std::size_t c = 0; c < n; ++c) {
    for (int d = 0; d < kDirs; ++d) {
      const double q = flow[c * kDirs + d];
      if (q <= 0.0) continue;
      std::size_t m = 0;
      neighbor(c, d, m);
      const double unit = arc_cost(c, m, d);
      result.cost += q * unit;
      result.edge_flows.push_back({c, m, q, unit});
    }
  }
  return result;
}

}  // namespace sandflux
