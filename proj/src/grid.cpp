#include "sandflux/grid.hpp"

#include <algorithm>
#include <cmath>

namespace sandflux {

Grid::Grid(int nx_, int ny_, double h_, double x0_, double y0_)
    : nx(nx_), ny(ny_), h(h_), x0(x0_), y0(y0_) {
  if (nx < 4 || ny < 4) {
    throw Error("grid needs at least 4 cells per axis, got " + std::to_string(nx) + "x" +
                std::to_string(ny));
  }
  if (!(h > 0.0) || !std::isfinite(h)) throw Error("grid spacing must be positive");
}

Grid Grid::unchecked(int nx, int ny, double h, double x0, double y0) {
  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.h = h;
  g.x0 = x0;
  g.y0 = y0;
  return g;
}

double CellField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool CellField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool FluxField::is_interior(const Edge& e) const {
  if (e.axis == Axis::x) return e.i > 0 && e.i < nx_ && e.j >= 0 && e.j < ny_;
  return e.j > 0 && e.j < ny_ && e.i >= 0 && e.i < nx_;
}

bool FluxField::boundary_is_zero() const {
  for (int j = 0; j < ny_; ++j) {
    if (qx(0, j) != 0.0 || qx(nx_, j) != 0.0) return false;
  }
  for (int i = 0; i < nx_; ++i) {
    if (qy(i, 0) != 0.0 || qy(i, ny_) != 0.0) return false;
  }
  return true;
}

bool FluxField::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(qx_.begin(), qx_.end(), finite) && std::all_of(qy_.begin(), qy_.end(), finite);
}

double FluxField::max_abs() const {
  double m = 0.0;
  for (double v : qx_) m = std::max(m, std::abs(v));
  for (double v : qy_) m = std::max(m, std::abs(v));
  return m;
}

void FluxField::axpy(double alpha, const FluxField& other) {
  for (std::size_t e = 0; e < qx_.size(); ++e) qx_[e] += alpha * other.qx_[e];
  for (std::size_t e = 0; e < qy_.size(); ++e) qy_[e] += alpha * other.qy_[e];
}

CellField divergence(const FluxField& q, const Grid& grid) {
  CellField div(grid);
  const double inv_h = 1.0 / grid.h;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      div(i, j) = (q.qx(i + 1, j) - q.qx(i, j) + q.qy(i, j + 1) - q.qy(i, j)) * inv_h;
    }
  }
  return div;
}

CellField cell_speed(const FluxField& q, const Grid& grid, double eps) {
  CellField speed(grid);
  const double eps2 = eps * eps;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double mx = 0.5 * (q.qx(i, j) + q.qx(i + 1, j));
      const double my = 0.5 * (q.qy(i, j) + q.qy(i, j + 1));
      speed(i, j) = std::sqrt(mx * mx + my * my + eps2);
    }
  }
  return speed;
}

double phi_eps(const FluxField& q, const CellField& k, const Grid& grid, double eps) {
  const CellField speed = cell_speed(q, grid, eps);
  double sum = 0.0;
  for (std::size_t c = 0; c < speed.size(); ++c) sum += k[c] * speed[c];
  return sum * grid.cell_area();
}

double integrate(const CellField& field, const Grid& grid) {
  double sum = 0.0;
  for (double v : field.values()) sum += v;
  return sum * grid.cell_area();
}

}  // namespace sandflux
