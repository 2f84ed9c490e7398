#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sandflux {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Structured grid of square cells. Cell (i, j) spans
/// [x0 + i h, x0 + (i+1) h] x [y0 + j h, y0 + (j+1) h].
struct Grid {
  int nx = 0;
  int ny = 0;
  double h = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;

  Grid() = default;
  Grid(int nx, int ny, double h, double x0 = 0.0, double y0 = 0.0);

  // Unchecked variant used by oracles and tests that need grids smaller
  // than the production minimum.
  static Grid unchecked(int nx, int ny, double h, double x0 = 0.0, double y0 = 0.0);

  std::size_t cell_count() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t cell_index(int i, int j) const {
    return static_cast<std::size_t>(j) * nx + i;
  }
  Point cell_center(int i, int j) const {
    return {x0 + (i + 0.5) * h, y0 + (j + 0.5) * h};
  }
  double x1() const { return x0 + nx * h; }
  double y1() const { return y0 + ny * h; }
  double cell_area() const { return h * h; }

  bool operator==(const Grid&) const = default;
};

/// Cellwise-constant scalar field, stored row by row (i fastest).
class CellField {
 public:
  CellField() = default;
  CellField(int nx, int ny, double value = 0.0)
      : nx_(nx), ny_(ny), values_(static_cast<std::size_t>(nx) * ny, value) {}
  explicit CellField(const Grid& g, double value = 0.0) : CellField(g.nx, g.ny, value) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[static_cast<std::size_t>(j) * nx_ + i]; }
  double operator()(int i, int j) const { return values_[static_cast<std::size_t>(j) * nx_ + i]; }
  double& operator[](std::size_t c) { return values_[c]; }
  double operator[](std::size_t c) const { return values_[c]; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool matches(const Grid& g) const { return nx_ == g.nx && ny_ == g.ny; }
  double max_abs() const;
  bool all_finite() const;

  bool operator==(const CellField&) const = default;

 private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> values_;
};

enum class Axis { x, y };

/// Interior or boundary edge of the staggered grid. For Axis::x the edge is
/// the vertical face between cells (i-1, j) and (i, j), 0 <= i <= nx; for
/// Axis::y it is the horizontal face between (i, j-1) and (i, j).
struct Edge {
  Axis axis = Axis::x;
  int i = 0;
  int j = 0;
};

/// Normal flux on cell faces: qx on the (nx+1) x ny vertical faces and qy on
/// the nx x (ny+1) horizontal faces. Faces on the outer boundary stay zero.
class FluxField {
 public:
  FluxField() = default;
  FluxField(int nx, int ny)
      : nx_(nx),
        ny_(ny),
        qx_(static_cast<std::size_t>(nx + 1) * ny, 0.0),
        qy_(static_cast<std::size_t>(nx) * (ny + 1), 0.0) {}
  explicit FluxField(const Grid& g) : FluxField(g.nx, g.ny) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }

  double& qx(int i, int j) { return qx_[static_cast<std::size_t>(j) * (nx_ + 1) + i]; }
  double qx(int i, int j) const { return qx_[static_cast<std::size_t>(j) * (nx_ + 1) + i]; }
  double& qy(int i, int j) { return qy_[static_cast<std::size_t>(j) * nx_ + i]; }
  double qy(int i, int j) const { return qy_[static_cast<std::size_t>(j) * nx_ + i]; }

  double& at(const Edge& e) { return e.axis == Axis::x ? qx(e.i, e.j) : qy(e.i, e.j); }
  double at(const Edge& e) const { return e.axis == Axis::x ? qx(e.i, e.j) : qy(e.i, e.j); }

  std::vector<double>& qx_values() { return qx_; }
  const std::vector<double>& qx_values() const { return qx_; }
  std::vector<double>& qy_values() { return qy_; }
  const std::vector<double>& qy_values() const { return qy_; }

  bool matches(const Grid& g) const { return nx_ == g.nx && ny_ == g.ny; }
  bool is_interior(const Edge& e) const;
  bool boundary_is_zero() const;
  bool all_finite() const;
  double max_abs() const;

  /// this += alpha * other
  void axpy(double alpha, const FluxField& other);

  bool operator==(const FluxField&) const = default;

 private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> qx_;
  std::vector<double> qy_;
};

/// Conservative cell balance: (qx[i+1,j] - qx[i,j] + qy[i,j+1] - qy[i,j]) / h.
CellField divergence(const FluxField& q, const Grid& grid);

/// Regularized flux magnitude sampled at cell centers from face averages,
/// sqrt(qbar_x^2 + qbar_y^2 + eps^2).
CellField cell_speed(const FluxField& q, const Grid& grid, double eps);

/// Regularized cost functional sum_c k_c |q|_eps,c h^2.
double phi_eps(const FluxField& q, const CellField& k, const Grid& grid, double eps);

/// Sum of values times cell area.
double integrate(const CellField& field, const Grid& grid);

}  // namespace sandflux
