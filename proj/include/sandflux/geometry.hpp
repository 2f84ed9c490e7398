#pragma once

#include <string>
#include <vector>

#include "sandflux/grid.hpp"

namespace sandflux {

/// Rectangle and ellipse carry (center x, center y, half-extent a, half-extent b,
/// rotation in radians). A point is a concentrated mass at (x, y) spread over
/// one cell-sized square at rasterization time; its value is the total mass.
enum class ShapeKind { rectangle, ellipse, polygon, point };

std::string to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string& name);

struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains(const Box& other, double tol = 0.0) const {
    return other.x0 >= x0 - tol && other.y0 >= y0 - tol && other.x1 <= x1 + tol &&
           other.y1 <= y1 + tol;
  }
};

class ShapeSpec {
 public:
  static ShapeSpec rectangle(double cx, double cy, double half_width, double half_height,
                             double angle, double value);
  static ShapeSpec ellipse(double cx, double cy, double semi_a, double semi_b, double angle,
                           double value);
  static ShapeSpec polygon(std::vector<Point> vertices, double value);
  static ShapeSpec point(double x, double y, double mass);

  ShapeKind kind() const { return kind_; }
  double value() const { return value_; }
  void set_value(double v);
  const std::vector<double>& params() const { return params_; }
  const std::vector<Point>& vertices() const { return vertices_; }

  /// Point-in-shape test. A point shape has no area and contains nothing;
  /// use footprint() with the grid spacing.
  bool contains(Point p) const;
  Box bounding_box() const;
  /// Density-carrying region used at rasterization: identical to the shape
  /// except for point masses, which become an h x h square.
  ShapeSpec footprint(double h) const;

 private:
  ShapeSpec() = default;
  void validate() const;

  ShapeKind kind_ = ShapeKind::rectangle;
  std::vector<double> params_;
  std::vector<Point> vertices_;
  double value_ = 0.0;
};

struct ProblemSpec {
  Box domain{0.0, 0.0, 1.0, 1.0};
  /// Signed densities: positive shapes feed f+, negative shapes feed f-.
  std::vector<ShapeSpec> sources;
  double k_base = 1.0;
  /// Applied in order; later entries win where they overlap.
  std::vector<ShapeSpec> k_regions;
  /// Empty means u0 = 0; otherwise a cell field file read by the front end.
  std::string u0_path;

  void validate() const;
};

constexpr int kDefaultSubsample = 8;

/// f_c = sum over sources of value x covered fraction of cell c, with the
/// covered fraction estimated on an s x s lattice of sample points.
CellField rasterize_sources(const ProblemSpec& spec, const Grid& grid,
                            int subsample = kDefaultSubsample);

/// Rescales the negative part so that sum f_c h^2 vanishes.
CellField balance_mass(const CellField& f, const Grid& grid);

/// k_c = k_base, then each override applied to cells whose center lies inside.
CellField rasterize_k(const ProblemSpec& spec, const Grid& grid);

/// Throws unless f vanishes on the outer `margin` rings of cells.
void check_source_margin(const CellField& f, const Grid& grid, int margin = 2);

/// Total positive and negative mass (both reported as nonnegative numbers).
struct MassSplit {
  double positive = 0.0;
  double negative = 0.0;
};
MassSplit mass_split(const CellField& f, const Grid& grid);

}  // namespace sandflux
