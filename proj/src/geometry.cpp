#include "sandflux/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace sandflux {

namespace {

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(Point p, Point a, Point b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point a, Point b, Point c, Point d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 == 0 && on_segment(a, c, d)) return true;
  if (d2 == 0 && on_segment(b, c, d)) return true;
  if (d3 == 0 && on_segment(c, a, b)) return true;
  if (d4 == 0 && on_segment(d, a, b)) return true;
  return false;
}

bool is_simple(const std::vector<Point>& v) {
  const std::size_t n = v.size();
  for (std::size_t e = 0; e < n; ++e) {
    const Point a = v[e];
    const Point b = v[(e + 1) % n];
    for (std::size_t f = e + 1; f < n; ++f) {
      // adjacent edges share a vertex by construction
      if (f == e + 1 || (e == 0 && f == n - 1)) continue;
      if (segments_intersect(a, b, v[f], v[(f + 1) % n])) return false;
    }
  }
  return true;
}

// Maps p into the shape frame (centered, unrotated).
Point to_local(Point p, double cx, double cy, double angle) {
  const double dx = p.x - cx;
  const double dy = p.y - cy;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * dx + s * dy, -s * dx + c * dy};
}

}  // namespace

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::rectangle: return "rectangle";
    case ShapeKind::ellipse: return "ellipse";
    case ShapeKind::polygon: return "polygon";
    case ShapeKind::point: return "point";
  }
  return "unknown";
}

ShapeKind shape_kind_from_string(const std::string& name) {
  if (name == "rectangle") return ShapeKind::rectangle;
  if (name == "ellipse") return ShapeKind::ellipse;
  if (name == "polygon") return ShapeKind::polygon;
  if (name == "point") return ShapeKind::point;
  throw Error("unknown shape kind '" + name + "'");
}

ShapeSpec ShapeSpec::rectangle(double cx, double cy, double half_width, double half_height,
                               double angle, double value) {
  ShapeSpec s;
  s.kind_ = ShapeKind::rectangle;
  s.params_ = {cx, cy, half_width, half_height, angle};
  s.value_ = value;
  s.validate();
  return s;
}

ShapeSpec ShapeSpec::ellipse(double cx, double cy, double semi_a, double semi_b, double angle,
                             double value) {
  ShapeSpec s;
  s.kind_ = ShapeKind::ellipse;
  s.params_ = {cx, cy, semi_a, semi_b, angle};
  s.value_ = value;
  s.validate();
  return s;
}

ShapeSpec ShapeSpec::polygon(std::vector<Point> vertices, double value) {
  ShapeSpec s;
  s.kind_ = ShapeKind::polygon;
  s.vertices_ = std::move(vertices);
  s.value_ = value;
  s.validate();
  return s;
}

ShapeSpec ShapeSpec::point(double x, double y, double mass) {
  ShapeSpec s;
  s.kind_ = ShapeKind::point;
  s.params_ = {x, y};
  s.value_ = mass;
  s.validate();
  return s;
}

void ShapeSpec::set_value(double v) {
  if (!std::isfinite(v)) throw Error("shape value must be finite");
  value_ = v;
}

void ShapeSpec::validate() const {
  if (!std::isfinite(value_)) throw Error("shape value must be finite");
  for (double p : params_) {
    if (!std::isfinite(p)) throw Error("shape parameters must be finite");
  }
  switch (kind_) {
    case ShapeKind::rectangle:
    case ShapeKind::ellipse:
      if (!(params_[2] > 0.0) || !(params_[3] > 0.0)) {
        throw Error(to_string(kind_) + " half-extents must be positive");
      }
      break;
    case ShapeKind::polygon:
      if (vertices_.size() < 3) throw Error("polygon needs at least 3 vertices");
      for (const Point& p : vertices_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
          throw Error("polygon vertices must be finite");
        }
      }
      if (!is_simple(vertices_)) throw Error("polygon is self-intersecting");
      break;
    case ShapeKind::point:
      break;
  }
}

bool ShapeSpec::contains(Point p) const {
  switch (kind_) {
    case ShapeKind::rectangle: {
      const Point l = to_local(p, params_[0], params_[1], params_[4]);
      return std::abs(l.x) <= params_[2] && std::abs(l.y) <= params_[3];
    }
    case ShapeKind::ellipse: {
      const Point l = to_local(p, params_[0], params_[1], params_[4]);
      const double rx = l.x / params_[2];
      const double ry = l.y / params_[3];
      return rx * rx + ry * ry <= 1.0;
    }
    case ShapeKind::polygon: {
      bool inside = false;
      const std::size_t n = vertices_.size();
      for (std::size_t a = 0, b = n - 1; a < n; b = a++) {
        const Point& va = vertices_[a];
        const Point& vb = vertices_[b];
        if ((va.y > p.y) != (vb.y > p.y)) {
          const double x_cross = va.x + (p.y - va.y) * (vb.x - va.x) / (vb.y - va.y);
          if (p.x < x_cross) inside = !inside;
        }
      }
      return inside;
    }
    case ShapeKind::point:
      return false;
  }
  return false;
}

Box ShapeSpec::bounding_box() const {
  switch (kind_) {
    case ShapeKind::rectangle:
    case ShapeKind::ellipse: {
      const double c = std::cos(params_[4]);
      const double s = std::sin(params_[4]);
      const double a = params_[2];
      const double b = params_[3];
      double ex = 0.0;
      double ey = 0.0;
      if (kind_ == ShapeKind::rectangle) {
        ex = std::abs(a * c) + std::abs(b * s);
        ey = std::abs(a * s) + std::abs(b * c);
      } else {
        ex = std::sqrt(a * a * c * c + b * b * s * s);
        ey = std::sqrt(a * a * s * s + b * b * c * c);
      }
      return {params_[0] - ex, params_[1] - ey, params_[0] + ex, params_[1] + ey};
    }
    case ShapeKind::polygon: {
      Box box{vertices_[0].x, vertices_[0].y, vertices_[0].x, vertices_[0].y};
      for (const Point& p : vertices_) {
        box.x0 = std::min(box.x0, p.x);
        box.y0 = std::min(box.y0, p.y);
        box.x1 = std::max(box.x1, p.x);
        box.y1 = std::max(box.y1, p.y);
      }
      return box;
    }
    case ShapeKind::point:
      return {params_[0], params_[1], params_[0], params_[1]};
  }
  return {};
}

ShapeSpec ShapeSpec::footprint(double h) const {
  if (kind_ != ShapeKind::point) return *this;
  return rectangle(params_[0], params_[1], 0.5 * h, 0.5 * h, 0.0, value_ / (h * h));
}

void ProblemSpec::validate() const {
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) {
    throw Error("domain box must have positive area");
  }
  if (!(k_base > 0.0) || !std::isfinite(k_base)) throw Error("k_base must be positive");
  for (const ShapeSpec& s : k_regions) {
    if (!(s.value() > 0.0)) throw Error("k override must be positive");
  }
}

CellField rasterize_sources(const ProblemSpec& spec, const Grid& grid, int subsample) {
  if (subsample < 1) throw Error("subsampling factor must be at least 1");
  CellField f(grid);
  const Box domain{grid.x0, grid.y0, grid.x1(), grid.y1()};
  const double tol = 1e-9 * std::max(domain.width(), domain.height());
  const double weight = 1.0 / (static_cast<double>(subsample) * subsample);

  for (const ShapeSpec& raw : spec.sources) {
    const ShapeSpec shape = raw.footprint(grid.h);
    const Box box = shape.bounding_box();
    if (!domain.contains(box, tol)) throw Error("shape escapes domain");

    const int i_lo = std::max(0, static_cast<int>(std::floor((box.x0 - grid.x0) / grid.h)) - 1);
    const int i_hi = std::min(grid.nx - 1, static_cast<int>(std::floor((box.x1 - grid.x0) / grid.h)) + 1);
    const int j_lo = std::max(0, static_cast<int>(std::floor((box.y0 - grid.y0) / grid.h)) - 1);
    const int j_hi = std::min(grid.ny - 1, static_cast<int>(std::floor((box.y1 - grid.y0) / grid.h)) + 1);

    for (int j = j_lo; j <= j_hi; ++j) {
      for (int i = i_lo; i <= i_hi; ++i) {
        int hits = 0;
        for (int b = 0; b < subsample; ++b) {
          const double y = grid.y0 + (j + (b + 0.5) / subsample) * grid.h;
          for (int a = 0; a < subsample; ++a) {
            const double x = grid.x0 + (i + (a + 0.5) / subsample) * grid.h;
            if (shape.contains({x, y})) ++hits;
          }
        }
        if (hits > 0) f(i, j) += shape.value() * hits * weight;
      }
    }
  }
  return f;
}

MassSplit mass_split(const CellField& f, const Grid& grid) {
  MassSplit m;
  for (double v : f.values()) {
    if (v > 0.0) m.positive += v;
    if (v < 0.0) m.negative -= v;
  }
  m.positive *= grid.cell_area();
  m.negative *= grid.cell_area();
  return m;
}

CellField balance_mass(const CellField& f, const Grid& grid) {
  const MassSplit m = mass_split(f, grid);
  if (!(m.positive > 0.0) || !(m.negative > 0.0)) throw Error("one-sided source");

  CellField out = f;
  const double scale = m.positive / m.negative;
  for (double& v : out.values()) {
    if (v < 0.0) v *= scale;
  }
  return out;
}

CellField rasterize_k(const ProblemSpec& spec, const Grid& grid) {
  CellField k(grid, spec.k_base);
  for (const ShapeSpec& region : spec.k_regions) {
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i) {
        if (region.contains(grid.cell_center(i, j))) k(i, j) = region.value();
      }
    }
  }
  for (double v : k.values()) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error("slope bound k must be positive everywhere");
  }
  return k;
}

void check_source_margin(const CellField& f, const Grid& grid, int margin) {
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const bool ring = i < margin || j < margin || i >= grid.nx - margin || j >= grid.ny - margin;
      if (ring && f(i, j) != 0.0) {
        throw Error("source support within " + std::to_string(margin) +
                    " cells of the domain boundary at cell (" + std::to_string(i) + ", " +
                    std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace sandflux
