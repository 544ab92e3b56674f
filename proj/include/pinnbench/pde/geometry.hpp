#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pinnbench/core.hpp"

namespace pinnbench::pde {

// Spatial shapes. Every case domain in the registry is either a box or a
// ball, possibly with box/ball holes subtracted.
struct Shape {
  enum Kind { BoxS, BallS } kind = BoxS;
  Vec lo, hi;      // box
  Vec center;      // ball
  double radius = 0;

  static Shape box(Vec lo, Vec hi) {
    Shape s;
    s.kind = BoxS;
    s.lo = std::move(lo);
    s.hi = std::move(hi);
    return s;
  }
  static Shape ball(Vec center, double r) {
    Shape s;
    s.kind = BallS;
    s.center = std::move(center);
    s.radius = r;
    return s;
  }

  int dim() const { return int(kind == BoxS ? lo.size() : center.size()); }

  bool contains(const Vec& p, bool closed) const {
    if (kind == BoxS) {
      for (Index i = 0; i < lo.size(); ++i) {
        if (closed ? (p[i] < lo[i] || p[i] > hi[i]) : (p[i] <= lo[i] || p[i] >= hi[i]))
          return false;
      }
      return true;
    }
    double d2 = (p - center).squaredNorm();
    return closed ? d2 <= radius * radius : d2 < radius * radius;
  }

  double volume() const {
    if (kind == BoxS) return (hi - lo).prod();
    int d = dim();
    // unit-ball volumes for the dimensions in use
    double unit = d == 1   ? 2.0
                  : d == 2 ? M_PI
                  : d == 3 ? 4.0 * M_PI / 3.0
                  : d == 4 ? M_PI * M_PI / 2.0
                  : d == 5 ? 8.0 * M_PI * M_PI / 15.0
                  : d == 6 ? M_PI * M_PI * M_PI / 6.0
                           : 0.0;
    require(unit > 0, "Shape::volume: unsupported ball dimension");
    return unit * std::pow(radius, d);
  }

  double surface() const {
    if (kind == BoxS) {
      double v = (hi - lo).prod(), s = 0;
      for (Index i = 0; i < lo.size(); ++i) s += 2.0 * v / (hi[i] - lo[i]);
      return s;
    }
    int d = dim();
    return volume() * d / radius;  // sphere area = d V / r
  }
};

// A labeled piece of the domain boundary.
struct BoundaryComponent {
  enum Kind { Face, Sphere, HoleSphere, HoleFace, Initial, PeriodicPair } kind = Face;
  std::string name;
  int axis = -1;       // face / periodic: which axis
  bool upper = false;  // face: lo or hi side
  int hole = -1;       // hole index
  double measure = 0;  // effective measure, time-extruded when applicable
};

class Geometry {
 public:
  Geometry() = default;
  Geometry(Shape outer, std::vector<Shape> holes = {})
      : outer_(std::move(outer)), holes_(std::move(holes)) {}

  int dim() const { return outer_.dim(); }
  const Shape& outer() const { return outer_; }
  const std::vector<Shape>& holes() const { return holes_; }

  bool contains(const Vec& p) const {
    if (!outer_.contains(p, false)) return false;
    for (const Shape& h : holes_)
      if (h.contains(p, true)) return false;
    return true;
  }

  // membership including the outer boundary (holes stay excluded up to their
  // rims); reference grids and observation layouts live on the closure
  bool contains_closure(const Vec& p) const {
    if (!outer_.contains(p, true)) return false;
    for (const Shape& h : holes_)
      if (h.contains(p, false)) return false;
    return true;
  }

  bool boundary_keeps_face_point(const Vec& p) const {
    for (const Shape& h : holes_)
      if (h.contains(p, true)) return false;
    return true;
  }

  bool boundary_keeps_hole_point(const Vec& p, int hole) const {
    if (!outer_.contains(p, false)) return false;
    for (int i = 0; i < int(holes_.size()); ++i)
      if (i != hole && holes_[std::size_t(i)].contains(p, true)) return false;
    return true;
  }

  void bbox(Vec& lo, Vec& hi) const {
    if (outer_.kind == Shape::BoxS) {
      lo = outer_.lo;
      hi = outer_.hi;
    } else {
      lo = outer_.center.array() - outer_.radius;
      hi = outer_.center.array() + outer_.radius;
    }
  }

  double volume() const {
    double v = outer_.volume();
    for (const Shape& h : holes_) v -= h.volume();  // holes lie inside in all cases
    return v;
  }

 private:
  Shape outer_;
  std::vector<Shape> holes_;
};

}  // namespace pinnbench::pde
