#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include "pinnbench/pde/geometry.hpp"

namespace pinnbench::pde {

// When the time axis is present it is always the LAST coordinate column.

namespace detail {

inline Vec box_point(const Vec& lo, const Vec& hi, Rng& rng) {
  Vec p(lo.size());
  for (Index i = 0; i < lo.size(); ++i) p[i] = rng.uniform(lo[i], hi[i]);
  return p;
}

inline Vec sphere_point(const Vec& center, double r, Rng& rng) {
  Vec d(center.size());
  double n2 = 0;
  do {
    for (Index i = 0; i < d.size(); ++i) d[i] = rng.normal();
    n2 = d.squaredNorm();
  } while (n2 < 1e-12);
  return center + (r / std::sqrt(n2)) * d;
}

inline Vec ball_point(const Vec& center, double r, Rng& rng) {
  Vec p = sphere_point(center, 1.0, rng) - center;  // unit direction
  double u = std::pow(rng.uniform(), 1.0 / double(center.size()));
  return center + (r * u) * p;
}

// Point on one face of a box (the fixed axis pinned to lo/hi side).
inline Vec face_point(const Shape& box, int axis, bool upper, Rng& rng) {
  Vec p = box_point(box.lo, box.hi, rng);
  p[axis] = upper ? box.hi[axis] : box.lo[axis];
  return p;
}

inline bool hole_strictly_inside(const Geometry& g) {
  if (g.outer().kind != Shape::BoxS) return true;  // no ball-outer-with-hole cases
  for (const Shape& h : g.holes()) {
    Vec lo, hi;
    if (h.kind == Shape::BoxS) {
      lo = h.lo;
      hi = h.hi;
    } else {
      lo = h.center.array() - h.radius;
      hi = h.center.array() + h.radius;
    }
    for (Index i = 0; i < lo.size(); ++i)
      if (lo[i] <= g.outer().lo[i] || hi[i] >= g.outer().hi[i]) return false;
  }
  return true;
}

}  // namespace detail

// Enumerates boundary components with effective measures. Holes that touch
// the outer boundary truncate faces; in that case measures are corrected by
// a deterministic Monte Carlo acceptance estimate (holes are assumed mutually
// disjoint, which holds for every registry case). Components whose effective
// measure vanishes are dropped. Periodic axes replace their two faces by a
// single paired component.
inline std::vector<BoundaryComponent> enumerate_components(
    const Geometry& g, std::optional<double> time_end,
    const std::vector<int>& periodic_axes = {}) {
  const int d = g.dim();
  const double text = time_end ? *time_end : 1.0;
  const bool clean = detail::hole_strictly_inside(g);
  std::vector<BoundaryComponent> out;

  auto is_periodic = [&](int ax) {
    return std::find(periodic_axes.begin(), periodic_axes.end(), ax) != periodic_axes.end();
  };

  auto mc_fraction = [&](auto&& gen, auto&& keep, std::uint64_t salt) {
    if (clean) return 1.0;
    Rng rng(0xC0FFEEull + salt * 7919);
    int kept = 0;
    const int probes = 65536;
    for (int i = 0; i < probes; ++i)
      if (keep(gen(rng))) ++kept;
    return double(kept) / probes;
  };

  const Shape& o = g.outer();
  if (o.kind == Shape::BoxS) {
    for (int ax = 0; ax < d; ++ax) {
      if (is_periodic(ax)) {
        BoundaryComponent c;
        c.kind = BoundaryComponent::PeriodicPair;
        c.axis = ax;
        c.name = "periodic:x" + std::to_string(ax);
        double m = o.volume() / (o.hi[ax] - o.lo[ax]);
        c.measure = m * text;
        out.push_back(std::move(c));
        continue;
      }
      for (int side = 0; side < 2; ++side) {
        BoundaryComponent c;
        c.kind = BoundaryComponent::Face;
        c.axis = ax;
        c.upper = side == 1;
        c.name = "x" + std::to_string(ax) + (side ? "+" : "-");
        double m = o.volume() / (o.hi[ax] - o.lo[ax]);
        m *= mc_fraction(
            [&](Rng& r) { return detail::face_point(o, ax, side == 1, r); },
            [&](const Vec& p) { return g.boundary_keeps_face_point(p); },
            std::uint64_t(ax * 2 + side));
        c.measure = m * text;
        if (c.measure > 1e-12) out.push_back(std::move(c));
      }
    }
  } else {
    BoundaryComponent c;
    c.kind = BoundaryComponent::Sphere;
    c.name = "sphere";
    c.measure = o.surface() * text;
    out.push_back(std::move(c));
  }

  for (int h = 0; h < int(g.holes().size()); ++h) {
    const Shape& s = g.holes()[std::size_t(h)];
    if (s.kind == Shape::BallS) {
      BoundaryComponent c;
      c.kind = BoundaryComponent::HoleSphere;
      c.hole = h;
      c.name = "hole" + std::to_string(h);
      double m = s.surface();
      m *= mc_fraction(
          [&](Rng& r) { return detail::sphere_point(s.center, s.radius, r); },
          [&](const Vec& p) { return g.boundary_keeps_hole_point(p, h); },
          std::uint64_t(100 + h));
      c.measure = m * text;
      if (c.measure > 1e-12) out.push_back(std::move(c));
    } else {
      for (int ax = 0; ax < d; ++ax)
        for (int side = 0; side < 2; ++side) {
          BoundaryComponent c;
          c.kind = BoundaryComponent::HoleFace;
          c.hole = h;
          c.axis = ax;
          c.upper = side == 1;
          c.name = "hole" + std::to_string(h) + ":x" + std::to_string(ax) + (side ? "+" : "-");
          double m = s.volume() / (s.hi[ax] - s.lo[ax]);
          m *= mc_fraction(
              [&](Rng& r) { return detail::face_point(s, ax, side == 1, r); },
              [&](const Vec& p) { return g.boundary_keeps_hole_point(p, h); },
              std::uint64_t(1000 + h * 16 + ax * 2 + side));
          c.measure = m * text;
          if (c.measure > 1e-12) out.push_back(std::move(c));
        }
    }
  }

  if (time_end) {
    BoundaryComponent c;
    c.kind = BoundaryComponent::Initial;
    c.name = "initial";
    c.measure = g.volume();
    out.push_back(std::move(c));
  }
  return out;
}

// n_i = largest-remainder apportionment of n over weights (ties broken by
// lower index, so the result is deterministic).
inline std::vector<int> apportion(int n, const std::vector<double>& weights) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  require(total > 0, "apportion: weights sum to zero");
  std::vector<int> alloc(weights.size());
  std::vector<std::pair<double, int>> frac;
  int used = 0;
  for (int i = 0; i < int(weights.size()); ++i) {
    double q = n * weights[std::size_t(i)] / total;
    alloc[std::size_t(i)] = int(std::floor(q));
    used += alloc[std::size_t(i)];
    frac.push_back({q - std::floor(q), i});
  }
  std::stable_sort(frac.begin(), frac.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < n - used; ++k) ++alloc[std::size_t(frac[std::size_t(k)].second)];
  return alloc;
}

// Uniform interior sample by rejection over the bounding box. Throws when
// the acceptance ratio drops below 1% (degenerate geometry guard).
inline Mat sample_interior(const Geometry& g, std::optional<double> time_end, int n,
                           std::uint64_t seed) {
  const int d = g.dim();
  const int cols = d + (time_end ? 1 : 0);
  Mat pts(n, cols);
  Rng rng(seed);
  Vec lo, hi;
  g.bbox(lo, hi);
  long attempts = 0;
  const Shape& o = g.outer();
  for (int i = 0; i < n;) {
    Vec p = (o.kind == Shape::BallS && g.holes().empty())
                ? detail::ball_point(o.center, o.radius, rng)
                : detail::box_point(lo, hi, rng);
    ++attempts;
    if (g.contains(p)) {
      pts.row(i).head(d) = p;
      if (time_end) pts(i, d) = (1.0 - rng.uniform()) * *time_end;  // t in (0, T]
      ++i;
    } else if (attempts >= 10000 && double(i) < 0.01 * double(attempts)) {
      throw EvalError("sample_interior: acceptance ratio below 1%, geometry nearly empty");
    }
  }
  return pts;
}

struct BoundaryBatch {
  Mat points;             // n x cols
  Mat partner;            // periodic rows: the paired point; other rows equal points
  Mat normals;            // unit spatial normal, 0 in the time column (-1 for initial)
  std::vector<int> comp;  // component index per row
  std::vector<BoundaryComponent> components;
};

// Samples n boundary points apportioned to components by effective measure.
inline BoundaryBatch sample_boundary(const Geometry& g, std::optional<double> time_end, int n,
                                     std::uint64_t seed,
                                     const std::vector<int>& periodic_axes = {}) {
  BoundaryBatch out;
  out.components = enumerate_components(g, time_end, periodic_axes);
  const int d = g.dim();
  const int cols = d + (time_end ? 1 : 0);
  std::vector<double> weights;
  for (const auto& c : out.components) weights.push_back(c.measure);
  std::vector<int> alloc = apportion(n, weights);

  out.points.resize(n, cols);
  out.partner.resize(n, cols);
  out.normals = Mat::Zero(n, cols);
  out.comp.resize(std::size_t(n));

  Rng rng(seed);
  const Shape& o = g.outer();
  int row = 0;
  for (int ci = 0; ci < int(out.components.size()); ++ci) {
    const BoundaryComponent& c = out.components[std::size_t(ci)];
    long attempts = 0;
    for (int k = 0; k < alloc[std::size_t(ci)];) {
      Vec p, nrm = Vec::Zero(d), p2;
      bool ok = true;
      switch (c.kind) {
        case BoundaryComponent::Face:
          p = detail::face_point(o, c.axis, c.upper, rng);
          ok = g.boundary_keeps_face_point(p);
          nrm[c.axis] = c.upper ? 1.0 : -1.0;
          break;
        case BoundaryComponent::Sphere:
          p = detail::sphere_point(o.center, o.radius, rng);
          nrm = (p - o.center) / o.radius;
          break;
        case BoundaryComponent::HoleSphere: {
          const Shape& s = g.holes()[std::size_t(c.hole)];
          p = detail::sphere_point(s.center, s.radius, rng);
          ok = g.boundary_keeps_hole_point(p, c.hole);
          nrm = (s.center - p) / s.radius;  // outward from the domain = into the hole
          break;
        }
        case BoundaryComponent::HoleFace: {
          const Shape& s = g.holes()[std::size_t(c.hole)];
          p = detail::face_point(s, c.axis, c.upper, rng);
          ok = g.boundary_keeps_hole_point(p, c.hole);
          nrm[c.axis] = c.upper ? -1.0 : 1.0;  // into the hole
          break;
        }
        case BoundaryComponent::Initial: {
          Vec lo, hi;
          g.bbox(lo, hi);
          p = detail::box_point(lo, hi, rng);
          ok = g.contains(p);
          break;
        }
        case BoundaryComponent::PeriodicPair:
          p = detail::face_point(o, c.axis, false, rng);
          ok = g.boundary_keeps_face_point(p);
          p2 = p;
          p2[c.axis] = o.hi[c.axis];
          ok = ok && g.boundary_keeps_face_point(p2);
          break;
      }
      ++attempts;
      if (!ok) {
        if (attempts >= 10000 && double(k) < 0.01 * double(attempts))
          throw EvalError("sample_boundary: acceptance ratio below 1% on component " + c.name);
        continue;
      }
      out.points.row(row).head(d) = p;
      out.partner.row(row).head(d) = c.kind == BoundaryComponent::PeriodicPair ? p2 : p;
      out.normals.row(row).head(d) = nrm;
      if (time_end) {
        double t = c.kind == BoundaryComponent::Initial ? 0.0 : (1.0 - rng.uniform()) * *time_end;
        out.points(row, d) = t;
        out.partner(row, d) = t;
        out.normals(row, d) = c.kind == BoundaryComponent::Initial ? -1.0 : 0.0;
      }
      out.comp[std::size_t(row)] = ci;
      ++row;
      ++k;
    }
  }
  return out;
}

}  // namespace pinnbench::pde
