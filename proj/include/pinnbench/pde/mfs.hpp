#pragma once

#include <sstream>

#include "pinnbench/pde/case.hpp"

namespace pinnbench::pde {

// Method-of-fundamental-solutions solver for the Laplace problems on a box
// with circular holes (Poisson2d-C and its scaled family). The candidate
//   u(x) = c0 + sum_j c_j log|x - s_j|
// is harmonic away from the sources, which sit outside the solution domain:
// on shrunken circles inside each hole and on a large circle enclosing the
// box. Coefficients come from boundary collocation least squares. Because u
// solves the PDE exactly, the maximum principle bounds the interior error by
// the boundary misfit, which we measure on a fresh probe set and report as a
// certificate in the source tag.
class HarmonicMfs2d {
 public:
  HarmonicMfs2d(const Geometry& g, const std::function<double(const Vec&)>& bc_value,
                int per_hole = 64, int outer_sources = 128) {
    require(g.dim() == 2 && g.outer().kind == Shape::BoxS, "HarmonicMfs2d: box domains only");
    const Vec lo = g.outer().lo, hi = g.outer().hi;
    const Vec mid = 0.5 * (lo + hi);
    const double half_diag = 0.5 * (hi - lo).norm();

    // source ring well outside the box; holes get interior rings at half
    // radius, where log sources represent the exterior harmonic exactly
    for (int k = 0; k < outer_sources; ++k) {
      double a = 2.0 * M_PI * (k + 0.5) / outer_sources;
      Vec s(2);
      s << mid[0] + 2.5 * half_diag * std::cos(a), mid[1] + 2.5 * half_diag * std::sin(a);
      sources_.push_back(s);
    }
    for (const Shape& h : g.holes()) {
      require(h.kind == Shape::BallS, "HarmonicMfs2d: circular holes only");
      for (int k = 0; k < per_hole; ++k) {
        double a = 2.0 * M_PI * (k + 0.5) / per_hole;
        Vec s(2);
        s << h.center[0] + 0.5 * h.radius * std::cos(a),
            h.center[1] + 0.5 * h.radius * std::sin(a);
        sources_.push_back(s);
      }
    }

    auto colloc = boundary_points(g, 8);
    const Index rows = Index(colloc.size());
    const Index cols = Index(sources_.size()) + 1;
    Mat A(rows, cols);
    Vec b(rows);
    for (Index r = 0; r < rows; ++r) {
      A(r, 0) = 1.0;
      for (std::size_t j = 0; j < sources_.size(); ++j)
        A(r, Index(j) + 1) = std::log((colloc[std::size_t(r)] - sources_[j]).norm());
      b[r] = bc_value(colloc[std::size_t(r)]);
    }
    // column scaling keeps the QR pivoting honest across source distances
    Vec scale(cols);
    for (Index j = 0; j < cols; ++j) {
      scale[j] = A.col(j).norm();
      if (scale[j] < 1e-30) scale[j] = 1.0;
      A.col(j) /= scale[j];
    }
    coef_ = A.colPivHouseholderQr().solve(b);
    coef_.array() /= scale.array();

    // certificate on probes not used for fitting
    double worst = 0.0;
    for (const Vec& p : boundary_points(g, 13)) {
      double e = std::abs(eval(p) - bc_value(p));
      if (e > worst) worst = e;
    }
    boundary_max_err_ = worst;
  }

  double eval(const Vec& p) const {
    double u = coef_[0];
    for (std::size_t j = 0; j < sources_.size(); ++j)
      u += coef_[Index(j) + 1] * std::log((p - sources_[j]).norm());
    return u;
  }

  double boundary_max_err() const { return boundary_max_err_; }

  std::string certificate() const {
    std::ostringstream os;
    os.precision(2);
    os << std::scientific << "mfs, boundary max err " << boundary_max_err_
       << " (max principle bounds interior error)";
    return os.str();
  }

 private:
  // deterministic dense boundary sampling; `density` scales point counts and
  // differs between the fit set and the certificate set
  static std::vector<Vec> boundary_points(const Geometry& g, int density) {
    std::vector<Vec> pts;
    const Vec lo = g.outer().lo, hi = g.outer().hi;
    for (int side = 0; side < 4; ++side) {
      int n = 40 * density;
      for (int i = 0; i < n; ++i) {
        double s = (i + 0.5) / n;
        Vec p(2);
        switch (side) {
          case 0: p << lo[0], lo[1] + s * (hi[1] - lo[1]); break;
          case 1: p << hi[0], lo[1] + s * (hi[1] - lo[1]); break;
          case 2: p << lo[0] + s * (hi[0] - lo[0]), lo[1]; break;
          default: p << lo[0] + s * (hi[0] - lo[0]), hi[1]; break;
        }
        if (g.boundary_keeps_face_point(p)) pts.push_back(p);
      }
    }
    for (int h = 0; h < int(g.holes().size()); ++h) {
      const Shape& hole = g.holes()[std::size_t(h)];
      int n = 30 * density;
      for (int i = 0; i < n; ++i) {
        double a = 2.0 * M_PI * (i + 0.5) / n;
        Vec p(2);
        p << hole.center[0] + hole.radius * std::cos(a),
            hole.center[1] + hole.radius * std::sin(a);
        if (g.boundary_keeps_hole_point(p, h)) pts.push_back(p);
      }
    }
    return pts;
  }

  std::vector<Vec> sources_;
  Vec coef_;
  double boundary_max_err_ = 0.0;
};

}  // namespace pinnbench::pde
