#pragma once

#include <memory>

#include "pinnbench/ad/dual.hpp"
#include "pinnbench/ad/tape.hpp"
#include "pinnbench/pde/geometry.hpp"

namespace pinnbench::pde {

// Plain double view of any scalar the residual machinery feeds through a
// coefficient field (used to pick interpolation cells and branches; the
// derivative information stays on the original value).
inline double scalar_of(double v) { return v; }
inline double scalar_of(const ad::Var& v) { return v.value(); }
template <class T>
double scalar_of(const ad::Dual<T>& d) {
  return scalar_of(d.v);
}

// Stationary Gaussian random field with squared-exponential covariance,
// sampled once via random Fourier features:
//   g(x) = sigma sqrt(2/M) sum_k cos(w_k . x + b_k),  w ~ N(0, 1/len^2) I.
// The draw is deterministic in the seed. exp(g) gives the positive fields
// (conductivities, wave speeds). Lengths are in the units of the domain.
class RffField {
 public:
  RffField(int dim, std::uint64_t seed, double length = 0.2, double sigma = 1.0,
           bool exponential = true, int features = 256)
      : dim_(dim), exp_(exponential), amp_(sigma * std::sqrt(2.0 / features)) {
    Rng rng(seed);
    w_.resize(features, dim);
    b_.resize(features);
    for (int k = 0; k < features; ++k) {
      for (int a = 0; a < dim; ++a) w_(k, a) = rng.normal() / length;
      b_[k] = rng.uniform(0.0, 2.0 * M_PI);
    }
  }

  int dim() const { return dim_; }

  // value and spatial gradient in one sweep, generic over the scalar type
  template <class T>
  void jet(const T* x, T& value, T* grad) const {
    T g = x[0] * 0.0;
    for (int a = 0; a < dim_; ++a) grad[a] = g;
    for (Index k = 0; k < w_.rows(); ++k) {
      T phase = x[0] * w_(k, 0) + b_[k];
      for (int a = 1; a < dim_; ++a) phase = phase + x[a] * w_(k, a);
      using std::cos;
      using std::sin;
      g = g + amp_ * cos(phase);
      T s = sin(phase);
      for (int a = 0; a < dim_; ++a) grad[a] = grad[a] - (amp_ * w_(k, a)) * s;
    }
    if (exp_) {
      using std::exp;
      value = exp(g);
      for (int a = 0; a < dim_; ++a) grad[a] = grad[a] * value;
    } else {
      value = g;
    }
  }

  template <class T>
  T value(const T* x) const {
    T v, grad[8];
    require(dim_ <= 8, "RffField: dimension cap exceeded");
    jet(x, v, grad);
    return v;
  }

  double at(const Vec& p) const {
    std::vector<double> x(p.data(), p.data() + p.size());
    return value(x.data());
  }

 private:
  int dim_;
  bool exp_;
  double amp_;
  Mat w_;
  Vec b_;
};

// Piecewise-bilinear field over a uniform node lattice: constant cells pick
// the patch, bilinear interpolation inside. Matches "piecewise linear in
// each square" coefficients stored on grids. Gradients are the patch
// gradients (discontinuous across cell edges, which the samplers never hit).
class BilinearField {
 public:
  BilinearField(Vec lo, Vec hi, int nx, int ny, Mat nodes)
      : lo_(std::move(lo)), hi_(std::move(hi)), nx_(nx), ny_(ny), nodes_(std::move(nodes)) {
    require(nodes_.rows() == nx_ && nodes_.cols() == ny_, "BilinearField: node shape mismatch");
    require(nx_ >= 2 && ny_ >= 2, "BilinearField: needs at least a 2x2 lattice");
  }

  // node values drawn from a GRF so the fallback field matches the documented
  // covariance family
  static BilinearField from_grf(const Vec& lo, const Vec& hi, int nx, int ny,
                                std::uint64_t seed, double length, bool exponential) {
    RffField g(2, seed, length, 1.0, exponential);
    Mat nodes(nx, ny);
    Vec p(2);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        p[0] = lo[0] + (hi[0] - lo[0]) * double(i) / double(nx - 1);
        p[1] = lo[1] + (hi[1] - lo[1]) * double(j) / double(ny - 1);
        nodes(i, j) = g.at(p);
      }
    return BilinearField(lo, hi, nx, ny, std::move(nodes));
  }

  template <class T>
  void jet(const T* x, T& value, T* grad) const {
    const double dx = (hi_[0] - lo_[0]) / double(nx_ - 1);
    const double dy = (hi_[1] - lo_[1]) / double(ny_ - 1);
    int i = cell(scalar_of(x[0]), lo_[0], dx, nx_);
    int j = cell(scalar_of(x[1]), lo_[1], dy, ny_);
    // local coordinates in [0,1] over the cell
    T u = (x[0] - (lo_[0] + i * dx)) / dx;
    T v = (x[1] - (lo_[1] + j * dy)) / dy;
    const double f00 = nodes_(i, j), f10 = nodes_(i + 1, j);
    const double f01 = nodes_(i, j + 1), f11 = nodes_(i + 1, j + 1);
    T fu0 = f00 + u * (f10 - f00);
    T fu1 = f01 + u * (f11 - f01);
    value = fu0 + v * (fu1 - fu0);
    T dfdu = (f10 - f00) + v * ((f11 - f01) - (f10 - f00));
    T dfdv = fu1 - fu0;
    grad[0] = dfdu / dx;
    grad[1] = dfdv / dy;
  }

  double at(const Vec& p) const {
    double v, g[2];
    double x[2] = {p[0], p[1]};
    jet(x, v, g);
    return v;
  }

 private:
  static int cell(double x, double lo, double d, int n) {
    int i = int(std::floor((x - lo) / d));
    return std::min(std::max(i, 0), n - 2);
  }

  Vec lo_, hi_;
  int nx_, ny_;
  Mat nodes_;  // nodes_(i,j) at (lo_x + i dx, lo_y + j dy)
};

}  // namespace pinnbench::pde
