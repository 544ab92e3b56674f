#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "pinnbench/pde/case.hpp"
#include "pinnbench/pde/fields.hpp"
#include "pinnbench/quadrature.hpp"

namespace pinnbench::pde {

// Exact solution of u_t + u u_x = nu u_xx on [-1,1], u(x,0) = -sin(pi x),
// u(+-1,t) = 0, via Cole-Hopf. The transformed heat solution is evaluated as
// the heat-kernel integral
//   phi(x,t) = (1/sqrt(pi)) int e^{-z^2} F(x - sigma z) dz,
//   F(y) = exp(-kappa cos(pi y)), kappa = 1/(2 pi nu), sigma = sqrt(4 nu t),
// with Gauss-Hermite quadrature, and u = -2 nu phi_x / phi. The integrand of
// phi is strictly positive, so the ratio has no cancellation; the equivalent
// cosine series needs ~kappa/ln10 extra digits near t = 0 and silently loses
// the initial condition in doubles. Here t = 0 collapses to u = -sin(pi x)
// exactly, and the odd symmetry of u0 about x = +-1 keeps the homogeneous
// Dirichlet conditions exact.
class BurgersCole {
 public:
  explicit BurgersCole(double nu, int nodes = 200)
      : nu_(nu), kappa_(1.0 / (2.0 * M_PI * nu)) {
    QuadRule r = gauss_hermite(nodes);
    z_ = std::move(r.nodes);
    w_ = std::move(r.weights);
  }

  // generic-scalar value so the solution plugs into ScalarField
  template <class T>
  T value(const T& x, const T& t) const {
    using std::cos;
    using std::exp;
    using std::sin;
    using std::sqrt;
    T sig = sqrt((4.0 * nu_) * t);
    const double xs = scalar_of(x), ss = scalar_of(sig);
    double m = -1e300;  // largest log-integrand; shifting keeps exp in range
    for (Index i = 0; i < z_.size(); ++i)
      m = std::max(m, -kappa_ * std::cos(M_PI * (xs - ss * z_[i])));
    T num = x * 0.0, den = x * 0.0;
    for (Index i = 0; i < z_.size(); ++i) {
      T y = x - z_[i] * sig;
      T g = exp(-kappa_ * cos(M_PI * y) - m);
      num = num + w_[i] * sin(M_PI * y) * g;
      den = den + w_[i] * g;
    }
    return (-1.0) * num / den;  // -2 nu kappa pi = -1 folds the prefactor away
  }

  double operator()(double x, double t) const { return value(x, t); }

  struct Jet {
    double u, ux, ut, uxx;
  };

  // value and the derivatives Burgers' equation needs. Time derivatives come
  // from the heat equation phi_t = nu phi_xx, so only x-moments are summed.
  Jet jet(double x, double t) const {
    const double sig = std::sqrt(4.0 * nu_ * t);
    double m = -1e300;
    for (Index i = 0; i < z_.size(); ++i)
      m = std::max(m, -kappa_ * std::cos(M_PI * (x - sig * z_[i])));
    double n0 = 0, n1 = 0, n2 = 0, n3 = 0;  // phi, phi_x, phi_xx, phi_xxx
    for (Index i = 0; i < z_.size(); ++i) {
      const double y = x - sig * z_[i];
      const double l1 = kappa_ * M_PI * std::sin(M_PI * y);
      const double l2 = kappa_ * M_PI * M_PI * std::cos(M_PI * y);
      const double l3 = -kappa_ * M_PI * M_PI * M_PI * std::sin(M_PI * y);
      const double f = w_[i] * std::exp(-kappa_ * std::cos(M_PI * y) - m);
      n0 += f;
      n1 += l1 * f;
      n2 += (l2 + l1 * l1) * f;
      n3 += (l3 + 3.0 * l1 * l2 + l1 * l1 * l1) * f;
    }
    Jet j;
    const double inv = checked_div(1.0, n0, "BurgersCole");
    j.u = -2 * nu_ * n1 * inv;
    j.ux = -2 * nu_ * (n2 * n0 - n1 * n1) * inv * inv;
    j.ut = -2 * nu_ * nu_ * (n3 * n0 - n1 * n2) * inv * inv;
    j.uxx = -2 * nu_ * (n3 * n0 * n0 - 3 * n2 * n1 * n0 + 2 * n1 * n1 * n1) * inv * inv * inv;
    return j;
  }

 private:
  double nu_, kappa_;
  Vec z_, w_;  // Gauss-Hermite nodes and weights
};

// Tensor grid over the case domain (row-major, last axis fastest). Points
// inside holes are kept in the grid (the evaluators mask them) so spectral
// metrics see a regular lattice.
inline ReferenceSolution tensor_grid(const Case& c, const std::vector<int>& counts) {
  const int dim = c.input_dim();
  require(int(counts.size()) == dim, "tensor_grid: counts size mismatch");
  ReferenceSolution ref;
  ref.axes.resize(std::size_t(dim));
  Vec lo, hi;
  c.geom.bbox(lo, hi);
  long total = 1;
  for (int a = 0; a < dim; ++a) {
    int n = counts[std::size_t(a)];
    double a_lo = a < c.geom.dim() ? lo[a] : 0.0;
    double a_hi = a < c.geom.dim() ? hi[a] : *c.time_end;
    Vec axis(n);
    for (int i = 0; i < n; ++i)
      axis[i] = n == 1 ? a_lo : a_lo + (a_hi - a_lo) * double(i) / double(n - 1);
    ref.axes[std::size_t(a)] = axis;
    total *= n;
  }
  ref.points.resize(total, dim);
  for (long r = 0; r < total; ++r) {
    long rem = r;
    for (int a = dim - 1; a >= 0; --a) {
      long n = counts[std::size_t(a)];
      ref.points(r, a) = ref.axes[std::size_t(a)][rem % n];
      rem /= n;
    }
  }
  return ref;
}

// Documented synthesized-grid resolution: 100 per spatial axis up to 2-D,
// 20 per axis in 3-D and 4-D, 8 per axis from 5-D up (keeps PNd/HNd grids in
// memory), plus 20 time slices when the case is time-dependent.
inline std::vector<int> default_grid_counts(const Case& c) {
  const int sd = c.geom.dim();
  const int per_axis = sd <= 2 ? 100 : sd <= 4 ? 20 : 8;
  std::vector<int> counts(std::size_t(sd), per_axis);
  if (c.time_end) counts.push_back(20);
  return counts;
}

// NaN out grid rows that fall outside the domain closure (ball domains,
// holes); the metric layer skips NaN rows per unknown.
inline void mask_outside(const Case& c, ReferenceSolution& ref) {
  Vec p(c.geom.dim());
  for (Index r = 0; r < ref.points.rows(); ++r) {
    for (int a = 0; a < c.geom.dim(); ++a) p[a] = ref.points(r, a);
    if (!c.geom.contains_closure(p))
      ref.values.row(r).setConstant(std::numeric_limits<double>::quiet_NaN());
  }
}

// Fills ref.values from the case's closed-form solution.
inline void fill_from_analytic(const Case& c, ReferenceSolution& ref) {
  require(c.has_analytic(), "fill_from_analytic: case has no closed form");
  const int nu = c.n_unknowns();
  ref.values.resize(ref.points.rows(), nu);
  std::vector<double> x(std::size_t(c.input_dim()));
  for (Index r = 0; r < ref.points.rows(); ++r) {
    for (int a = 0; a < c.input_dim(); ++a) x[std::size_t(a)] = ref.points(r, a);
    for (int u = 0; u < nu; ++u) {
      const ScalarField& f = c.analytic[std::size_t(u)];
      // coefficient unknowns of inverse problems are spatial-only
      if (c.fields[std::size_t(c.field_of_unknown(u))].spatial_only) {
        std::vector<double> xs(x.begin(), x.begin() + c.geom.dim());
        ref.values(r, u) = f.value(xs);
      } else {
        ref.values(r, u) = f.value(x);
      }
    }
  }
  ref.source = "analytic";
}

// Noisy samples of the observed unknown for inverse problems, deterministic
// per seed. Grid layouts take every lattice node in the domain closure;
// random layouts draw interior points.
struct ObservedData {
  Mat points;
  Vec values;
};

inline ObservedData observed_data(const Case& c, std::uint64_t seed) {
  const ObservationSpec& obs = c.observations;
  require(obs.enabled, "observed_data: case has no observation spec");
  require(c.has_analytic(), "observed_data: observations need a closed-form truth");
  ObservedData d;
  if (obs.layout == ObservationSpec::GridLayout) {
    require(!c.time_end.has_value(), "observed_data: grid observations are for static cases");
    std::vector<int> counts(std::size_t(c.geom.dim()), obs.grid_per_axis);
    ReferenceSolution g = tensor_grid(c, counts);
    std::vector<long> keep;
    for (Index i = 0; i < g.points.rows(); ++i)
      if (c.geom.contains_closure(g.points.row(i).transpose())) keep.push_back(i);
    d.points.resize(long(keep.size()), g.points.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) d.points.row(long(i)) = g.points.row(keep[i]);
  } else {
    d.points = sample_interior(c.geom, c.time_end, obs.count, mix_seed(seed, 3));
  }
  Rng noise(mix_seed(seed, 4));
  d.values.resize(d.points.rows());
  std::vector<double> x(std::size_t(c.input_dim()));
  const ScalarField& truth = c.analytic[std::size_t(obs.unknown)];
  for (Index i = 0; i < d.points.rows(); ++i) {
    for (int a = 0; a < int(d.points.cols()); ++a) x[std::size_t(a)] = d.points(i, a);
    d.values[i] = truth.value(x) + obs.noise_sigma * noise.normal();
  }
  return d;
}

// The standard make_reference body for closed-form cases.
inline ReferenceSolution analytic_grid_reference(const Case& c) {
  ReferenceSolution ref = tensor_grid(c, default_grid_counts(c));
  fill_from_analytic(c, ref);
  mask_outside(c, ref);
  return ref;
}

}  // namespace pinnbench::pde
