#pragma once

#include <algorithm>
#include <array>
#include <vector>

#include "pinnbench/ad/dual.hpp"
#include "pinnbench/core.hpp"

namespace pinnbench::ad {

// f is a functor with a templated call operator taking std::vector<T>.
// multi_index holds per-axis derivative orders; total order <= 4.
//
// Each nesting level of Dual carries one directional derivative along a
// single coordinate axis; extracting the tangent at every level yields the
// mixed partial.
namespace detail {

template <class T>
std::vector<Dual<T>> seed_level(const std::vector<T>& x, int axis) {
  std::vector<Dual<T>> out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    T tangent = zero_like(x[i]);
    if (int(i) == axis) tangent = tangent + 1.0;
    out.push_back(Dual<T>(x[i], tangent));
  }
  return out;
}

template <class F>
double nested(F&& f, const std::vector<double>& x, const std::vector<int>& axes) {
  switch (axes.size()) {
    case 0:
      return f(x);
    case 1: {
      auto r = f(seed_level(x, axes[0]));
      return r.t;
    }
    case 2: {
      auto r = f(seed_level(seed_level(x, axes[0]), axes[1]));
      return r.t.t;
    }
    case 3: {
      auto r = f(seed_level(seed_level(seed_level(x, axes[0]), axes[1]), axes[2]));
      return r.t.t.t;
    }
    case 4: {
      auto r = f(seed_level(seed_level(seed_level(seed_level(x, axes[0]), axes[1]), axes[2]),
                            axes[3]));
      return r.t.t.t.t;
    }
    default:
      throw std::logic_error("input_derivative: order > 4 unsupported");
  }
}

}  // namespace detail

template <class F>
double input_derivative(F&& f, const std::vector<double>& point,
                        const std::vector<int>& multi_index) {
  require(multi_index.size() == point.size(), "input_derivative: multi-index rank mismatch");
  std::vector<int> axes;
  for (std::size_t i = 0; i < multi_index.size(); ++i) {
    require(multi_index[i] >= 0, "input_derivative: negative order");
    for (int k = 0; k < multi_index[i]; ++k) axes.push_back(int(i));
  }
  return detail::nested(f, point, axes);
}

// First-order gradient via one forward-dual pass per axis.
template <class F>
Vec input_gradient(F&& f, const std::vector<double>& point) {
  Vec g(Index(point.size()));
  for (std::size_t i = 0; i < point.size(); ++i) {
    auto r = f(detail::seed_level(point, int(i)));
    g[Index(i)] = r.t;
  }
  return g;
}

// Max relative discrepancy between the forward-dual gradient and central
// differences with step h. Denominator floors at 1 so near-zero entries are
// compared absolutely.
template <class F>
double finite_difference_check(F&& f, const std::vector<double>& point, double h) {
  Vec analytic = input_gradient(f, point);
  double worst = 0.0;
  std::vector<double> p = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    p[i] = point[i] + h;
    double fp = f(p);
    p[i] = point[i] - h;
    double fm = f(p);
    p[i] = point[i];
    double fd = (fp - fm) / (2.0 * h);
    double denom = std::max({std::abs(analytic[Index(i)]), std::abs(fd), 1.0});
    worst = std::max(worst, std::abs(analytic[Index(i)] - fd) / denom);
  }
  return worst;
}

}  // namespace pinnbench::ad
