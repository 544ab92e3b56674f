#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "pinnbench/core.hpp"

namespace pinnbench::eval {

inline void check_pair(const Vec& pred, const Vec& truth, const char* op) {
  require(pred.size() == truth.size(), std::string(op) + ": length mismatch");
  require(pred.size() >= 1, std::string(op) + ": empty input");
}

inline double l2re(const Vec& pred, const Vec& truth) {
  check_pair(pred, truth, "l2re");
  const double denom = truth.squaredNorm();
  if (denom == 0) throw EvalError("l2re: truth is identically zero");
  return std::sqrt((pred - truth).squaredNorm() / denom);
}

inline double l1re(const Vec& pred, const Vec& truth) {
  check_pair(pred, truth, "l1re");
  const double denom = truth.cwiseAbs().sum();
  if (denom == 0) throw EvalError("l1re: truth is identically zero");
  return (pred - truth).cwiseAbs().sum() / denom;
}

inline double mse(const Vec& pred, const Vec& truth) {
  check_pair(pred, truth, "mse");
  return (pred - truth).squaredNorm() / double(pred.size());
}

inline double max_err(const Vec& pred, const Vec& truth) {
  check_pair(pred, truth, "max_err");
  return (pred - truth).cwiseAbs().maxCoeff();
}

struct FmseBands {
  double low = 0, mid = 0, high = 0;
};

namespace detail {

// In-place DFT along one axis of a flattened tensor (row-major, last axis
// fastest). Naive O(n^2) per line; grids here are small enough that FFT
// machinery isn't worth carrying.
inline void dft_axis(std::vector<std::complex<double>>& data, const std::vector<int>& shape,
                     int axis) {
  const int n = shape[std::size_t(axis)];
  long stride = 1;
  for (int a = axis + 1; a < int(shape.size()); ++a) stride *= shape[std::size_t(a)];
  long outer = 1;
  for (int a = 0; a < axis; ++a) outer *= shape[std::size_t(a)];

  std::vector<std::complex<double>> line(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> tw(static_cast<std::size_t>(n));
  const double w = -2.0 * 3.14159265358979323846 / double(n);
  for (int k = 0; k < n; ++k) tw[std::size_t(k)] = {std::cos(w * k), std::sin(w * k)};

  for (long o = 0; o < outer; ++o)
    for (long s = 0; s < stride; ++s) {
      const long base = o * stride * n + s;
      for (int j = 0; j < n; ++j) line[std::size_t(j)] = data[std::size_t(base + j * stride)];
      for (int k = 0; k < n; ++k) {
        std::complex<double> acc = 0;
        for (int j = 0; j < n; ++j) acc += line[std::size_t(j)] * tw[std::size_t((k * j) % n)];
        data[std::size_t(base + k * stride)] = acc;
      }
    }
}

inline int aliased_freq(int k, int n) { return std::min(k, n - k); }

}  // namespace detail

// Banded spectral error of a gridded difference field. `diff` is flattened
// row-major (last axis fastest) over `shape`. Band k ranges follow the
// PDEBench-style split on N = the smallest axis: low [0, N/8), mid
// [N/8, N/4), high [N/4, N/2]; in two or more dimensions wavenumbers bin
// radially. Band value = sqrt(sum of squared spectral amplitudes in band)
// divided by the number of integer wavenumbers in the band. Absent (nullopt)
// when the smallest axis has fewer than 8 points.
inline std::optional<FmseBands> fmse_bands(const Vec& diff, const std::vector<int>& shape) {
  long total = 1;
  int nmin = shape.empty() ? 0 : shape[0];
  for (int s : shape) {
    require(s >= 1, "fmse: bad grid shape");
    total *= s;
    nmin = std::min(nmin, s);
  }
  require(total == diff.size(), "fmse: shape does not match data length");
  if (nmin < 8) return std::nullopt;

  std::vector<std::complex<double>> f(static_cast<std::size_t>(total));
  for (long i = 0; i < total; ++i) f[std::size_t(i)] = diff[i];
  for (int a = 0; a < int(shape.size()); ++a) detail::dft_axis(f, shape, a);

  const int lo_end = nmin / 8, mid_end = nmin / 4, hi_end = nmin / 2;
  double s_low = 0, s_mid = 0, s_high = 0;
  long w_low = 0, w_mid = 0, w_high = 0;

  // count the integer radial wavenumbers per band (band widths)
  for (int k = 0; k <= hi_end; ++k) {
    if (k < lo_end)
      ++w_low;
    else if (k < mid_end)
      ++w_mid;
    else
      ++w_high;
  }

  std::vector<int> idx(shape.size(), 0);
  for (long flat = 0; flat < total; ++flat) {
    double r2 = 0;
    for (std::size_t a = 0; a < shape.size(); ++a) {
      const int ka = detail::aliased_freq(idx[a], shape[a]);
      r2 += double(ka) * ka;
    }
    const int kr = int(std::floor(std::sqrt(r2) + 0.5));
    const double e = std::norm(f[std::size_t(flat)]);
    if (kr < lo_end)
      s_low += e;
    else if (kr < mid_end)
      s_mid += e;
    else if (kr <= hi_end)
      s_high += e;
    for (std::size_t a = shape.size(); a-- > 0;) {
      if (++idx[a] < shape[a]) break;
      idx[a] = 0;
    }
  }

  FmseBands b;
  b.low = w_low > 0 ? std::sqrt(s_low) / double(w_low) : 0.0;
  b.mid = w_mid > 0 ? std::sqrt(s_mid) / double(w_mid) : 0.0;
  b.high = w_high > 0 ? std::sqrt(s_high) / double(w_high) : 0.0;
  return b;
}

struct TemporalReport {
  std::vector<double> slice_centers;
  std::vector<double> slice_l2re;
  int dropped_empty = 0;  // bins without test points
};

// Buckets test points into n_slices equal time bins over [0, t_end] and
// reports the per-bin relative error. Empty bins are dropped and counted.
inline TemporalReport temporal_l2re(const Vec& pred, const Vec& truth, const Vec& times,
                                    double t_end, int n_slices = 10) {
  check_pair(pred, truth, "temporal_l2re");
  require(times.size() == pred.size(), "temporal_l2re: time column length mismatch");
  require(n_slices >= 1 && t_end > 0, "temporal_l2re: bad slicing");
  TemporalReport rep;
  for (int s = 0; s < n_slices; ++s) {
    const double lo = t_end * s / n_slices, hi = t_end * (s + 1) / n_slices;
    double num = 0, den = 0;
    long count = 0;
    for (Index i = 0; i < times.size(); ++i) {
      const double t = times[i];
      const bool in = s + 1 == n_slices ? (t >= lo && t <= hi) : (t >= lo && t < hi);
      if (!in) continue;
      num += (pred[i] - truth[i]) * (pred[i] - truth[i]);
      den += truth[i] * truth[i];
      ++count;
    }
    if (count == 0) {
      ++rep.dropped_empty;
      continue;
    }
    if (den == 0) throw EvalError("temporal_l2re: truth is zero on a slice");
    rep.slice_centers.push_back(0.5 * (lo + hi));
    rep.slice_l2re.push_back(std::sqrt(num / den));
  }
  return rep;
}

}  // namespace pinnbench::eval
