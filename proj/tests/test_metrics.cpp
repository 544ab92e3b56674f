#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "pinnbench/eval/evaluate.hpp"
#include "pinnbench/pde/registry.hpp"

using namespace pinnbench;
using namespace pinnbench::eval;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(Index(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// straight-line DFT magnitudes for the 1-d oracle, no shared code with fmse
std::vector<double> dft_mag2(const Vec& x) {
  const int n = int(x.size());
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    std::complex<double> acc = 0;
    for (int j = 0; j < n; ++j)
      acc += x[j] * std::polar(1.0, -2.0 * M_PI * k * j / n);
    out[std::size_t(k)] = std::norm(acc);
  }
  return out;
}

}  // namespace

TEST_CASE("pointwise metrics reproduce the worked examples", "[metrics]") {
  REQUIRE(l2re(vec({1, 1}), vec({2, 2})) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(l1re(vec({1, 1}), vec({2, 2})) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(mse(vec({0, 3}), vec({1, 1})) == Catch::Approx(2.5).margin(1e-15));
  REQUIRE(max_err(vec({0, 3}), vec({1, 1})) == Catch::Approx(2.0).margin(1e-15));
  REQUIRE(mse(vec({5}), vec({2})) == Catch::Approx(9.0).margin(1e-15));
  REQUIRE(max_err(vec({5}), vec({2})) == Catch::Approx(3.0).margin(1e-15));
}

TEST_CASE("relative errors scale as |c-1| for scaled predictions", "[metrics]") {
  Rng rng(3);
  Vec truth(40);
  for (Index i = 0; i < truth.size(); ++i) truth[i] = rng.normal() + 2.0;
  for (double c : {0.0, 0.5, 2.0}) {
    REQUIRE(l2re(c * truth, truth) == Catch::Approx(std::abs(c - 1.0)).margin(1e-12));
    REQUIRE(l1re(c * truth, truth) == Catch::Approx(std::abs(c - 1.0)).margin(1e-12));
  }
}

TEST_CASE("zero reference makes relative errors undefined", "[metrics]") {
  REQUIRE_THROWS_AS(l2re(vec({1, 2}), vec({0, 0})), EvalError);
  REQUIRE_THROWS_AS(l1re(vec({1, 2}), vec({0, 0})), EvalError);
  REQUIRE_NOTHROW(mse(vec({1, 2}), vec({0, 0})));
  REQUIRE_THROWS_AS(l2re(vec({1}), vec({1, 2})), std::logic_error);  // length mismatch
}

TEST_CASE("fmse bands agree with a direct dft on 1-d grids", "[metrics]") {
  for (int n : {8, 16, 64, 128, 256}) {
    Rng rng{std::uint64_t(n)};
    Vec diff(n);
    for (Index i = 0; i < diff.size(); ++i) diff[i] = rng.normal();

    auto bands = fmse_bands(diff, {n});
    REQUIRE(bands.has_value());

    auto mag2 = dft_mag2(diff);
    const int lo = n / 8, mid = n / 4, hi = n / 2;
    double s_low = 0, s_mid = 0, s_high = 0;
    int w_low = 0, w_mid = 0, w_high = 0;
    for (int k = 0; k < n; ++k) {
      int ka = std::min(k, n - k);
      if (ka < lo)
        s_low += mag2[std::size_t(k)];
      else if (ka < mid)
        s_mid += mag2[std::size_t(k)];
      else if (ka <= hi)
        s_high += mag2[std::size_t(k)];
    }
    for (int k = 0; k <= hi; ++k) {
      if (k < lo)
        ++w_low;
      else if (k < mid)
        ++w_mid;
      else
        ++w_high;
    }
    REQUIRE(bands->low == Catch::Approx(std::sqrt(s_low) / w_low).margin(1e-10));
    REQUIRE(bands->mid == Catch::Approx(std::sqrt(s_mid) / w_mid).margin(1e-10));
    REQUIRE(bands->high == Catch::Approx(std::sqrt(s_high) / w_high).margin(1e-10));
  }
}

TEST_CASE("fmse spectral energy obeys parseval", "[metrics]") {
  // dft_axis is exercised through fmse_bands; check the underlying transform
  // preserves energy (sum |F|^2 = N sum |x|^2) via the direct oracle
  const int n = 96;
  Rng rng(17);
  Vec diff(n);
  for (Index i = 0; i < diff.size(); ++i) diff[i] = rng.normal();
  auto mag2 = dft_mag2(diff);
  double spectral = 0;
  for (double m : mag2) spectral += m;
  REQUIRE(spectral == Catch::Approx(n * diff.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("fmse requires a usable grid", "[metrics]") {
  Vec diff = Vec::Ones(6);
  REQUIRE_FALSE(fmse_bands(diff, {6}).has_value());  // below the 8-point floor
  REQUIRE_THROWS_AS(fmse_bands(diff, {5}), std::logic_error);  // shape mismatch
}

TEST_CASE("fmse radial binning matches a hand-built 2-d oracle", "[metrics]") {
  const int nx = 16, ny = 16;
  Rng rng(23);
  Vec diff(nx * ny);
  for (Index i = 0; i < diff.size(); ++i) diff[i] = rng.normal();

  auto bands = fmse_bands(diff, {nx, ny});
  REQUIRE(bands.has_value());

  // full 2-d dft by brute force
  double s_low = 0, s_mid = 0, s_high = 0;
  for (int kx = 0; kx < nx; ++kx)
    for (int ky = 0; ky < ny; ++ky) {
      std::complex<double> acc = 0;
      for (int jx = 0; jx < nx; ++jx)
        for (int jy = 0; jy < ny; ++jy)
          acc += diff[jx * ny + jy] *
                 std::polar(1.0, -2.0 * M_PI * (double(kx) * jx / nx + double(ky) * jy / ny));
      const double ax = std::min(kx, nx - kx), ay = std::min(ky, ny - ky);
      const int kr = int(std::floor(std::hypot(ax, ay) + 0.5));
      if (kr < 2)
        s_low += std::norm(acc);
      else if (kr < 4)
        s_mid += std::norm(acc);
      else if (kr <= 8)
        s_high += std::norm(acc);
    }
  REQUIRE(bands->low == Catch::Approx(std::sqrt(s_low) / 2).margin(1e-9));
  REQUIRE(bands->mid == Catch::Approx(std::sqrt(s_mid) / 2).margin(1e-9));
  REQUIRE(bands->high == Catch::Approx(std::sqrt(s_high) / 5).margin(1e-9));
}

TEST_CASE("temporal slices bucket by time and drop empty bins", "[metrics]") {
  // two populated half-intervals, 10 requested bins
  Vec times(4), pred(4), truth(4);
  times << 0.05, 0.12, 0.95, 0.99;
  truth << 1, 1, 2, 2;
  pred << 1.1, 1.1, 2, 2;
  auto rep = temporal_l2re(pred, truth, times, 1.0);
  REQUIRE(rep.dropped_empty == 7);
  REQUIRE(rep.slice_l2re.size() == 3);
  REQUIRE(rep.slice_l2re[0] == Catch::Approx(0.1).margin(1e-12));   // t in [0, 0.1)
  REQUIRE(rep.slice_l2re[1] == Catch::Approx(0.1).margin(1e-12));   // t in [0.1, 0.2)
  REQUIRE(rep.slice_l2re[2] == Catch::Approx(0.0).margin(1e-12));   // final bin
}

TEST_CASE("a zero network scores relative error one against burgers", "[metrics]") {
  pde::Case c = pde::make_case("burgers1d-c");
  auto ref = c.make_reference(c);
  net::NetworkSpec proto;
  proto.hidden = {8};

  Predictor pr(c, proto, net::Adaptive::None);
  Vec theta = Vec::Zero(pr.param_count());
  auto rep = evaluate(c, proto, net::Adaptive::None, theta, ref);
  REQUIRE(rep.l2re == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(rep.l1re == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(rep.max_err > 0.9);
  REQUIRE(rep.fmse.has_value());
  REQUIRE(rep.temporal.has_value());
  REQUIRE(rep.points_used == ref.points.rows());
}

TEST_CASE("the evaluator masks non-finite reference entries", "[metrics]") {
  pde::Case c = pde::make_case("burgers1d-c");
  auto ref = c.make_reference(c);
  ref.values(3, 0) = std::numeric_limits<double>::quiet_NaN();
  ref.values(40, 0) = std::numeric_limits<double>::quiet_NaN();
  net::NetworkSpec proto;
  proto.hidden = {8};
  Vec theta = Vec::Zero(Predictor(c, proto, net::Adaptive::None).param_count());
  auto rep = evaluate(c, proto, net::Adaptive::None, theta, ref);
  REQUIRE(rep.masked == 2);
  REQUIRE(rep.points_used == ref.points.rows() - 2);
  REQUIRE(rep.l2re == Catch::Approx(1.0).margin(1e-12));
}
