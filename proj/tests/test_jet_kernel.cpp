#include <catch2/catch_amalgamated.hpp>

#include "pinnbench/ad/derivatives.hpp"
#include "pinnbench/net/jet_kernel.hpp"
#include "pinnbench/net/tape_network.hpp"

using namespace pinnbench;
using ad::Dual;
using ad::Var;

namespace {

// channel descriptor -> multi-index axes list (one entry per derivative)
std::vector<int> channel_axes(const net::Channel& c) {
  std::vector<int> axes;
  switch (c.kind) {
    case net::ChannelKind::Value: break;
    case net::ChannelKind::Pure:
      for (int k = 0; k < c.order; ++k) axes.push_back(c.a);
      break;
    case net::ChannelKind::Mixed11: axes = {c.a, c.b}; break;
    case net::ChannelKind::Mixed21: axes = {c.a, c.a, c.b}; break;
    case net::ChannelKind::Mixed31: axes = {c.a, c.a, c.a, c.b}; break;
    case net::ChannelKind::Lap: break;  // handled by caller
  }
  return axes;
}

// derivative of output `o` via nested duals over tape Vars, so the result is
// itself differentiable with respect to parameters
Var channel_on_tape(const net::TapeNetwork& tn, const std::vector<double>& x,
                    const std::vector<int>& axes, int o) {
  ad::Tape& t = tn.tape();
  auto lift0 = [&](double v) { return t.constant(v); };
  switch (axes.size()) {
    case 0:
      return tn.forward_point(x)[std::size_t(o)];
    case 1: {
      std::vector<Dual<Var>> in;
      for (std::size_t i = 0; i < x.size(); ++i)
        in.push_back({lift0(x[i]), lift0(int(i) == axes[0] ? 1.0 : 0.0)});
      return tn.forward(in)[std::size_t(o)].t;
    }
    case 2: {
      using T2 = Dual<Dual<Var>>;
      std::vector<T2> in;
      for (std::size_t i = 0; i < x.size(); ++i) {
        Dual<Var> v{lift0(x[i]), lift0(int(i) == axes[0] ? 1.0 : 0.0)};
        Dual<Var> tg{lift0(int(i) == axes[1] ? 1.0 : 0.0), lift0(0.0)};
        in.push_back({v, tg});
      }
      return tn.forward(in)[std::size_t(o)].t.t;
    }
    case 3: {
      using T2 = Dual<Dual<Var>>;
      using T3 = Dual<T2>;
      std::vector<T3> in;
      for (std::size_t i = 0; i < x.size(); ++i) {
        auto d = [&](int ax) { return lift0(int(i) == ax ? 1.0 : 0.0); };
        T2 v{{lift0(x[i]), d(axes[0])}, {d(axes[1]), lift0(0.0)}};
        T2 tg{{d(axes[2]), lift0(0.0)}, {lift0(0.0), lift0(0.0)}};
        in.push_back({v, tg});
      }
      return tn.forward(in)[std::size_t(o)].t.t.t;
    }
    case 4: {
      using T2 = Dual<Dual<Var>>;
      using T4 = Dual<Dual<T2>>;
      std::vector<T4> in;
      for (std::size_t i = 0; i < x.size(); ++i) {
        auto d = [&](int ax) { return lift0(int(i) == ax ? 1.0 : 0.0); };
        auto zero = lift0(0.0);
        T2 v{{lift0(x[i]), d(axes[0])}, {d(axes[1]), zero}};
        T2 t3{{d(axes[2]), zero}, {zero, zero}};
        T2 t4{{d(axes[3]), zero}, {zero, zero}};
        T2 z2{{zero, zero}, {zero, zero}};
        in.push_back({{v, t3}, {t4, z2}});
      }
      return tn.forward(in)[std::size_t(o)].t.t.t.t;
    }
    case 5: {
      using T2 = Dual<Dual<Var>>;
      using T4 = Dual<Dual<T2>>;
      using T5 = Dual<T4>;
      std::vector<T5> in;
      for (std::size_t i = 0; i < x.size(); ++i) {
        auto d = [&](int ax) { return lift0(int(i) == ax ? 1.0 : 0.0); };
        auto zero = lift0(0.0);
        T2 z2{{zero, zero}, {zero, zero}};
        T2 v{{lift0(x[i]), d(axes[0])}, {d(axes[1]), zero}};
        T2 t3{{d(axes[2]), zero}, {zero, zero}};
        T2 t4{{d(axes[3]), zero}, {zero, zero}};
        T4 v4{{v, t3}, {t4, z2}};
        T4 t5{{T2{{d(axes[4]), zero}, {zero, zero}}, z2}, {z2, z2}};
        in.push_back({v4, t5});
      }
      return tn.forward(in)[std::size_t(o)].t.t.t.t.t;
    }
    default:
      FAIL("unsupported order");
      return {};
  }
}

net::ChannelPlan full_plan(int dims) {
  net::ChannelPlan plan;
  plan.add(net::ChannelKind::Value);
  plan.add_pure(0, 5);
  for (int a = 1; a < dims; ++a) plan.add_pure(a, 2);
  if (dims >= 2) {
    plan.add_mixed11(0, 1);
    plan.add_mixed21(0, 1);
    plan.add_mixed21(1, 0);
    plan.add_mixed31(0, 1);
    std::vector<int> axes;
    for (int a = 0; a < dims; ++a) axes.push_back(a);
    plan.add_lap(axes);
  }
  plan.finalize();
  return plan;
}

struct Setup {
  net::NetworkSpec spec;
  net::ParameterSet params;
  Mat X;
};

Setup make_setup(int dims, int out, net::Activation act, net::Adaptive ad, std::uint64_t seed) {
  Setup s;
  s.spec.input_dim = dims;
  s.spec.output_dim = out;
  s.spec.hidden = {7, 6};
  s.spec.activation = act;
  s.spec.adaptive = ad;
  s.params = net::init_params(s.spec, seed);
  if (ad != net::Adaptive::None) {
    // move slopes off their uniform init so slope gradients are generic
    net::Layout lay(s.spec);
    Rng r(seed + 17);
    for (int i = 0; i < s.spec.slope_count(); ++i)
      s.params.flat[lay.slope_off + i] = 0.1 * (0.5 + r.uniform());
  }
  Rng r(seed + 1);
  s.X.resize(5, dims);
  for (Index i = 0; i < s.X.rows(); ++i)
    for (Index j = 0; j < s.X.cols(); ++j) s.X(i, j) = r.uniform(-1.2, 1.2);
  return s;
}

}  // namespace

TEST_CASE("jet kernel channels match nested-dual derivatives", "[kernel]") {
  for (auto act : {net::Activation::Tanh, net::Activation::Sin}) {
    for (auto ad : {net::Adaptive::None, net::Adaptive::Laaf, net::Adaptive::Gaaf}) {
      auto s = make_setup(2, 2, act, ad, 42 + int(act) * 10 + int(ad));
      auto plan = full_plan(2);
      net::JetKernel kern(s.spec, plan);
      kern.forward(s.params.flat, s.X);

      net::TapeNetwork tn(s.spec, s.params);
      for (int c = 0; c < plan.count(); ++c) {
        const auto& ch = plan.channels[c];
        for (Index i = 0; i < s.X.rows(); ++i) {
          std::vector<double> x{s.X(i, 0), s.X(i, 1)};
          for (int o = 0; o < s.spec.output_dim; ++o) {
            double got = kern.output(c)(i, o);
            double want;
            if (ch.kind == net::ChannelKind::Lap) {
              want = channel_on_tape(tn, x, {0, 0}, o).value() +
                     channel_on_tape(tn, x, {1, 1}, o).value();
            } else {
              want = channel_on_tape(tn, x, channel_axes(ch), o).value();
            }
            INFO("channel " << c << " kind " << int(ch.kind) << " order " << ch.order
                            << " point " << i << " out " << o);
            CHECK_THAT(got, Catch::Matchers::WithinRel(want, 1e-9) ||
                                Catch::Matchers::WithinAbs(want, 1e-10));
          }
        }
      }
    }
  }
}

TEST_CASE("jet kernel backward matches tape parameter gradients", "[kernel]") {
  for (auto act : {net::Activation::Tanh, net::Activation::Sin}) {
    for (auto ad : {net::Adaptive::None, net::Adaptive::Laaf, net::Adaptive::Gaaf}) {
      auto s = make_setup(2, 2, act, ad, 90 + int(act) * 10 + int(ad));
      auto plan = full_plan(2);
      net::JetKernel kern(s.spec, plan);
      kern.forward(s.params.flat, s.X);

      // random cotangent weights define the scalar loss sum_cio w_cio out_c(i,o)
      Rng r(5);
      std::vector<Mat> cot(std::size_t(plan.count()));
      for (auto& m : cot) {
        m.resize(s.X.rows(), s.spec.output_dim);
        for (Index i = 0; i < m.size(); ++i) m.data()[i] = r.uniform(-1, 1);
      }
      net::Layout lay(s.spec);
      Vec grad = Vec::Zero(lay.total);
      kern.backward(s.params.flat, cot, grad);

      net::TapeNetwork tn(s.spec, s.params);
      Var loss = tn.tape().constant(0.0);
      for (int c = 0; c < plan.count(); ++c) {
        const auto& ch = plan.channels[c];
        for (Index i = 0; i < s.X.rows(); ++i) {
          std::vector<double> x{s.X(i, 0), s.X(i, 1)};
          for (int o = 0; o < s.spec.output_dim; ++o) {
            Var term = ch.kind == net::ChannelKind::Lap
                           ? channel_on_tape(tn, x, {0, 0}, o) + channel_on_tape(tn, x, {1, 1}, o)
                           : channel_on_tape(tn, x, channel_axes(ch), o);
            loss = loss + term * cot[std::size_t(c)](i, o);
          }
        }
      }
      auto ref = tn.grad(loss);
      REQUIRE(ref.values.size() == grad.size());
      double worst = 0;
      for (Index k = 0; k < grad.size(); ++k) {
        double denom = std::max({std::abs(ref.values[k]), std::abs(grad[k]), 1.0});
        worst = std::max(worst, std::abs(ref.values[k] - grad[k]) / denom);
      }
      INFO("act " << int(act) << " adaptive " << int(ad));
      CHECK(worst < 1e-9);
    }
  }
}

TEST_CASE("jet kernel forward value matches reference forward", "[kernel]") {
  auto s = make_setup(3, 2, net::Activation::Tanh, net::Adaptive::None, 7);
  net::JetKernel kern(s.spec, net::value_only_plan());
  kern.forward(s.params.flat, s.X);
  net::Layout lay(s.spec);
  for (Index i = 0; i < s.X.rows(); ++i) {
    auto out = net::mlp_forward<double, double>(
        s.spec, lay, s.params.flat.data(), {s.X(i, 0), s.X(i, 1), s.X(i, 2)});
    for (int o = 0; o < 2; ++o)
      CHECK_THAT(kern.output(0)(i, o), Catch::Matchers::WithinRel(out[std::size_t(o)], 1e-12));
  }
}

TEST_CASE("ntk accumulation equals per-point squared gradient norms", "[kernel]") {
  auto s = make_setup(2, 1, net::Activation::Tanh, net::Adaptive::None, 11);
  net::ChannelPlan plan;
  plan.add(net::ChannelKind::Value);
  plan.add_pure(0, 2);
  plan.add_pure(1, 1);
  plan.finalize();
  net::JetKernel kern(s.spec, plan);
  kern.forward(s.params.flat, s.X);

  // r_i = 0.7 u + 0.2 u_xx - 1.3 u_y at point i (arbitrary residual partials)
  std::vector<double> w(std::size_t(plan.count()), 0.0);
  w[std::size_t(plan.find(net::ChannelKind::Value))] = 0.7;
  w[std::size_t(plan.find_pure(0, 2))] = 0.2;
  w[std::size_t(plan.find_pure(1, 1))] = -1.3;

  std::vector<Mat> cot(std::size_t(plan.count()));
  for (int c = 0; c < plan.count(); ++c)
    cot[std::size_t(c)] = Mat::Constant(s.X.rows(), 1, w[std::size_t(c)]);
  net::Layout lay(s.spec);
  Vec grad = Vec::Zero(lay.total);
  Vec ntk = Vec::Zero(s.X.rows());
  kern.backward(s.params.flat, cot, grad, &ntk);

  net::TapeNetwork tn(s.spec, s.params);
  for (Index i = 0; i < s.X.rows(); ++i) {
    std::vector<double> x{s.X(i, 0), s.X(i, 1)};
    Var ri = channel_on_tape(tn, x, {}, 0) * 0.7 +
             channel_on_tape(tn, x, {0, 0}, 0) * 0.2 +
             channel_on_tape(tn, x, {1}, 0) * (-1.3);
    auto g = tn.grad(ri);
    double want = g.values.squaredNorm();
    CHECK_THAT(ntk[i], Catch::Matchers::WithinRel(want, 1e-9));
  }
}
