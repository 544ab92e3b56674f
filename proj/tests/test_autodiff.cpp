#include <catch2/catch_amalgamated.hpp>

#include "pinnbench/ad/derivatives.hpp"
#include "pinnbench/ad/dual.hpp"
#include "pinnbench/ad/tape.hpp"
#include "pinnbench/net/mlp.hpp"
#include "pinnbench/net/tape_network.hpp"

using namespace pinnbench;
using ad::Dual;
using ad::Tape;
using ad::Var;

TEST_CASE("tape evaluates and re-evaluates expressions", "[autodiff]") {
  Tape t;
  Var x = t.input(3.0);
  Var y = x * x;
  CHECK(y.value() == 9.0);

  t.evaluate({5.0});
  CHECK(t.node(y.id).primal == 25.0);

  t.evaluate({-2.0});
  CHECK(t.node(y.id).primal == 4.0);
}

TEST_CASE("reverse_grad of theta*theta at 3 is 6", "[autodiff]") {
  Tape t;
  Var th = t.input(3.0);
  Var f = th * th;
  ad::ParamRegistry reg;
  reg.ids = {th.id};
  auto g = t.reverse_grad(f, reg);
  CHECK(g.values[0] == 6.0);
}

TEST_CASE("reverse_grad covers every primitive", "[autodiff]") {
  // compare against forward duals, op by op
  auto ops = std::vector<std::pair<const char*, double>>{
      {"mix", 0.37}, {"mix", -0.81}, {"mix", 1.73}};
  for (auto [_, x0] : ops) {
    Tape t;
    Var x = t.input(x0);
    Var f = tanh(x) * sin(x) + cos(x * x) / (2.0 + exp(-x)) - sinh(x * 0.3) * cosh(x * 0.2) +
            pow(2.0 + sin(x), 2.5) + log(2.0 + cos(x)) + sqrt(4.0 + x * x);
    ad::ParamRegistry reg;
    reg.ids = {x.id};
    auto g = t.reverse_grad(f, reg);

    auto fd = [](auto xs) {
      using std::tanh; using std::sin; using std::cos; using std::exp;
      using std::sinh; using std::cosh; using std::pow; using std::log; using std::sqrt;
      auto x = xs[0];
      return tanh(x) * sin(x) + cos(x * x) / (2.0 + exp(-x)) - sinh(x * 0.3) * cosh(x * 0.2) +
             pow(2.0 + sin(x), 2.5) + log(2.0 + cos(x)) + sqrt(4.0 + x * x);
    };
    double want = ad::input_derivative(
        [&](auto v) { return fd(v); }, {x0}, {1});
    CHECK_THAT(g.values[0], Catch::Matchers::WithinRel(want, 1e-13));
  }
}

TEST_CASE("input_derivative: second derivative of x^3 at 2 is 12", "[autodiff]") {
  auto f = [](auto x) { return x[0] * x[0] * x[0]; };
  CHECK_THAT(ad::input_derivative(f, {2.0}, {2}), Catch::Matchers::WithinAbs(12.0, 1e-12));
}

TEST_CASE("input_derivative handles mixed and high orders", "[autodiff]") {
  // d^2/dxdy of x^2 y = 2x
  auto f = [](auto v) { return v[0] * v[0] * v[1]; };
  CHECK_THAT(ad::input_derivative(f, {1.5, -2.0}, {1, 1}),
             Catch::Matchers::WithinAbs(3.0, 1e-12));

  // fourth derivative of sin is sin again
  auto s = [](auto v) { using std::sin; return sin(v[0]); };
  CHECK_THAT(ad::input_derivative(s, {0.7}, {4}),
             Catch::Matchers::WithinAbs(std::sin(0.7), 1e-12));

  // d^3/dx^2 dy of exp(x*y) known closed form: d/dy d2/dx2 e^{xy}
  // = d/dy (y^2 e^{xy}) = (2y + x y^2) e^{xy}
  auto e = [](auto v) { using std::exp; return exp(v[0] * v[1]); };
  double x = 0.3, y = -0.6;
  double want = (2 * y + x * y * y) * std::exp(x * y);
  CHECK_THAT(ad::input_derivative(e, {x, y}, {2, 1}), Catch::Matchers::WithinRel(want, 1e-12));
}

TEST_CASE("tanh derivative at zero is one", "[autodiff]") {
  auto f = [](auto x) { using std::tanh; return tanh(x[0]); };
  CHECK(ad::input_derivative(f, {0.0}, {1}) == 1.0);
}

TEST_CASE("finite_difference_check: sin near zero within h^2 bound", "[autodiff]") {
  auto f = [](auto x) { using std::sin; return sin(x[0]); };
  double h = 1e-4;
  // central difference truncation is h^2/6 * |f'''|
  CHECK(ad::finite_difference_check(f, {0.0}, h) <= h * h);
}

TEST_CASE("evaluation guards reject bad arithmetic", "[autodiff]") {
  Tape t;
  Var x = t.input(0.0);
  CHECK_THROWS_AS(x / (x * x), EvalError);
  CHECK_THROWS_AS(log(x - 1.0), EvalError);
  CHECK_THROWS_AS(sqrt(x - 4.0), EvalError);
  Tape t2;
  Var y = t2.input(800.0);
  CHECK_THROWS_AS(exp(y) * exp(y), EvalError);  // overflow to inf is an error
}

TEST_CASE("gradient vectors refuse mismatched registries", "[autodiff]") {
  Tape t;
  Var a = t.input(1.0), b = t.input(2.0);
  ad::ParamRegistry r1, r2;
  r1.ids = {a.id};
  r2.ids = {b.id};
  auto g1 = t.reverse_grad(a * a, r1);
  auto g2 = t.reverse_grad(b * b, r2);
  CHECK_THROWS(g1 += g2);
}

TEST_CASE("reverse sweep is linear over outputs", "[autodiff]") {
  Tape t;
  Var x = t.input(0.8), y = t.input(-0.4);
  Var f = tanh(x * y) + x;
  Var g = sin(x) * y;
  Var sum = f + g;
  ad::ParamRegistry reg;
  reg.ids = {x.id, y.id};
  auto gs = t.reverse_grad(sum, reg);
  auto gf = t.reverse_grad(f, reg);
  auto gg = t.reverse_grad(g, reg);
  for (int i = 0; i < 2; ++i)
    CHECK_THAT(gs.values[i], Catch::Matchers::WithinRel(gf.values[i] + gg.values[i], 1e-14));
}

TEST_CASE("dual over tape var: parameter gradient of an input derivative", "[autodiff]") {
  // f(x) = tanh(theta x); d/dtheta [df/dx] at theta=0.9, x=0.6
  double th0 = 0.9, x0 = 0.6;
  Tape t;
  Var th = t.input(th0);
  Dual<Var> x(t.constant(x0), t.constant(1.0));
  Dual<Var> f = tanh(x * th);
  ad::ParamRegistry reg;
  reg.ids = {th.id};
  auto g = t.reverse_grad(f.t, reg);

  // df/dx = theta sech^2(theta x); d/dtheta = sech^2 + theta * d/dtheta sech^2
  double u = std::tanh(th0 * x0), s = 1 - u * u;
  double want = s + th0 * (-2 * u * s * x0);
  CHECK_THAT(g.values[0], Catch::Matchers::WithinRel(want, 1e-13));
}

TEST_CASE("network parameter count follows the layer arithmetic", "[network]") {
  net::NetworkSpec spec;  // 2 -> [100 x5] -> 1
  // (2+1)*100 + 4*(100+1)*100 + (100+1)*1
  CHECK(net::param_count(spec) == 40801);

  net::NetworkSpec four = spec;
  four.input_dim = 4;
  CHECK(net::param_count(four) == 41001);

  net::NetworkSpec laaf = spec;
  laaf.adaptive = net::Adaptive::Laaf;
  CHECK(net::param_count(laaf) == 40801 + 500);
  CHECK(laaf.slope_count() == 500);
}

TEST_CASE("glorot init is deterministic and slope-initialized", "[network]") {
  net::NetworkSpec spec;
  spec.adaptive = net::Adaptive::Laaf;
  auto p1 = net::init_params(spec, 7);
  auto p2 = net::init_params(spec, 7);
  auto p3 = net::init_params(spec, 8);
  CHECK(p1.flat == p2.flat);
  CHECK(p1.flat != p3.flat);

  net::Layout lay(spec);
  for (int i = 0; i < spec.slope_count(); ++i) CHECK(p1.flat[lay.slope_off + i] == 0.1);
  // biases zero
  CHECK(p1.flat[lay.b_off[0]] == 0.0);
  // glorot bound for first layer
  double lim = std::sqrt(6.0 / (2 + 100));
  for (long i = 0; i < 200; ++i) {
    CHECK(std::abs(p1.flat[lay.w_off[0] + i]) < lim);
  }
}

TEST_CASE("single-unit net reproduces tanh(0.5)", "[network]") {
  net::NetworkSpec spec;
  spec.input_dim = 1;
  spec.output_dim = 1;
  spec.hidden = {1};
  net::Layout lay(spec);
  net::ParameterSet p;
  p.flat = Vec::Zero(lay.total);
  p.flat[lay.w_off[0]] = 1.0;  // hidden weight
  p.flat[lay.w_off[1]] = 1.0;  // output weight
  auto out = net::mlp_forward<double, double>(spec, lay, p.flat.data(), {0.5});
  CHECK_THAT(out[0], Catch::Matchers::WithinRel(std::tanh(0.5), 1e-15));
}

TEST_CASE("adaptive slope scales the activation argument", "[network]") {
  // sigma(n a z) with n=10, a=0.2, z=0.1 -> tanh(0.2)
  net::NetworkSpec spec;
  spec.input_dim = 1;
  spec.output_dim = 1;
  spec.hidden = {1};
  spec.adaptive = net::Adaptive::Laaf;
  net::Layout lay(spec);
  net::ParameterSet p;
  p.flat = Vec::Zero(lay.total);
  p.flat[lay.w_off[0]] = 1.0;
  p.flat[lay.w_off[1]] = 1.0;
  p.flat[lay.slope_off] = 0.2;
  auto out = net::mlp_forward<double, double>(spec, lay, p.flat.data(), {0.1});
  CHECK_THAT(out[0], Catch::Matchers::WithinRel(std::tanh(10 * 0.2 * 0.1), 1e-15));
}

TEST_CASE("tape network gradient matches finite differences", "[network]") {
  net::NetworkSpec spec;
  spec.input_dim = 2;
  spec.hidden = {8, 8};
  auto params = net::init_params(spec, 3);
  net::TapeNetwork tn(spec, params);
  auto out = tn.forward_point({0.3, -0.7});
  auto g = tn.grad(out[0]);

  net::Layout lay(spec);
  double h = 1e-6;
  for (long i : {0L, 5L, lay.w_off[1] + 3, lay.b_off[1] + 2, lay.w_off[2] + 1}) {
    Vec pm = params.flat, pp = params.flat;
    pp[i] += h;
    pm[i] -= h;
    double fp = net::mlp_forward<double, double>(spec, lay, pp.data(), {0.3, -0.7})[0];
    double fm = net::mlp_forward<double, double>(spec, lay, pm.data(), {0.3, -0.7})[0];
    double fd = (fp - fm) / (2 * h);
    CHECK_THAT(g.values[i], Catch::Matchers::WithinAbs(fd, 1e-8));
  }
}
