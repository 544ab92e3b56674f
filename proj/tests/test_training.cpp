#include <catch2/catch_amalgamated.hpp>

#include "pinnbench/eval/evaluate.hpp"
#include "pinnbench/pde/registry.hpp"
#include "pinnbench/train/trainer.hpp"

using namespace pinnbench;
using train::Adam;
using train::AdamConfig;
using train::Assembler;
using train::Lbfgs;
using train::Method;
using train::MultiAdam;
using train::Term;
using train::TrainConfig;
using train::Trainer;

namespace {

net::NetworkSpec tiny_net(std::vector<int> hidden = {8}) {
  net::NetworkSpec s;
  s.hidden = std::move(hidden);
  return s;
}

Assembler make_burgers(const Method& m, int ni = 128, int nb = 64,
                       std::vector<int> hidden = {8}, std::uint64_t seed = 7) {
  return Assembler(pde::make_case("burgers1d-c"), m, {ni, nb}, tiny_net(std::move(hidden)),
                   seed);
}

double weighted_loss_at(Assembler& a, const Vec& theta) {
  a.forward(theta);
  return a.weighted_total();
}

// central-difference gradient of the weighted total loss
Vec fd_gradient(Assembler& a, const Vec& theta, double h = 3e-6) {
  Vec g(theta.size());
  Vec tp = theta;
  for (Index i = 0; i < theta.size(); ++i) {
    const double hi = h * std::max(1.0, std::abs(theta[i]));
    tp[i] = theta[i] + hi;
    const double fp = weighted_loss_at(a, tp);
    tp[i] = theta[i] - hi;
    const double fm = weighted_loss_at(a, tp);
    tp[i] = theta[i];
    g[i] = (fp - fm) / (2.0 * hi);
  }
  return g;
}

std::vector<double> weights_of(const Assembler& a) {
  std::vector<double> w;
  for (const Term& t : a.terms()) w.push_back(t.weight);
  return w;
}

}  // namespace

TEST_CASE("assembled loss gradient matches central differences", "[training]") {
  auto m = train::method_from_name("pinn");
  auto a = make_burgers(m, 96, 48);
  Vec theta = a.init_params();
  a.forward(theta);
  Vec grad(a.n_params());
  a.backward(weights_of(a), grad);

  Vec fd = fd_gradient(a, theta);
  REQUIRE((grad - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
}

TEST_CASE("gpinn gradient matches central differences", "[training]") {
  auto m = train::method_from_name("gpinn");
  auto a = make_burgers(m, 48, 24);
  Vec theta = a.init_params();
  a.forward(theta);
  Vec grad(a.n_params());
  a.backward(weights_of(a), grad);

  Vec fd = fd_gradient(a, theta);
  REQUIRE((grad - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
}

TEST_CASE("gpinn with zero weight reproduces the vanilla terms", "[training]") {
  auto mv = train::method_from_name("pinn");
  auto mg = train::method_from_name("gpinn");
  mg.gpinn_weight = 0.0;
  auto av = make_burgers(mv);
  auto ag = make_burgers(mg);
  Vec theta = av.init_params();
  REQUIRE(theta == ag.init_params());

  av.forward(theta);
  ag.forward(theta);

  // every vanilla term appears with the same name and loss value
  std::size_t shared = 0;
  for (std::size_t k = 0; k < av.terms().size(); ++k) {
    for (std::size_t j = 0; j < ag.terms().size(); ++j)
      if (ag.terms()[j].name == av.terms()[k].name) {
        REQUIRE(ag.losses()[j] == av.losses()[k]);
        ++shared;
      }
  }
  REQUIRE(shared == av.terms().size());
  REQUIRE(ag.terms().size() == av.terms().size() + 1);  // + zero-weight gpde term

  Vec gv(av.n_params()), gg(ag.n_params());
  av.backward(weights_of(av), gv);
  ag.backward(weights_of(ag), gg);
  REQUIRE((gv - gg).lpNorm<Eigen::Infinity>() <= 1e-14 * std::max(1.0, gv.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("adam single step reproduces the worked example", "[optimizer]") {
  AdamConfig cfg;
  cfg.lr = 0.1;
  Adam opt(1, cfg);
  Vec theta = Vec::Zero(1), grad = Vec::Ones(1);
  opt.step(theta, grad);
  // m_hat = v_hat = 1 after one unit-gradient step, so the update is
  // lr / (1 + eps) regardless of the moment constants
  REQUIRE(theta[0] == Catch::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-15));
}

TEST_CASE("multiadam with one group walks adam's exact path", "[optimizer]") {
  const long n = 24;
  Adam adam(n);
  MultiAdam madam(n, 1);
  Vec ta = Vec::LinSpaced(n, -1.0, 1.0), tm = ta;
  Rng rng(99);
  for (int step = 0; step < 100; ++step) {
    Vec g(n);
    for (long i = 0; i < n; ++i) g[i] = rng.normal();
    adam.step(ta, g);
    madam.step(tm, {g});
    REQUIRE((ta - tm).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("multiadam averages the group directions", "[optimizer]") {
  const long n = 8;
  Vec g0(n);
  Rng rng(5);
  for (long i = 0; i < n; ++i) g0[i] = rng.normal();

  Adam ref(n);
  Vec ta = Vec::Zero(n);
  ref.step(ta, g0);  // full Adam move for the same gradient

  MultiAdam madam(n, 2);
  Vec tm = Vec::Zero(n);
  madam.step(tm, {g0, Vec::Zero(n)});  // second group sees nothing

  REQUIRE((tm - 0.5 * ta).lpNorm<Eigen::Infinity>() <= 1e-15);
}

TEST_CASE("lbfgs collapses a quadratic bowl immediately", "[lbfgs]") {
  Lbfgs opt;
  Vec x = Vec::Ones(2);
  auto fg = [](const Vec& v, Vec& g) {
    g = v;
    return 0.5 * v.squaredNorm();
  };
  int steps = 0;
  for (; steps < 5 && x.norm() > 1e-10; ++steps) {
    auto out = opt.step(x, fg);
    REQUIRE((out == Lbfgs::Outcome::Ok || out == Lbfgs::Outcome::NoMove));
  }
  REQUIRE(x.norm() <= 1e-10);
  REQUIRE(steps <= 5);
}

TEST_CASE("lbfgs minimizes an anisotropic quadratic", "[lbfgs]") {
  Lbfgs opt;
  Vec d = Vec::LinSpaced(6, 1.0, 100.0);
  Vec x = Vec::Ones(6);
  auto fg = [&](const Vec& v, Vec& g) {
    g = d.asDiagonal() * v;
    return 0.5 * v.dot(g);
  };
  for (int i = 0; i < 40 && x.norm() > 1e-9; ++i)
    if (opt.step(x, fg) != Lbfgs::Outcome::Ok) break;
  REQUIRE(x.norm() <= 1e-9);
}

TEST_CASE("lbfgs flags non-finite losses as divergence", "[lbfgs]") {
  Lbfgs opt;
  Vec x = Vec::Ones(1);
  auto fg = [](const Vec& v, Vec& g) {
    g = Vec::Ones(1);
    return v[0] > 0.5 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
  };
  // first call is fine at x=1; descent drives trials below 0.5 where the loss
  // goes NaN, which must surface as Diverged rather than an exception
  auto out = opt.step(x, fg);
  REQUIRE(out == Lbfgs::Outcome::Diverged);
}

TEST_CASE("rar appends the requested number of points each round", "[training]") {
  auto m = train::method_from_name("rar");
  m.rar_top_frac = 0.05;
  auto a = make_burgers(m, 100, 32);
  Vec theta = Vec::Zero(a.n_params());  // zero net: residuals vanish everywhere
  REQUIRE(a.interior().rows() == 100);
  for (int round = 0; round < 3; ++round) a.rar_update(theta, round);
  REQUIRE(a.interior().rows() == 100 + 3 * 5);  // additions happen even at zero residual
  REQUIRE(a.consume_stale_flag());
}

TEST_CASE("training trace is bit-identical for a fixed seed", "[training]") {
  auto m = train::method_from_name("pinn");
  TrainConfig cfg;
  cfg.iterations = 12;
  cfg.eval_period = 4;

  auto run_once = [&] {
    auto a = make_burgers(m, 64, 32, {8, 8}, 21);
    return Trainer(a, cfg).run();
  };
  auto r1 = run_once();
  auto r2 = run_once();

  REQUIRE(r1.trace.size() == r2.trace.size());
  REQUIRE(r1.trace.size() == 4);  // iterations 0, 4, 8 and the final 12
  for (std::size_t i = 0; i < r1.trace.size(); ++i) {
    REQUIRE(r1.trace[i].iteration == r2.trace[i].iteration);
    REQUIRE(r1.trace[i].total == r2.trace[i].total);
    REQUIRE(r1.trace[i].term_losses == r2.trace[i].term_losses);
  }
  REQUIRE(r1.theta == r2.theta);
}

TEST_CASE("zero iterations yields the initial parameters and one record", "[training]") {
  auto m = train::method_from_name("pinn");
  TrainConfig cfg;
  cfg.iterations = 0;
  auto a = make_burgers(m, 64, 32);
  auto res = Trainer(a, cfg).run();
  REQUIRE(res.trace.size() == 1);
  REQUIRE(res.trace[0].iteration == 0);
  REQUIRE(res.theta == a.init_params());
  REQUIRE_FALSE(res.diverged);
}

TEST_CASE("divergence truncates the trace and keeps the last finite theta", "[training]") {
  auto m = train::method_from_name("pinn");
  TrainConfig cfg;
  cfg.iterations = 10;
  cfg.eval_period = 1;
  cfg.adam.lr = std::numeric_limits<double>::quiet_NaN();  // poisons theta after step 0
  auto a = make_burgers(m, 64, 32);
  Vec init = a.init_params();
  auto res = Trainer(a, cfg).run();
  REQUIRE(res.diverged);
  REQUIRE(res.diverged_at == 1);
  REQUIRE(res.trace.size() == 1);
  REQUIRE(res.theta == init);  // the NaN step never became the result
  REQUIRE(res.theta.allFinite());
}

TEST_CASE("resampling changes the interior set between iterations", "[training]") {
  auto m = train::method_from_name("pinn");
  auto a = make_burgers(m, 64, 32);
  Mat before = a.interior();
  a.resample(0);
  REQUIRE(a.interior().rows() == before.rows());
  REQUIRE((a.interior() - before).cwiseAbs().maxCoeff() > 0);
  REQUIRE(a.consume_stale_flag());
}

TEST_CASE("multiadam trains the assembled problem without drama", "[training]") {
  auto m = train::method_from_name("multiadam");
  TrainConfig cfg;
  cfg.iterations = 8;
  cfg.eval_period = 8;
  auto a = make_burgers(m, 64, 32);
  auto res = Trainer(a, cfg).run();
  REQUIRE_FALSE(res.diverged);
  REQUIRE(res.trace.back().total < res.trace.front().total * 1.5);
}

TEST_CASE("lra reweighting leaves the pde weight fixed", "[reweight]") {
  auto m = train::method_from_name("lra");
  m.reweight_period = 4;
  TrainConfig cfg;
  cfg.iterations = 9;
  cfg.eval_period = 100;
  auto a = make_burgers(m, 64, 32);
  auto res = Trainer(a, cfg).run();
  REQUIRE_FALSE(res.diverged);
  for (std::size_t k = 0; k < a.terms().size(); ++k) {
    if (a.terms()[k].pde_group)
      REQUIRE(res.final_weights[k] == 1.0);
    else
      REQUIRE(res.final_weights[k] != 1.0);  // two reweight rounds happened
  }
}

TEST_CASE("ntk reweighting rescales every term including the pde", "[reweight]") {
  auto m = train::method_from_name("ntk");
  m.reweight_period = 4;
  TrainConfig cfg;
  cfg.iterations = 5;
  cfg.eval_period = 100;
  auto a = make_burgers(m, 64, 32);
  auto res = Trainer(a, cfg).run();
  REQUIRE_FALSE(res.diverged);
  double sum_inv = 0;
  for (double w : res.final_weights) {
    REQUIRE(w > 0);
    REQUIRE(w != 1.0);
    sum_inv += 1.0 / w;  // w_k = total / tr_k  =>  sum_k tr_k / total = 1
  }
  REQUIRE(sum_inv == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("short adam run reduces the burgers loss", "[training]") {
  auto m = train::method_from_name("pinn");
  TrainConfig cfg;
  cfg.iterations = 600;
  cfg.eval_period = 600;
  auto a = make_burgers(m, 256, 128, {16, 16});
  auto res = Trainer(a, cfg).run();
  REQUIRE_FALSE(res.diverged);
  REQUIRE(res.trace.back().total < 0.5 * res.trace.front().total);
}
