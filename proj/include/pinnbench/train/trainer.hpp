#pragma once

#include <chrono>
#include <functional>
#include <limits>

#include "pinnbench/train/adam.hpp"
#include "pinnbench/train/assembler.hpp"
#include "pinnbench/train/lbfgs.hpp"

namespace pinnbench::train {

struct TrainConfig {
  int iterations = 20000;
  int eval_period = 1000;
  bool resample = false;  // fresh interior/boundary points every iteration
  AdamConfig adam;
  Lbfgs::Config lbfgs;
};

struct TraceRow {
  int iteration = 0;
  std::vector<double> term_losses;
  double total = 0;                                       // weighted
  double metric = std::numeric_limits<double>::quiet_NaN();  // eval callback (l2re)
};

struct TrainResult {
  Vec theta;  // last parameters whose loss was finite
  bool diverged = false;
  int diverged_at = -1;
  bool stalled = false;  // L-BFGS could not make progress
  std::vector<TraceRow> trace;
  std::vector<std::string> term_names;
  std::vector<double> final_weights;
  int iterations_run = 0;
  double seconds = 0;
};

// Drives an assembler through the training protocol: optimizer steps with
// periodic reweighting, refinement and evaluation hooks. Deterministic for a
// fixed assembler seed; the eval callback must be deterministic too.
class Trainer {
 public:
  using EvalFn = std::function<double(const Vec&)>;

  Trainer(Assembler& a, TrainConfig cfg) : asm_(a), cfg_(cfg) {}

  TrainResult run(const EvalFn& eval = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    const Method& m = asm_.method();
    TrainResult res;
    for (const Term& t : asm_.terms()) res.term_names.push_back(t.name);

    Vec theta = asm_.init_params();
    res.theta = theta;

    if (m.opt == Method::Opt::Lbfgs)
      run_lbfgs(theta, eval, res);
    else
      run_adam(theta, eval, res);

    res.final_weights.clear();
    for (const Term& t : asm_.terms()) res.final_weights.push_back(t.weight);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }

 private:
  void record(TrainResult& res, int iteration, const Vec& theta, const EvalFn& eval) {
    TraceRow row;
    row.iteration = iteration;
    row.term_losses = asm_.losses();
    row.total = asm_.weighted_total();
    if (eval) row.metric = eval(theta);
    res.trace.push_back(std::move(row));
  }

  std::vector<double> current_coefs() const {
    std::vector<double> c;
    for (const Term& t : asm_.terms()) c.push_back(t.weight);
    return c;
  }

  // LRA: w_k <- (1-a) w_k + a * max|grad L_pde| / mean|grad L_k| for the
  // non-PDE terms; the PDE weight stays put.
  void apply_lra(const Vec& theta) {
    (void)theta;
    auto& terms = asm_.terms();
    std::vector<double> coef(terms.size(), 0.0);
    for (std::size_t k = 0; k < terms.size(); ++k)
      if (terms[k].pde_group) coef[k] = terms[k].weight;
    scratch_.resize(asm_.n_params());
    asm_.backward(coef, scratch_);
    const double ref = scratch_.cwiseAbs().maxCoeff();
    if (ref <= 0 || !std::isfinite(ref)) return;
    const double a = asm_.method().lra_alpha;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      if (terms[k].pde_group) continue;
      std::fill(coef.begin(), coef.end(), 0.0);
      coef[k] = 1.0;
      asm_.backward(coef, scratch_);
      const double mean = scratch_.cwiseAbs().mean();
      if (mean <= 0 || !std::isfinite(mean)) continue;  // skipped this round
      terms[k].weight = (1.0 - a) * terms[k].weight + a * (ref / mean);
    }
  }

  // NTK: w_k = sum_j trace_j / trace_k over every term; zero-trace terms keep
  // their previous weight.
  void apply_ntk() {
    auto tr = asm_.ntk_traces();
    double total = 0;
    for (double t : tr) total += t;
    if (!(total > 0) || !std::isfinite(total)) return;
    auto& terms = asm_.terms();
    for (std::size_t k = 0; k < terms.size(); ++k)
      if (tr[k] > 0 && std::isfinite(tr[k])) terms[k].weight = total / tr[k];
  }

  // periodic hooks shared by both optimizer paths; returns false on a
  // divergence while re-running forward after a stale-making hook
  bool hooks(int it, Vec& theta, TrainResult& res) {
    const Method& m = asm_.method();
    if (it > 0 && m.reweight != Method::Reweight::None && it % m.reweight_period == 0) {
      if (m.reweight == Method::Reweight::Lra)
        apply_lra(theta);
      else
        apply_ntk();
    }
    if (it > 0 && m.rar && it % m.rar_period == 0) asm_.rar_update(theta, it / m.rar_period);
    if (asm_.consume_stale_flag()) {
      try {
        asm_.forward(theta);
      } catch (const EvalError&) {
        res.diverged = true;
        res.diverged_at = it;
        return false;
      }
    }
    return true;
  }

  void run_adam(Vec& theta, const EvalFn& eval, TrainResult& res) {
    const Method& m = asm_.method();
    const bool multi = m.opt == Method::Opt::MultiAdam;
    Adam adam(asm_.n_params(), cfg_.adam);
    MultiAdam madam(asm_.n_params(), multi ? 2 : 1, cfg_.adam);
    Vec grad(asm_.n_params());
    std::vector<Vec> ggrads;
    if (multi) ggrads.assign(2, Vec(asm_.n_params()));

    for (int it = 0; it < cfg_.iterations; ++it) {
      if (cfg_.resample && it > 0) asm_.resample(it);
      try {
        asm_.forward(theta);
      } catch (const EvalError&) {
        res.diverged = true;
        res.diverged_at = it;
        break;
      }
      res.theta = theta;
      if (it % cfg_.eval_period == 0) record(res, it, theta, eval);
      if (!hooks(it, theta, res)) break;

      if (multi) {
        // group one: PDE terms; group two: boundary, initial and data terms
        auto coefA = current_coefs(), coefB = coefA;
        const auto& terms = asm_.terms();
        for (std::size_t k = 0; k < terms.size(); ++k)
          (terms[k].pde_group ? coefB : coefA)[k] = 0.0;
        asm_.backward(coefA, ggrads[0]);
        asm_.backward(coefB, ggrads[1]);
        if (!ggrads[0].allFinite() || !ggrads[1].allFinite()) {
          res.diverged = true;
          res.diverged_at = it;
          break;
        }
        madam.step(theta, ggrads);
      } else {
        asm_.backward(current_coefs(), grad);
        if (!grad.allFinite()) {
          res.diverged = true;
          res.diverged_at = it;
          break;
        }
        adam.step(theta, grad);
      }
      res.iterations_run = it + 1;
    }

    if (!res.diverged) {
      try {
        asm_.forward(theta);
        res.theta = theta;
        record(res, cfg_.iterations, theta, eval);
      } catch (const EvalError&) {
        res.diverged = true;
        res.diverged_at = cfg_.iterations;
      }
    }
  }

  void run_lbfgs(Vec& theta, const EvalFn& eval, TrainResult& res) {
    Lbfgs opt(cfg_.lbfgs);
    auto fg = [&](const Vec& x, Vec& g) -> double {
      asm_.forward(x);
      g.resize(asm_.n_params());
      asm_.backward(current_coefs(), g);
      return asm_.weighted_total();
    };

    int consecutive_rejects = 0;
    for (int it = 0; it < cfg_.iterations; ++it) {
      if (it % cfg_.eval_period == 0) {
        try {
          asm_.forward(theta);
        } catch (const EvalError&) {
          res.diverged = true;
          res.diverged_at = it;
          break;
        }
        record(res, it, theta, eval);
      }
      Lbfgs::Outcome out = opt.step(theta, fg);
      if (out == Lbfgs::Outcome::Diverged) {
        res.diverged = true;
        res.diverged_at = it;
        break;
      }
      if (out == Lbfgs::Outcome::NoMove) break;  // gradient exactly zero
      if (out == Lbfgs::Outcome::Rejected) {
        if (++consecutive_rejects >= 2) {  // steepest descent failed too
          res.stalled = true;
          break;
        }
      } else {
        consecutive_rejects = 0;
        res.theta = theta;
      }
      res.iterations_run = it + 1;
    }

    if (!res.diverged) {
      try {
        asm_.forward(theta);
        res.theta = theta;
        record(res, res.iterations_run, theta, eval);
      } catch (const EvalError&) {
        res.diverged = true;
        res.diverged_at = res.iterations_run;
      }
    }
  }

  Assembler& asm_;
  TrainConfig cfg_;
  Vec scratch_;
};

}  // namespace pinnbench::train
