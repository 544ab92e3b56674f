#pragma once

#include <cmath>
#include <deque>

#include "pinnbench/core.hpp"

namespace pinnbench::train {

// Limited-memory BFGS with a strong-Wolfe line search (two-loop recursion,
// curvature-pair history, cubic interpolation in the zoom phase).
//
// The objective is a callable double(const Vec& x, Vec& g) that fills the
// gradient. Non-finite losses during line-search trials surface as the
// Diverged outcome; a line search that exhausts its trial budget rejects the
// step and resets the history.
class Lbfgs {
 public:
  struct Config {
    int history = 50;
    double c1 = 1e-4;
    double c2 = 0.9;
    double step0 = 1.0;
    int max_line_iters = 30;
    double max_step = 1e10;
  };

  enum class Outcome { Ok, NoMove, Rejected, Diverged };

  Lbfgs() = default;
  explicit Lbfgs(Config cfg) : cfg_(cfg) {}

  double last_loss() const { return fx_; }
  const Vec& last_grad() const { return gx_; }

  void reset() {
    pairs_.clear();
    has_fg_ = false;
  }

  template <class F>
  Outcome step(Vec& x, F&& f) {
    if (!has_fg_) {
      gx_.resize(x.size());
      try {
        fx_ = f(x, gx_);
      } catch (const EvalError&) {
        return Outcome::Diverged;
      }
      if (!std::isfinite(fx_) || !gx_.allFinite()) return Outcome::Diverged;
      has_fg_ = true;
    }
    if (gx_.isZero(0.0)) return Outcome::NoMove;

    Vec d = two_loop();
    double dg0 = gx_.dot(d);
    if (dg0 >= 0) {  // not a descent direction: fall back to steepest descent
      pairs_.clear();
      d = -gx_;
      dg0 = gx_.dot(d);
      if (dg0 == 0) return Outcome::NoMove;
    }

    double alpha = 0, falpha = 0;
    Vec galpha(x.size());
    LineResult lr = wolfe_search(x, d, dg0, f, alpha, falpha, galpha);
    if (lr == LineResult::Diverged) return Outcome::Diverged;
    if (lr == LineResult::Fail) {
      pairs_.clear();
      return Outcome::Rejected;
    }

    Vec s = alpha * d;
    Vec y = galpha - gx_;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      pairs_.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (int(pairs_.size()) > cfg_.history) pairs_.pop_front();
    }
    x += alpha * d;
    fx_ = falpha;
    gx_ = std::move(galpha);
    return Outcome::Ok;
  }

 private:
  struct Pair {
    Vec s, y;
    double rho;
  };

  enum class LineResult { Ok, Fail, Diverged };

  Vec two_loop() const {
    Vec q = gx_;
    std::vector<double> a(pairs_.size());
    for (std::size_t i = pairs_.size(); i-- > 0;) {
      a[i] = pairs_[i].rho * pairs_[i].s.dot(q);
      q -= a[i] * pairs_[i].y;
    }
    if (!pairs_.empty()) {
      const Pair& last = pairs_.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      double b = pairs_[i].rho * pairs_[i].y.dot(q);
      q += (a[i] - b) * pairs_[i].s;
    }
    return -q;
  }

  // one guarded objective evaluation along the ray
  template <class F>
  bool eval_at(const Vec& x, const Vec& d, double alpha, F&& f, double& fv, Vec& gv,
               double& dg) {
    xtrial_ = x + alpha * d;
    try {
      fv = f(xtrial_, gv);
    } catch (const EvalError&) {
      return false;
    }
    if (!std::isfinite(fv) || !gv.allFinite()) return false;
    dg = gv.dot(d);
    return true;
  }

  template <class F>
  LineResult wolfe_search(const Vec& x, const Vec& d, double dg0, F&& f, double& alpha_out,
                          double& f_out, Vec& g_out) {
    const double f0 = fx_;
    double a_prev = 0, f_prev = f0, dg_prev = dg0;
    double a = cfg_.step0;
    for (int it = 0; it < cfg_.max_line_iters; ++it) {
      double fa, dga;
      if (!eval_at(x, d, a, f, fa, g_out, dga)) return LineResult::Diverged;
      if (fa > f0 + cfg_.c1 * a * dg0 || (it > 0 && fa >= f_prev))
        return zoom(x, d, f0, dg0, a_prev, f_prev, dg_prev, a, fa, dga, f, alpha_out, f_out,
                    g_out);
      if (std::abs(dga) <= -cfg_.c2 * dg0) {
        alpha_out = a;
        f_out = fa;
        return LineResult::Ok;
      }
      if (dga >= 0)
        return zoom(x, d, f0, dg0, a, fa, dga, a_prev, f_prev, dg_prev, f, alpha_out, f_out,
                    g_out);
      a_prev = a;
      f_prev = fa;
      dg_prev = dga;
      a = std::min(2.0 * a, cfg_.max_step);
      if (a == cfg_.max_step && a_prev == cfg_.max_step) break;
    }
    return LineResult::Fail;
  }

  static double cubic_min(double al, double fl, double dl, double ah, double fh, double dh) {
    const double d1 = dl + dh - 3.0 * (fl - fh) / (al - ah);
    const double disc = d1 * d1 - dl * dh;
    if (disc < 0) return 0.5 * (al + ah);
    const double d2 = (ah > al ? 1.0 : -1.0) * std::sqrt(disc);
    double c = ah - (ah - al) * (dh + d2 - d1) / (dh - dl + 2.0 * d2);
    if (!std::isfinite(c)) return 0.5 * (al + ah);
    return c;
  }

  template <class F>
  LineResult zoom(const Vec& x, const Vec& d, double f0, double dg0, double alo, double flo,
                  double dglo, double ahi, double fhi, double dghi, F&& f, double& alpha_out,
                  double& f_out, Vec& g_out) {
    for (int it = 0; it < cfg_.max_line_iters; ++it) {
      double a = cubic_min(alo, flo, dglo, ahi, fhi, dghi);
      const double lo = std::min(alo, ahi), hi = std::max(alo, ahi);
      const double margin = 0.1 * (hi - lo);
      if (!(a > lo + margin && a < hi - margin)) a = 0.5 * (alo + ahi);
      double fa, dga;
      if (!eval_at(x, d, a, f, fa, g_out, dga)) return LineResult::Diverged;
      if (fa > f0 + cfg_.c1 * a * dg0 || fa >= flo) {
        ahi = a;
        fhi = fa;
        dghi = dga;
      } else {
        if (std::abs(dga) <= -cfg_.c2 * dg0) {
          alpha_out = a;
          f_out = fa;
          return LineResult::Ok;
        }
        if (dga * (ahi - alo) >= 0) {
          ahi = alo;
          fhi = flo;
          dghi = dglo;
        }
        alo = a;
        flo = fa;
        dglo = dga;
      }
      if (std::abs(ahi - alo) < 1e-16 * std::max(1.0, std::abs(alo))) break;
    }
    return LineResult::Fail;
  }

  Config cfg_;
  std::deque<Pair> pairs_;
  Vec gx_, xtrial_;
  double fx_ = 0;
  bool has_fg_ = false;
};

}  // namespace pinnbench::train
