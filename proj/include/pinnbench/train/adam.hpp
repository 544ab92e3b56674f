#pragma once

#include <vector>

#include "pinnbench/core.hpp"

namespace pinnbench::train {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One set of Adam moments. direction() is the bias-corrected update before
// the learning rate sign flip, so MultiAdam can average directions from
// several instances and the single-group case stays bit-identical to step().
class Adam {
 public:
  Adam(long n, AdamConfig cfg = {})
      : cfg_(cfg), m_(Vec::Zero(n)), v_(Vec::Zero(n)) {}

  const AdamConfig& config() const { return cfg_; }
  long size() const { return m_.size(); }
  int steps() const { return t_; }

  // absorbs the gradient into the moments and returns lr * m_hat / (sqrt(v_hat) + eps)
  Vec direction(const Vec& grad) {
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_.array() + (1.0 - cfg_.beta2) * grad.array().square();
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    return (cfg_.lr * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + cfg_.eps)).matrix();
  }

  void step(Vec& theta, const Vec& grad) { theta -= direction(grad); }

 private:
  AdamConfig cfg_;
  Vec m_, v_;
  int t_ = 0;
};

// Separate Adam moments per loss group; the applied update is the arithmetic
// mean of the group directions. With one group this is plain Adam.
class MultiAdam {
 public:
  MultiAdam(long n, int groups, AdamConfig cfg = {}) {
    require(groups >= 1, "MultiAdam: needs at least one group");
    for (int g = 0; g < groups; ++g) groups_.emplace_back(n, cfg);
  }

  int group_count() const { return int(groups_.size()); }

  void step(Vec& theta, const std::vector<Vec>& group_grads) {
    require(group_grads.size() == groups_.size(), "MultiAdam: gradient/group count mismatch");
    Vec dir = groups_[0].direction(group_grads[0]);
    for (std::size_t g = 1; g < groups_.size(); ++g) dir += groups_[g].direction(group_grads[g]);
    theta -= dir / double(groups_.size());
  }

 private:
  std::vector<Adam> groups_;
};

}  // namespace pinnbench::train
