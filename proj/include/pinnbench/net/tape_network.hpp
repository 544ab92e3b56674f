#pragma once

#include <memory>
#include <vector>

#include "pinnbench/ad/tape.hpp"
#include "pinnbench/net/mlp.hpp"

namespace pinnbench::net {

// Binds a parameter set onto a reverse-mode tape so parameter gradients fall
// out of a single reverse sweep. This is the reference path the batched
// kernel is validated against; it is not meant for full-size training.
class TapeNetwork {
 public:
  TapeNetwork(const NetworkSpec& spec, const ParameterSet& p)
      : spec_(spec), lay_(spec), tape_(std::make_unique<ad::Tape>()) {
    params_.reserve(std::size_t(lay_.total));
    for (long i = 0; i < lay_.total; ++i) {
      ad::Var v = tape_->input(p.flat[i]);
      params_.push_back(v);
      registry_.ids.push_back(v.id);
    }
  }

  template <class R>
  std::vector<R> forward(const std::vector<R>& x) const {
    return mlp_forward<R, ad::Var>(spec_, lay_, params_.data(), x);
  }

  std::vector<ad::Var> forward_point(const std::vector<double>& x) const {
    std::vector<ad::Var> xv;
    xv.reserve(x.size());
    for (double c : x) xv.push_back(tape_->constant(c));
    return forward(xv);
  }

  ad::GradientVector grad(ad::Var scalar) const { return tape_->reverse_grad(scalar, registry_); }

  ad::Tape& tape() const { return *tape_; }
  const ad::ParamRegistry& registry() const { return registry_; }
  const NetworkSpec& spec() const { return spec_; }
  const Layout& layout() const { return lay_; }

 private:
  NetworkSpec spec_;
  Layout lay_;
  std::unique_ptr<ad::Tape> tape_;
  std::vector<ad::Var> params_;
  ad::ParamRegistry registry_;
};

}  // namespace pinnbench::net
