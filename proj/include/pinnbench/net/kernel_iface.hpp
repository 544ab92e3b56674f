#pragma once

#include <memory>

#include "pinnbench/net/jet_kernel.hpp"

namespace pinnbench::net {

// Batched network evaluator: forward fills channel outputs for a point set,
// backward turns per-channel cotangents into parameter gradients. JetKernel
// covers plain MLPs; the FBPINN composite implements the same surface with
// its own parameter layout.
class Kernel {
 public:
  virtual ~Kernel() = default;
  virtual long param_count() const = 0;
  virtual ParameterSet init(std::uint64_t seed) const = 0;
  virtual std::string describe() const = 0;
  virtual const ChannelPlan& plan() const = 0;
  virtual void forward(const Vec& params, const Mat& X) = 0;
  virtual const Mat& output(int channel) const = 0;
  virtual void backward(const Vec& params, const std::vector<Mat>& cot, Vec& grad,
                        Vec* ntk = nullptr) const = 0;
};

class MlpKernel final : public Kernel {
 public:
  MlpKernel(const NetworkSpec& spec, ChannelPlan plan) : k_(spec, std::move(plan)) {}

  long param_count() const override { return k_.layout().total; }
  ParameterSet init(std::uint64_t seed) const override { return init_params(k_.spec(), seed); }
  std::string describe() const override { return k_.spec().describe(); }
  const ChannelPlan& plan() const override { return k_.plan(); }
  void forward(const Vec& params, const Mat& X) override { k_.forward(params, X); }
  const Mat& output(int channel) const override { return k_.output(channel); }
  void backward(const Vec& params, const std::vector<Mat>& cot, Vec& grad,
                Vec* ntk = nullptr) const override {
    k_.backward(params, cot, grad, ntk);
  }

 private:
  JetKernel k_;
};

}  // namespace pinnbench::net
