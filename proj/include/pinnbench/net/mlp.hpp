#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pinnbench/core.hpp"

namespace pinnbench::net {

enum class Activation { Tanh, Sin };
enum class Adaptive { None, Gaaf, Laaf };

inline const char* activation_name(Activation a) { return a == Activation::Tanh ? "tanh" : "sin"; }
inline const char* adaptive_name(Adaptive a) {
  switch (a) {
    case Adaptive::None: return "none";
    case Adaptive::Gaaf: return "gaaf";
    case Adaptive::Laaf: return "laaf";
  }
  return "?";
}

struct NetworkSpec {
  int input_dim = 2;
  int output_dim = 1;
  std::vector<int> hidden = {100, 100, 100, 100, 100};
  Activation activation = Activation::Tanh;
  Adaptive adaptive = Adaptive::None;
  double slope_scale = 10.0;  // the fixed n in sigma(n * a * z)

  std::vector<int> layer_sizes() const {
    std::vector<int> s;
    s.push_back(input_dim);
    for (int h : hidden) s.push_back(h);
    s.push_back(output_dim);
    return s;
  }

  int hidden_neurons() const {
    int n = 0;
    for (int h : hidden) n += h;
    return n;
  }

  int slope_count() const {
    switch (adaptive) {
      case Adaptive::None: return 0;
      case Adaptive::Gaaf: return 1;
      case Adaptive::Laaf: return hidden_neurons();
    }
    return 0;
  }

  std::string describe() const;
};

// Flat parameter layout, fixed ordering: per layer W (row-major, rows are
// output neurons) followed by b, layers in forward order, then adaptive
// slopes (one per hidden neuron for laaf, a single global one for gaaf).
struct Layout {
  std::vector<int> sizes;    // layer_sizes()
  std::vector<long> w_off, b_off;
  long slope_off = 0;
  long total = 0;

  explicit Layout(const NetworkSpec& spec) : sizes(spec.layer_sizes()) {
    long off = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      w_off.push_back(off);
      off += long(sizes[l]) * sizes[l + 1];
      b_off.push_back(off);
      off += sizes[l + 1];
    }
    slope_off = off;
    total = off + spec.slope_count();
  }

  int layers() const { return int(sizes.size()) - 1; }
  int fan_in(int l) const { return sizes[l]; }
  int fan_out(int l) const { return sizes[l + 1]; }
};

inline long param_count(const NetworkSpec& spec) { return Layout(spec).total; }

inline std::string NetworkSpec::describe() const {
  std::string h;
  for (std::size_t i = 0; i < hidden.size(); ++i) h += (i ? "," : "") + std::to_string(hidden[i]);
  return "in=" + std::to_string(input_dim) + " out=" + std::to_string(output_dim) +
         " hidden=" + h + " act=" + activation_name(activation) +
         " adaptive=" + adaptive_name(adaptive) + " n=" + std::to_string(int(slope_scale));
}

struct ParameterSet {
  Vec flat;
};

// Glorot-uniform weights, zero biases, slopes at 1/n. Same seed, same spec,
// same bits: draws happen in storage order from the project Rng.
inline ParameterSet init_params(const NetworkSpec& spec, std::uint64_t seed) {
  Layout lay(spec);
  ParameterSet p;
  p.flat = Vec::Zero(lay.total);
  Rng rng(seed);
  for (int l = 0; l < lay.layers(); ++l) {
    double limit = std::sqrt(6.0 / (lay.fan_in(l) + lay.fan_out(l)));
    long n = long(lay.fan_in(l)) * lay.fan_out(l);
    for (long i = 0; i < n; ++i) p.flat[lay.w_off[l] + i] = rng.uniform(-limit, limit);
    // biases stay zero
  }
  for (int i = 0; i < spec.slope_count(); ++i)
    p.flat[lay.slope_off + i] = 1.0 / spec.slope_scale;
  return p;
}

// Reference forward pass, templated so the scalar may be double, a tape Var,
// or a nested Dual of either. R is the point scalar, P the parameter scalar;
// R must absorb P under * and +.
template <class R, class P>
std::vector<R> mlp_forward(const NetworkSpec& spec, const Layout& lay, const P* params,
                           const std::vector<R>& x) {
  require(int(x.size()) == spec.input_dim, "mlp_forward: input dim mismatch");
  std::vector<R> a = x, z;
  int slope_idx = 0;
  for (int l = 0; l < lay.layers(); ++l) {
    int in = lay.fan_in(l), out = lay.fan_out(l);
    z.clear();
    z.reserve(out);
    const P* W = params + lay.w_off[l];
    const P* b = params + lay.b_off[l];
    for (int o = 0; o < out; ++o) {
      R acc = a[0] * W[long(o) * in];
      for (int i = 1; i < in; ++i) acc = acc + a[i] * W[long(o) * in + i];
      acc = acc + b[o];
      z.push_back(acc);
    }
    if (l + 1 < lay.layers()) {
      for (int o = 0; o < out; ++o) {
        R arg = z[o];
        if (spec.adaptive == Adaptive::Gaaf)
          arg = arg * (params[lay.slope_off] * spec.slope_scale);
        else if (spec.adaptive == Adaptive::Laaf)
          arg = arg * (params[lay.slope_off + slope_idx + o] * spec.slope_scale);
        using std::tanh;
        using std::sin;
        z[o] = spec.activation == Activation::Tanh ? tanh(arg) : sin(arg);
      }
      if (spec.adaptive == Adaptive::Laaf) slope_idx += out;
    }
    a = z;
  }
  return a;
}

template <class R, class P>
std::vector<R> mlp_forward(const NetworkSpec& spec, const P* params, const std::vector<R>& x) {
  Layout lay(spec);
  return mlp_forward(spec, lay, params, x);
}

}  // namespace pinnbench::net
