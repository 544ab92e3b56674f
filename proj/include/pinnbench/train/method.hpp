#pragma once

#include <string>

#include "pinnbench/net/mlp.hpp"

namespace pinnbench::train {

// Everything that distinguishes the paper's method variants. Orthogonal
// combinations are representable; the named presets below reproduce the
// benchmarked ones.
struct Method {
  std::string name = "pinn";

  double w_pde = 1.0;
  double w_bc = 1.0;
  double w_data = 1.0;  // pinn-w boosts boundary terms only; the data weight
                        // on inverse problems stays at 1 (see config docs)

  enum class Opt { Adam, MultiAdam, Lbfgs } opt = Opt::Adam;

  enum class Reweight { None, Lra, Ntk } reweight = Reweight::None;
  double lra_alpha = 0.1;
  int reweight_period = 1000;

  bool rar = false;
  int rar_period = 2000;
  double rar_pool_mult = 10.0;
  double rar_top_frac = 0.01;

  bool gpinn = false;
  double gpinn_weight = 0.01;

  bool vpinn = false;
  int vpinn_q = 10;      // Gauss-Legendre points per axis per cell
  int vpinn_grid = 4;    // cells per axis
  int vpinn_degree = 3;  // Legendre test degree per axis

  net::Adaptive adaptive = net::Adaptive::None;

  bool fbpinn = false;
  int fbpinn_subdomains = 3;  // per axis
  double fbpinn_overlap = 0.4;
};

inline Method method_from_name(const std::string& name) {
  Method m;
  m.name = name;
  if (name == "pinn") return m;
  if (name == "pinn-w") {
    m.w_bc = 100.0;
    return m;
  }
  if (name == "pinn-lbfgs") {
    m.opt = Method::Opt::Lbfgs;
    return m;
  }
  if (name == "lra") {
    m.reweight = Method::Reweight::Lra;
    return m;
  }
  if (name == "ntk") {
    m.reweight = Method::Reweight::Ntk;
    return m;
  }
  if (name == "rar") {
    m.rar = true;
    return m;
  }
  if (name == "multiadam") {
    m.opt = Method::Opt::MultiAdam;
    return m;
  }
  if (name == "gpinn") {
    m.gpinn = true;
    return m;
  }
  if (name == "vpinn") {
    m.vpinn = true;
    return m;
  }
  if (name == "laaf") {
    m.adaptive = net::Adaptive::Laaf;
    return m;
  }
  if (name == "gaaf") {
    m.adaptive = net::Adaptive::Gaaf;
    return m;
  }
  if (name == "fbpinn") {
    m.fbpinn = true;
    return m;
  }
  throw ConfigError("unknown method '" + name +
                    "' (known: pinn, pinn-w, pinn-lbfgs, lra, ntk, rar, multiadam, gpinn, "
                    "vpinn, laaf, gaaf, fbpinn)");
}

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {"pinn",      "pinn-w", "pinn-lbfgs", "lra",
                                                 "ntk",       "rar",    "multiadam",  "gpinn",
                                                 "vpinn",     "laaf",   "gaaf",       "fbpinn"};
  return names;
}

}  // namespace pinnbench::train
