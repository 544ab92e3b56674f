#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pinnbench/ad/derivatives.hpp"
#include "pinnbench/ad/dual.hpp"
#include "pinnbench/ad/tape.hpp"
#include "pinnbench/net/jet_plan.hpp"
#include "pinnbench/pde/sampling.hpp"

namespace pinnbench::pde {

// One network of the case. Forward problems use a single field; inverse
// problems add a coefficient field that only sees the spatial coordinates.
struct FieldSpec {
  std::string name = "u";
  int outputs = 1;
  bool spatial_only = false;
};

// One derivative quantity of one unknown, in the channel vocabulary of the
// jet kernel. `unknown` indexes the concatenation of all fields' outputs.
struct Entry {
  int unknown = 0;
  net::ChannelKind kind = net::ChannelKind::Value;
  int a = 0;
  int b = 0;
  int order = 0;
  std::vector<int> lap_axes;

  static Entry value(int u) { return {u, net::ChannelKind::Value, 0, 0, 0, {}}; }
  static Entry d1(int u, int axis) { return {u, net::ChannelKind::Pure, axis, 0, 1, {}}; }
  static Entry d2(int u, int axis) { return {u, net::ChannelKind::Pure, axis, 0, 2, {}}; }
  static Entry d3(int u, int axis) { return {u, net::ChannelKind::Pure, axis, 0, 3, {}}; }
  static Entry d4(int u, int axis) { return {u, net::ChannelKind::Pure, axis, 0, 4, {}}; }
  static Entry lap(int u, std::vector<int> axes) {
    return {u, net::ChannelKind::Lap, 0, 0, 2, std::move(axes)};
  }
};

// The residual callable instantiated for the scalar types the framework
// needs: double (evaluation, RAR scoring), Var (training cotangents) and
// Dual<Var> (residual-gradient terms). Signature: f(coords, entries, out).
struct ResidualSet {
  using DV = ad::Dual<ad::Var>;
  std::function<void(const double*, const double*, double*)> on_double;
  std::function<void(const ad::Var*, const ad::Var*, ad::Var*)> on_var;
  std::function<void(const DV*, const DV*, DV*)> on_dual_var;

  template <class F>
  static ResidualSet make(F f) {
    ResidualSet r;
    r.on_double = [f](const double* c, const double* e, double* out) { f(c, e, out); };
    r.on_var = [f](const ad::Var* c, const ad::Var* e, ad::Var* out) { f(c, e, out); };
    r.on_dual_var = [f](const DV* c, const DV* e, DV* out) { f(c, e, out); };
    return r;
  }
};

// Closed-form scalar field with derivatives on demand (nested duals inside).
struct ScalarField {
  std::function<double(const std::vector<double>&)> value;
  std::function<double(const std::vector<double>&, const std::vector<int>&)> derivative;

  template <class F>
  static ScalarField make(F f) {
    ScalarField s;
    s.value = [f](const std::vector<double>& x) { return f(x); };
    s.derivative = [f](const std::vector<double>& x, const std::vector<int>& multi) {
      return ad::input_derivative(f, x, multi);
    };
    return s;
  }
};

enum class BCKind { Dirichlet, Neumann, Robin, TimeDeriv };

struct BoundaryCondition {
  std::string component;  // component name, or "*" for every spatial component
  int unknown = 0;
  BCKind kind = BCKind::Dirichlet;
  std::function<double(const Vec&)> value;  // target g(x); null means 0
  double robin_alpha = 0;                   // Robin: alpha*u + du/dn = g

  double target(const Vec& p) const { return value ? value(p) : 0.0; }
};

// Pointwise pin on one unknown (pressure gauge of the incompressible NS
// cases: p = 0 at a stated point). Enforced as an extra soft loss term.
struct Anchor {
  Vec point;  // full coordinates, including time when applicable
  int unknown = 0;
  double value = 0;
};

struct ReferenceSolution {
  Mat points;             // rows x coords
  Mat values;             // rows x unknowns
  std::vector<Vec> axes;  // tensor grid axes (row-major, last axis fastest); empty if scattered
  std::string source;
};

struct ObservationSpec {
  bool enabled = false;
  int unknown = 0;  // which unknown is observed
  enum Layout { GridLayout, RandomLayout } layout = RandomLayout;
  int count = 2500;        // RandomLayout
  int grid_per_axis = 50;  // GridLayout
  double noise_sigma = 0.1;
};

struct Case {
  std::string name;
  std::string description;
  std::vector<std::string> tags;

  Geometry geom;
  std::optional<double> time_end;
  std::vector<int> periodic_axes;
  bool periodic_match_d1 = false;

  std::vector<FieldSpec> fields;
  std::vector<Entry> entries;  // residual inputs
  int n_equations = 1;
  ResidualSet residual;
  bool residual_reusable_tape = true;  // false if the residual branches on coords

  std::vector<BoundaryCondition> bcs;
  std::vector<Anchor> anchors;
  std::vector<ScalarField> analytic;  // per unknown; empty when no closed form

  std::function<ReferenceSolution(const Case&)> make_reference;
  ObservationSpec observations;

  // unknowns the headline metrics are computed over; empty = all of them
  // (inverse problems score the recovered coefficient field)
  std::vector<int> metric_unknowns;

  int input_dim() const { return geom.dim() + (time_end ? 1 : 0); }
  int n_unknowns() const {
    int n = 0;
    for (const auto& f : fields) n += f.outputs;
    return n;
  }
  int field_of_unknown(int u) const {
    int n = 0;
    for (int f = 0; f < int(fields.size()); ++f) {
      n += fields[std::size_t(f)].outputs;
      if (u < n) return f;
    }
    throw std::out_of_range("field_of_unknown: bad unknown index");
  }
  int column_of_unknown(int u) const {
    int n = 0;
    for (const auto& f : fields) {
      if (u < n + f.outputs) return u - n;
      n += f.outputs;
    }
    throw std::out_of_range("column_of_unknown: bad unknown index");
  }
  // input columns seen by a field: all of them, or the spatial prefix
  int field_input_dim(int f) const {
    return fields[std::size_t(f)].spatial_only ? geom.dim() : input_dim();
  }

  bool has_analytic() const { return !analytic.empty(); }
};

}  // namespace pinnbench::pde
