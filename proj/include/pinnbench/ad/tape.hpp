#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pinnbench/core.hpp"

namespace pinnbench::ad {

enum class Op : std::uint8_t {
  Input, Const, Add, Sub, Mul, Div, Neg,
  Tanh, Sin, Cos, Exp, Log, Sqrt, Sinh, Cosh, PowC,
};

inline const char* op_name(Op op) {
  switch (op) {
    case Op::Input: return "input";
    case Op::Const: return "const";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Neg: return "neg";
    case Op::Tanh: return "tanh";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Sinh: return "sinh";
    case Op::Cosh: return "cosh";
    case Op::PowC: return "pow";
  }
  return "?";
}

class Tape;

// Handle to a tape node. Copyable; arithmetic on Vars records new nodes.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  double value() const;
};

struct ParamRegistry {
  std::vector<std::uint32_t> ids;  // input-node ids, gradient order
  std::size_t size() const { return ids.size(); }
};

struct GradientVector {
  Vec values;
  const ParamRegistry* registry = nullptr;

  GradientVector& operator+=(const GradientVector& o) {
    require(registry == o.registry, "GradientVector: mismatched registries");
    values += o.values;
    return *this;
  }
};

// Reverse-mode tape. Nodes hold the op tag, predecessor ids and the cached
// primal; local partials are cached alongside so a reverse sweep is a single
// fused-multiply pass. evaluate() re-runs the primal pass for new bindings.
class Tape {
 public:
  struct Node {
    Op op;
    std::uint32_t a = 0, b = 0;
    double aux = 0;  // constant value / exponent
    double primal = 0;
    double pa = 0, pb = 0;  // d primal / d pred
  };

  Var input(double v) {
    nodes_.push_back({Op::Input, 0, 0, 0, v, 0, 0});
    inputs_.push_back(std::uint32_t(nodes_.size() - 1));
    return {this, std::uint32_t(nodes_.size() - 1)};
  }

  Var constant(double v) {
    nodes_.push_back({Op::Const, 0, 0, v, v, 0, 0});
    return {this, std::uint32_t(nodes_.size() - 1)};
  }

  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::uint32_t i) const { return nodes_[i]; }
  const std::vector<std::uint32_t>& inputs() const { return inputs_; }

  void set_input(std::uint32_t input_id, double v) { nodes_[input_id].primal = v; }

  // Recomputes every primal in construction order. `bindings` follows the
  // order inputs were created; pass empty to reuse current input values.
  void evaluate(const std::vector<double>& bindings = {}) {
    if (!bindings.empty()) {
      require(bindings.size() == inputs_.size(), "evaluate: binding count mismatch");
      for (std::size_t i = 0; i < inputs_.size(); ++i) nodes_[inputs_[i]].primal = bindings[i];
    }
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) compute(i);
  }

  Var record(Op op, std::uint32_t a, std::uint32_t b, double aux = 0) {
    nodes_.push_back({op, a, b, aux, 0, 0, 0});
    std::uint32_t id = std::uint32_t(nodes_.size() - 1);
    compute(id);
    return {this, id};
  }

  // Adjoint sweep from `output`; entries ordered by `reg`.
  GradientVector reverse_grad(Var output, const ParamRegistry& reg) const {
    require(output.tape == this, "reverse_grad: var from another tape");
    std::vector<double> adj(nodes_.size(), 0.0);
    adj[output.id] = 1.0;
    for (std::uint32_t i = output.id + 1; i-- > 0;) {
      double a = adj[i];
      if (a == 0.0) continue;
      if (!std::isfinite(a))
        throw EvalError(std::string("reverse_grad: non-finite adjoint at node ") +
                        std::to_string(i) + " (" + op_name(nodes_[i].op) + ")");
      const Node& n = nodes_[i];
      switch (n.op) {
        case Op::Input:
        case Op::Const:
          break;
        case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::PowC:
          adj[n.a] += a * n.pa;
          adj[n.b] += a * n.pb;
          break;
        default:
          adj[n.a] += a * n.pa;
          break;
      }
    }
    GradientVector g;
    g.registry = &reg;
    g.values.resize(Index(reg.ids.size()));
    for (std::size_t k = 0; k < reg.ids.size(); ++k) g.values[Index(k)] = adj[reg.ids[k]];
    return g;
  }

  // Adjoint sweep seeded on several outputs at once (seed 0 entries are
  // inert). Writes the adjoints of the `wanted` nodes into `out`.
  void reverse_seeded(const std::vector<Var>& outputs, const std::vector<double>& seeds,
                      const std::vector<std::uint32_t>& wanted, double* out) const {
    require(outputs.size() == seeds.size(), "reverse_seeded: output/seed count mismatch");
    adj_.assign(nodes_.size(), 0.0);
    std::uint32_t top = 0;
    for (std::size_t k = 0; k < outputs.size(); ++k) {
      require(outputs[k].tape == this, "reverse_seeded: var from another tape");
      adj_[outputs[k].id] += seeds[k];
      top = std::max(top, outputs[k].id);
    }
    for (std::uint32_t i = top + 1; i-- > 0;) {
      double a = adj_[i];
      if (a == 0.0) continue;
      if (!std::isfinite(a))
        throw EvalError(std::string("reverse_seeded: non-finite adjoint at node ") +
                        std::to_string(i) + " (" + op_name(nodes_[i].op) + ")");
      const Node& n = nodes_[i];
      switch (n.op) {
        case Op::Input:
        case Op::Const:
          break;
        case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::PowC:
          adj_[n.a] += a * n.pa;
          adj_[n.b] += a * n.pb;
          break;
        default:
          adj_[n.a] += a * n.pa;
          break;
      }
    }
    for (std::size_t k = 0; k < wanted.size(); ++k) out[k] = adj_[wanted[k]];
  }

  void clear() {
    nodes_.clear();
    inputs_.clear();
  }

 private:
  void fail(std::uint32_t i, const char* what) const {
    throw EvalError("tape node " + std::to_string(i) + " (" + op_name(nodes_[i].op) +
                    "): " + what);
  }

  void compute(std::uint32_t i) {
    Node& n = nodes_[i];
    auto A = [&] { return nodes_[n.a].primal; };
    auto B = [&] { return nodes_[n.b].primal; };
    switch (n.op) {
      case Op::Input: return;  // primal is the binding
      case Op::Const: n.primal = n.aux; return;
      case Op::Add: n.primal = A() + B(); n.pa = 1; n.pb = 1; break;
      case Op::Sub: n.primal = A() - B(); n.pa = 1; n.pb = -1; break;
      case Op::Mul: n.primal = A() * B(); n.pa = B(); n.pb = A(); break;
      case Op::Div: {
        if (std::abs(B()) < kDivisionFloor) fail(i, "division by near-zero value");
        n.primal = A() / B();
        n.pa = 1.0 / B();
        n.pb = -n.primal / B();
        break;
      }
      case Op::Neg: n.primal = -A(); n.pa = -1; break;
      case Op::Tanh: {
        double t = std::tanh(A());
        n.primal = t;
        n.pa = 1.0 - t * t;
        break;
      }
      case Op::Sin: n.primal = std::sin(A()); n.pa = std::cos(A()); break;
      case Op::Cos: n.primal = std::cos(A()); n.pa = -std::sin(A()); break;
      case Op::Exp: n.primal = std::exp(A()); n.pa = n.primal; break;
      case Op::Log: {
        if (!(A() > 0.0)) fail(i, "log of non-positive value");
        n.primal = std::log(A());
        n.pa = 1.0 / A();
        break;
      }
      case Op::Sqrt: {
        if (A() < 0.0) fail(i, "sqrt of negative value");
        n.primal = std::sqrt(A());
        n.pa = 0.5 / (n.primal > 0 ? n.primal : kDivisionFloor);
        break;
      }
      case Op::Sinh: n.primal = std::sinh(A()); n.pa = std::cosh(A()); break;
      case Op::Cosh: n.primal = std::cosh(A()); n.pa = std::sinh(A()); break;
      case Op::PowC: {
        double e = n.aux;
        n.primal = std::pow(A(), e);
        n.pa = e * std::pow(A(), e - 1.0);
        n.pb = 0;
        break;
      }
    }
    if (!std::isfinite(n.primal)) fail(i, "non-finite result");
  }

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> inputs_;
  mutable std::vector<double> adj_;  // reverse_seeded scratch
};

inline double Var::value() const { return tape->node(id).primal; }

namespace detail {
inline Var lift(Tape* t, double c) { return t->constant(c); }
}

inline Var operator+(Var a, Var b) { return a.tape->record(Op::Add, a.id, b.id); }
inline Var operator-(Var a, Var b) { return a.tape->record(Op::Sub, a.id, b.id); }
inline Var operator*(Var a, Var b) { return a.tape->record(Op::Mul, a.id, b.id); }
inline Var operator/(Var a, Var b) { return a.tape->record(Op::Div, a.id, b.id); }
inline Var operator-(Var a) { return a.tape->record(Op::Neg, a.id, 0); }
inline Var operator+(Var a, double c) { return a + detail::lift(a.tape, c); }
inline Var operator+(double c, Var a) { return detail::lift(a.tape, c) + a; }
inline Var operator-(Var a, double c) { return a - detail::lift(a.tape, c); }
inline Var operator-(double c, Var a) { return detail::lift(a.tape, c) - a; }
inline Var operator*(Var a, double c) { return a * detail::lift(a.tape, c); }
inline Var operator*(double c, Var a) { return detail::lift(a.tape, c) * a; }
inline Var operator/(Var a, double c) { return a / detail::lift(a.tape, c); }
inline Var operator/(double c, Var a) { return detail::lift(a.tape, c) / a; }

inline Var tanh(Var a) { return a.tape->record(Op::Tanh, a.id, 0); }
inline Var sin(Var a) { return a.tape->record(Op::Sin, a.id, 0); }
inline Var cos(Var a) { return a.tape->record(Op::Cos, a.id, 0); }
inline Var exp(Var a) { return a.tape->record(Op::Exp, a.id, 0); }
inline Var log(Var a) { return a.tape->record(Op::Log, a.id, 0); }
inline Var sqrt(Var a) { return a.tape->record(Op::Sqrt, a.id, 0); }
inline Var sinh(Var a) { return a.tape->record(Op::Sinh, a.id, 0); }
inline Var cosh(Var a) { return a.tape->record(Op::Cosh, a.id, 0); }
inline Var pow(Var a, double e) { return a.tape->record(Op::PowC, a.id, 0, e); }

}  // namespace pinnbench::ad
