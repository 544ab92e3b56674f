#pragma once

#include <map>
#include <memory>

#include "pinnbench/pde/io.hpp"
#include "pinnbench/pde/mfs.hpp"
#include "pinnbench/pde/references.hpp"

namespace pinnbench::pde {

using Params = std::map<std::string, double>;

namespace detail {

inline double param(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline void reject_unknown(const Params& p, std::initializer_list<const char*> allowed,
                           const std::string& case_name) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* a : allowed)
      if (k == a) ok = true;
    if (!ok)
      throw ConfigError("case " + case_name + ": unknown parameter '" + k + "'");
  }
}

inline Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

inline Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

// reference chain shared by every case: a data file wins, then the closed
// form; cases with neither throw and name the file they want
inline std::function<ReferenceSolution(const Case&)> reference_chain() {
  return [](const Case& self) -> ReferenceSolution {
    if (auto f = data_file(self.name)) return load_reference(self, *f);
    if (self.has_analytic()) return analytic_grid_reference(self);
    throw IoError("case " + self.name + ": no closed-form solution; provide " + self.name +
                  ".csv via BENCH_DATA_DIR");
  };
}

// random trigonometric polynomial of the Burgers2d initial data:
// 2 * sum_{i,j=-L..L} [a_ij sin(2 pi (ix+jy)) + b_ij cos(2 pi (ix+jy))] + c
class TrigPoly2 {
 public:
  TrigPoly2(int L, Rng& rng) {
    for (int i = -L; i <= L; ++i)
      for (int j = -L; j <= L; ++j) terms_.push_back({rng.normal(), rng.normal(), i, j});
    c_ = rng.normal();
  }
  double operator()(double x, double y) const {
    double w = 0;
    for (const auto& t : terms_) {
      double ph = 2.0 * M_PI * (t.i * x + t.j * y);
      w += t.a * std::sin(ph) + t.b * std::cos(ph);
    }
    return 2.0 * w + c_;
  }

 private:
  struct Term {
    double a, b;
    int i, j;
  };
  std::vector<Term> terms_;
  double c_ = 0;
};

// spatial coefficient field that is either a smooth random-feature draw or a
// lattice from file; the residual lambdas branch on which one is present
struct CoefField {
  std::shared_ptr<RffField> rff;
  std::shared_ptr<BilinearField> bil;

  template <class T>
  void jet(const T* x, T& value, T* grad) const {
    if (bil)
      bil->jet(x, value, grad);
    else
      rff->jet(x, value, grad);
  }
  double at(const Vec& p) const { return bil ? bil->at(p) : rff->at(p); }
  bool smooth() const { return bil == nullptr; }
};

inline CoefField coefficient_field(const std::string& case_name, std::uint64_t seed,
                                   bool exponential, std::string* note) {
  CoefField f;
  if (auto path = data_file(case_name + "_coef")) {
    f.bil = std::make_shared<BilinearField>(load_coefficient_grid(*path));
    if (note) *note = "coefficients from " + *path;
  } else {
    f.rff = std::make_shared<RffField>(2, mix_seed(seed, 0xF1E1Dull), 0.2, 1.0, exponential);
    if (note) *note = "fallback coefficients (squared-exponential, len 0.2); not paper-comparable";
  }
  return f;
}

}  // namespace detail

// ---------------------------------------------------------------- burgers

inline Case make_burgers1d_c(const Params& p) {
  detail::reject_unknown(p, {"nu"}, "burgers1d-c");
  const double nu = detail::param(p, "nu", 0.01 / M_PI);

  Case c;
  c.name = "burgers1d-c";
  c.description = "viscous Burgers, shock formation at x=0; cole-hopf reference on a 100x20 grid";
  c.tags = {"nonlinearity"};
  c.geom = Geometry(Shape::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)));
  c.time_end = 1.0;
  c.fields = {FieldSpec{"u", 1, false}};
  // entries: u, u_x, u_t, u_xx  (time is column 1)
  c.entries = {Entry::value(0), Entry::d1(0, 0), Entry::d1(0, 1), Entry::d2(0, 0)};
  c.n_equations = 1;
  c.residual = ResidualSet::make([nu](const auto* /*x*/, const auto* e, auto* out) {
    out[0] = e[2] + e[0] * e[1] - nu * e[3];
  });
  c.bcs = {
      {"x0-", 0, BCKind::Dirichlet, nullptr, 0},
      {"x0+", 0, BCKind::Dirichlet, nullptr, 0},
      {"initial", 0, BCKind::Dirichlet, [](const Vec& x) { return -std::sin(M_PI * x[0]); }, 0},
  };

  auto series = std::make_shared<BurgersCole>(nu);
  c.analytic = {ScalarField::make(
      [series](const auto& x) { return series->value(x[0], x[1]); })};
  c.make_reference = [](const Case& self) {
    if (auto f = data_file(self.name)) return load_reference(self, *f);
    ReferenceSolution ref = tensor_grid(self, default_grid_counts(self));
    fill_from_analytic(self, ref);
    ref.source = "cole-hopf quadrature";
    return ref;
  };
  return c;
}

inline Case make_burgers2d_c(const Params& p) {
  detail::reject_unknown(p, {"nu", "L", "ic_seed"}, "burgers2d-c");
  const double nu = detail::param(p, "nu", 0.001);
  const double L = detail::param(p, "L", 4.0);
  const int Li = int(std::lround(L));
  const auto ic_seed = std::uint64_t(detail::param(p, "ic_seed", 0.0));

  Case c;
  c.name = "burgers2d-c";
  c.description = "coupled 2-D Burgers with periodic sides and a random trig-polynomial start";
  c.tags = {"nonlinearity"};
  c.geom = Geometry(Shape::box(Vec::Constant(2, 0.0), Vec::Constant(2, L)));
  c.time_end = 1.0;
  c.periodic_axes = {0, 1};
  c.fields = {FieldSpec{"u", 2, false}};
  c.entries = {Entry::value(0),   Entry::value(1),   Entry::d1(0, 0),      Entry::d1(0, 1),
               Entry::d1(0, 2),   Entry::d1(1, 0),   Entry::d1(1, 1),      Entry::d1(1, 2),
               Entry::lap(0, {0, 1}), Entry::lap(1, {0, 1})};
  c.n_equations = 2;
  c.residual = ResidualSet::make([nu](const auto* /*x*/, const auto* e, auto* out) {
    out[0] = e[4] + e[0] * e[2] + e[1] * e[3] - nu * e[8];
    out[1] = e[7] + e[0] * e[5] + e[1] * e[6] - nu * e[9];
  });

  Rng rng(mix_seed(ic_seed, 0xB2D1C));
  auto w_u = std::make_shared<detail::TrigPoly2>(Li, rng);
  auto w_v = std::make_shared<detail::TrigPoly2>(Li, rng);
  c.bcs = {
      {"initial", 0, BCKind::Dirichlet, [w_u](const Vec& x) { return (*w_u)(x[0], x[1]); }, 0},
      {"initial", 1, BCKind::Dirichlet, [w_v](const Vec& x) { return (*w_v)(x[0], x[1]); }, 0},
  };
  c.make_reference = detail::reference_chain();
  return c;
}

// ---------------------------------------------------------------- poisson

inline Case make_poisson2d_c(const Params& p) {
  detail::reject_unknown(p, {"L"}, "poisson2d-c");
  const double L = detail::param(p, "L", 0.5);

  Case c;
  c.name = "poisson2d-c";
  c.description = "Laplace on a square minus four disks; fundamental-solution reference";
  c.tags = {"complex geometry"};
  std::vector<Shape> holes;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0})
      holes.push_back(Shape::ball(detail::v2(0.6 * L * sx, 0.6 * L * sy), 0.2 * L));
  c.geom = Geometry(Shape::box(Vec::Constant(2, -L), Vec::Constant(2, L)), holes);
  c.fields = {FieldSpec{"u", 1, false}};
  c.entries = {Entry::lap(0, {0, 1})};
  c.residual = ResidualSet::make(
      [](const auto* /*x*/, const auto* e, auto* out) { out[0] = -e[0]; });
  c.bcs = {
      {"x0-", 0, BCKind::Dirichlet, [](const Vec&) { return 1.0; }, 0},
      {"x0+", 0, BCKind::Dirichlet, [](const Vec&) { return 1.0; }, 0},
      {"x1-", 0, BCKind::Dirichlet, [](const Vec&) { return 1.0; }, 0},
      {"x1+", 0, BCKind::Dirichlet, [](const Vec&) { return 1.0; }, 0},
  };
  for (int h = 0; h < 4; ++h)
    c.bcs.push_back({"hole" + std::to_string(h), 0, BCKind::Dirichlet, nullptr, 0});

  c.make_reference = [L](const Case& self) {
    if (auto f = data_file(self.name)) return load_reference(self, *f);
    HarmonicMfs2d mfs(self.geom, [L](const Vec& q) {
      const double m = std::max(std::abs(q[0]), std::abs(q[1]));
      return m > L - 1e-9 ? 1.0 : 0.0;  // outer square vs hole rims
    });
    ReferenceSolution ref = tensor_grid(self, default_grid_counts(self));
    ref.values.resize(ref.points.rows(), 1);
    for (Index i = 0; i < ref.points.rows(); ++i) {
      Vec q = ref.points.row(i).transpose();
      ref.values(i, 0) = self.geom.contains_closure(q)
                             ? mfs.eval(q)
                             : std::numeric_limits<double>::quiet_NaN();
    }
    ref.source = mfs.certificate();
    return ref;
  };
  return c;
}

inline Case make_poisson2d_cg(const Params& p) {
  detail::reject_unknown(p, {"mu1", "mu2", "k", "A"}, "poisson2d-cg");
  const double mu1 = detail::param(p, "mu1", 1.0);
  const double mu2 = detail::param(p, "mu2", 4.0);
  const double k = detail::param(p, "k", 8.0);
  const double A = detail::param(p, "A", 10.0);

  Case c;
  c.name = "poisson2d-cg";
  c.description = "Helmholtz-type Poisson-Boltzmann on a square minus four offset circles";
  c.tags = {"complex geometry"};
  c.geom = Geometry(Shape::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)),
                    {Shape::ball(detail::v2(0.5, 0.5), 0.2), Shape::ball(detail::v2(0.4, -0.4), 0.4),
                     Shape::ball(detail::v2(-0.2, -0.7), 0.1),
                     Shape::ball(detail::v2(-0.6, 0.5), 0.3)});
  c.fields = {FieldSpec{"u", 1, false}};
  c.entries = {Entry::value(0), Entry::lap(0, {0, 1})};
  c.residual = ResidualSet::make([=](const auto* x, const auto* e, auto* out) {
    using std::sin;
    auto f = A * (mu1 * mu1 + mu2 * mu2 + x[0] * x[0] + x[1] * x[1]) * sin(mu1 * M_PI * x[0]) *
             sin(mu2 * M_PI * x[1]);
    out[0] = -e[1] + k * k * e[0] - f;
  });
  c.bcs = {
      {"x0-", 0, BCKind::Dirichlet, [](const Vec&) { return 0.2; }, 0},
      {"x0+", 0, BCKind::Dirichlet, [](const Vec&) { return 0.2; }, 0},
      {"x1-", 0, BCKind::Dirichlet, [](const Vec&) { return 0.2; }, 0},
      {"x1+", 0, BCKind::Dirichlet, [](const Vec&) { return 0.2; }, 0},
  };
  for (int h = 0; h < 4; ++h)
    c.bcs.push_back(
        {"hole" + std::to_string(h), 0, BCKind::Dirichlet, [](const Vec&) { return 1.0; }, 0});
  c.make_reference = detail::reference_chain();
  return c;
}

inline Case make_poisson3d_cg(const Params& p) {
  detail::reject_unknown(p, {"m1", "m2", "m3", "mu1", "mu2", "k1", "k2", "A1", "A2"},
                         "poisson3d-cg");
  const double m1 = detail::param(p, "m1", 1.0), m2 = detail::param(p, "m2", 10.0),
               m3 = detail::param(p, "m3", 5.0);
  const double mu1 = detail::param(p, "mu1", 1.0), mu2 = detail::param(p, "mu2", 1.0);
  const double k1 = detail::param(p, "k1", 8.0), k2 = detail::param(p, "k2", 10.0);
  const double A1 = detail::param(p, "A1", 20.0), A2 = detail::param(p, "A2", 100.0);

  Case c;
  c.name = "poisson3d-cg";
  c.description = "two-medium Helmholtz in a unit cube minus four balls, split at z=0.5";
  c.tags = {"complex geometry", "3d"};
  c.geom = Geometry(Shape::box(Vec::Constant(3, 0.0), Vec::Constant(3, 1.0)),
                    {Shape::ball(detail::v3(0.4, 0.3, 0.6), 0.2),
                     Shape::ball(detail::v3(0.6, 0.7, 0.6), 0.2),
                     Shape::ball(detail::v3(0.2, 0.8, 0.7), 0.1),
                     Shape::ball(detail::v3(0.6, 0.2, 0.3), 0.1)});
  c.fields = {FieldSpec{"u", 1, false}};
  c.entries = {Entry::value(0), Entry::lap(0, {0, 1, 2})};
  c.residual = ResidualSet::make([=](const auto* x, const auto* e, auto* out) {
    using std::exp;
    using std::sin;
    const bool lower = scalar_of(x[2]) < 0.5;  // medium switch
    const double mu = lower ? mu1 : mu2;
    const double kk = lower ? k1 : k2;
    auto r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    auto f = A1 * exp(sin(m1 * M_PI * x[0]) + sin(m2 * M_PI * x[1]) + sin(m3 * M_PI * x[2])) /
                 (r2 + 1.0) * (r2 - 1.0) +
             A2 * sin(m1 * M_PI * x[0]) * sin(m2 * M_PI * x[1]) * sin(m3 * M_PI * x[2]);
    out[0] = -mu * e[1] + kk * kk * e[0] - f;
  });
  c.residual_reusable_tape = false;  // coefficient branch on z
  c.bcs = {{"*", 0, BCKind::Neumann, nullptr, 0}};
  c.make_reference = detail::reference_chain();
  return c;
}

inline Case make_poisson2d_ms(const Params& p) {
  detail::reject_unknown(p, {"field_seed", "cells"}, "poisson2d-ms");
  const auto field_seed = std::uint64_t(detail::param(p, "field_seed", 0.0));
  const int cells = int(std::lround(detail::param(p, "cells", 20.0)));

  Case c;
  c.name = "poisson2d-ms";
  c.description = "diffusion with a piecewise-bilinear lattice coefficient, Robin walls";
  c.tags = {"multi-scale"};
  c.geom = Geometry(Shape::box(Vec::Constant(2, -10.0), Vec::Constant(2, 10.0)));
  c.fields = {FieldSpec{"u", 1, false}};
  c.entries = {Entry::d1(0, 0), Entry::d1(0, 1), Entry::lap(0, {0, 1})};

  detail::CoefField a;
  std::string note;
  if (auto path = data_file(c.name + "_coef")) {
    a.bil = std::make_shared<BilinearField>(load_coefficient_grid(*path));
    note = "coefficients from " + *path;
  } else {
    a.bil = std::make_shared<BilinearField>(
        BilinearField::from_grf(Vec::Constant(2, -10.0), Vec::Constant(2, 10.0), cells + 1,
                                cells + 1, mix_seed(field_seed, 0xF1E1D), 0.2, true));
    note = "fallback lattice coefficients (GRF nodes); not paper-comparable";
  }
  c.description += "; " + note;
  // the source term is unstated; f = 1 drives a nontrivial solution
  c.residual = ResidualSet::make([a](const auto* x, const auto* e, auto* out) {
    using T = std::decay_t<decltype(x[0])>;
    T av;
    T ag[2];
    a.jet(x, av, ag);
    out[0] = -(ag[0] * e[0] + ag[1] * e[1]) - av * e[2] - 1.0;
  });
  c.residual_reusable_tape = false;  // lattice cell lookup branches on x
  c.bcs = {{"*", 0, BCKind::Robin, nullptr, 1.0}};
  c.make_reference = detail::reference_chain();
  return c;
}

// ------------------------------------------------------------------- heat

inline Case make_heat2d_vc(const Params& p) {
  detail::reject_unknown(p, {"A", "m1", "m2", "m3", "field_seed"}, "heat2d-vc");
  const double A = detail::param(p, "A", 200.0);
  const double m1 = detail::param(p, "m1", 1.0), m2 = detail::param(p, "m2", 5.0),
               m3 = detail::param(p, "m3", 1.0);
  const auto field_seed = std::uint64_t(detail::param(p, "field_seed", 0.0));

  Case c;
  c.name = "heat2d-vc";
  c.description = "heat with a lognormal varying conductivity and a periodic-in-time source";
  c.tags = {"multi-scale", "heterogeneous"};
  c.geom = Geometry(Shape::box(Vec::Constant(2, 0.0), Vec::Constant(2, 1.0)));
  c.time_end = 5.0;
  c.fields = {FieldSpec{"u", 1, false}};
  c.entries = {Entry::d1(0, 0), Entry::d1(0, 1), Entry::d1(0, 2), Entry::lap(0, {0, 1})};

  std::string note;
  detail::CoefField a = detail::coefficient_field(c.name, field_seed, true, &note);
  c.description += "; " + note;
  c.residual = ResidualSet::make([=](const auto* x, const auto* e, auto* out) {
    using std::sin;
    using T = std::decay_t<decltype(x[0])>;
    T av;
    T ag[2];
    a.jet(x, av, ag);
    auto f = A * sin(m1 * M_PI * x[0]) * sin(m2 * M_PI * x[1]) * sin(m3 * M_PI * x[2]);
    out[0] = e[2] - (ag[0] * e[0] + ag[1] * e[1]) - av * e[3] - f;
  });
  c.residual_reusable_tape = a.smooth();
  c.bcs = {
      {"*", 0, BCKind::Dirichlet, nullptr, 0},
      {"initial", 0, BCKind::Dirichlet, nullptr, 0},
  };
  c.make_reference = detail::reference_chain();
  return c;
}

inline Case make_heat2d_ms(const Params& p) {
  detail::reject_unknown(p, {"a", "b"}, "heat2d-ms");
  const double a = detail::param(p, "a", 20.0);
  const double b = detail::param(p, "b", 1.0);
  const double lam = a * a / (500.0 * 500.0) + b * b;

  Case c;
  c.name = "heat2d-ms";
  c.description = "strongly anisotropic heat; separable decay solution, analytic 100x100x20 grid";
  c.tags = {"multi-scale"};
  c.geom = Geometry(Shape::box(Vec::Constant(2, 0.0), Vec::Constant(2, 1.0)));
  c.time_end = 5.0;
  c.fields = {FieldSpec{"u", 1, false}};
  c.entries = {Entry::d1(0, 2), Entry::d2(0, 0), Entry::d2(0, 1)};
  const double cx = 1.0 / (500.0 * M_PI) / (500.0 * M_PI);
  const double cy = 1.0 / (M_PI * M_PI);
  c.residual = ResidualSet::make([cx, cy](const auto* /*x*/, const auto* e, auto* out) {
    out[0] = e[0] - cx * e[1] - cy * e[2];
  });
  c.bcs = {
      {"*", 0, BCKind::Dirichlet, nullptr, 0},
      {"initial", 0, BCKind::Dirichlet,
       [a, b](const Vec& q) { return std::sin(a * M_PI * q[0]) * std::sin(b * M_PI * q[1]); }, 0},
  };
  c.analytic = {ScalarField::make([a, b, lam](const auto& x) {
    using std::exp;
    using std::sin;
    return sin(a * M_PI * x[0]) * sin(b * M_PI * x[1]) * exp(-lam * x[2]);
  })};
  c.make_reference = detail::reference_chain();
  return c;
}

inline Case make_heat2d_cg(const Params& p) {
  detail::reject_unknown(p, {"c", "q", "g_rect", "g_large", "g_small"}, "heat2d-cg");
  const double cc = detail::param(p, "c", 1.0);
  const double q = detail::param(p, "q", 1.0);
  const double g_rect = detail::param(p, "g_rect", 0.1);
  const double g_large = detail::param(p, "g_large", 5.0);
  const double g_small = detail::param(p, "g_small", 1.0);

  Case c;
  c.name = "heat2d-cg";
  c.description = "heat exchanger: rectangle minus 17 circles, Robin data per circle family";
  c.tags = {"complex geometry"};
  std::vector<Shape> holes;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) holes.push_back(Shape::ball(detail::v2(4 * sx, 3 * sy), 1.0));
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) holes.push_back(Shape::ball(detail::v2(4 * sx, 9 * sy), 1.0));
  holes.push_back(Shape::ball(detail::v2(0, 0), 1.0));
  holes.push_back(Shape::ball(detail::v2(0, 6), 1.0));
  holes.push_back(Shape::ball(detail::v2(0, -6), 1.0));
  const int n_large = int(holes.size());
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) holes.push_back(Shape::ball(detail::v2(3.2 * sx, 6 * sy), 0.4));
  holes.push_back(Shape::ball(detail::v2(3.2, 0), 0.4));
  holes.push_back(Shape::ball(detail::v2(-3.2, 0), 0.4));
  const int n_total = int(holes.size());
  c.geom = Geometry(Shape::box(detail::v2(-8, -12), detail::v2(8, 12)), holes);
  c.time_end = 3.0;
  c.fields = {FieldSpec{"u", 1, false}};
  c.entries = {Entry::d1(0, 2), Entry::lap(0, {0, 1})};
  c.residual = ResidualSet::make(
      [](const auto* /*x*/, const auto* e, auto* out) { out[0] = e[0] - e[1]; });

  // -n.(-c grad u) = g - q u  =>  du/dn + (q/c) u = g/c
  auto robin = [&](const std::string& comp, double g) {
    c.bcs.push_back({comp, 0, BCKind::Robin, [g, cc](const Vec&) { return g / cc; }, q / cc});
  };
  for (const char* f : {"x0-", "x0+", "x1-", "x1+"}) robin(f, g_rect);
  for (int h = 0; h < n_large; ++h) robin("hole" + std::to_string(h), g_large);
  for (int h = n_large; h < n_total; ++h) robin("hole" + std::to_string(h), g_small);
  // starting temperature is unstated; a cold start pairs with the heating rims
  c.bcs.push_back({"initial", 0, BCKind::Dirichlet, nullptr, 0});
  c.make_reference = detail::reference_chain();
  return c;
}

inline Case make_heat2d_lt(const Params& p) {
  detail::reject_unknown(p, {"m1", "m2", "k"}, "heat2d-lt");
  const double m1 = detail::param(p, "m1", 4.0);
  const double m2 = detail::param(p, "m2", 2.0);
  const double k = detail::param(p, "k", 1.0);

  Case c;
  c.name = "heat2d-lt";
  c.description = "heat with a solution-dependent oscillatory source over t in [0,100]";
  c.tags = {"long time", "nonlinearity"};
  c.geom = Geometry(Shape::box(Vec::Constant(2, 0.0), Vec::Constant(2, 1.0)));
  c.time_end = 100.0;
  c.fields = {FieldSpec{"u", 1, false}};
  c.entries = {Entry::value(0), Entry::d1(0, 2), Entry::lap(0, {0, 1})};
  c.residual = ResidualSet::make([=](const auto* x, const auto* e, auto* out) {
    using std::sin;
    auto f = 5.0 * sin(k * e[0] * e[0]) * (1.0 + 2.0 * sin(M_PI * x[2] / 4.0)) *
             sin(m1 * M_PI * x[0]) * sin(m2 * M_PI * x[1]);
    out[0] = e[1] - 0.001 * e[2] - f;
  });
  c.bcs = {
      {"*", 0, BCKind::Dirichlet, nullptr, 0},
      {"initial", 0, BCKind::Dirichlet,
       [](const Vec& q) { return std::sin(4 * M_PI * q[0]) * std::sin(3 * M_PI * q[1]); }, 0},
  };
  c.make_reference = detail::reference_chain();
  return c;
}

// --------------------------------------------------------- navier-stokes

namespace detail {

// steady incompressible momentum + continuity; time derivative entries are
// appended by the unsteady case
inline void ns_common(Case& c, double Re) {
  c.fields = {FieldSpec{"u", 3, false}};  // u, v, p
  c.entries = {Entry::value(0),   Entry::value(1),   Entry::d1(0, 0), Entry::d1(0, 1),
               Entry::d1(1, 0),   Entry::d1(1, 1),   Entry::d1(2, 0), Entry::d1(2, 1),
               Entry::lap(0, {0, 1}), Entry::lap(1, {0, 1})};
  c.n_equations = 3;
  c.residual = ResidualSet::make([Re](const auto* /*x*/, const auto* e, auto* out) {
    out[0] = e[0] * e[2] + e[1] * e[3] + e[6] - (1.0 / Re) * e[8];
    out[1] = e[0] * e[4] + e[1] * e[5] + e[7] - (1.0 / Re) * e[9];
    out[2] = e[2] + e[5];
  });
}

}  // namespace detail

inline Case make_ns2d_c(const Params& p) {
  detail::reject_unknown(p, {"a", "Re"}, "ns2d-c");
  const double a = detail::param(p, "a", 4.0);
  const double Re = detail::param(p, "Re", 100.0);

  Case c;
  c.name = "ns2d-c";
  c.description = "lid-driven cavity, pressure pinned at the origin";
  c.tags = {"nonlinearity"};
  c.geom = Geometry(Shape::box(Vec::Constant(2, 0.0), Vec::Constant(2, 1.0)));
  detail::ns_common(c, Re);
  c.bcs = {
      {"x1+", 0, BCKind::Dirichlet, [a](const Vec& q) { return a * q[0] * (1.0 - q[0]); }, 0},
      {"x1+", 1, BCKind::Dirichlet, nullptr, 0},
  };
  for (const char* f : {"x0-", "x0+", "x1-"}) {
    c.bcs.push_back({f, 0, BCKind::Dirichlet, nullptr, 0});
    c.bcs.push_back({f, 1, BCKind::Dirichlet, nullptr, 0});
  }
  c.anchors = {Anchor{Vec::Zero(2), 2, 0.0}};
  c.make_reference = detail::reference_chain();
  return c;
}

inline Case make_ns2d_cg(const Params& p) {
  detail::reject_unknown(p, {"Re"}, "ns2d-cg");
  const double Re = detail::param(p, "Re", 100.0);

  Case c;
  c.name = "ns2d-cg";
  c.description = "backward step flow (geometry approximate: the paper's extra "
                  "removed regions are undefined)";
  c.tags = {"complex geometry"};
  c.geom = Geometry(Shape::box(detail::v2(0, 0), detail::v2(4, 2)),
                    {Shape::box(detail::v2(0, 1), detail::v2(2, 2))});
  detail::ns_common(c, Re);
  c.bcs = {
      {"x0-", 0, BCKind::Dirichlet, [](const Vec& q) { return 4.0 * q[1] * (1.0 - q[1]); }, 0},
      {"x0-", 1, BCKind::Dirichlet, nullptr, 0},
      {"x0+", 2, BCKind::Dirichlet, nullptr, 0},  // outlet pressure
  };
  for (const char* f : {"x1-", "x1+", "hole0:x0+", "hole0:x1-"}) {
    c.bcs.push_back({f, 0, BCKind::Dirichlet, nullptr, 0});
    c.bcs.push_back({f, 1, BCKind::Dirichlet, nullptr, 0});
  }
  c.make_reference = detail::reference_chain();
  return c;
}

inline Case make_ns2d_lt(const Params& p) {
  detail::reject_unknown(p, {"Re", "A1", "A2", "A3"}, "ns2d-lt");
  const double Re = detail::param(p, "Re", 100.0);
  const double A1 = detail::param(p, "A1", 1.0), A2 = detail::param(p, "A2", 1.0),
               A3 = detail::param(p, "A3", 1.0);

  Case c;
  c.name = "ns2d-lt";
  c.description = "pulsed channel flow with an oscillating inlet over t in [0,5]";
  c.tags = {"long time", "nonlinearity"};
  c.geom = Geometry(Shape::box(detail::v2(0, 0), detail::v2(2, 1)));
  c.time_end = 5.0;
  detail::ns_common(c, Re);
  c.entries.push_back(Entry::d1(0, 2));  // u_t -> e[10]
  c.entries.push_back(Entry::d1(1, 2));  // v_t -> e[11]
  c.residual = ResidualSet::make([Re](const auto* x, const auto* e, auto* out) {
    using std::sin;
    out[0] = e[10] + e[0] * e[2] + e[1] * e[3] + e[6] - (1.0 / Re) * e[8];
    out[1] = e[11] + e[0] * e[4] + e[1] * e[5] + e[7] - (1.0 / Re) * e[9] +
             sin(M_PI * x[0]) * sin(M_PI * x[1]) * sin(M_PI * x[2]);
    out[2] = e[2] + e[5];
  });
  c.bcs = {
      {"x0-", 0, BCKind::Dirichlet,
       [=](const Vec& q) {
         const double t = q[2];
         return std::sin(M_PI * q[1]) * (A1 * std::sin(M_PI * t) + A2 * std::sin(3 * M_PI * t) +
                                         A3 * std::sin(5 * M_PI * t));
       },
       0},
      {"x0-", 1, BCKind::Dirichlet, nullptr, 0},
      {"x0+", 2, BCKind::Dirichlet, nullptr, 0},
      {"initial", 0, BCKind::Dirichlet, nullptr, 0},
      {"initial", 1, BCKind::Dirichlet, nullptr, 0},
  };
  for (const char* f : {"x1-", "x1+"}) {
    c.bcs.push_back({f, 0, BCKind::Dirichlet, nullptr, 0});
    c.bcs.push_back({f, 1, BCKind::Dirichlet, nullptr, 0});
  }
  c.make_reference = detail::reference_chain();
  return c;
}

// ------------------------------------------------------------------- wave

inline Case make_wave1d_c(const Params& p) {
  detail::reject_unknown(p, {"a"}, "wave1d-c");
  const double a = detail::param(p, "a", 4.0);

  Case c;
  c.name = "wave1d-c";
  c.description = "two-mode string vibration; analytic reference on a 100x20 grid";
  c.tags = {"multi-scale"};
  c.geom = Geometry(Shape::box(Vec::Constant(1, 0.0), Vec::Constant(1, 1.0)));
  c.time_end = 1.0;
  c.fields = {FieldSpec{"u", 1, false}};
  c.entries = {Entry::d2(0, 1), Entry::d2(0, 0)};  // u_tt, u_xx
  c.residual = ResidualSet::make(
      [](const auto* /*x*/, const auto* e, auto* out) { out[0] = e[0] - 4.0 * e[1]; });
  c.bcs = {
      {"x0-", 0, BCKind::Dirichlet, nullptr, 0},
      {"x0+", 0, BCKind::Dirichlet, nullptr, 0},
      {"initial", 0, BCKind::Dirichlet,
       [a](const Vec& q) {
         return std::sin(M_PI * q[0]) + 0.5 * std::sin(a * M_PI * q[0]);
       },
       0},
      {"initial", 0, BCKind::TimeDeriv, nullptr, 0},
  };
  c.analytic = {ScalarField::make([a](const auto& x) {
    using std::cos;
    using std::sin;
    return sin(M_PI * x[0]) * cos(2 * M_PI * x[1]) +
           0.5 * sin(a * M_PI * x[0]) * cos(2 * a * M_PI * x[1]);
  })};
  c.make_reference = detail::reference_chain();
  return c;
}

inline Case make_wave2d_cg(const Params& p) {
  detail::reject_unknown(p, {"mu1", "mu2", "sigma", "field_seed", "T"}, "wave2d-cg");
  const double mu1 = detail::param(p, "mu1", -0.5);
  const double mu2 = detail::param(p, "mu2", 0.0);
  const double sigma = detail::param(p, "sigma", 0.3);
  const auto field_seed = std::uint64_t(detail::param(p, "field_seed", 0.0));
  const double T = detail::param(p, "T", 5.0);  // horizon read off the reference plots

  Case c;
  c.name = "wave2d-cg";
  c.description = "wave through a random positive speed field, Gaussian pulse start";
  c.tags = {"heterogeneous"};
  c.geom = Geometry(Shape::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)));
  c.time_end = T;
  c.fields = {FieldSpec{"u", 1, false}};
  c.entries = {Entry::lap(0, {0, 1}), Entry::d2(0, 2)};

  std::string note;
  detail::CoefField cf = detail::coefficient_field(c.name, field_seed, true, &note);
  c.description += "; " + note;
  c.residual = ResidualSet::make([cf](const auto* x, const auto* e, auto* out) {
    using T2 = std::decay_t<decltype(x[0])>;
    T2 cval;
    T2 cg[2];
    cf.jet(x, cval, cg);
    out[0] = e[0] - e[1] / cval;
  });
  c.residual_reusable_tape = cf.smooth();
  c.bcs = {
      {"*", 0, BCKind::Neumann, nullptr, 0},
      {"initial", 0, BCKind::Dirichlet,
       [=](const Vec& q) {
         const double dx = q[0] - mu1, dy = q[1] - mu2;
         return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
       },
       0},
      {"initial", 0, BCKind::TimeDeriv, nullptr, 0},
  };
  c.make_reference = detail::reference_chain();
  return c;
}

inline Case make_wave2d_ms(const Params& p) {
  detail::reject_unknown(p, {"a", "m1", "n1", "p1", "m2", "n2", "p2", "c1", "c2"}, "wave2d-ms");
  const double a = detail::param(p, "a", std::sqrt(2.0));
  const double m1 = detail::param(p, "m1", 1.0), n1 = detail::param(p, "n1", 1.0),
               p1 = detail::param(p, "p1", 1.0);
  const double m2 = detail::param(p, "m2", 3.0), n2 = detail::param(p, "n2", 2.0),
               p2 = detail::param(p, "p2", 1.0);
  const double c1 = detail::param(p, "c1", 1.0), c2 = detail::param(p, "c2", 1.0);

  Case c;
  c.name = "wave2d-ms";
  c.description = "anisotropic wave over t in [0,100]; exact sinh/sin modes, analytic grid "
                  "(the printed solution has the sinh factors on the wrong axes; this form "
                  "actually satisfies the PDE)";
  c.tags = {"multi-scale", "long time"};
  c.geom = Geometry(Shape::box(Vec::Constant(2, 0.0), Vec::Constant(2, 1.0)));
  c.time_end = 100.0;
  c.fields = {FieldSpec{"u", 1, false}};
  c.entries = {Entry::d2(0, 2), Entry::d2(0, 0), Entry::d2(0, 1)};
  c.residual = ResidualSet::make([a](const auto* /*x*/, const auto* e, auto* out) {
    out[0] = e[0] - e[1] - a * a * e[2];
  });
  auto exact = [=](const auto& x) {
    using std::cos;
    using std::sin;
    using std::sinh;
    return c1 * sinh(m1 * M_PI * x[0]) * sin(n1 * M_PI * x[1]) * cos(p1 * M_PI * x[2]) +
           c2 * sin(m2 * M_PI * x[0]) * sinh(n2 * M_PI * x[1]) * cos(p2 * M_PI * x[2]);
  };
  auto exact_d = [=](const Vec& q) {
    std::vector<double> x = {q[0], q[1], q[2]};
    return exact(x);
  };
  c.bcs = {
      {"x0-", 0, BCKind::Dirichlet, exact_d, 0},
      {"x0+", 0, BCKind::Dirichlet, exact_d, 0},
      {"x1-", 0, BCKind::Dirichlet, exact_d, 0},
      {"x1+", 0, BCKind::Dirichlet, exact_d, 0},
      {"initial", 0, BCKind::Dirichlet, exact_d, 0},
      {"initial", 0, BCKind::TimeDeriv, nullptr, 0},
  };
  c.analytic = {ScalarField::make(exact)};
  c.make_reference = detail::reference_chain();
  return c;
}

// -------------------------------------------------------- reaction systems

inline Case make_gs(const Params& p) {
  detail::reject_unknown(p, {"b", "d", "eps1", "eps2"}, "gs");
  const double b = detail::param(p, "b", 0.04);
  const double d = detail::param(p, "d", 0.1);
  const double eps1 = detail::param(p, "eps1", 1e-5);
  const double eps2 = detail::param(p, "eps2", 5e-6);

  Case c;
  c.name = "gs";
  c.description = "Gray-Scott reaction-diffusion over t in [0,200] (chaotic; file reference)";
  c.tags = {"long time", "nonlinearity"};
  c.geom = Geometry(Shape::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)));
  c.time_end = 200.0;
  c.periodic_axes = {0, 1};
  c.periodic_match_d1 = true;  // unstated sides; matched value+slope keeps the stencil smooth
  c.fields = {FieldSpec{"u", 2, false}};
  c.entries = {Entry::value(0), Entry::value(1), Entry::d1(0, 2),
               Entry::d1(1, 2), Entry::lap(0, {0, 1}), Entry::lap(1, {0, 1})};
  c.n_equations = 2;
  c.residual = ResidualSet::make([=](const auto* /*x*/, const auto* e, auto* out) {
    out[0] = e[2] - eps1 * e[4] - b * (1.0 - e[0]) + e[0] * e[1] * e[1];
    out[1] = e[3] - eps2 * e[5] + d * e[1] - e[0] * e[1] * e[1];
  });
  c.bcs = {
      {"initial", 0, BCKind::Dirichlet,
       [](const Vec& q) {
         return 1.0 - std::exp(-80.0 * ((q[0] + 0.05) * (q[0] + 0.05) +
                                        (q[1] + 0.02) * (q[1] + 0.02)));
       },
       0},
      {"initial", 1, BCKind::Dirichlet,
       [](const Vec& q) {
         return std::exp(-80.0 * ((q[0] - 0.05) * (q[0] - 0.05) +
                                  (q[1] - 0.02) * (q[1] - 0.02)));
       },
       0},
  };
  c.make_reference = detail::reference_chain();
  return c;
}

inline Case make_ks(const Params& p) {
  detail::reject_unknown(p, {"alpha", "beta", "gamma"}, "ks");
  const double alpha = detail::param(p, "alpha", 100.0 / 16.0);
  const double beta = detail::param(p, "beta", 100.0 / 256.0);
  const double gamma = detail::param(p, "gamma", 100.0 / 65536.0);

  Case c;
  c.name = "ks";
  c.description = "Kuramoto-Sivashinsky, fourth-order chaotic flame front (file reference)";
  c.tags = {"nonlinearity", "long time"};
  c.geom = Geometry(Shape::box(Vec::Constant(1, 0.0), Vec::Constant(1, 2.0 * M_PI)));
  c.time_end = 1.0;
  c.periodic_axes = {0};
  c.periodic_match_d1 = true;
  c.fields = {FieldSpec{"u", 1, false}};
  c.entries = {Entry::value(0), Entry::d1(0, 0), Entry::d1(0, 1), Entry::d2(0, 0),
               Entry::d4(0, 0)};
  c.residual = ResidualSet::make([=](const auto* /*x*/, const auto* e, auto* out) {
    out[0] = e[2] + alpha * e[0] * e[1] + beta * e[3] + gamma * e[4];
  });
  c.bcs = {
      {"initial", 0, BCKind::Dirichlet,
       [](const Vec& q) { return std::cos(q[0]) * (1.0 + std::sin(q[0])); }, 0},
  };
  c.make_reference = detail::reference_chain();
  return c;
}

// ------------------------------------------------------- high dimensional

inline Case make_pnd(const Params& p) {
  detail::reject_unknown(p, {"n"}, "pnd");
  const int n = int(std::lround(detail::param(p, "n", 5.0)));
  if (n < 1 || n > 10) throw ConfigError("pnd: dimension n must be in [1,10]");

  Case c;
  c.name = "pnd";
  c.description = "n-D Poisson with a separable sine solution; analytic grid, 8 points per axis";
  c.tags = {"high dimension"};
  c.geom = Geometry(Shape::box(Vec::Constant(n, 0.0), Vec::Constant(n, 1.0)));
  c.fields = {FieldSpec{"u", 1, false}};
  std::vector<int> axes(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) axes[std::size_t(i)] = i;
  c.entries = {Entry::lap(0, axes)};
  c.residual = ResidualSet::make([n](const auto* x, const auto* e, auto* out) {
    using std::sin;
    auto f = x[0] * 0.0;
    for (int i = 0; i < n; ++i) f = f + sin(0.5 * M_PI * x[i]);
    out[0] = -e[0] - (M_PI * M_PI / 4.0) * f;
  });
  auto exact_d = [n](const Vec& q) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += std::sin(0.5 * M_PI * q[i]);
    return s;
  };
  c.bcs = {{"*", 0, BCKind::Dirichlet, exact_d, 0}};
  c.analytic = {ScalarField::make([n](const auto& x) {
    using std::sin;
    auto s = x[0] * 0.0;
    for (int i = 0; i < n; ++i) s = s + sin(0.5 * M_PI * x[i]);
    return s;
  })};
  c.make_reference = detail::reference_chain();
  return c;
}

inline Case make_hnd(const Params& p) {
  detail::reject_unknown(p, {"d"}, "hnd");
  const int d = int(std::lround(detail::param(p, "d", 5.0)));
  if (d < 2 || d > 10) throw ConfigError("hnd: dimension d must be in [2,10]");
  const double k = 1.0 / d;

  Case c;
  c.name = "hnd";
  c.description = "heat in a d-ball with an exponential exact solution; analytic grid, 8 per axis";
  c.tags = {"high dimension"};
  c.geom = Geometry(Shape::ball(Vec::Zero(d), 1.0));
  c.time_end = 1.0;
  c.fields = {FieldSpec{"u", 1, false}};
  std::vector<int> axes(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) axes[std::size_t(i)] = i;
  c.entries = {Entry::d1(0, d), Entry::lap(0, axes)};
  c.residual = ResidualSet::make([d, k](const auto* x, const auto* e, auto* out) {
    using std::exp;
    auto r2 = x[0] * x[0];
    for (int i = 1; i < d; ++i) r2 = r2 + x[i] * x[i];
    auto g = exp(0.5 * r2 + x[d]);
    out[0] = e[0] - k * e[1] + (1.0 / d) * r2 * g;  // f = -(1/d)|x|^2 g
  });
  auto g_d = [d](const Vec& q) {
    double r2 = 0;
    for (int i = 0; i < d; ++i) r2 += q[i] * q[i];
    return std::exp(0.5 * r2 + q[d]);
  };
  c.bcs = {
      {"sphere", 0, BCKind::Neumann, g_d, 0},  // n . grad u = |x| g = g on the rim
      {"initial", 0, BCKind::Dirichlet,
       [d](const Vec& q) {
         double r2 = 0;
         for (int i = 0; i < d; ++i) r2 += q[i] * q[i];
         return std::exp(0.5 * r2);
       },
       0},
  };
  c.analytic = {ScalarField::make([d](const auto& x) {
    using std::exp;
    auto r2 = x[0] * x[0];
    for (int i = 1; i < d; ++i) r2 = r2 + x[i] * x[i];
    return exp(0.5 * r2 + x[d]);
  })};
  c.make_reference = detail::reference_chain();
  return c;
}

// ---------------------------------------------------------------- inverse

inline Case make_pinv(const Params& p) {
  detail::reject_unknown(p, {"noise"}, "pinv");
  const double noise = detail::param(p, "noise", 0.1);

  Case c;
  c.name = "pinv";
  c.description = "recover a diffusion coefficient from 2500 noisy grid samples of u";
  c.tags = {"inverse"};
  c.geom = Geometry(Shape::box(Vec::Constant(2, 0.0), Vec::Constant(2, 1.0)));
  c.fields = {FieldSpec{"u", 1, false}, FieldSpec{"a", 1, false}};
  c.entries = {Entry::d1(0, 0), Entry::d1(0, 1), Entry::lap(0, {0, 1}),
               Entry::value(1), Entry::d1(1, 0), Entry::d1(1, 1)};
  c.residual = ResidualSet::make([](const auto* x, const auto* e, auto* out) {
    using std::cos;
    using std::sin;
    auto D = 1.0 + x[0] * x[0] + x[1] * x[1] + (x[0] - 1.0) * (x[0] - 1.0) +
             (x[1] - 1.0) * (x[1] - 1.0);
    auto f = 2.0 * M_PI * M_PI * sin(M_PI * x[0]) * sin(M_PI * x[1]) / D +
             2.0 * M_PI *
                 ((2.0 * x[0] - 1.0) * cos(M_PI * x[0]) * sin(M_PI * x[1]) +
                  (2.0 * x[1] - 1.0) * sin(M_PI * x[0]) * cos(M_PI * x[1])) /
                 (D * D);
    out[0] = -(e[4] * e[0] + e[5] * e[1]) - e[3] * e[2] - f;
  });
  auto a_d = [](const Vec& q) {
    return 1.0 / (1.0 + q[0] * q[0] + q[1] * q[1] + (q[0] - 1.0) * (q[0] - 1.0) +
                  (q[1] - 1.0) * (q[1] - 1.0));
  };
  // the paper pins a on the boundary; u data there is what makes it unique
  c.bcs = {
      {"*", 0, BCKind::Dirichlet, nullptr, 0},
      {"*", 1, BCKind::Dirichlet, a_d, 0},
  };
  c.analytic = {ScalarField::make([](const auto& x) {
                  using std::sin;
                  return sin(M_PI * x[0]) * sin(M_PI * x[1]);
                }),
                ScalarField::make([](const auto& x) {
                  return 1.0 / (1.0 + x[0] * x[0] + x[1] * x[1] + (x[0] - 1.0) * (x[0] - 1.0) +
                                (x[1] - 1.0) * (x[1] - 1.0));
                })};
  c.observations.enabled = true;
  c.observations.unknown = 0;
  c.observations.layout = ObservationSpec::GridLayout;
  c.observations.grid_per_axis = 50;
  c.observations.noise_sigma = noise;
  c.metric_unknowns = {1};  // score the recovered coefficient
  c.make_reference = detail::reference_chain();
  return c;
}

inline Case make_hinv(const Params& p) {
  detail::reject_unknown(p, {"noise"}, "hinv");
  const double noise = detail::param(p, "noise", 0.1);

  Case c;
  c.name = "hinv";
  c.description = "recover a spatial conductivity from 2500 noisy space-time samples of u";
  c.tags = {"inverse"};
  c.geom = Geometry(Shape::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)));
  c.time_end = 1.0;
  c.fields = {FieldSpec{"u", 1, false}, FieldSpec{"a", 1, true}};
  c.entries = {Entry::d1(0, 2), Entry::d1(0, 0), Entry::d1(0, 1), Entry::lap(0, {0, 1}),
               Entry::value(1), Entry::d1(1, 0), Entry::d1(1, 1)};
  c.residual = ResidualSet::make([](const auto* x, const auto* e, auto* out) {
    using std::cos;
    using std::exp;
    using std::sin;
    auto sx = sin(M_PI * x[0]), sy = sin(M_PI * x[1]);
    auto cx = cos(M_PI * x[0]), cy = cos(M_PI * x[1]);
    auto f = ((4.0 * M_PI * M_PI - 1.0) * sx * sy +
              M_PI * M_PI * (2.0 * sx * sx * sy * sy - cx * cx * sy * sy - sx * sx * cy * cy)) *
             exp(-x[2]);
    out[0] = e[0] - (e[5] * e[1] + e[6] * e[2]) - e[4] * e[3] - f;
  });
  c.bcs = {
      {"*", 0, BCKind::Dirichlet, nullptr, 0},
      {"*", 1, BCKind::Dirichlet, [](const Vec&) { return 2.0; }, 0},
      {"initial", 0, BCKind::Dirichlet,
       [](const Vec& q) { return std::sin(M_PI * q[0]) * std::sin(M_PI * q[1]); }, 0},
  };
  c.analytic = {ScalarField::make([](const auto& x) {
                  using std::exp;
                  using std::sin;
                  return exp(-x[2]) * sin(M_PI * x[0]) * sin(M_PI * x[1]);
                }),
                ScalarField::make([](const auto& x) {
                  using std::sin;
                  return 2.0 + sin(M_PI * x[0]) * sin(M_PI * x[1]);
                })};
  c.observations.enabled = true;
  c.observations.unknown = 0;
  c.observations.layout = ObservationSpec::RandomLayout;
  c.observations.count = 2500;
  c.observations.noise_sigma = noise;
  c.metric_unknowns = {1};
  c.make_reference = detail::reference_chain();
  return c;
}

// ------------------------------------------------------------------- lookup

struct CaseInfo {
  std::string name;
  std::string description;
  std::vector<std::string> tags;
  Case (*build)(const Params&);
};

inline const std::vector<CaseInfo>& case_table() {
  static const std::vector<CaseInfo> table = [] {
    std::vector<CaseInfo> t;
    auto add = [&](Case (*b)(const Params&)) {
      Case c = b({});
      t.push_back({c.name, c.description, c.tags, b});
    };
    add(&make_burgers1d_c);
    add(&make_burgers2d_c);
    add(&make_poisson2d_c);
    add(&make_poisson2d_cg);
    add(&make_poisson3d_cg);
    add(&make_poisson2d_ms);
    add(&make_heat2d_vc);
    add(&make_heat2d_ms);
    add(&make_heat2d_cg);
    add(&make_heat2d_lt);
    add(&make_ns2d_c);
    add(&make_ns2d_cg);
    add(&make_ns2d_lt);
    add(&make_wave1d_c);
    add(&make_wave2d_cg);
    add(&make_wave2d_ms);
    add(&make_gs);
    add(&make_ks);
    add(&make_pnd);
    add(&make_hnd);
    add(&make_pinv);
    add(&make_hinv);
    return t;
  }();
  return table;
}

inline Case make_case(const std::string& name, const Params& params = {}) {
  for (const CaseInfo& info : case_table())
    if (info.name == name) return info.build(params);
  std::string known;
  for (const CaseInfo& info : case_table()) known += (known.empty() ? "" : ", ") + info.name;
  throw ConfigError("unknown case '" + name + "' (known: " + known + ")");
}

}  // namespace pinnbench::pde
