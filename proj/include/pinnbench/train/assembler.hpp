#pragma once

#include <algorithm>
#include <memory>

#include "pinnbench/net/kernel_iface.hpp"
#include "pinnbench/pde/registry.hpp"
#include "pinnbench/train/method.hpp"

namespace pinnbench::train {

struct Term {
  enum class Type { Pde, PdeGrad, Boundary, Anchor, Data };
  Type type = Type::Pde;
  int eq = -1;    // Pde / PdeGrad
  int axis = -1;  // PdeGrad
  int comp = -1;  // Boundary: index into the assembler's component table
  std::string name;
  double weight = 1.0;
  bool pde_group = false;  // MultiAdam puts Pde/PdeGrad terms in group one
};

// Turns a case plus a method into loss terms and their gradients. Owns the
// point sets, the per-field kernels and the per-point residual tape; the
// trainer drives it and owns optimizer state and the weight schedule.
//
// Protocol: forward(theta) refreshes every cache, then losses()/backward()/
// ntk_traces() refer to that theta until the next forward.
class Assembler {
 public:
  using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  struct Sizes {
    int n_interior = 8192;
    int n_boundary = 2048;
  };

  Assembler(pde::Case c, const Method& m, Sizes s, const net::NetworkSpec& proto,
            std::uint64_t seed)
      : case_(std::move(c)), method_(m), sizes_(s), seed_(seed) {
    build_fields(proto);
    build_plans();
    sample_points(0);
    build_observations();
    build_residual_tape();
    build_terms();
    build_cotangent_storage();
  }

  long n_params() const { return n_params_; }
  const pde::Case& problem() const { return case_; }
  const Method& method() const { return method_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::vector<Term>& terms() { return terms_; }
  const std::vector<double>& losses() const { return losses_; }
  const Mat& interior() const { return Xint_; }
  const pde::BoundaryBatch& boundary() const { return bnd_; }
  const Mat& observation_points() const { return Xobs_; }
  const Mat& observation_values() const { return Yobs_; }
  int n_fields() const { return int(f_.size()); }
  long field_offset(int f) const { return f_[std::size_t(f)].offset; }
  long field_count(int f) const { return f_[std::size_t(f)].count; }
  const net::Kernel& field_kernel(int f) const { return *f_[std::size_t(f)].kint; }

  Vec init_params() const {
    Vec theta(n_params_);
    for (int f = 0; f < n_fields(); ++f) {
      const FieldRt& fr = f_[std::size_t(f)];
      theta.segment(fr.offset, fr.count) =
          fr.kint->init(mix_seed(seed_, 10 + std::uint64_t(f))).flat;
    }
    return theta;
  }

  double weighted_total() const {
    double t = 0;
    for (std::size_t k = 0; k < terms_.size(); ++k) t += terms_[k].weight * losses_[k];
    return t;
  }

  // Runs every kernel and fills residual caches and per-term losses.
  // EvalError propagates on non-finite intermediates (divergence).
  void forward(const Vec& theta) {
    cur_theta_ = theta;
    const Index Ni = Xint_.rows();
    for (auto& fr : f_) {
      fr.kint->forward(theta.segment(fr.offset, fr.count), fr.xint);
      if (fr.kbnd) fr.kbnd->forward(theta.segment(fr.offset, fr.count), fr.xbnd);
      if (fr.kdata) fr.kdata->forward(theta.segment(fr.offset, fr.count), fr.xobs);
      if (fr.kanch) fr.kanch->forward(theta.segment(fr.offset, fr.count), fr.xanch);
    }

    // gather the residual inputs from kernel channels
    E_.resize(Ni, n_inputs_);
    for (int e = 0; e < n_inputs_; ++e) {
      const auto& slots = input_slots_[std::size_t(e)];
      E_.col(e) = f_[std::size_t(slots[0].field)].kint->output(slots[0].ch).col(slots[0].col);
      for (std::size_t s = 1; s < slots.size(); ++s)
        E_.col(e) += f_[std::size_t(slots[s].field)].kint->output(slots[s].ch).col(slots[s].col);
    }

    // per-point residuals and their partials w.r.t. the gathered inputs
    const int n_out = n_res_outputs();
    r_.resize(Ni, n_out);
    for (auto& m : drde_) m.resize(Ni, n_inputs_);
    const int D = case_.input_dim();
    if (case_.residual_reusable_tape) {
      for (Index i = 0; i < Ni; ++i) {
        for (int a = 0; a < D; ++a) bind_[std::size_t(a)] = Xint_(i, a);
        for (int e = 0; e < n_inputs_; ++e) bind_[std::size_t(D + e)] = E_(i, e);
        rtape_.evaluate(bind_);
        for (int o = 0; o < n_out; ++o) {
          tmp_out_[0] = rt_outs_[std::size_t(o)];
          r_(i, o) = tmp_out_[0].value();
          rtape_.reverse_seeded(tmp_out_, tmp_seed_, rt_wanted_,
                                drde_[std::size_t(o)].data() + std::size_t(i) * n_inputs_);
        }
      }
    } else {
      for (Index i = 0; i < Ni; ++i) point_tape_sweep(i);
    }

    compute_boundary_residuals();
    if (case_.observations.enabled) {
      const FieldRt& fr = f_[std::size_t(obs_field_)];
      dres_ = fr.kdata->output(obs_value_ch_).col(obs_col_) - Yobs_.col(0);
    }
    if (!anch_.empty()) {
      ares_.resize(Index(anch_.size()));
      for (std::size_t j = 0; j < anch_.size(); ++j) {
        const AnchorRt& a = anch_[j];
        const FieldRt& fr = f_[std::size_t(a.field)];
        ares_[Index(j)] = fr.kanch->output(fr.anch_value_ch)(a.row, a.col) - a.value;
      }
    }
    compute_losses();
  }

  // Gradient of sum_k coef[k] * L_k at the theta of the last forward.
  void backward(const std::vector<double>& coef, Vec& grad) {
    require(coef.size() == terms_.size(), "backward: coefficient count mismatch");
    grad.setZero();
    zero_cotangents();
    const Index Ni = Xint_.rows();

    for (std::size_t k = 0; k < terms_.size(); ++k) {
      if (coef[k] == 0.0) continue;
      const Term& t = terms_[k];
      switch (t.type) {
        case Term::Type::Pde:
        case Term::Type::PdeGrad: {
          const int o = output_index(t);
          scale_ = (2.0 * coef[k] / double(Ni)) * r_.col(o).array();
          scatter_interior(o, scale_);
          break;
        }
        case Term::Type::Boundary:
          scatter_boundary(t, 2.0 * coef[k]);
          break;
        case Term::Type::Anchor:
          for (std::size_t j = 0; j < anch_.size(); ++j) {
            const AnchorRt& a = anch_[j];
            const FieldRt& fr = f_[std::size_t(a.field)];
            cot_anch_[std::size_t(a.field)][std::size_t(fr.anch_value_ch)](a.row, a.col) +=
                (2.0 * coef[k] / double(anch_.size())) * ares_[Index(j)];
          }
          break;
        case Term::Type::Data: {
          auto& cm = cot_data_[std::size_t(obs_field_)];
          cm[std::size_t(obs_value_ch_)].col(obs_col_) +=
              (2.0 * coef[k] / double(dres_.size())) * dres_;
          break;
        }
      }
    }
    flush_backward(grad, false);
  }

  // NTK diagonal traces per term: sum over points of ||grad_theta r_i||^2,
  // with unscaled residual seeds. Needs a preceding forward().
  std::vector<double> ntk_traces() {
    std::vector<double> tr(terms_.size(), 0.0);
    Vec scratch(n_params_);
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      const Term& t = terms_[k];
      switch (t.type) {
        case Term::Type::Pde:
        case Term::Type::PdeGrad: {
          zero_cotangents();
          ones_.resize(Xint_.rows());
          ones_.setOnes();
          scatter_interior(output_index(t), ones_);
          tr[k] = flush_backward(scratch, true);
          break;
        }
        case Term::Type::Boundary: {
          // one pass per condition: each is its own residual family
          const CompRt& cr = comps_[std::size_t(t.comp)];
          const int families = int(cr.bcs.size()) + (cr.periodic ? 1 : 0);
          for (int b = 0; b < families; ++b) {
            zero_cotangents();
            seed_boundary_unscaled(t, b);
            tr[k] += flush_backward(scratch, true);
          }
          break;
        }
        case Term::Type::Anchor:
          // each pin is a one-row residual family
          for (std::size_t j = 0; j < anch_.size(); ++j) {
            zero_cotangents();
            const AnchorRt& a = anch_[j];
            const FieldRt& fr = f_[std::size_t(a.field)];
            cot_anch_[std::size_t(a.field)][std::size_t(fr.anch_value_ch)](a.row, a.col) = 1.0;
            tr[k] += flush_backward(scratch, true);
          }
          break;
        case Term::Type::Data: {
          zero_cotangents();
          cot_data_[std::size_t(obs_field_)][std::size_t(obs_value_ch_)].col(obs_col_).setOnes();
          tr[k] = flush_backward(scratch, true);
          break;
        }
      }
    }
    return tr;
  }

  // Residual-based adaptive refinement: score a fresh pool at theta, append
  // the worst pool points to the interior set.
  void rar_update(const Vec& theta, int round) {
    const int base = sizes_.n_interior;
    const int pool_n = int(method_.rar_pool_mult * base);
    const int add_n = std::max(1, int(method_.rar_top_frac * base));
    Mat pool = pde::sample_interior(case_.geom, case_.time_end, pool_n,
                                    mix_seed(seed_, 0xA5000 + std::uint64_t(round)));
    Vec score = score_points(theta, pool);
    std::vector<int> idx(static_cast<std::size_t>(pool_n));
    for (int i = 0; i < pool_n; ++i) idx[std::size_t(i)] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return score[a] > score[b]; });
    Mat grown(Xint_.rows() + add_n, Xint_.cols());
    grown.topRows(Xint_.rows()) = Xint_;
    for (int j = 0; j < add_n; ++j) grown.row(Xint_.rows() + j) = pool.row(idx[std::size_t(j)]);
    Xint_ = std::move(grown);
    refresh_interior_views();
    stale_forward_ = true;
  }

  // Sum of squared equation residuals at arbitrary interior-like points.
  // Reuses the interior kernels, so the forward caches go stale.
  Vec score_points(const Vec& theta, const Mat& pts) {
    Vec out(pts.rows());
    const int D = case_.input_dim();
    const int E = int(case_.entries.size());
    const long chunk = 16384;
    std::vector<double> coords(static_cast<std::size_t>(D));
    std::vector<double> entries(static_cast<std::size_t>(E));
    std::vector<double> res(static_cast<std::size_t>(n_eq()));
    for (long start = 0; start < pts.rows(); start += chunk) {
      const long n = std::min(chunk, pts.rows() - start);
      for (auto& fr : f_) {
        Mat bf = pts.middleRows(start, n).leftCols(fr.in_dim);
        fr.kint->forward(theta.segment(fr.offset, fr.count), bf);
      }
      for (long i = 0; i < n; ++i) {
        for (int a = 0; a < D; ++a) coords[std::size_t(a)] = pts(start + i, a);
        for (int e = 0; e < E; ++e) {
          double v = 0;
          for (const Slot& s : input_slots_[std::size_t(e)])
            v += f_[std::size_t(s.field)].kint->output(s.ch)(i, s.col);
          entries[std::size_t(e)] = v;
        }
        case_.residual.on_double(coords.data(), entries.data(), res.data());
        double acc = 0;
        for (double rv : res) acc += rv * rv;
        out[start + i] = acc;
      }
    }
    stale_forward_ = true;
    return out;
  }

  // Draws new interior and boundary points (resample mode); observations are
  // data and stay fixed.
  void resample(int round) {
    sample_points(round + 1);
    refresh_boundary_targets();
    stale_forward_ = true;
  }

  // True once after any operation that invalidated the forward caches.
  bool consume_stale_flag() {
    bool s = stale_forward_;
    stale_forward_ = false;
    return s;
  }

  int n_eq() const { return case_.n_equations; }
  int n_res_outputs() const { return n_eq() * (1 + (method_.gpinn ? case_.geom.dim() : 0)); }

 private:
  struct Slot {
    int field = 0, ch = 0, col = 0;
  };

  struct FieldRt {
    net::NetworkSpec spec;
    std::unique_ptr<net::Kernel> kint, kbnd, kdata, kanch;
    long offset = 0, count = 0;
    int in_dim = 0;
    Mat xint, xbnd, xobs, xanch;
    int bnd_value_ch = -1, bnd_dt_ch = -1;
    int anch_value_ch = -1;
    std::vector<int> bnd_d1_ch;  // per spatial axis, -1 if absent
  };

  struct AnchorRt {
    int field = 0, col = 0;
    long row = 0;  // row inside the field's xanch batch
    double value = 0;
  };

  struct BcRt {
    int bc_index;  // into case_.bcs
    int field, col;
    Vec target;  // g at the component rows
  };

  struct CompRt {
    int comp;  // index into bnd_.components
    long row0 = 0, nrows = 0;
    std::vector<BcRt> bcs;
    bool periodic = false;
  };

  int output_index(const Term& t) const {
    return t.type == Term::Type::Pde ? t.eq : n_eq() + t.axis * n_eq() + t.eq;
  }

  void build_fields(const net::NetworkSpec& proto) {
    for (const pde::FieldSpec& fs : case_.fields) {
      FieldRt fr;
      fr.spec = proto;
      fr.spec.input_dim = fs.spatial_only ? case_.geom.dim() : case_.input_dim();
      fr.spec.output_dim = fs.outputs;
      fr.spec.adaptive = method_.adaptive;
      fr.in_dim = fr.spec.input_dim;
      f_.push_back(std::move(fr));
    }
  }

  void add_entry_channel(net::ChannelPlan& plan, const pde::Entry& e) {
    switch (e.kind) {
      case net::ChannelKind::Value: plan.add(net::ChannelKind::Value); break;
      case net::ChannelKind::Pure: plan.add_pure(e.a, e.order); break;
      case net::ChannelKind::Mixed11: plan.add_mixed11(e.a, e.b); break;
      case net::ChannelKind::Mixed21: plan.add_mixed21(e.a, e.b); break;
      case net::ChannelKind::Mixed31: plan.add_mixed31(e.a, e.b); break;
      case net::ChannelKind::Lap: plan.add_lap(e.lap_axes); break;
    }
  }

  Slot resolve_channel(const net::ChannelPlan& plan, const pde::Entry& e, int field) const {
    const int col = case_.column_of_unknown(e.unknown);
    int ch = -1;
    switch (e.kind) {
      case net::ChannelKind::Value: ch = plan.find(net::ChannelKind::Value); break;
      case net::ChannelKind::Pure: ch = plan.find_pure(e.a, e.order); break;
      case net::ChannelKind::Lap: ch = plan.find(net::ChannelKind::Lap); break;
      case net::ChannelKind::Mixed11:
        ch = plan.find(net::ChannelKind::Mixed11, std::min(e.a, e.b), std::max(e.a, e.b));
        break;
      case net::ChannelKind::Mixed21: ch = plan.find(net::ChannelKind::Mixed21, e.a, e.b); break;
      case net::ChannelKind::Mixed31: ch = plan.find(net::ChannelKind::Mixed31, e.a, e.b); break;
    }
    require(ch >= 0, "assembler: unresolved channel for entry");
    return {field, ch, col};
  }

  // the entry differentiated along `ax`, as a list of entries to sum
  std::vector<pde::Entry> shifted_entries(const pde::Entry& e, int ax) const {
    using K = net::ChannelKind;
    std::vector<pde::Entry> out;
    switch (e.kind) {
      case K::Value:
        out.push_back(pde::Entry::d1(e.unknown, ax));
        break;
      case K::Pure:
        if (e.a == ax) {
          require(e.order + 1 <= 5, "gpinn: derivative order exceeds kernel support");
          out.push_back({e.unknown, K::Pure, ax, 0, e.order + 1, {}});
        } else if (e.order == 1) {
          out.push_back({e.unknown, K::Mixed11, std::min(e.a, ax), std::max(e.a, ax), 2, {}});
        } else if (e.order == 2) {
          out.push_back({e.unknown, K::Mixed21, e.a, ax, 3, {}});
        } else if (e.order == 3) {
          out.push_back({e.unknown, K::Mixed31, e.a, ax, 4, {}});
        } else {
          throw std::logic_error("gpinn: unsupported mixed derivative order");
        }
        break;
      case K::Lap:
        for (int a : e.lap_axes) {
          if (a == ax)
            out.push_back({e.unknown, K::Pure, ax, 0, 3, {}});
          else
            out.push_back({e.unknown, K::Mixed21, a, ax, 3, {}});
        }
        break;
      default:
        throw std::logic_error("gpinn: base residual entries must be pure or Laplacian");
    }
    return out;
  }

  void build_plans() {
    const int nf = n_fields();
    std::vector<net::ChannelPlan> plans(static_cast<std::size_t>(nf));

    // one Lap channel per plan at most, so all Lap entries of a field must
    // agree on their axes (they do for every registry case)
    std::vector<const std::vector<int>*> lap_axes_of(std::size_t(nf), nullptr);
    for (const pde::Entry& e : case_.entries) {
      if (e.kind != net::ChannelKind::Lap) continue;
      auto*& seen = lap_axes_of[std::size_t(case_.field_of_unknown(e.unknown))];
      require(!seen || *seen == e.lap_axes,
              "assembler: Laplacian entries of one field must share axes");
      seen = &e.lap_axes;
    }

    std::vector<std::vector<pde::Entry>> shifted;  // axis-major shift inputs
    for (const pde::Entry& e : case_.entries)
      add_entry_channel(plans[std::size_t(case_.field_of_unknown(e.unknown))], e);
    if (method_.gpinn) {
      for (int ax = 0; ax < case_.geom.dim(); ++ax)
        for (const pde::Entry& e : case_.entries) {
          auto list = shifted_entries(e, ax);
          for (const pde::Entry& se : list)
            add_entry_channel(plans[std::size_t(case_.field_of_unknown(se.unknown))], se);
          shifted.push_back(std::move(list));
        }
    }
    for (auto& p : plans) p.finalize();

    for (int f = 0; f < nf; ++f)
      f_[std::size_t(f)].kint =
          std::make_unique<net::MlpKernel>(f_[std::size_t(f)].spec, plans[std::size_t(f)]);

    n_inputs_ = int(case_.entries.size()) + int(shifted.size());
    input_slots_.clear();
    for (const pde::Entry& e : case_.entries) {
      int f = case_.field_of_unknown(e.unknown);
      input_slots_.push_back({resolve_channel(plans[std::size_t(f)], e, f)});
    }
    for (const auto& list : shifted) {
      std::vector<Slot> slots;
      for (const pde::Entry& se : list) {
        int f = case_.field_of_unknown(se.unknown);
        slots.push_back(resolve_channel(plans[std::size_t(f)], se, f));
      }
      input_slots_.push_back(std::move(slots));
    }

    // boundary plans: value wherever a condition binds, first derivatives for
    // Neumann/Robin, a time derivative for TimeDeriv, d1 matching on periodic
    std::vector<bool> needs_bnd(std::size_t(nf), false), needs_d1(std::size_t(nf), false),
        needs_dt(std::size_t(nf), false);
    for (const pde::BoundaryCondition& bc : case_.bcs) {
      int f = case_.field_of_unknown(bc.unknown);
      needs_bnd[std::size_t(f)] = true;
      if (bc.kind == pde::BCKind::Neumann || bc.kind == pde::BCKind::Robin)
        needs_d1[std::size_t(f)] = true;
      if (bc.kind == pde::BCKind::TimeDeriv) needs_dt[std::size_t(f)] = true;
    }
    if (!case_.periodic_axes.empty()) {
      needs_bnd[0] = true;
      if (case_.periodic_match_d1) needs_d1[0] = true;
    }
    for (int f = 0; f < nf; ++f) {
      FieldRt& fr = f_[std::size_t(f)];
      if (!needs_bnd[std::size_t(f)]) continue;
      net::ChannelPlan bp;
      bp.add(net::ChannelKind::Value);
      if (needs_d1[std::size_t(f)])
        for (int a = 0; a < case_.geom.dim(); ++a) bp.add_pure(a, 1);
      if (needs_dt[std::size_t(f)]) {
        require(case_.time_end.has_value() && !case_.fields[std::size_t(f)].spatial_only,
                "TimeDeriv condition needs a time axis");
        bp.add_pure(case_.geom.dim(), 1);
      }
      bp.finalize();
      fr.bnd_value_ch = bp.find(net::ChannelKind::Value);
      fr.bnd_d1_ch.assign(std::size_t(fr.in_dim), -1);
      for (int a = 0; a < fr.in_dim; ++a) fr.bnd_d1_ch[std::size_t(a)] = bp.find_pure(a, 1);
      if (needs_dt[std::size_t(f)]) fr.bnd_dt_ch = bp.find_pure(case_.geom.dim(), 1);
      fr.kbnd = std::make_unique<net::MlpKernel>(fr.spec, bp);
    }

    if (case_.observations.enabled) {
      obs_field_ = case_.field_of_unknown(case_.observations.unknown);
      obs_col_ = case_.column_of_unknown(case_.observations.unknown);
      FieldRt& fr = f_[std::size_t(obs_field_)];
      net::ChannelPlan vp = net::value_only_plan();
      obs_value_ch_ = vp.find(net::ChannelKind::Value);
      fr.kdata = std::make_unique<net::MlpKernel>(fr.spec, vp);
    }

    // pointwise pins get a tiny value-only batch per pinned field
    if (!case_.anchors.empty()) {
      std::vector<long> rows(f_.size(), 0);
      for (const pde::Anchor& a : case_.anchors) {
        AnchorRt rt;
        rt.field = case_.field_of_unknown(a.unknown);
        rt.col = case_.column_of_unknown(a.unknown);
        rt.row = rows[std::size_t(rt.field)]++;
        rt.value = a.value;
        anch_.push_back(rt);
      }
      for (int f = 0; f < nf; ++f) {
        if (rows[std::size_t(f)] == 0) continue;
        FieldRt& fr = f_[std::size_t(f)];
        net::ChannelPlan vp = net::value_only_plan();
        fr.anch_value_ch = vp.find(net::ChannelKind::Value);
        fr.kanch = std::make_unique<net::MlpKernel>(fr.spec, vp);
        fr.xanch.resize(rows[std::size_t(f)], fr.in_dim);
      }
      for (std::size_t j = 0; j < anch_.size(); ++j) {
        const pde::Anchor& a = case_.anchors[j];
        require(a.point.size() >= f_[std::size_t(anch_[j].field)].in_dim,
                "anchor point has too few coordinates");
        f_[std::size_t(anch_[j].field)].xanch.row(anch_[j].row) =
            a.point.head(f_[std::size_t(anch_[j].field)].in_dim).transpose();
      }
    }

    long off = 0;
    for (auto& fr : f_) {
      fr.offset = off;
      fr.count = fr.kint->param_count();
      off += fr.count;
    }
    n_params_ = off;
  }

  void sample_points(int salt) {
    Xint_ = pde::sample_interior(case_.geom, case_.time_end, sizes_.n_interior,
                                 mix_seed(seed_, 0xB000 + 2ull * std::uint64_t(salt)));
    bnd_ = pde::sample_boundary(case_.geom, case_.time_end, sizes_.n_boundary,
                                mix_seed(seed_, 0xB001 + 2ull * std::uint64_t(salt)),
                                case_.periodic_axes);

    // component row ranges (the sampler fills components consecutively)
    comp_rows_.assign(bnd_.components.size(), {0, 0});
    long r = 0;
    for (std::size_t ci = 0; ci < bnd_.components.size(); ++ci) {
      long n = 0;
      while (r + n < long(bnd_.comp.size()) && bnd_.comp[std::size_t(r + n)] == int(ci)) ++n;
      comp_rows_[ci] = {r, n};
      r += n;
    }

    // periodic partners become extra forward rows after the sampled block
    partner_row_.assign(std::size_t(bnd_.points.rows()), -1);
    long extra = 0;
    for (std::size_t ci = 0; ci < bnd_.components.size(); ++ci)
      if (bnd_.components[ci].kind == pde::BoundaryComponent::PeriodicPair)
        extra += comp_rows_[ci].second;
    Xbnd_fwd_.resize(bnd_.points.rows() + extra, bnd_.points.cols());
    Xbnd_fwd_.topRows(bnd_.points.rows()) = bnd_.points;
    long next = bnd_.points.rows();
    for (std::size_t ci = 0; ci < bnd_.components.size(); ++ci) {
      if (bnd_.components[ci].kind != pde::BoundaryComponent::PeriodicPair) continue;
      auto [r0, n] = comp_rows_[ci];
      for (long i = 0; i < n; ++i) {
        Xbnd_fwd_.row(next) = bnd_.partner.row(r0 + i);
        partner_row_[std::size_t(r0 + i)] = next;
        ++next;
      }
    }
    refresh_interior_views();
    for (auto& fr : f_)
      if (fr.kbnd) fr.xbnd = Xbnd_fwd_.leftCols(fr.in_dim);
  }

  void refresh_interior_views() {
    for (auto& fr : f_) fr.xint = Xint_.leftCols(fr.in_dim);
  }

  void build_observations() {
    if (!case_.observations.enabled) return;
    pde::ObservedData d = pde::observed_data(case_, seed_);
    Xobs_ = std::move(d.points);
    Yobs_ = std::move(d.values);
    for (auto& fr : f_)
      if (fr.kdata) fr.xobs = Xobs_.leftCols(fr.in_dim);
  }

  void build_residual_tape() {
    bind_.assign(std::size_t(case_.input_dim() + n_inputs_), 0.0);
    drde_.assign(std::size_t(n_res_outputs()), RMat());
    tmp_out_.assign(1, ad::Var{});
    tmp_seed_.assign(1, 1.0);
    if (!case_.residual_reusable_tape) return;

    rtape_.clear();
    const int D = case_.input_dim();
    const int E = int(case_.entries.size());
    std::vector<ad::Var> coords, entries, shifted;
    for (int a = 0; a < D; ++a) coords.push_back(rtape_.input(0.25));
    for (int e = 0; e < E; ++e) entries.push_back(rtape_.input(0.0));
    for (int s = E; s < n_inputs_; ++s) shifted.push_back(rtape_.input(0.0));

    rt_outs_.clear();
    std::vector<ad::Var> outs(std::size_t(n_eq()), ad::Var{});
    case_.residual.on_var(coords.data(), entries.data(), outs.data());
    for (const ad::Var& v : outs) rt_outs_.push_back(v);

    if (method_.gpinn) {
      using DV = ad::Dual<ad::Var>;
      for (int ax = 0; ax < case_.geom.dim(); ++ax) {
        std::vector<DV> dc, de, douts(std::size_t(n_eq()), DV(rtape_.constant(0.0)));
        for (int a = 0; a < D; ++a)
          dc.push_back(DV{coords[std::size_t(a)], rtape_.constant(a == ax ? 1.0 : 0.0)});
        for (int e = 0; e < E; ++e)
          de.push_back(DV{entries[std::size_t(e)], shifted[std::size_t(ax * E + e)]});
        case_.residual.on_dual_var(dc.data(), de.data(), douts.data());
        for (const DV& v : douts) rt_outs_.push_back(v.t);
      }
    }
    rt_wanted_.clear();
    for (const ad::Var& v : entries) rt_wanted_.push_back(v.id);
    for (const ad::Var& v : shifted) rt_wanted_.push_back(v.id);
  }

  // fallback for residuals that branch on coordinates: a fresh tape per point
  void point_tape_sweep(Index i) {
    const int D = case_.input_dim();
    const int E = int(case_.entries.size());
    ad::Tape tape;
    std::vector<ad::Var> coords, entries, shifted;
    for (int a = 0; a < D; ++a) coords.push_back(tape.input(Xint_(i, a)));
    for (int e = 0; e < E; ++e) entries.push_back(tape.input(E_(i, e)));
    for (int s = E; s < n_inputs_; ++s) shifted.push_back(tape.input(E_(i, s)));
    std::vector<ad::Var> all_outs(std::size_t(n_eq()), ad::Var{});
    case_.residual.on_var(coords.data(), entries.data(), all_outs.data());
    if (method_.gpinn) {
      using DV = ad::Dual<ad::Var>;
      for (int ax = 0; ax < case_.geom.dim(); ++ax) {
        std::vector<DV> dc, de, douts(std::size_t(n_eq()), DV(tape.constant(0.0)));
        for (int a = 0; a < D; ++a)
          dc.push_back(DV{coords[std::size_t(a)], tape.constant(a == ax ? 1.0 : 0.0)});
        for (int e = 0; e < E; ++e)
          de.push_back(DV{entries[std::size_t(e)], shifted[std::size_t(ax * E + e)]});
        case_.residual.on_dual_var(dc.data(), de.data(), douts.data());
        for (const DV& v : douts) all_outs.push_back(v.t);
      }
    }
    std::vector<std::uint32_t> wanted;
    for (const ad::Var& v : entries) wanted.push_back(v.id);
    for (const ad::Var& v : shifted) wanted.push_back(v.id);
    for (int o = 0; o < n_res_outputs(); ++o) {
      tmp_out_[0] = all_outs[std::size_t(o)];
      r_(i, o) = tmp_out_[0].value();
      tape.reverse_seeded(tmp_out_, tmp_seed_, wanted,
                          drde_[std::size_t(o)].data() + std::size_t(i) * n_inputs_);
    }
  }

  void build_terms() {
    terms_.clear();
    for (int eq = 0; eq < n_eq(); ++eq) {
      Term t;
      t.type = Term::Type::Pde;
      t.eq = eq;
      t.name = n_eq() == 1 ? "pde" : "pde" + std::to_string(eq);
      t.weight = method_.w_pde;
      t.pde_group = true;
      terms_.push_back(std::move(t));
    }
    if (method_.gpinn)
      for (int ax = 0; ax < case_.geom.dim(); ++ax)
        for (int eq = 0; eq < n_eq(); ++eq) {
          Term t;
          t.type = Term::Type::PdeGrad;
          t.eq = eq;
          t.axis = ax;
          t.name = "gpde_x" + std::to_string(ax) + (n_eq() == 1 ? "" : "_" + std::to_string(eq));
          t.weight = method_.gpinn_weight;
          t.pde_group = true;
          terms_.push_back(std::move(t));
        }

    comps_.clear();
    for (std::size_t ci = 0; ci < bnd_.components.size(); ++ci) {
      const pde::BoundaryComponent& bc = bnd_.components[ci];
      CompRt cr;
      cr.comp = int(ci);
      cr.row0 = comp_rows_[ci].first;
      cr.nrows = comp_rows_[ci].second;
      cr.periodic = bc.kind == pde::BoundaryComponent::PeriodicPair;
      for (int bi = 0; bi < int(case_.bcs.size()); ++bi) {
        const pde::BoundaryCondition& b = case_.bcs[std::size_t(bi)];
        const bool spatial = bc.kind == pde::BoundaryComponent::Face ||
                             bc.kind == pde::BoundaryComponent::Sphere ||
                             bc.kind == pde::BoundaryComponent::HoleFace ||
                             bc.kind == pde::BoundaryComponent::HoleSphere;
        if (b.component != bc.name && !(b.component == "*" && spatial)) continue;
        BcRt rt;
        rt.bc_index = bi;
        rt.field = case_.field_of_unknown(b.unknown);
        rt.col = case_.column_of_unknown(b.unknown);
        cr.bcs.push_back(std::move(rt));
      }
      if (cr.bcs.empty() && !cr.periodic) continue;  // unconstrained component
      if (cr.nrows == 0) continue;                   // too small to receive points
      Term t;
      t.type = Term::Type::Boundary;
      t.comp = int(comps_.size());
      t.name = bc.name;
      t.weight = method_.w_bc;
      terms_.push_back(std::move(t));
      comps_.push_back(std::move(cr));
    }
    refresh_boundary_targets();

    if (!anch_.empty()) {
      Term t;
      t.type = Term::Type::Anchor;
      t.name = "anchor";
      t.weight = method_.w_bc;
      terms_.push_back(std::move(t));
    }

    if (case_.observations.enabled) {
      Term t;
      t.type = Term::Type::Data;
      t.name = "data";
      t.weight = method_.w_data;
      terms_.push_back(std::move(t));
    }
    losses_.assign(terms_.size(), 0.0);
  }

  void refresh_boundary_targets() {
    for (CompRt& cr : comps_) {
      cr.row0 = comp_rows_[std::size_t(cr.comp)].first;
      cr.nrows = comp_rows_[std::size_t(cr.comp)].second;
      for (BcRt& b : cr.bcs) {
        const pde::BoundaryCondition& bc = case_.bcs[std::size_t(b.bc_index)];
        b.target.resize(cr.nrows);
        for (long i = 0; i < cr.nrows; ++i)
          b.target[i] = bc.target(bnd_.points.row(cr.row0 + i).transpose());
      }
    }
  }

  void compute_boundary_residuals() {
    bres_.assign(comps_.size(), {});
    pres_.assign(comps_.size(), Mat());
    for (std::size_t c = 0; c < comps_.size(); ++c) {
      CompRt& cr = comps_[c];
      for (const BcRt& b : cr.bcs) {
        const pde::BoundaryCondition& bc = case_.bcs[std::size_t(b.bc_index)];
        const FieldRt& fr = f_[std::size_t(b.field)];
        const Mat& val = fr.kbnd->output(fr.bnd_value_ch);
        Vec r(cr.nrows);
        switch (bc.kind) {
          case pde::BCKind::Dirichlet:
            r = val.col(b.col).segment(cr.row0, cr.nrows) - b.target;
            break;
          case pde::BCKind::Neumann:
          case pde::BCKind::Robin: {
            r.setZero();
            for (int a = 0; a < case_.geom.dim(); ++a) {
              int ch = fr.bnd_d1_ch[std::size_t(a)];
              r += bnd_.normals.col(a).segment(cr.row0, cr.nrows).cwiseProduct(
                  fr.kbnd->output(ch).col(b.col).segment(cr.row0, cr.nrows));
            }
            if (bc.kind == pde::BCKind::Robin)
              r += bc.robin_alpha * val.col(b.col).segment(cr.row0, cr.nrows);
            r -= b.target;
            break;
          }
          case pde::BCKind::TimeDeriv:
            r = fr.kbnd->output(fr.bnd_dt_ch).col(b.col).segment(cr.row0, cr.nrows) - b.target;
            break;
        }
        bres_[c].push_back(std::move(r));
      }
      if (cr.periodic) {
        const FieldRt& fr = f_[0];
        const int outs = case_.fields[0].outputs;
        const int width = outs * (case_.periodic_match_d1 ? 2 : 1);
        const pde::BoundaryComponent& comp = bnd_.components[std::size_t(cr.comp)];
        const Mat& val = fr.kbnd->output(fr.bnd_value_ch);
        Mat pr(cr.nrows, width);
        for (long i = 0; i < cr.nrows; ++i) {
          const long a = cr.row0 + i, p = partner_row_[std::size_t(a)];
          for (int o = 0; o < outs; ++o) {
            pr(i, o) = val(a, o) - val(p, o);
            if (case_.periodic_match_d1) {
              const Mat& d1 = fr.kbnd->output(fr.bnd_d1_ch[std::size_t(comp.axis)]);
              pr(i, outs + o) = d1(a, o) - d1(p, o);
            }
          }
        }
        pres_[c] = std::move(pr);
      }
    }
  }

  void compute_losses() {
    const double Ni = double(Xint_.rows());
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      const Term& t = terms_[k];
      switch (t.type) {
        case Term::Type::Pde:
        case Term::Type::PdeGrad:
          losses_[k] = r_.col(output_index(t)).squaredNorm() / Ni;
          break;
        case Term::Type::Boundary: {
          const CompRt& cr = comps_[std::size_t(t.comp)];
          double acc = 0;
          for (const Vec& r : bres_[std::size_t(t.comp)]) acc += r.squaredNorm();
          if (pres_[std::size_t(t.comp)].size() > 0)
            acc += pres_[std::size_t(t.comp)].squaredNorm();
          losses_[k] = acc / double(cr.nrows);
          break;
        }
        case Term::Type::Anchor:
          losses_[k] = ares_.squaredNorm() / double(ares_.size());
          break;
        case Term::Type::Data:
          losses_[k] = dres_.squaredNorm() / double(dres_.size());
          break;
      }
      if (!std::isfinite(losses_[k]))
        throw EvalError("loss term '" + t.name + "' is non-finite");
    }
  }

  void build_cotangent_storage() {
    cot_int_.resize(f_.size());
    cot_bnd_.resize(f_.size());
    cot_data_.resize(f_.size());
    cot_anch_.resize(f_.size());
    for (std::size_t f = 0; f < f_.size(); ++f) {
      const FieldRt& fr = f_[f];
      cot_int_[f].assign(std::size_t(fr.kint->plan().count()), Mat());
      if (fr.kbnd) cot_bnd_[f].assign(std::size_t(fr.kbnd->plan().count()), Mat());
      if (fr.kdata) cot_data_[f].assign(std::size_t(fr.kdata->plan().count()), Mat());
      if (fr.kanch) cot_anch_[f].assign(std::size_t(fr.kanch->plan().count()), Mat());
    }
  }

  void zero_cotangents() {
    auto prep = [](std::vector<Mat>& cots, Index rows, int cols) {
      for (Mat& m : cots) {
        m.resize(rows, cols);  // no-op when the shape already matches
        m.setZero();
      }
    };
    for (std::size_t f = 0; f < f_.size(); ++f) {
      const int oc = f_[f].spec.output_dim;
      prep(cot_int_[f], Xint_.rows(), oc);
      prep(cot_bnd_[f], Xbnd_fwd_.rows(), oc);
      prep(cot_data_[f], Xobs_.rows(), oc);
      prep(cot_anch_[f], f_[f].xanch.rows(), oc);
    }
  }

  // adds scale (per interior point) times drde into the interior cotangents
  void scatter_interior(int o, const Eigen::ArrayXd& scale) {
    for (int e = 0; e < n_inputs_; ++e) {
      contrib_ = (scale * drde_[std::size_t(o)].col(e).array()).matrix();
      for (const Slot& s : input_slots_[std::size_t(e)])
        cot_int_[std::size_t(s.field)][std::size_t(s.ch)].col(s.col) += contrib_;
    }
  }

  void scatter_boundary(const Term& t, double two_coef) {
    const CompRt& cr = comps_[std::size_t(t.comp)];
    const double s = two_coef / double(cr.nrows);
    for (std::size_t bi = 0; bi < cr.bcs.size(); ++bi) {
      const BcRt& b = cr.bcs[bi];
      const pde::BoundaryCondition& bc = case_.bcs[std::size_t(b.bc_index)];
      const FieldRt& fr = f_[std::size_t(b.field)];
      auto& cm = cot_bnd_[std::size_t(b.field)];
      const Vec& r = bres_[std::size_t(t.comp)][bi];
      switch (bc.kind) {
        case pde::BCKind::Dirichlet:
          cm[std::size_t(fr.bnd_value_ch)].col(b.col).segment(cr.row0, cr.nrows) += s * r;
          break;
        case pde::BCKind::Neumann:
        case pde::BCKind::Robin:
          for (int a = 0; a < case_.geom.dim(); ++a) {
            int ch = fr.bnd_d1_ch[std::size_t(a)];
            cm[std::size_t(ch)].col(b.col).segment(cr.row0, cr.nrows) +=
                s * bnd_.normals.col(a).segment(cr.row0, cr.nrows).cwiseProduct(r);
          }
          if (bc.kind == pde::BCKind::Robin)
            cm[std::size_t(fr.bnd_value_ch)].col(b.col).segment(cr.row0, cr.nrows) +=
                s * bc.robin_alpha * r;
          break;
        case pde::BCKind::TimeDeriv:
          cm[std::size_t(fr.bnd_dt_ch)].col(b.col).segment(cr.row0, cr.nrows) += s * r;
          break;
      }
    }
    if (cr.periodic) {
      const FieldRt& fr = f_[0];
      auto& cm = cot_bnd_[0];
      const Mat& pr = pres_[std::size_t(t.comp)];
      const int outs = case_.fields[0].outputs;
      const pde::BoundaryComponent& comp = bnd_.components[std::size_t(cr.comp)];
      for (long i = 0; i < cr.nrows; ++i) {
        const long a = cr.row0 + i, p = partner_row_[std::size_t(a)];
        for (int o = 0; o < outs; ++o) {
          const double v = s * pr(i, o);
          cm[std::size_t(fr.bnd_value_ch)](a, o) += v;
          cm[std::size_t(fr.bnd_value_ch)](p, o) -= v;
          if (case_.periodic_match_d1) {
            const int ch = fr.bnd_d1_ch[std::size_t(comp.axis)];
            const double w = s * pr(i, outs + o);
            cm[std::size_t(ch)](a, o) += w;
            cm[std::size_t(ch)](p, o) -= w;
          }
        }
      }
    }
  }

  // unscaled seeds for one residual family of a boundary term (NTK traces)
  void seed_boundary_unscaled(const Term& t, int which) {
    const CompRt& cr = comps_[std::size_t(t.comp)];
    if (which < int(cr.bcs.size())) {
      const BcRt& b = cr.bcs[std::size_t(which)];
      const pde::BoundaryCondition& bc = case_.bcs[std::size_t(b.bc_index)];
      const FieldRt& fr = f_[std::size_t(b.field)];
      auto& cm = cot_bnd_[std::size_t(b.field)];
      switch (bc.kind) {
        case pde::BCKind::Dirichlet:
          cm[std::size_t(fr.bnd_value_ch)].col(b.col).segment(cr.row0, cr.nrows).setOnes();
          break;
        case pde::BCKind::Neumann:
        case pde::BCKind::Robin:
          for (int a = 0; a < case_.geom.dim(); ++a)
            cm[std::size_t(fr.bnd_d1_ch[std::size_t(a)])].col(b.col).segment(cr.row0, cr.nrows) =
                bnd_.normals.col(a).segment(cr.row0, cr.nrows);
          if (bc.kind == pde::BCKind::Robin)
            cm[std::size_t(fr.bnd_value_ch)]
                .col(b.col)
                .segment(cr.row0, cr.nrows)
                .setConstant(bc.robin_alpha);
          break;
        case pde::BCKind::TimeDeriv:
          cm[std::size_t(fr.bnd_dt_ch)].col(b.col).segment(cr.row0, cr.nrows).setOnes();
          break;
      }
    } else {
      // periodic pair difference; the cross term between the paired rows is
      // not representable per-row and is conservatively dropped
      const FieldRt& fr = f_[0];
      auto& cm = cot_bnd_[0];
      const int outs = case_.fields[0].outputs;
      for (long i = 0; i < cr.nrows; ++i) {
        const long a = cr.row0 + i, p = partner_row_[std::size_t(a)];
        for (int o = 0; o < outs; ++o) {
          cm[std::size_t(fr.bnd_value_ch)](a, o) += 1.0;
          cm[std::size_t(fr.bnd_value_ch)](p, o) -= 1.0;
        }
      }
    }
  }

  // runs kernel backwards for every nonzero cotangent block, accumulating
  // into grad; returns the summed ntk trace when with_ntk is set
  double flush_backward(Vec& grad, bool with_ntk) {
    double trace = 0;
    for (std::size_t f = 0; f < f_.size(); ++f) {
      FieldRt& fr = f_[f];
      grad_f_.resize(fr.count);
      grad_f_.setZero();
      const Vec theta_f = cur_theta_.segment(fr.offset, fr.count);
      bool any = false;
      auto run = [&](net::Kernel* k, std::vector<Mat>& cot, Index rows) {
        if (!k || cot.empty()) return;
        bool nz = false;
        for (const Mat& m : cot) nz = nz || (m.array() != 0.0).any();
        if (!nz) return;
        any = true;
        if (with_ntk) {
          ntk_scratch_.resize(rows);
          ntk_scratch_.setZero();
          k->backward(theta_f, cot, grad_f_, &ntk_scratch_);
          trace += ntk_scratch_.sum();
        } else {
          k->backward(theta_f, cot, grad_f_, nullptr);
        }
      };
      run(fr.kint.get(), cot_int_[f], Xint_.rows());
      run(fr.kbnd.get(), cot_bnd_[f], Xbnd_fwd_.rows());
      run(fr.kdata.get(), cot_data_[f], Xobs_.rows());
      run(fr.kanch.get(), cot_anch_[f], fr.xanch.rows());
      if (any) grad.segment(fr.offset, fr.count) += grad_f_;
    }
    return trace;
  }

  pde::Case case_;
  Method method_;
  Sizes sizes_;
  std::uint64_t seed_ = 0;

  std::vector<FieldRt> f_;
  long n_params_ = 0;

  Mat Xint_;
  pde::BoundaryBatch bnd_;
  Mat Xbnd_fwd_;
  std::vector<long> partner_row_;
  std::vector<std::pair<long, long>> comp_rows_;
  Mat Xobs_, Yobs_;
  int obs_field_ = -1, obs_col_ = 0, obs_value_ch_ = -1;

  std::vector<std::vector<Slot>> input_slots_;
  int n_inputs_ = 0;

  ad::Tape rtape_;
  std::vector<ad::Var> rt_outs_;
  std::vector<std::uint32_t> rt_wanted_;
  std::vector<double> bind_;
  std::vector<ad::Var> tmp_out_;
  std::vector<double> tmp_seed_;

  std::vector<Term> terms_;
  std::vector<CompRt> comps_;
  std::vector<double> losses_;

  Mat E_;
  Mat r_;
  std::vector<RMat> drde_;
  std::vector<std::vector<Vec>> bres_;
  std::vector<Mat> pres_;
  Vec dres_, ares_;
  std::vector<AnchorRt> anch_;

  std::vector<std::vector<Mat>> cot_int_, cot_bnd_, cot_data_, cot_anch_;
  Vec grad_f_, ntk_scratch_, contrib_, cur_theta_;
  Eigen::ArrayXd scale_, ones_;
  bool stale_forward_ = false;
};

}  // namespace pinnbench::train
