#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pinnbench/eval/metrics.hpp"
#include "pinnbench/net/kernel_iface.hpp"
#include "pinnbench/pde/case.hpp"

namespace pinnbench::eval {

// Value-only forward pass of a trained parameter vector at arbitrary points.
// Field specs and the parameter layout mirror the training assembler: one
// network per field, parameters concatenated in field order.
class Predictor {
 public:
  Predictor(const pde::Case& c, const net::NetworkSpec& proto, net::Adaptive adaptive)
      : case_(&c) {
    for (const pde::FieldSpec& fs : c.fields) {
      net::NetworkSpec spec = proto;
      spec.input_dim = fs.spatial_only ? c.geom.dim() : c.input_dim();
      spec.output_dim = fs.outputs;
      spec.adaptive = adaptive;
      Field f;
      f.in_dim = spec.input_dim;
      f.outputs = fs.outputs;
      f.kernel = std::make_unique<net::MlpKernel>(spec, net::value_only_plan());
      f.offset = n_params_;
      n_params_ += f.kernel->param_count();
      fields_.push_back(std::move(f));
    }
  }

  long param_count() const { return n_params_; }

  // X: rows x case.input_dim(); returns rows x n_unknowns
  Mat predict(const Vec& theta, const Mat& X) {
    require(theta.size() == n_params_, "predict: parameter vector has wrong length");
    require(X.cols() == case_->input_dim(), "predict: point matrix has wrong width");
    Mat out(X.rows(), case_->n_unknowns());
    const long chunk = 16384;
    for (long r0 = 0; r0 < X.rows(); r0 += chunk) {
      const long nr = std::min(chunk, X.rows() - r0);
      int col0 = 0;
      for (Field& f : fields_) {
        const Mat Xf = X.block(r0, 0, nr, f.in_dim);
        f.kernel->forward(theta.segment(f.offset, f.kernel->param_count()), Xf);
        const Mat& val = f.kernel->output(f.kernel->plan().find(net::ChannelKind::Value));
        out.block(r0, col0, nr, f.outputs) = val;
        col0 += f.outputs;
      }
    }
    return out;
  }

 private:
  struct Field {
    int in_dim = 0, outputs = 0;
    long offset = 0;
    std::unique_ptr<net::Kernel> kernel;
  };
  const pde::Case* case_;
  std::vector<Field> fields_;
  long n_params_ = 0;
};

struct MetricReport {
  double l2re = 0, l1re = 0, mse = 0, max_err = 0;
  std::optional<FmseBands> fmse;           // mean over unknowns with a usable grid
  std::optional<TemporalReport> temporal;  // time-dependent cases only
  long points_used = 0;                    // concatenated (point, unknown) pairs scored
  long masked = 0;                         // pairs skipped for non-finite reference values
  std::vector<std::string> notices;
};

// Scores a parameter vector against a reference solution. Multi-unknown cases
// concatenate the scored unknowns into one vector, so each metric is a single
// number per case. `metric_unknowns` restricts scoring (inverse problems score
// the recovered coefficient field); empty means all unknowns.
inline MetricReport evaluate(const pde::Case& c, const net::NetworkSpec& proto,
                             net::Adaptive adaptive, const Vec& theta,
                             const pde::ReferenceSolution& ref) {
  require(ref.points.rows() == ref.values.rows(), "evaluate: reference points/values mismatch");
  require(ref.values.cols() == c.n_unknowns(), "evaluate: reference has wrong unknown count");
  Predictor pr(c, proto, adaptive);
  const Mat P = pr.predict(theta, ref.points);

  std::vector<int> sel = c.metric_unknowns;
  if (sel.empty())
    for (int u = 0; u < c.n_unknowns(); ++u) sel.push_back(u);

  MetricReport rep;
  const long n = ref.points.rows();
  std::vector<double> pred_v, truth_v, time_v;
  pred_v.reserve(std::size_t(n) * sel.size());
  truth_v.reserve(std::size_t(n) * sel.size());
  const bool timed = c.time_end.has_value();
  const int tcol = c.input_dim() - 1;
  for (int u : sel)
    for (long i = 0; i < n; ++i) {
      const double t = ref.values(i, u);
      if (!std::isfinite(t)) {
        ++rep.masked;
        continue;
      }
      pred_v.push_back(P(i, u));
      truth_v.push_back(t);
      if (timed) time_v.push_back(ref.points(i, tcol));
    }
  require(!pred_v.empty(), "evaluate: no finite reference values to score");
  rep.points_used = long(pred_v.size());

  const Vec pv = Eigen::Map<const Vec>(pred_v.data(), Index(pred_v.size()));
  const Vec tv = Eigen::Map<const Vec>(truth_v.data(), Index(truth_v.size()));
  rep.l2re = l2re(pv, tv);
  rep.l1re = l1re(pv, tv);
  rep.mse = mse(pv, tv);
  rep.max_err = max_err(pv, tv);

  if (!ref.axes.empty()) {
    std::vector<int> shape;
    long total = 1;
    for (const Vec& ax : ref.axes) {
      shape.push_back(int(ax.size()));
      total *= ax.size();
    }
    if (total == n) {
      FmseBands acc;
      int counted = 0;
      for (int u : sel) {
        Vec diff(n);
        long zeroed = 0;
        for (long i = 0; i < n; ++i) {
          const double t = ref.values(i, u);
          diff[i] = std::isfinite(t) ? P(i, u) - t : (++zeroed, 0.0);
        }
        if (zeroed > 0)
          rep.notices.push_back("fmse: unknown " + std::to_string(u) + " zero-filled " +
                                std::to_string(zeroed) + " masked grid nodes");
        if (auto b = fmse_bands(diff, shape)) {
          acc.low += b->low;
          acc.mid += b->mid;
          acc.high += b->high;
          ++counted;
        }
      }
      if (counted > 0) {
        acc.low /= counted;
        acc.mid /= counted;
        acc.high /= counted;
        rep.fmse = acc;
      } else {
        rep.notices.push_back("fmse: grid too coarse for spectral bands");
      }
    } else {
      rep.notices.push_back("fmse: reference axes inconsistent with point count, skipped");
    }
  }

  if (timed && !time_v.empty()) {
    const Vec tt = Eigen::Map<const Vec>(time_v.data(), Index(time_v.size()));
    try {
      TemporalReport tr = temporal_l2re(pv, tv, tt, *c.time_end);
      if (tr.dropped_empty > 0)
        rep.notices.push_back("temporal: dropped " + std::to_string(tr.dropped_empty) +
                              " empty time slices");
      rep.temporal = std::move(tr);
    } catch (const EvalError& e) {
      rep.notices.push_back(std::string("temporal: ") + e.what());
    }
  }
  return rep;
}

// Training-loop probe: headline relative error as a function of parameters.
inline std::function<double(const Vec&)> l2re_probe(const pde::Case& c,
                                                    const net::NetworkSpec& proto,
                                                    net::Adaptive adaptive,
                                                    const pde::ReferenceSolution& ref) {
  auto pr = std::make_shared<Predictor>(c, proto, adaptive);
  std::vector<int> sel = c.metric_unknowns;
  if (sel.empty())
    for (int u = 0; u < c.n_unknowns(); ++u) sel.push_back(u);
  return [pr, &c, &ref, sel](const Vec& theta) {
    const Mat P = pr->predict(theta, ref.points);
    double num = 0, den = 0;
    for (int u : sel)
      for (long i = 0; i < ref.points.rows(); ++i) {
        const double t = ref.values(i, u);
        if (!std::isfinite(t)) continue;
        num += (P(i, u) - t) * (P(i, u) - t);
        den += t * t;
      }
    return den > 0 ? std::sqrt(num / den) : std::numeric_limits<double>::quiet_NaN();
  };
}

}  // namespace pinnbench::eval
