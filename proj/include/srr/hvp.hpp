#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "srr/errors.hpp"
#include "srr/matrix.hpp"
#include "srr/network.hpp"
#include "srr/objective.hpp"

namespace srr {

/// Directional state of one forward sweep along a parameter direction v.
/// r_* holds the first directional derivative of each intermediate, rr_*
/// the second (empty unless requested). Storage is layers x batch x width,
/// the same as the activation trace; nothing of size n^2 ever exists.
struct DirectionalTrace {
  std::vector<Mat> r_x, r_y;
  std::vector<Mat> rr_x, rr_y;

  std::size_t total_elements() const {
    std::size_t n = 0;
    for (const Mat& m : r_x) n += m.size();
    for (const Mat& m : r_y) n += m.size();
    for (const Mat& m : rr_x) n += m.size();
    for (const Mat& m : rr_y) n += m.size();
    return n;
  }
};

namespace detail {

struct ParamBlocks {
  std::vector<Mat> w;  // per layer, fan_out x fan_in
  std::vector<Vec> b;
};

inline ParamBlocks unflatten_blocks(const Network& net, const Vec& v) {
  ParamBlocks pb;
  pb.w.reserve(net.depth());
  pb.b.reserve(net.depth());
  std::size_t p = 0;
  for (const Layer& l : net.layers()) {
    Mat w(l.fan_out(), l.fan_in());
    for (double& x : w.data()) x = v[p++];
    Vec b(v.begin() + static_cast<std::ptrdiff_t>(p),
          v.begin() + static_cast<std::ptrdiff_t>(p + l.bias.size()));
    p += l.bias.size();
    pb.w.push_back(std::move(w));
    pb.b.push_back(std::move(b));
  }
  return pb;
}

inline void check_layer_finite(const Mat& m, const char* what, std::size_t layer) {
  if (!all_finite(m))
    throw NumericalError(std::string("directional pass: non-finite ") + what +
                         " at layer " + std::to_string(layer));
}

}  // namespace detail

/// Propagates the direction v through the network once forward and once
/// backward, producing the exact Hessian-vector product and, when want_rr
/// is set, the third-order form (the gradient over w of v^T H(w) v).
///
/// The forward derivative of a layer output picks up the direction's bias
/// block directly: y = sigma(x) + b, so dy along v is sigma'(x) dx + beta.
/// The second directional derivative of that term is zero. At the output,
/// loss curvature enters through e1 and e2; hidden layers have no loss
/// terms of their own.
inline void directional_pass(const Network& net, const EvalWorkspace& ws, const Vec& v,
                             bool want_rr, Vec* hv_out, Vec* third_out,
                             DirectionalTrace* trace_out = nullptr) {
  want_rr = want_rr || third_out != nullptr;
  const std::size_t L = net.depth();
  const std::size_t B = ws.trace.batch();
  const double inv_b = 1.0 / static_cast<double>(B);
  const detail::ParamBlocks dir = detail::unflatten_blocks(net, v);

  DirectionalTrace dt;
  dt.r_x.assign(L, Mat());
  dt.r_y.assign(L, Mat());
  if (want_rr) {
    dt.rr_x.assign(L, Mat());
    dt.rr_y.assign(L, Mat());
  }

  for (std::size_t l = 0; l < L; ++l) {
    const Layer& layer = net.layers()[l];
    const Mat& y_prev = ws.trace.layer_input(l);

    Mat rx = matmul_nt(y_prev, dir.w[l]);
    if (l > 0) {
      const Mat contrib = matmul_nt(dt.r_y[l - 1], layer.weights);
      for (std::size_t i = 0; i < rx.size(); ++i) rx.data()[i] += contrib.data()[i];
    }
    Mat ry(rx.rows(), rx.cols());
    for (std::size_t r = 0; r < B; ++r)
      for (std::size_t c = 0; c < rx.cols(); ++c)
        ry(r, c) = ws.s1[l](r, c) * rx(r, c) + dir.b[l][c];
    detail::check_layer_finite(rx, "R{x}", l);
    detail::check_layer_finite(ry, "R{y}", l);

    if (want_rr) {
      Mat rrx(rx.rows(), rx.cols());
      if (l > 0) {
        const Mat a = matmul_nt(dt.rr_y[l - 1], layer.weights);
        const Mat b = matmul_nt(dt.r_y[l - 1], dir.w[l]);
        for (std::size_t i = 0; i < rrx.size(); ++i)
          rrx.data()[i] = a.data()[i] + 2.0 * b.data()[i];
      }
      Mat rry(rx.rows(), rx.cols());
      for (std::size_t r = 0; r < B; ++r)
        for (std::size_t c = 0; c < rx.cols(); ++c)
          rry(r, c) = ws.s1[l](r, c) * rrx(r, c) +
                      ws.s2[l](r, c) * rx(r, c) * rx(r, c);
      detail::check_layer_finite(rrx, "RR{x}", l);
      detail::check_layer_finite(rry, "RR{y}", l);
      dt.rr_x[l] = std::move(rrx);
      dt.rr_y[l] = std::move(rry);
    }
    dt.r_x[l] = std::move(rx);
    dt.r_y[l] = std::move(ry);
  }

  if (hv_out) hv_out->assign(net.param_count(), 0.0);
  if (third_out) third_out->assign(net.param_count(), 0.0);

  const std::size_t out_dim = net.output_dim();
  Mat rd_y(B, out_dim), rrd_y;
  for (std::size_t r = 0; r < B; ++r)
    for (std::size_t c = 0; c < out_dim; ++c)
      rd_y(r, c) = ws.e1(r, c) * dt.r_y[L - 1](r, c);
  if (want_rr) {
    rrd_y = Mat(B, out_dim);
    for (std::size_t r = 0; r < B; ++r)
      for (std::size_t c = 0; c < out_dim; ++c) {
        const double ry = dt.r_y[L - 1](r, c);
        rrd_y(r, c) = ws.e2(r, c) * ry * ry + ws.e1(r, c) * dt.rr_y[L - 1](r, c);
      }
  }

  std::size_t block_end = net.param_count();
  for (std::size_t li = L; li-- > 0;) {
    const Layer& layer = net.layers()[li];
    const Mat& dy = ws.d_y[li];
    const Mat& dx = ws.d_x[li];
    const std::size_t width = layer.fan_out();

    Mat rd_x(B, width), rrd_x;
    for (std::size_t r = 0; r < B; ++r)
      for (std::size_t c = 0; c < width; ++c)
        rd_x(r, c) = ws.s1[li](r, c) * rd_y(r, c) +
                     ws.s2[li](r, c) * dt.r_x[li](r, c) * dy(r, c);
    detail::check_layer_finite(rd_x, "R{dE/dx}", li);
    if (want_rr) {
      rrd_x = Mat(B, width);
      for (std::size_t r = 0; r < B; ++r)
        for (std::size_t c = 0; c < width; ++c) {
          const double rx = dt.r_x[li](r, c);
          rrd_x(r, c) = 2.0 * ws.s2[li](r, c) * rx * rd_y(r, c) +
                        ws.s1[li](r, c) * rrd_y(r, c) +
                        ws.s2[li](r, c) * dt.rr_x[li](r, c) * dy(r, c) +
                        ws.s3[li](r, c) * rx * rx * dy(r, c);
        }
      detail::check_layer_finite(rrd_x, "RR{dE/dx}", li);
    }

    const Mat& y_prev = ws.trace.layer_input(li);
    const std::size_t nb = layer.bias.size();
    const std::size_t nw = layer.weights.size();
    block_end -= nb + nw;

    if (hv_out) {
      Mat hw = matmul_tn(rd_x, y_prev);
      if (li > 0) {
        const Mat extra = matmul_tn(dx, dt.r_y[li - 1]);
        for (std::size_t i = 0; i < hw.size(); ++i) hw.data()[i] += extra.data()[i];
      }
      const Vec hb = col_sum(rd_y);
      for (std::size_t i = 0; i < nw; ++i) (*hv_out)[block_end + i] = hw.data()[i] * inv_b;
      for (std::size_t i = 0; i < nb; ++i) (*hv_out)[block_end + nw + i] = hb[i] * inv_b;
    }
    if (third_out) {
      Mat tw = matmul_tn(rrd_x, y_prev);
      if (li > 0) {
        const Mat a = matmul_tn(rd_x, dt.r_y[li - 1]);
        const Mat b = matmul_tn(dx, dt.rr_y[li - 1]);
        for (std::size_t i = 0; i < tw.size(); ++i)
          tw.data()[i] += 2.0 * a.data()[i] + b.data()[i];
      }
      const Vec tb = col_sum(rrd_y);
      for (std::size_t i = 0; i < nw; ++i) (*third_out)[block_end + i] = tw.data()[i] * inv_b;
      for (std::size_t i = 0; i < nb; ++i)
        (*third_out)[block_end + nw + i] = tb[i] * inv_b;
    }

    if (li > 0) {
      Mat next_rd = matmul_nn(rd_x, layer.weights);
      {
        const Mat extra = matmul_nn(dx, dir.w[li]);
        for (std::size_t i = 0; i < next_rd.size(); ++i)
          next_rd.data()[i] += extra.data()[i];
      }
      if (want_rr) {
        Mat next_rrd = matmul_nn(rrd_x, layer.weights);
        const Mat extra = matmul_nn(rd_x, dir.w[li]);
        for (std::size_t i = 0; i < next_rrd.size(); ++i)
          next_rrd.data()[i] += 2.0 * extra.data()[i];
        rrd_y = std::move(next_rrd);
      }
      rd_y = std::move(next_rd);
    }
  }

  if (trace_out) *trace_out = std::move(dt);
}

/// Objective backed by a network, a loss model and one frozen batch. The
/// forward and backward state for the current w is cached, so repeated
/// hvp calls at a fixed point (power iteration) cost one directional pass
/// each instead of a full re-evaluation.
class NetObjective final : public ObjectiveModel {
 public:
  NetObjective(Network net, LossModel loss, Mat inputs, Mat targets)
      : net_(std::move(net)), loss_(loss) {
    set_batch(std::move(inputs), std::move(targets));
  }

  void set_batch(Mat inputs, Mat targets) {
    if (inputs.rows() == 0) throw ShapeError("NetObjective: empty batch");
    if (inputs.rows() != targets.rows())
      throw ShapeError("NetObjective: input and target batch sizes differ");
    inputs_ = std::move(inputs);
    targets_ = std::move(targets);
    ready_ = false;
  }

  std::size_t dim() const override { return net_.param_count(); }
  std::size_t batch_size() const { return inputs_.rows(); }
  const Network& net() const { return net_; }
  const LossModel& loss() const { return loss_; }

  double value(const Vec& w) override {
    ensure_base(w);
    return ws_.loss_value;
  }

  Vec gradient(const Vec& w) override {
    ensure_base(w);
    return ws_.grad;
  }

  Vec hvp(const Vec& w, const Vec& v) override {
    ensure_base(w);
    Vec hv;
    DirectionalTrace dt;
    directional_pass(net_, ws_, v, false, &hv, nullptr, &dt);
    last_trace_elements_ = dt.total_elements();
    return hv;
  }

  Vec third_form(const Vec& w, const Vec& v) override {
    ensure_base(w);
    Vec t;
    DirectionalTrace dt;
    directional_pass(net_, ws_, v, true, nullptr, &t, &dt);
    last_trace_elements_ = dt.total_elements();
    return t;
  }

  /// Doubles held by the most recent directional trace; the structural
  /// memory check asserts this stays linear in layer width, not in dim().
  std::size_t last_trace_elements() const { return last_trace_elements_; }

 private:
  void ensure_base(const Vec& w) {
    if (w.size() != net_.param_count())
      throw ShapeError("NetObjective: parameter vector length mismatch");
    if (ready_ && w == cached_w_) return;
    net_.set_params(w);
    evaluate_base(net_, inputs_, loss_, targets_, ws_);
    cached_w_ = w;
    ready_ = true;
  }

  Network net_;
  LossModel loss_;
  Mat inputs_, targets_;
  EvalWorkspace ws_;
  Vec cached_w_;
  bool ready_ = false;
  std::size_t last_trace_elements_ = 0;
};

}  // namespace srr
