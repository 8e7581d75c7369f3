#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "srr/activation.hpp"
#include "srr/errors.hpp"
#include "srr/loss.hpp"
#include "srr/matrix.hpp"
#include "srr/rng.hpp"

namespace srr {

/// One fully connected layer. The bias is added after the activation:
///   x = W y_prev
///   y = sigma(x) + b
/// so the bias shifts the layer output directly and dE/db equals dE/dy for
/// this layer. All curvature passes in this library assume that ordering.
struct Layer {
  Mat weights;  // fan_out x fan_in
  Vec bias;     // fan_out
  ActivationKind activation = ActivationKind::tanh;

  std::size_t fan_in() const { return weights.cols(); }
  std::size_t fan_out() const { return weights.rows(); }
};

class Network {
 public:
  Network() = default;
  Network(std::size_t input_dim, std::vector<Layer> layers)
      : input_dim_(input_dim), layers_(std::move(layers)) {
    validate();
  }

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const {
    return layers_.empty() ? 0 : layers_.back().fan_out();
  }
  std::size_t depth() const { return layers_.size(); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
  }

  /// Parameter order: per layer, weight rows then bias. All gradients,
  /// directions and checkpoints use this order.
  Vec flatten() const {
    Vec w;
    w.reserve(param_count());
    for (const Layer& l : layers_) {
      w.insert(w.end(), l.weights.data().begin(), l.weights.data().end());
      w.insert(w.end(), l.bias.begin(), l.bias.end());
    }
    return w;
  }

  void set_params(const Vec& w) {
    if (w.size() != param_count())
      throw ShapeError("set_params: expected " + std::to_string(param_count()) +
                       " parameters, got " + std::to_string(w.size()));
    std::size_t p = 0;
    for (Layer& l : layers_) {
      for (double& x : l.weights.data()) x = w[p++];
      for (double& x : l.bias) x = w[p++];
    }
  }

 private:
  void validate() const {
    if (layers_.empty()) throw ValidationError("network has no layers");
    if (input_dim_ == 0) throw ValidationError("network input dimension is zero");
    std::size_t prev = input_dim_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const Layer& l = layers_[i];
      if (l.fan_out() == 0)
        throw ValidationError("layer " + std::to_string(i) + " has no units");
      if (l.fan_in() != prev)
        throw ShapeError("layer " + std::to_string(i) + " expects fan_in " +
                         std::to_string(prev) + ", has " + std::to_string(l.fan_in()));
      if (l.bias.size() != l.fan_out())
        throw ShapeError("layer " + std::to_string(i) + " bias length mismatch");
      if (!all_finite(l.weights) || !all_finite(l.bias))
        throw ValidationError("layer " + std::to_string(i) + " has non-finite parameters");
      prev = l.fan_out();
    }
  }

  std::size_t input_dim_ = 0;
  std::vector<Layer> layers_;
};

/// Hidden layers share one activation; the output layer is identity, so the
/// network emits raw scores and the loss model decides how to read them.
/// Weights are N(0, g^2/fan_in) with g = init_scale, biases start at zero.
inline Network make_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                        std::size_t output_dim, ActivationKind activation,
                        std::uint64_t seed, double init_scale = 1.0) {
  Rng rng(derive_seed(seed, SeedStream::init));
  std::vector<Layer> layers;
  std::size_t prev = input_dim;
  auto push = [&](std::size_t units, ActivationKind act) {
    Layer l;
    l.weights = Mat(units, prev);
    const double sd = init_scale / std::sqrt(static_cast<double>(prev));
    for (double& w : l.weights.data()) w = sd * rng.gaussian();
    l.bias.assign(units, 0.0);
    l.activation = act;
    layers.push_back(std::move(l));
    prev = units;
  };
  for (std::size_t h : hidden) push(h, activation);
  push(output_dim, ActivationKind::identity);
  return Network(input_dim, std::move(layers));
}

/// Overwrite every parameter, biases included, with iid N(0, stddev^2).
inline void randomize_params(Network& net, std::uint64_t seed, double stddev) {
  Rng rng(derive_seed(seed, SeedStream::init, 1));
  Vec w(net.param_count());
  for (double& x : w) x = stddev * rng.gaussian();
  net.set_params(w);
}

/// Every intermediate of one forward pass, kept for the backward and
/// directional passes. Batch-major: row i is sample i.
struct ActivationTrace {
  Mat input;           // B x d0
  std::vector<Mat> x;  // pre-activations per layer
  std::vector<Mat> y;  // outputs per layer (sigma(x) + b)

  std::size_t batch() const { return input.rows(); }
  const Mat& output() const { return y.back(); }
  const Mat& layer_input(std::size_t l) const { return l == 0 ? input : y[l - 1]; }
};

inline ActivationTrace forward(const Network& net, const Mat& input) {
  if (input.cols() != net.input_dim())
    throw ShapeError("forward: input width " + std::to_string(input.cols()) +
                     ", network expects " + std::to_string(net.input_dim()));
  if (input.rows() == 0) throw ShapeError("forward: empty batch");
  if (!all_finite(input)) throw ValidationError("forward: non-finite input");

  ActivationTrace tr;
  tr.input = input;
  tr.x.reserve(net.depth());
  tr.y.reserve(net.depth());
  const Mat* prev = &tr.input;
  for (const Layer& l : net.layers()) {
    Mat x = matmul_nt(*prev, l.weights);
    Mat y(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < x.cols(); ++c)
        y(r, c) = act_value(l.activation, x(r, c)) + l.bias[c];
    tr.x.push_back(std::move(x));
    tr.y.push_back(std::move(y));
    prev = &tr.y.back();
  }
  return tr;
}

/// Base quantities shared by the gradient and the directional passes, all
/// evaluated at one (parameter vector, batch) pair. d_y and d_x hold
/// per-sample dE/dy and dE/dx; the 1/B batch mean is applied only when
/// parameter blocks are accumulated.
struct EvalWorkspace {
  ActivationTrace trace;
  std::vector<Mat> s1, s2, s3;  // activation derivatives at x, per layer
  Mat e, e1, e2;                // loss derivatives at the output
  std::vector<Mat> d_y, d_x;
  double loss_value = 0.0;
  Vec grad;
};

inline void evaluate_base(const Network& net, const Mat& input, const LossModel& loss,
                          const Mat& target, EvalWorkspace& ws) {
  if (target.rows() != input.rows())
    throw ShapeError("evaluate_base: batch size mismatch between input and target");
  if (target.cols() != net.output_dim())
    throw ShapeError("evaluate_base: target width " + std::to_string(target.cols()) +
                     ", network emits " + std::to_string(net.output_dim()));

  ws.trace = forward(net, input);
  const std::size_t L = net.depth();
  const std::size_t B = input.rows();

  ws.s1.assign(L, Mat());
  ws.s2.assign(L, Mat());
  ws.s3.assign(L, Mat());
  for (std::size_t l = 0; l < L; ++l) {
    const Mat& x = ws.trace.x[l];
    ws.s1[l] = Mat(x.rows(), x.cols());
    ws.s2[l] = Mat(x.rows(), x.cols());
    ws.s3[l] = Mat(x.rows(), x.cols());
    const ActivationKind k = net.layers()[l].activation;
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) {
        double s;
        act_eval(k, x(r, c), s, ws.s1[l](r, c), ws.s2[l](r, c), ws.s3[l](r, c));
      }
  }

  const Mat& out = ws.trace.output();
  ws.e = Mat(B, out.cols());
  ws.e1 = Mat(B, out.cols());
  ws.e2 = Mat(B, out.cols());
  double total = 0.0;
  Vec yrow(out.cols()), trow(out.cols());
  for (std::size_t r = 0; r < B; ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      yrow[c] = out(r, c);
      trow[c] = target(r, c);
    }
    LossTerms lt = loss_terms(loss, yrow, trow);
    total += lt.value;
    for (std::size_t c = 0; c < out.cols(); ++c) {
      ws.e(r, c) = lt.e[c];
      ws.e1(r, c) = lt.e1[c];
      ws.e2(r, c) = lt.e2[c];
    }
  }
  ws.loss_value = total / static_cast<double>(B);

  ws.d_y.assign(L, Mat());
  ws.d_x.assign(L, Mat());
  ws.grad.assign(net.param_count(), 0.0);

  // Backward sweep. The bias gradient reads d_y directly because the bias
  // lands after the activation.
  ws.d_y[L - 1] = ws.e;
  const double inv_b = 1.0 / static_cast<double>(B);
  std::size_t block_end = net.param_count();
  for (std::size_t li = L; li-- > 0;) {
    const Layer& l = net.layers()[li];
    const Mat& dy = ws.d_y[li];
    Mat dx(dy.rows(), dy.cols());
    for (std::size_t r = 0; r < dy.rows(); ++r)
      for (std::size_t c = 0; c < dy.cols(); ++c)
        dx(r, c) = ws.s1[li](r, c) * dy(r, c);
    ws.d_x[li] = std::move(dx);

    const Mat& y_prev = ws.trace.layer_input(li);
    Mat gw = matmul_tn(ws.d_x[li], y_prev);
    Vec gb = col_sum(dy);

    const std::size_t nb = l.bias.size();
    const std::size_t nw = l.weights.size();
    block_end -= nb;
    for (std::size_t i = 0; i < nb; ++i) ws.grad[block_end + i] = gb[i] * inv_b;
    block_end -= nw;
    for (std::size_t i = 0; i < nw; ++i) ws.grad[block_end + i] = gw.data()[i] * inv_b;

    if (li > 0) ws.d_y[li - 1] = matmul_nn(ws.d_x[li], l.weights);
  }
}

/// Mean-over-batch gradient of the loss in flatten() order.
inline Vec backward(const Network& net, const LossModel& loss, const Mat& input,
                    const Mat& target) {
  EvalWorkspace ws;
  evaluate_base(net, input, loss, target, ws);
  return ws.grad;
}

/// Mean-over-batch loss value.
inline double loss_value(const Network& net, const LossModel& loss, const Mat& input,
                         const Mat& target) {
  EvalWorkspace ws;
  evaluate_base(net, input, loss, target, ws);
  return ws.loss_value;
}

}  // namespace srr
