#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "srr/data.hpp"
#include "srr/errors.hpp"
#include "srr/loss.hpp"
#include "srr/matrix.hpp"
#include "srr/network.hpp"

namespace srr {

/// A trained network plus the loss it was trained under, which fixes how
/// raw outputs are read at prediction time.
struct ModelBundle {
  std::string name;
  Network net;
  LossModel loss;
};

/// Hard class decisions. Multi-output: argmax of the raw scores (both
/// losses are monotone in them, ties go to the lower index). Single
/// output: threshold at the loss midpoint, logit 0 for sigmoid_bce and
/// 0.5 for mse against 0/1 targets.
inline std::vector<int> predict_labels(const Network& net, const LossModel& loss,
                                       const Mat& features) {
  const ActivationTrace tr = forward(net, features);
  const Mat& out = tr.output();
  std::vector<int> pred(out.rows());
  if (out.cols() == 1) {
    const double thresh = loss.kind == LossKind::sigmoid_bce ? 0.0 : 0.5;
    for (std::size_t r = 0; r < out.rows(); ++r) pred[r] = out(r, 0) > thresh ? 1 : 0;
    return pred;
  }
  for (std::size_t r = 0; r < out.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < out.cols(); ++c)
      if (out(r, c) > out(r, best)) best = c;
    pred[r] = static_cast<int>(best);
  }
  return pred;
}

inline double accuracy(const std::vector<int>& pred, const std::vector<int>& labels) {
  if (pred.size() != labels.size()) throw ShapeError("accuracy: length mismatch");
  if (pred.empty()) throw ValidationError("accuracy: empty prediction set");
  double correct = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == labels[i]) correct += 1.0;
  return correct / static_cast<double>(pred.size());
}

inline double dataset_accuracy(const Network& net, const LossModel& loss,
                               const Dataset& ds) {
  if (ds.regression())
    throw ValidationError("dataset_accuracy: regression targets have no accuracy");
  return accuracy(predict_labels(net, loss, ds.features), ds.labels);
}

}  // namespace srr
