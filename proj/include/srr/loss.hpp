#pragma once

#include <cmath>
#include <string>

#include "srr/activation.hpp"
#include "srr/errors.hpp"
#include "srr/matrix.hpp"

namespace srr {

enum class LossKind { mse, sigmoid_bce };

struct LossModel {
  LossKind kind = LossKind::mse;
};

/// Per-sample loss value plus the first three derivatives of each output's
/// term with respect to that output. The loss is elementwise:
///   E(y, t) = sum_k E_k(y_k, t_k)
/// so cross-output derivatives vanish and e, e1, e2 are vectors, not
/// matrices. mse: E_k = (y_k - t_k)^2 / 2. sigmoid_bce treats y_k as a
/// logit and t_k in [0, 1]; its value uses the softplus form, which is
/// stable for large |y_k|.
struct LossTerms {
  double value = 0.0;
  Vec e;   // dE_k/dy_k
  Vec e1;  // d2E_k/dy_k^2
  Vec e2;  // d3E_k/dy_k^3
};

inline LossTerms loss_terms(const LossModel& loss, const Vec& y, const Vec& t) {
  if (y.size() != t.size()) throw ShapeError("loss_terms: y and t lengths differ");
  if (y.empty()) throw ShapeError("loss_terms: empty output");
  LossTerms out;
  out.e.resize(y.size());
  out.e1.resize(y.size());
  out.e2.resize(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    switch (loss.kind) {
      case LossKind::mse: {
        const double d = y[k] - t[k];
        out.value += 0.5 * d * d;
        out.e[k] = d;
        out.e1[k] = 1.0;
        out.e2[k] = 0.0;
        break;
      }
      case LossKind::sigmoid_bce: {
        const double s = detail::stable_sigmoid(y[k]);
        const double sp_pos = y[k] > 0.0 ? y[k] + std::log1p(std::exp(-y[k]))
                                         : std::log1p(std::exp(y[k]));
        const double sp_neg = sp_pos - y[k];  // softplus(-y)
        out.value += t[k] * sp_neg + (1.0 - t[k]) * sp_pos;
        const double u = s * (1.0 - s);
        out.e[k] = s - t[k];
        out.e1[k] = u;
        out.e2[k] = u * (1.0 - 2.0 * s);
        break;
      }
    }
  }
  return out;
}

inline const char* loss_name(LossKind k) {
  return k == LossKind::mse ? "mse" : "sigmoid_bce";
}

inline LossKind parse_loss(const std::string& name) {
  if (name == "mse") return LossKind::mse;
  if (name == "sigmoid_bce" || name == "bce") return LossKind::sigmoid_bce;
  throw ValidationError("unknown loss: " + name);
}

}  // namespace srr
