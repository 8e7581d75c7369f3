#pragma once

#include <cmath>
#include <string>

#include "srr/errors.hpp"

namespace srr {

enum class ActivationKind { identity, tanh, sigmoid, softplus, relu };

namespace detail {
inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace detail

/// Value and first three derivatives of the activation at x, computed
/// together because the curvature passes need all of them at once.
///
/// relu takes derivative 0 at x == 0 and has no higher derivatives; it is
/// outside the smooth contract and excluded from smoothness checks.
inline void act_eval(ActivationKind k, double x, double& s, double& d1,
                     double& d2, double& d3) {
  switch (k) {
    case ActivationKind::identity:
      s = x; d1 = 1.0; d2 = 0.0; d3 = 0.0;
      return;
    case ActivationKind::tanh: {
      const double t = std::tanh(x);
      const double u = 1.0 - t * t;
      s = t;
      d1 = u;
      d2 = -2.0 * t * u;
      d3 = -2.0 * u * (1.0 - 3.0 * t * t);
      return;
    }
    case ActivationKind::sigmoid: {
      const double g = detail::stable_sigmoid(x);
      const double u = g * (1.0 - g);
      s = g;
      d1 = u;
      d2 = u * (1.0 - 2.0 * g);
      d3 = u * (1.0 - 6.0 * g + 6.0 * g * g);
      return;
    }
    case ActivationKind::softplus: {
      const double g = detail::stable_sigmoid(x);
      const double u = g * (1.0 - g);
      s = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
      d1 = g;
      d2 = u;
      d3 = u * (1.0 - 2.0 * g);
      return;
    }
    case ActivationKind::relu:
      s = x > 0.0 ? x : 0.0;
      d1 = x > 0.0 ? 1.0 : 0.0;
      d2 = 0.0;
      d3 = 0.0;
      return;
  }
  throw ValidationError("act_eval: unknown activation kind");
}

inline double act_value(ActivationKind k, double x) {
  double s, d1, d2, d3;
  act_eval(k, x, s, d1, d2, d3);
  return s;
}

inline const char* activation_name(ActivationKind k) {
  switch (k) {
    case ActivationKind::identity: return "identity";
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::sigmoid: return "sigmoid";
    case ActivationKind::softplus: return "softplus";
    case ActivationKind::relu: return "relu";
  }
  return "?";
}

inline ActivationKind parse_activation(const std::string& name) {
  if (name == "identity") return ActivationKind::identity;
  if (name == "tanh") return ActivationKind::tanh;
  if (name == "sigmoid") return ActivationKind::sigmoid;
  if (name == "softplus") return ActivationKind::softplus;
  if (name == "relu") return ActivationKind::relu;
  throw ValidationError("unknown activation: " + name);
}

}  // namespace srr
