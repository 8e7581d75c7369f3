#pragma once

#include <cstddef>
#include <string>

#include "srr/errors.hpp"
#include "srr/matrix.hpp"

namespace srr {

/// A twice-plus differentiable scalar objective f : R^n -> R exposing the
/// two directional primitives the spectral machinery needs:
///
///   hvp(w, v)        = H(w) v
///   third_form(w, v) = gradient over w of v^T H(w) v
///
/// Both cost a small constant multiple of a gradient and never build H.
/// Implementations may cache work keyed on w; calls with the same w in a
/// row are expected to be cheap.
class ObjectiveModel {
 public:
  virtual ~ObjectiveModel() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(const Vec& w) = 0;
  virtual Vec gradient(const Vec& w) = 0;
  virtual Vec hvp(const Vec& w, const Vec& v) = 0;
  virtual Vec third_form(const Vec& w, const Vec& v) = 0;
};

namespace detail {
inline void check_point(const ObjectiveModel& obj, const Vec& w, const char* who) {
  if (w.size() != obj.dim())
    throw ShapeError(std::string(who) + ": w has length " + std::to_string(w.size()) +
                     ", objective dimension is " + std::to_string(obj.dim()));
  if (!all_finite(w)) throw ValidationError(std::string(who) + ": non-finite w");
}

inline void check_direction(const ObjectiveModel& obj, const Vec& v, const char* who) {
  if (v.size() != obj.dim())
    throw ShapeError(std::string(who) + ": v has length " + std::to_string(v.size()) +
                     ", objective dimension is " + std::to_string(obj.dim()));
  if (!all_finite(v)) throw ValidationError(std::string(who) + ": non-finite v");
  if (norm2(v) == 0.0) throw ValidationError(std::string(who) + ": zero direction");
}
}  // namespace detail

inline Vec hessian_vector_product(ObjectiveModel& obj, const Vec& w, const Vec& v) {
  detail::check_point(obj, w, "hessian_vector_product");
  detail::check_direction(obj, v, "hessian_vector_product");
  return obj.hvp(w, v);
}

inline Vec third_order_form(ObjectiveModel& obj, const Vec& w, const Vec& v) {
  detail::check_point(obj, w, "third_order_form");
  detail::check_direction(obj, v, "third_order_form");
  return obj.third_form(w, v);
}

}  // namespace srr
