#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "srr/errors.hpp"
#include "srr/matrix.hpp"
#include "srr/objective.hpp"
#include "srr/rng.hpp"

namespace srr::oracle {

/// Slow, independent reference implementations used to cross-check the
/// fast directional operators. Everything here is O(n^2) or worse on
/// purpose; keep it away from training loops.

inline constexpr double kFdStepFirst = 1e-5;   // first-order differences
inline constexpr double kFdStepSecond = 1e-4;  // differences of curvature quantities

/// Central-difference gradient, one coordinate at a time.
inline Vec fd_gradient(ObjectiveModel& obj, const Vec& w, double eps = kFdStepFirst) {
  detail::check_point(obj, w, "fd_gradient");
  if (!(eps > 0.0)) throw ValidationError("fd_gradient: step must be positive");
  Vec g(w.size());
  Vec wp = w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double orig = wp[i];
    wp[i] = orig + eps;
    const double fp = obj.value(wp);
    wp[i] = orig - eps;
    const double fm = obj.value(wp);
    wp[i] = orig;
    g[i] = (fp - fm) / (2.0 * eps);
  }
  return g;
}

/// Central difference of the analytic gradient along v. Independent of the
/// directional forward pass, so agreement with hvp() checks the whole
/// curvature path against nothing but the backward pass.
inline Vec fd_hvp(ObjectiveModel& obj, const Vec& w, const Vec& v,
                  double eps = kFdStepFirst) {
  detail::check_point(obj, w, "fd_hvp");
  detail::check_direction(obj, v, "fd_hvp");
  if (!(eps > 0.0)) throw ValidationError("fd_hvp: step must be positive");
  Vec wp = w, wm = w;
  axpy(eps, v, wp);
  axpy(-eps, v, wm);
  Vec gp = obj.gradient(wp);
  const Vec gm = obj.gradient(wm);
  for (std::size_t i = 0; i < gp.size(); ++i) gp[i] = (gp[i] - gm[i]) / (2.0 * eps);
  return gp;
}

/// Symmetric dense matrix with an explicit symmetry flag, so the
/// eigensolver can refuse anything that was not symmetrized first.
struct DenseMatrix {
  std::size_t n = 0;
  Vec a;  // row-major n x n
  bool symmetric = false;

  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t size) : n(size), a(size * size, 0.0) {}
  double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

/// Full Hessian, one hvp per basis vector, then symmetrized. The raw
/// columns must already agree with their transposes to roundoff; a larger
/// mismatch means the directional pass is broken, not the arithmetic.
inline DenseMatrix dense_hessian(ObjectiveModel& obj, const Vec& w,
                                 std::size_t dim_cap = 500) {
  detail::check_point(obj, w, "dense_hessian");
  const std::size_t n = obj.dim();
  if (n > dim_cap)
    throw ValidationError("dense_hessian: dimension " + std::to_string(n) +
                          " exceeds cap " + std::to_string(dim_cap));
  DenseMatrix h(n);
  Vec e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Vec col = obj.hvp(w, e);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) h.at(i, j) = col[i];
  }
  double max_abs = 0.0, max_asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      max_abs = std::max(max_abs, std::fabs(h.at(i, j)));
      max_asym = std::max(max_asym, std::fabs(h.at(i, j) - h.at(j, i)));
    }
  if (max_asym > 1e-6 * std::max(max_abs, 1.0))
    throw NumericalError("dense_hessian: columns are not symmetric to roundoff");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (h.at(i, j) + h.at(j, i));
      h.at(i, j) = s;
      h.at(j, i) = s;
    }
  h.symmetric = true;
  return h;
}

/// Eigenvalues sorted by descending magnitude; vectors(: , k) is the unit
/// eigenvector of values[k].
struct EigenDecomposition {
  Vec values;
  Mat vectors;
};

/// Cyclic Jacobi rotations. Quadratic convergence once the off-diagonal
/// mass is small; for the matrix sizes here (n <= 500) a handful of sweeps
/// suffices. Chosen over QR for its self-contained, easily audited form.
inline EigenDecomposition sym_eigen(const DenseMatrix& m) {
  if (!m.symmetric) throw ValidationError("sym_eigen: matrix not marked symmetric");
  if (m.n == 0) throw ValidationError("sym_eigen: empty matrix");
  const std::size_t n = m.n;
  DenseMatrix a = m;
  Mat v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double fro = 0.0;
  for (double x : a.a) fro += x * x;
  fro = std::sqrt(fro);
  const double off_tol = 1e-12 * std::max(fro, 1e-300);

  const std::size_t max_sweeps = 100;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * a.at(i, j) * a.at(i, j);
    if (std::sqrt(off) <= off_tol) break;

    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (apq == 0.0) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::fabs(a.at(i, i)) > std::fabs(a.at(j, j));
  });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Mat(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a.at(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

/// |lambda_1| / |lambda_2|; infinity when there is no second eigenvalue or
/// it is exactly zero.
inline double eigen_gap_ratio(const EigenDecomposition& e) {
  if (e.values.size() < 2 || e.values[1] == 0.0)
    return std::numeric_limits<double>::infinity();
  return std::fabs(e.values[0]) / std::fabs(e.values[1]);
}

/// f(w) = w^T A w / 2 for symmetric A. Constant Hessian, zero third form.
class QuadraticObjective final : public ObjectiveModel {
 public:
  explicit QuadraticObjective(Mat a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) throw ShapeError("QuadraticObjective: A must be square");
    for (std::size_t i = 0; i < a_.rows(); ++i)
      for (std::size_t j = i + 1; j < a_.cols(); ++j)
        if (std::fabs(a_(i, j) - a_(j, i)) > 1e-12 * (1.0 + std::fabs(a_(i, j))))
          throw ValidationError("QuadraticObjective: A must be symmetric");
  }

  static QuadraticObjective diagonal(const Vec& d) {
    Mat a(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) a(i, i) = d[i];
    return QuadraticObjective(std::move(a));
  }

  std::size_t dim() const override { return a_.rows(); }
  double value(const Vec& w) override { return 0.5 * dot(w, mul(w)); }
  Vec gradient(const Vec& w) override { return mul(w); }
  Vec hvp(const Vec& w, const Vec& v) override {
    (void)w;
    return mul(v);
  }
  Vec third_form(const Vec& w, const Vec& v) override {
    (void)w;
    (void)v;
    return Vec(a_.rows(), 0.0);
  }

 private:
  Vec mul(const Vec& x) const {
    Vec y(a_.rows(), 0.0);
    for (std::size_t i = 0; i < a_.rows(); ++i)
      for (std::size_t j = 0; j < a_.cols(); ++j) y[i] += a_(i, j) * x[j];
    return y;
  }
  Mat a_;
};

/// One-dimensional f(w) = c w^p with integer p >= 0.
class MonomialObjective final : public ObjectiveModel {
 public:
  MonomialObjective(double c, int p) : c_(c), p_(p) {
    if (p < 0) throw ValidationError("MonomialObjective: power must be non-negative");
  }

  std::size_t dim() const override { return 1; }
  double value(const Vec& w) override { return c_ * ipow(w[0], p_); }
  Vec gradient(const Vec& w) override { return {deriv(w[0], 1)}; }
  Vec hvp(const Vec& w, const Vec& v) override { return {deriv(w[0], 2) * v[0]}; }
  Vec third_form(const Vec& w, const Vec& v) override {
    return {deriv(w[0], 3) * v[0] * v[0]};
  }

 private:
  static double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
  }
  double deriv(double x, int order) const {
    if (p_ < order) return 0.0;
    double coeff = c_;
    for (int i = 0; i < order; ++i) coeff *= static_cast<double>(p_ - i);
    return coeff * ipow(x, p_ - order);
  }
  double c_;
  int p_;
};

/// f(w) = sum_i poly_i(w_i) with per-coordinate coefficient lists in
/// ascending powers. Diagonal Hessian; handy when every eigenpair is known
/// in closed form.
class SeparablePolyObjective final : public ObjectiveModel {
 public:
  explicit SeparablePolyObjective(std::vector<Vec> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw ValidationError("SeparablePolyObjective: no coordinates");
  }

  std::size_t dim() const override { return coeffs_.size(); }
  double value(const Vec& w) override {
    double s = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) s += eval(coeffs_[i], w[i], 0);
    return s;
  }
  Vec gradient(const Vec& w) override {
    Vec g(coeffs_.size());
    for (std::size_t i = 0; i < coeffs_.size(); ++i) g[i] = eval(coeffs_[i], w[i], 1);
    return g;
  }
  Vec hvp(const Vec& w, const Vec& v) override {
    Vec h(coeffs_.size());
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      h[i] = eval(coeffs_[i], w[i], 2) * v[i];
    return h;
  }
  Vec third_form(const Vec& w, const Vec& v) override {
    Vec t(coeffs_.size());
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      t[i] = eval(coeffs_[i], w[i], 3) * v[i] * v[i];
    return t;
  }

 private:
  static double eval(const Vec& c, double x, int order) {
    double s = 0.0;
    for (std::size_t p = static_cast<std::size_t>(order); p < c.size(); ++p) {
      double coeff = c[p];
      for (int i = 0; i < order; ++i) coeff *= static_cast<double>(p - i);
      double xp = 1.0;
      for (std::size_t i = 0; i < p - static_cast<std::size_t>(order); ++i) xp *= x;
      s += coeff * xp;
    }
    return s;
  }
  std::vector<Vec> coeffs_;
};

/// Empirical curvature constants around w0: L1 bounds the extreme Hessian
/// eigenvalue magnitude, L2 the norm of the third-order form along the
/// extreme eigenvector, both maximized over w0 plus seeded perturbations
/// and inflated by the safety factor. Descent with step 1/(L1 + mu L2) is
/// then guaranteed as long as the trajectory stays where the bounds hold.
struct CurvatureBounds {
  double l1 = 0.0;
  double l2 = 0.0;
};

inline CurvatureBounds estimate_curvature_bounds(ObjectiveModel& obj, const Vec& w0,
                                                 std::size_t n_samples, double radius,
                                                 std::uint64_t seed,
                                                 double safety = 2.0) {
  detail::check_point(obj, w0, "estimate_curvature_bounds");
  if (safety < 1.0) throw ValidationError("estimate_curvature_bounds: safety below 1");
  Rng rng(derive_seed(seed, SeedStream::init));
  CurvatureBounds b;
  for (std::size_t s = 0; s <= n_samples; ++s) {
    Vec w = w0;
    if (s > 0) {
      Vec d(w.size());
      for (double& x : d) x = rng.gaussian();
      const double nd = norm2(d);
      if (nd > 0.0) axpy(radius / nd, d, w);
    }
    const DenseMatrix h = dense_hessian(obj, w, obj.dim());
    const EigenDecomposition e = sym_eigen(h);
    b.l1 = std::max(b.l1, std::fabs(e.values[0]));
    Vec top(e.values.size());
    for (std::size_t i = 0; i < top.size(); ++i) top[i] = e.vectors(i, 0);
    b.l2 = std::max(b.l2, norm2(obj.third_form(w, top)));
  }
  b.l1 *= safety;
  b.l2 *= safety;
  return b;
}

}  // namespace srr::oracle
