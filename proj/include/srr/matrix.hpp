#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "srr/errors.hpp"

namespace srr {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. Sized for networks with a few
/// thousand parameters; plain loops, no blocking.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Mat m;
    m.rows_ = rows.size();
    m.cols_ = rows.size() ? rows.begin()->size() : 0;
    m.data_.reserve(m.rows_ * m.cols_);
    for (const auto& r : rows) {
      if (r.size() != m.cols_) throw ShapeError("from_rows: ragged rows");
      m.data_.insert(m.data_.end(), r.begin(), r.end());
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Vec& data() { return data_; }
  const Vec& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec data_;
};

/// a (m x k) times b^T where b is (n x k); result m x n.
inline Mat matmul_nt(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols())
    throw ShapeError("matmul_nt: inner dimensions differ (" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.cols()) + ")");
  Mat c(a.rows(), b.rows());
  const std::size_t k = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += a(i, t) * b(j, t);
      c(i, j) = s;
    }
  return c;
}

/// a (m x k) times b (k x n); result m x n.
inline Mat matmul_nn(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul_nn: inner dimensions differ (" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t t = 0; t < a.cols(); ++t) {
      const double av = a(i, t);
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += av * b(t, j);
    }
  return c;
}

/// a^T times b where a is (k x m), b is (k x n); result m x n.
inline Mat matmul_tn(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows())
    throw ShapeError("matmul_tn: outer dimensions differ (" +
                     std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) + ")");
  Mat c(a.cols(), b.cols());
  for (std::size_t t = 0; t < a.rows(); ++t)
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double av = a(t, i);
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += av * b(t, j);
    }
  return c;
}

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

/// y += alpha * x
inline void axpy(double alpha, const Vec& x, Vec& y) {
  if (x.size() != y.size()) throw ShapeError("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(Vec& x, double alpha) {
  for (double& v : x) v *= alpha;
}

inline bool all_finite(const Vec& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

inline bool all_finite(const Mat& a) { return all_finite(a.data()); }

inline Vec col_sum(const Mat& a) {
  Vec s(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s[j] += a(i, j);
  return s;
}

}  // namespace srr
