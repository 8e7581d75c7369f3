#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "srr/errors.hpp"
#include "srr/matrix.hpp"
#include "srr/rng.hpp"

namespace srr {

enum class ColumnRole { continuous, binary_factor };

struct ColumnSpec {
  std::string name;
  ColumnRole role = ColumnRole::continuous;
  bool shift_eligible = false;
};

/// Column roles drive normalization and the distribution-shift harness.
/// Binary factor columns are never shift eligible; the weight formula
/// assumes a z-scored continuous marginal.
struct FeatureSchema {
  std::vector<ColumnSpec> columns;

  void validate() const {
    if (columns.empty()) throw ValidationError("schema: no columns");
    for (const ColumnSpec& c : columns)
      if (c.role == ColumnRole::binary_factor && c.shift_eligible)
        throw ValidationError("schema: binary column '" + c.name +
                              "' cannot be shift eligible");
  }

  std::vector<std::size_t> eligible_columns() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].shift_eligible) idx.push_back(i);
    return idx;
  }

  static FeatureSchema all_continuous(std::size_t d, bool eligible) {
    FeatureSchema s;
    s.columns.reserve(d);
    for (std::size_t i = 0; i < d; ++i)
      s.columns.push_back({"f" + std::to_string(i), ColumnRole::continuous, eligible});
    return s;
  }
};

/// Row-aligned features and labels. Classification stores integer labels
/// in [0, n_classes); a non-empty targets matrix marks a regression task
/// instead. image_side is set when rows are square images in row-major
/// pixel order.
struct Dataset {
  Mat features;
  std::vector<int> labels;
  Mat targets;
  int n_classes = 0;
  FeatureSchema schema;
  std::size_t image_side = 0;

  std::size_t n() const { return features.rows(); }
  bool regression() const { return targets.rows() > 0; }

  void validate() const {
    if (features.rows() == 0) throw ValidationError("dataset: no rows");
    if (!all_finite(features)) throw ValidationError("dataset: non-finite feature");
    if (regression()) {
      if (targets.rows() != features.rows())
        throw ShapeError("dataset: target rows do not match feature rows");
    } else {
      if (labels.size() != features.rows())
        throw ShapeError("dataset: label count does not match feature rows");
      if (n_classes < 2) throw ValidationError("dataset: class count below 2");
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || labels[i] >= n_classes)
          throw ValidationError("dataset: label out of range at row " + std::to_string(i));
    }
    if (image_side != 0 && image_side * image_side != features.cols())
      throw ShapeError("dataset: image_side^2 does not match feature width");
  }
};

/// Per-column affine transform learned on training data. Continuous
/// columns get (x - mean) / std with the population std; other columns
/// pass through untouched.
struct NormStats {
  Vec mean, stddev;
  std::vector<bool> is_continuous;
};

namespace detail {

inline double parse_double_field(std::string_view s, std::size_t row) {
  double x = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || p != e)
    throw ParseError("row " + std::to_string(row + 1) + ": bad numeric field '" +
                     std::string(s) + "'");
  return x;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace detail

struct TabularOptions {
  char delimiter = ',';
  bool has_header = false;
  int label_base = 0;  // subtracted from the raw label column
};

/// Delimited text, one sample per row, features in schema order and the
/// integer class label in the last field. Row order is preserved.
inline Dataset load_tabular(const std::string& path, const FeatureSchema& schema,
                            int n_classes, const TabularOptions& opts = {}) {
  schema.validate();
  if (n_classes < 2) throw ValidationError("load_tabular: class count below 2");
  std::ifstream in(path);
  if (!in) throw IoError("load_tabular: cannot open " + path);

  const std::size_t d = schema.columns.size();
  std::vector<double> values;
  std::vector<int> labels;
  std::string line;
  std::size_t row = 0;
  bool skipped_header = !opts.has_header;
  while (std::getline(in, line)) {
    const std::string_view trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    const auto fields = detail::split_fields(trimmed, opts.delimiter);
    if (fields.size() != d + 1)
      throw ParseError("row " + std::to_string(row + 1) + ": expected " +
                       std::to_string(d + 1) + " fields, got " +
                       std::to_string(fields.size()));
    for (std::size_t c = 0; c < d; ++c)
      values.push_back(detail::parse_double_field(detail::trim(fields[c]), row));
    const double raw = detail::parse_double_field(detail::trim(fields[d]), row);
    if (raw != std::floor(raw))
      throw ParseError("row " + std::to_string(row + 1) + ": label is not an integer");
    labels.push_back(static_cast<int>(raw) - opts.label_base);
    ++row;
  }
  if (row == 0) throw ParseError("load_tabular: no data rows in " + path);

  Dataset ds;
  ds.features = Mat(row, d);
  std::copy(values.begin(), values.end(), ds.features.data().begin());
  ds.labels = std::move(labels);
  ds.n_classes = n_classes;
  ds.schema = schema;
  ds.validate();
  return ds;
}

/// Fit z-scoring on the training set and return (stats, transformed copy).
inline std::pair<NormStats, Dataset> normalize(const Dataset& train) {
  train.validate();
  train.schema.validate();
  if (train.schema.columns.size() != train.features.cols())
    throw ShapeError("normalize: schema width does not match features");
  const std::size_t n = train.n(), d = train.features.cols();
  NormStats st;
  st.mean.assign(d, 0.0);
  st.stddev.assign(d, 1.0);
  st.is_continuous.assign(d, false);

  Dataset out = train;
  for (std::size_t c = 0; c < d; ++c) {
    if (train.schema.columns[c].role != ColumnRole::continuous) continue;
    st.is_continuous[c] = true;
    double m = 0.0;
    for (std::size_t r = 0; r < n; ++r) m += train.features(r, c);
    m /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double dvv = train.features(r, c) - m;
      var += dvv * dvv;
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (sd == 0.0)
      throw ValidationError("normalize: zero variance in continuous column '" +
                            train.schema.columns[c].name + "'");
    st.mean[c] = m;
    st.stddev[c] = sd;
    for (std::size_t r = 0; r < n; ++r)
      out.features(r, c) = (train.features(r, c) - m) / sd;
  }
  return {std::move(st), std::move(out)};
}

/// Apply training-set stats to any split of the same schema.
inline Dataset apply_normalization(const NormStats& st, const Dataset& ds) {
  if (st.mean.size() != ds.features.cols())
    throw ShapeError("apply_normalization: stats width does not match features");
  Dataset out = ds;
  for (std::size_t c = 0; c < st.mean.size(); ++c) {
    if (!st.is_continuous[c]) continue;
    for (std::size_t r = 0; r < out.n(); ++r)
      out.features(r, c) = (ds.features(r, c) - st.mean[c]) / st.stddev[c];
  }
  return out;
}

namespace detail {
inline Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.features = Mat(idx.size(), ds.features.cols());
  out.n_classes = ds.n_classes;
  out.schema = ds.schema;
  out.image_side = ds.image_side;
  if (ds.regression()) out.targets = Mat(idx.size(), ds.targets.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t c = 0; c < ds.features.cols(); ++c)
      out.features(i, c) = ds.features(idx[i], c);
    if (ds.regression())
      for (std::size_t c = 0; c < ds.targets.cols(); ++c)
        out.targets(i, c) = ds.targets(idx[i], c);
    else
      out.labels.push_back(ds.labels[idx[i]]);
  }
  return out;
}
}  // namespace detail

/// Seeded shuffle then contiguous partition in (train, val, test) order.
/// Split sizes floor the fractions; the remainder goes to train. Every
/// split must come out non-empty.
inline std::array<Dataset, 3> split(const Dataset& ds, std::array<double, 3> fractions,
                                    std::uint64_t seed) {
  ds.validate();
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ValidationError("split: all fractions must be positive");
    total += f;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw ValidationError("split: fractions must sum to 1");

  const std::size_t n = ds.n();
  const std::size_t n_val = static_cast<std::size_t>(fractions[1] * static_cast<double>(n));
  const std::size_t n_test = static_cast<std::size_t>(fractions[2] * static_cast<double>(n));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= n)
    throw ValidationError("split: a split would be empty at n = " + std::to_string(n));
  const std::size_t n_train = n - n_val - n_test;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, SeedStream::shuffle));
  rng.shuffle(order);

  const std::vector<std::size_t> tr(order.begin(), order.begin() + n_train);
  const std::vector<std::size_t> va(order.begin() + n_train, order.begin() + n_train + n_val);
  const std::vector<std::size_t> te(order.begin() + n_train + n_val, order.end());
  return {detail::take_rows(ds, tr), detail::take_rows(ds, va), detail::take_rows(ds, te)};
}

/// Seeded two-way carve; the first fraction of shuffled rows becomes the
/// held-out part. Used for validation carve-outs where no test split is
/// wanted.
inline std::pair<Dataset, Dataset> carve_holdout(const Dataset& ds, double fraction,
                                                 std::uint64_t seed) {
  ds.validate();
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ValidationError("carve_holdout: fraction must be in (0, 1)");
  const std::size_t n = ds.n();
  const std::size_t n_hold = static_cast<std::size_t>(fraction * static_cast<double>(n));
  if (n_hold == 0 || n_hold >= n)
    throw ValidationError("carve_holdout: a part would be empty");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, SeedStream::shuffle, 1));
  rng.shuffle(order);
  const std::vector<std::size_t> hold(order.begin(), order.begin() + n_hold);
  const std::vector<std::size_t> rest(order.begin() + n_hold, order.end());
  return {detail::take_rows(ds, rest), detail::take_rows(ds, hold)};
}

/// Gaussian blobs with unit within-class variance. Class means sit at
/// (separation / sqrt(2)) times orthonormal seeded directions, which puts
/// every pair of means exactly `separation` apart while classes fit in
/// the ambient dimension; extra classes beyond d fall back to random unit
/// directions. separation = 0 collapses all means onto the origin.
inline Dataset synth_clusters(std::size_t n_per_class, std::size_t d,
                              std::size_t n_classes, double separation,
                              std::uint64_t seed) {
  if (n_per_class == 0 || d == 0 || n_classes < 2)
    throw ValidationError("synth_clusters: sizes must be positive, classes >= 2");
  if (separation < 0.0) throw ValidationError("synth_clusters: negative separation");

  Rng rng(derive_seed(seed, SeedStream::synth));
  std::vector<Vec> dirs;
  dirs.reserve(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    Vec u(d);
    for (double& x : u) x = rng.gaussian();
    if (c < d)
      for (const Vec& prev : dirs) axpy(-dot(u, prev), prev, u);
    double nu = norm2(u);
    while (nu < 1e-12) {  // degenerate draw, or more classes than dimensions
      for (double& x : u) x = rng.gaussian();
      nu = norm2(u);
    }
    scale(u, 1.0 / nu);
    dirs.push_back(std::move(u));
  }

  const double s = separation / std::sqrt(2.0);
  Dataset ds;
  ds.features = Mat(n_per_class * n_classes, d);
  ds.n_classes = static_cast<int>(n_classes);
  ds.schema = FeatureSchema::all_continuous(d, true);
  std::size_t r = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t i = 0; i < n_per_class; ++i, ++r) {
      for (std::size_t j = 0; j < d; ++j)
        ds.features(r, j) = s * dirs[c][j] + rng.gaussian();
      ds.labels.push_back(static_cast<int>(c));
    }
  }
  ds.validate();
  return ds;
}

/// Digit file reader: one sample per line, the class label first, then
/// side^2 gray values in row-major order, whitespace separated. If any
/// value falls outside [-1, 1] the whole set is affinely mapped onto that
/// range using the global min and max.
inline Dataset load_digits(const std::string& path, std::size_t side = 16) {
  std::ifstream in(path);
  if (!in) throw IoError("load_digits: cannot open " + path);
  const std::size_t d = side * side;
  std::vector<double> values;
  std::vector<int> labels;
  int max_label = 0;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    std::istringstream ss(line);
    double lab;
    if (!(ss >> lab) || lab != std::floor(lab))
      throw ParseError("row " + std::to_string(row + 1) + ": bad digit label");
    labels.push_back(static_cast<int>(lab));
    max_label = std::max(max_label, static_cast<int>(lab));
    double x;
    std::size_t got = 0;
    while (ss >> x) {
      values.push_back(x);
      ++got;
    }
    if (got != d)
      throw ParseError("row " + std::to_string(row + 1) + ": expected " +
                       std::to_string(d) + " pixels, got " + std::to_string(got));
    ++row;
  }
  if (row == 0) throw ParseError("load_digits: no rows in " + path);

  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo < -1.0 || hi > 1.0) {
    const double span = hi - lo;
    if (span == 0.0) throw ValidationError("load_digits: constant pixel data");
    for (double& v : values) v = 2.0 * (v - lo) / span - 1.0;
  }

  Dataset ds;
  ds.features = Mat(row, d);
  std::copy(values.begin(), values.end(), ds.features.data().begin());
  ds.labels = std::move(labels);
  ds.n_classes = max_label + 1;
  ds.schema = FeatureSchema::all_continuous(d, false);
  ds.image_side = side;
  ds.validate();
  return ds;
}

/// Synthetic two-class 16x16 stroke images: a bright anti-aliased bar on
/// a dark ground, tilted into one of two angle bands (class 0 leans left,
/// class 1 leans right), with jittered center and pixel noise. The class
/// signal is the tilt, so rotation augmentation attacks exactly the
/// decision boundary.
inline Dataset synth_strokes(std::size_t n_per_class, std::uint64_t seed,
                             double band_center_deg = 24.0, double band_half_deg = 10.0,
                             double noise = 0.08) {
  if (n_per_class == 0) throw ValidationError("synth_strokes: empty class");
  constexpr std::size_t side = 16;
  Rng rng(derive_seed(seed, SeedStream::synth, 1));
  Dataset ds;
  ds.features = Mat(2 * n_per_class, side * side);
  ds.n_classes = 2;
  ds.image_side = side;
  ds.schema = FeatureSchema::all_continuous(side * side, false);

  const double c0 = (static_cast<double>(side) - 1.0) / 2.0;
  std::size_t r = 0;
  for (int cls = 0; cls < 2; ++cls) {
    for (std::size_t i = 0; i < n_per_class; ++i, ++r) {
      const double sign = cls == 0 ? -1.0 : 1.0;
      const double deg = sign * (band_center_deg + rng.uniform(-band_half_deg, band_half_deg));
      const double phi = deg * std::numbers::pi / 180.0;
      const double ox = rng.uniform(-1.5, 1.5);
      const double oy = rng.uniform(-1.5, 1.5);
      // Bar through (c0+ox, c0+oy) along direction (sin phi, cos phi) in
      // (row, col); distance to the axis sets the intensity.
      const double ux = std::sin(phi), uy = std::cos(phi);
      for (std::size_t row_px = 0; row_px < side; ++row_px)
        for (std::size_t col_px = 0; col_px < side; ++col_px) {
          const double dr = static_cast<double>(row_px) - (c0 + oy);
          const double dc = static_cast<double>(col_px) - (c0 + ox);
          const double dist = std::fabs(dc * ux - dr * uy);
          const double along = dc * uy + dr * ux;
          double v = -1.0;
          if (std::fabs(along) < 7.0) {
            const double t = std::max(0.0, 1.0 - dist / 1.8);
            v = -1.0 + 2.0 * t;
          }
          v += noise * rng.gaussian();
          ds.features(r, row_px * side + col_px) = std::clamp(v, -1.0, 1.0);
        }
      ds.labels.push_back(cls);
    }
  }
  ds.validate();
  return ds;
}

/// One-hot rows for classification training.
inline Mat one_hot(const std::vector<int>& labels, int n_classes) {
  Mat t(labels.size(), static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) t(i, static_cast<std::size_t>(labels[i])) = 1.0;
  return t;
}

/// Target matrix for a network with the given output width.
inline Mat training_targets(const Dataset& ds, std::size_t output_dim) {
  if (ds.regression()) {
    if (ds.targets.cols() != output_dim)
      throw ShapeError("training_targets: regression target width mismatch");
    return ds.targets;
  }
  if (output_dim == 1 && ds.n_classes == 2) {
    Mat t(ds.labels.size(), 1);
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
      t(i, 0) = static_cast<double>(ds.labels[i]);
    return t;
  }
  if (static_cast<std::size_t>(ds.n_classes) != output_dim)
    throw ShapeError("training_targets: network emits " + std::to_string(output_dim) +
                     " outputs for " + std::to_string(ds.n_classes) + " classes");
  return one_hot(ds.labels, ds.n_classes);
}

}  // namespace srr
