#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "srr/data.hpp"
#include "srr/errors.hpp"
#include "srr/infer.hpp"
#include "srr/matrix.hpp"
#include "srr/rng.hpp"

namespace srr {

/// Importance weights for a mean shift of the test marginal. With
/// z-scored features, shifting eligible column j by delta_j multiplies
/// sample i's density by phi(x_ij - delta_j) / phi(x_ij), and the product
/// over columns collapses to
///   exp(sum_j (x_ij delta_j - delta_j^2 / 2)).
/// Columns with delta_j = 0 contribute a factor of exactly 1, so
/// ineligible columns can never move a weight. A non z-scored column with
/// a nonzero shift (sample std outside [0.5, 2]) is reported through the
/// warning sink but does not fail the call.
inline Vec shift_weights(const Mat& x, const Vec& delta,
                         std::vector<std::string>* warnings = nullptr) {
  if (delta.size() != x.cols())
    throw ShapeError("shift_weights: delta length does not match feature width");
  if (x.rows() == 0) throw ValidationError("shift_weights: empty test set");
  if (!all_finite(delta)) throw ValidationError("shift_weights: non-finite delta");

  if (warnings) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (delta[c] == 0.0) continue;
      double m = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) m += x(r, c);
      m /= static_cast<double>(x.rows());
      double var = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const double d = x(r, c) - m;
        var += d * d;
      }
      const double sd = std::sqrt(var / static_cast<double>(x.rows()));
      if (sd < 0.5 || sd > 2.0)
        warnings->push_back("shift_weights: column " + std::to_string(c) +
                            " has std " + std::to_string(sd) +
                            ", outside [0.5, 2]; weights assume z-scored input");
    }
  }

  double half_sq = 0.0;
  for (double dj : delta) half_sq += 0.5 * dj * dj;
  Vec w(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) s += x(r, c) * delta[c];
    w[r] = std::exp(s - half_sq);
  }
  return w;
}

struct ShiftSpec {
  double sigma_shift = 0.05;
  std::size_t n_trials = 1000;
  std::uint64_t seed = 0;

  void validate() const {
    if (sigma_shift < 0.0) throw ValidationError("shift: sigma_shift must be non-negative");
    if (n_trials == 0) throw ValidationError("shift: n_trials must be positive");
  }
};

struct ShiftTrial {
  std::size_t trial_id = 0;
  Vec delta;
  double l1_norm = 0.0;
  std::vector<double> weighted_acc;  // one entry per model, model order preserved
};

struct ShiftTrialTable {
  std::vector<std::string> model_names;
  std::vector<ShiftTrial> rows;
  std::vector<std::string> warnings;
};

/// Paired trials: every model sees the same shift draws on the same test
/// set. Predictions do not depend on the shift, so each model's
/// correctness vector is computed once up front and each trial only
/// reweights it. Per-trial draws come from (seed, trial_id), which makes
/// trials independent of evaluation order.
inline ShiftTrialTable run_shift_trials(const std::vector<ModelBundle>& models,
                                        const Dataset& test, const ShiftSpec& spec) {
  spec.validate();
  test.validate();
  if (models.empty()) throw ValidationError("run_shift_trials: no models");
  const std::vector<std::size_t> eligible = test.schema.eligible_columns();
  if (eligible.empty())
    throw ValidationError("run_shift_trials: schema has no shift-eligible columns");

  std::vector<std::vector<double>> correct(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    const std::vector<int> pred =
        predict_labels(models[m].net, models[m].loss, test.features);
    correct[m].resize(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
      correct[m][i] = pred[i] == test.labels[i] ? 1.0 : 0.0;
  }

  ShiftTrialTable table;
  for (const ModelBundle& m : models) table.model_names.push_back(m.name);
  table.rows.reserve(spec.n_trials);

  bool warned = false;
  for (std::size_t t = 0; t < spec.n_trials; ++t) {
    Rng rng(derive_seed(spec.seed, SeedStream::shift, t));
    ShiftTrial trial;
    trial.trial_id = t;
    trial.delta.assign(test.features.cols(), 0.0);
    for (std::size_t c : eligible) trial.delta[c] = spec.sigma_shift * rng.gaussian();
    for (double dj : trial.delta) trial.l1_norm += std::fabs(dj);

    const Vec w = shift_weights(test.features, trial.delta,
                                warned ? nullptr : &table.warnings);
    warned = true;  // the std warning is identical across trials; record once

    trial.weighted_acc.resize(models.size());
    for (std::size_t m = 0; m < models.size(); ++m) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        num += w[i] * correct[m][i];
        den += w[i];
      }
      if (den == 0.0)
        throw NumericalError("run_shift_trials: weights underflowed to zero at trial " +
                             std::to_string(t));
      trial.weighted_acc[m] = num / den;
    }
    table.rows.push_back(std::move(trial));
  }
  return table;
}

struct AugmentConfig {
  std::size_t max_crop_px = 0;   // integer translation radius, 0..2
  double max_rot_deg = 0.0;      // rotation half-range
  double pad_fill = -1.0;        // value revealed outside the original frame
  std::uint64_t seed = 0;
  bool rotate_first = true;      // rotation then translation by default

  void validate() const {
    if (max_crop_px > 2) throw ValidationError("augment: max_crop_px must be 0, 1 or 2");
    if (max_rot_deg < 0.0) throw ValidationError("augment: max_rot_deg must be non-negative");
  }
};

namespace detail {

inline Mat rotate_bilinear(const Mat& img, double deg, double pad_fill) {
  const std::size_t side = img.rows();
  const double c0 = (static_cast<double>(side) - 1.0) / 2.0;
  const double rad = deg * std::numbers::pi / 180.0;
  const double cs = std::cos(rad), sn = std::sin(rad);
  Mat out(side, side);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) {
      const double dr = static_cast<double>(r) - c0;
      const double dc = static_cast<double>(c) - c0;
      const double sr = c0 + cs * dr - sn * dc;
      const double sc = c0 + sn * dr + cs * dc;
      const double fr = std::floor(sr), fc = std::floor(sc);
      const double ar = sr - fr, ac = sc - fc;
      double acc = 0.0;
      for (int ir = 0; ir < 2; ++ir)
        for (int ic = 0; ic < 2; ++ic) {
          const double wgt = (ir ? ar : 1.0 - ar) * (ic ? ac : 1.0 - ac);
          if (wgt == 0.0) continue;
          const double rr = fr + ir, cc = fc + ic;
          double v = pad_fill;
          if (rr >= 0.0 && cc >= 0.0 && rr < static_cast<double>(side) &&
              cc < static_cast<double>(side))
            v = img(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
          acc += wgt * v;
        }
      out(r, c) = acc;
    }
  return out;
}

inline Mat translate(const Mat& img, int dx, int dy, double pad_fill) {
  const std::size_t side = img.rows();
  Mat out(side, side);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) {
      const long sr = static_cast<long>(r) - dy;
      const long sc = static_cast<long>(c) - dx;
      out(r, c) = (sr >= 0 && sc >= 0 && sr < static_cast<long>(side) &&
                   sc < static_cast<long>(side))
                      ? img(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc))
                      : pad_fill;
    }
  return out;
}

}  // namespace detail

/// One augmented copy of a square image. Draw order is fixed: rotation
/// angle, column shift, row shift; the angle is uniform in +-max_rot_deg
/// (bilinear resample, pad_fill outside the frame) and the shifts uniform
/// on the integer square +-max_crop_px. A zero-strength config returns
/// the input bit for bit.
inline Mat augment(const Mat& image, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  if (image.rows() != image.cols() || image.rows() == 0)
    throw ShapeError("augment: image must be square and non-empty");

  const double deg = rng.uniform(-cfg.max_rot_deg, cfg.max_rot_deg);
  const int span = 2 * static_cast<int>(cfg.max_crop_px) + 1;
  const int dx = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(span))) -
                 static_cast<int>(cfg.max_crop_px);
  const int dy = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(span))) -
                 static_cast<int>(cfg.max_crop_px);

  Mat out = image;
  auto rotate = [&] {
    if (deg != 0.0) out = detail::rotate_bilinear(out, deg, cfg.pad_fill);
  };
  auto crop = [&] {
    if (dx != 0 || dy != 0) out = detail::translate(out, dx, dy, cfg.pad_fill);
  };
  if (cfg.rotate_first) {
    rotate();
    crop();
  } else {
    crop();
    rotate();
  }
  return out;
}

/// Accuracy on a singly augmented copy of every test image, drawn with a
/// per-image seed derived from (cfg.seed, image index). With zero
/// strengths this equals plain test accuracy exactly.
inline double run_augmented_eval(const ModelBundle& model, const Dataset& test,
                                 const AugmentConfig& cfg) {
  cfg.validate();
  test.validate();
  if (test.image_side == 0)
    throw ValidationError("run_augmented_eval: dataset has no image geometry");
  const std::size_t side = test.image_side;

  Mat aug_features(test.n(), side * side);
  Mat img(side, side);
  for (std::size_t i = 0; i < test.n(); ++i) {
    for (std::size_t r = 0; r < side; ++r)
      for (std::size_t c = 0; c < side; ++c) img(r, c) = test.features(i, r * side + c);
    Rng rng(derive_seed(cfg.seed, SeedStream::augment, i));
    const Mat out = augment(img, cfg, rng);
    for (std::size_t r = 0; r < side; ++r)
      for (std::size_t c = 0; c < side; ++c) aug_features(i, r * side + c) = out(r, c);
  }
  return accuracy(predict_labels(model.net, model.loss, aug_features), test.labels);
}

struct ModelSlope {
  std::string name;
  double slope = 0.0;
  double std_err = 0.0;
  double p_value = 1.0;
  double r2 = 0.0;
};

struct PairSlope {
  std::string name_a, name_b;
  double slope = 0.0;
  double std_err = 0.0;
  double p_value = 1.0;
};

/// Accuracy-versus-shift-size regressions. p-values use the normal
/// approximation to the t statistic (two sided); that choice is recorded
/// in p_method so downstream readers need not guess.
struct SlopeReport {
  std::vector<ModelSlope> models;
  std::vector<PairSlope> pairwise;
  std::string p_method = "normal_approx";
};

namespace detail {

struct OlsFit {
  double slope = 0.0, intercept = 0.0, std_err = 0.0, p_value = 1.0, r2 = 0.0;
};

/// Straight-line least squares of y on x with the two degenerate guards:
/// zero predictor variance is an error (the caller cannot regress on a
/// constant), zero residual variance pins the p-value by the slope alone.
inline OlsFit ols(const Vec& x, const Vec& y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw ShapeError("ols: length mismatch");
  if (n < 3) throw ValidationError("ols: need at least 3 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0)
    throw DegenerateRegressionError("ols: predictor has zero variance");

  OlsFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += r * r;
  }
  fit.r2 = syy == 0.0 ? 1.0 : 1.0 - rss / syy;
  const double sigma2 = rss / static_cast<double>(n - 2);
  fit.std_err = std::sqrt(sigma2 / sxx);
  if (fit.std_err == 0.0) {
    fit.p_value = fit.slope == 0.0 ? 1.0 : 0.0;
  } else {
    const double t = fit.slope / fit.std_err;
    fit.p_value = std::erfc(std::fabs(t) / std::sqrt(2.0));
  }
  return fit;
}

}  // namespace detail

/// Per-model slope of weighted accuracy on the shift L1 norm, plus paired
/// model comparisons. The pairwise slope regresses the per-trial accuracy
/// difference on the same L1 norms, which cancels trial-level noise the
/// two models share.
inline SlopeReport slope_stats(const ShiftTrialTable& table) {
  if (table.rows.size() < 3)
    throw ValidationError("slope_stats: need at least 3 trials");
  const std::size_t n = table.rows.size();
  const std::size_t m = table.model_names.size();
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = table.rows[i].l1_norm;

  SlopeReport report;
  for (std::size_t a = 0; a < m; ++a) {
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = table.rows[i].weighted_acc[a];
    const detail::OlsFit fit = detail::ols(x, y);
    report.models.push_back(
        {table.model_names[a], fit.slope, fit.std_err, fit.p_value, fit.r2});
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) {
      Vec y(n);
      for (std::size_t i = 0; i < n; ++i)
        y[i] = table.rows[i].weighted_acc[a] - table.rows[i].weighted_acc[b];
      const detail::OlsFit fit = detail::ols(x, y);
      report.pairwise.push_back({table.model_names[a], table.model_names[b], fit.slope,
                                 fit.std_err, fit.p_value});
    }
  return report;
}

}  // namespace srr
