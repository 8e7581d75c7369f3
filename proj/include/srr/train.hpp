#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "srr/data.hpp"
#include "srr/errors.hpp"
#include "srr/hvp.hpp"
#include "srr/infer.hpp"
#include "srr/matrix.hpp"
#include "srr/objective.hpp"
#include "srr/oracle.hpp"
#include "srr/spectral.hpp"

namespace srr {

/// Penalty h(w) = f(w) + mu * max(0, rho(w) - K). mu = 0 switches the
/// penalty off exactly; K is the largest curvature magnitude tolerated
/// for free.
struct RegularizerConfig {
  double mu = 0.0;
  double K = 0.0;

  void validate() const {
    if (mu < 0.0) throw ValidationError("regularizer: mu must be non-negative");
    if (K < 0.0) throw ValidationError("regularizer: K must be non-negative");
  }
};

enum class LrSchedule { constant, inverse_epoch };
enum class UpdateRule { sgd, adam };

struct TrainConfig {
  double alpha0 = 0.5;
  LrSchedule schedule = LrSchedule::inverse_epoch;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 100;
  PowerIterationConfig pi{};
  RegularizerConfig reg{};
  std::uint64_t seed = 0;
  double convergence_grad_tol = 1e-8;
  std::size_t exact_dim_cap = 500;  // gd_train refuses larger objectives
  UpdateRule update_rule = UpdateRule::sgd;

  double alpha_at(std::size_t epoch) const {
    return schedule == LrSchedule::constant ? alpha0
                                            : alpha0 / static_cast<double>(epoch);
  }

  void validate() const {
    if (!(alpha0 > 0.0)) throw ValidationError("train: alpha0 must be positive");
    if (batch_size == 0) throw ValidationError("train: batch_size must be positive");
    if (max_epochs == 0) throw ValidationError("train: max_epochs must be positive");
    if (!(convergence_grad_tol >= 0.0))
      throw ValidationError("train: convergence_grad_tol must be non-negative");
    pi.validate();
    reg.validate();
  }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double f = 0.0;
  double rho_batch = 0.0;
  double h = 0.0;
  double grad_norm = 0.0;
  std::size_t pi_iters = 0;
  double pi_residual = 0.0;
  double wall_ms = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  Vec final_w;
  Vec best_val_w;
  double best_val_metric = 0.0;
  bool has_val = false;
  bool converged = false;  // gradient fell under the tolerance before the epoch cap
};

/// Objective value and gradient with the spectral penalty attached. The
/// penalty is active only while the estimated radius exceeds K; at the
/// kink the unpenalized branch is taken. The estimate must come from the
/// same objective and point or the result is meaningless.
inline std::pair<double, Vec> regularized_value_and_grad(ObjectiveModel& obj, const Vec& w,
                                                         const RegularizerConfig& reg,
                                                         const SpectralEstimate& est) {
  reg.validate();
  const double f = obj.value(w);
  Vec g = obj.gradient(w);
  if (reg.mu > 0.0 && est.rho > reg.K) {
    const Vec gr = spectral_radius_gradient(obj, w, est);
    axpy(reg.mu, gr, g);
    return {f + reg.mu * (est.rho - reg.K), std::move(g)};
  }
  return {f, std::move(g)};
}

namespace detail {

struct AdamState {
  Vec m, s;
  std::size_t t = 0;
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double eps = 1e-8;

  void step(Vec& w, const Vec& g, double alpha) {
    if (m.empty()) {
      m.assign(w.size(), 0.0);
      s.assign(w.size(), 0.0);
    }
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      s[i] = beta2 * s[i] + (1.0 - beta2) * g[i] * g[i];
      w[i] -= alpha * (m[i] / c1) / (std::sqrt(s[i] / c2) + eps);
    }
  }
};

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace detail

/// Full-information descent: at every iterate the Hessian is formed
/// column by column, its extreme eigenpair solved exactly, and the step
/// taken along the gradient of h. Cost is n hvp calls plus an n x n
/// eigensolve per step, so the dimension is capped. One record per
/// iteration; rho there is exact, not a batch estimate.
inline TrainReport gd_train(ObjectiveModel& obj, const Vec& w0, const TrainConfig& cfg) {
  cfg.validate();
  detail::check_point(obj, w0, "gd_train");
  if (obj.dim() > cfg.exact_dim_cap)
    throw ConfigError("gd_train: dimension " + std::to_string(obj.dim()) +
                      " exceeds exact-mode cap " + std::to_string(cfg.exact_dim_cap) +
                      "; use sgd_train");

  TrainReport report;
  Vec w = w0;
  for (std::size_t k = 1; k <= cfg.max_epochs; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const oracle::DenseMatrix hess = oracle::dense_hessian(obj, w, cfg.exact_dim_cap);
    const oracle::EigenDecomposition eig = oracle::sym_eigen(hess);
    SpectralEstimate est;
    est.lambda = eig.values[0];
    est.rho = std::fabs(est.lambda);
    est.v.resize(obj.dim());
    for (std::size_t i = 0; i < est.v.size(); ++i) est.v[i] = eig.vectors(i, 0);

    auto [h, grad] = regularized_value_and_grad(obj, w, cfg.reg, est);
    if (!std::isfinite(h))
      throw DivergenceError("gd_train: objective non-finite at iteration " +
                            std::to_string(k));
    const double gn = norm2(grad);

    EpochRecord rec;
    rec.epoch = k;
    rec.f = obj.value(w);
    rec.rho_batch = est.rho;
    rec.h = h;
    rec.grad_norm = gn;
    rec.wall_ms = detail::elapsed_ms(t0);
    report.epochs.push_back(rec);

    if (gn <= cfg.convergence_grad_tol) {
      report.converged = true;
      break;
    }
    axpy(-cfg.alpha_at(k), grad, w);
  }
  report.final_w = std::move(w);
  return report;
}

/// Mini-batch descent with the penalty evaluated per batch. The power
/// iteration runs on the frozen current batch; its direction is carried
/// to the next step as a warm start when enabled. Per-epoch records are
/// measured on one seeded batch drawn at epoch end, so they are
/// reproducible and independent of the update stream.
inline TrainReport sgd_train(const Dataset& train, Network& net, const LossModel& loss,
                             const TrainConfig& cfg, const Dataset* val = nullptr) {
  cfg.validate();
  const std::size_t n = train.n();
  if (n == 0) throw ValidationError("sgd_train: empty dataset");
  if (cfg.batch_size > n)
    throw ValidationError("sgd_train: batch_size " + std::to_string(cfg.batch_size) +
                          " exceeds dataset size " + std::to_string(n));
  if (train.features.cols() != net.input_dim())
    throw ShapeError("sgd_train: feature width does not match network input");

  const Mat targets = training_targets(train, net.output_dim());
  Vec w = net.flatten();
  NetObjective obj(net, loss, train.features, targets);  // batch set per step

  TrainReport report;
  report.has_val = val != nullptr;
  Vec warm;
  detail::AdamState adam;
  std::size_t step = 0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double alpha = cfg.alpha_at(epoch);
    const double eps_e = cfg.pi.eps_at_epoch(epoch);

    Rng shuffle_rng(derive_seed(cfg.seed, SeedStream::shuffle, epoch));
    shuffle_rng.shuffle(order);

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t bsz = std::min(cfg.batch_size, n - start);
      Mat bx(bsz, train.features.cols()), bt(bsz, targets.cols());
      for (std::size_t i = 0; i < bsz; ++i) {
        const std::size_t src = order[start + i];
        for (std::size_t c = 0; c < bx.cols(); ++c) bx(i, c) = train.features(src, c);
        for (std::size_t c = 0; c < bt.cols(); ++c) bt(i, c) = targets(src, c);
      }
      obj.set_batch(std::move(bx), std::move(bt));
      ++step;

      double h;
      Vec grad;
      if (cfg.reg.mu > 0.0) {
        PowerIterationConfig pic = cfg.pi;
        pic.eps = eps_e;
        pic.seed = derive_seed(cfg.seed, SeedStream::power_iteration, step);
        const SpectralEstimate est = power_iteration(
            obj, w, pic, (cfg.pi.warm_start && !warm.empty()) ? &warm : nullptr);
        if (cfg.pi.warm_start) warm = est.v;
        std::tie(h, grad) = regularized_value_and_grad(obj, w, cfg.reg, est);
      } else {
        h = obj.value(w);
        grad = obj.gradient(w);
      }
      if (!std::isfinite(h))
        throw DivergenceError("sgd_train: objective non-finite at step " +
                              std::to_string(step));

      if (cfg.update_rule == UpdateRule::adam)
        adam.step(w, grad, alpha);
      else
        axpy(-alpha, grad, w);
    }

    // Epoch-end measurement on its own seeded batch and cold-started
    // power iteration; nothing here feeds back into the update stream.
    Rng eval_rng(derive_seed(cfg.seed, SeedStream::epoch_eval, epoch));
    std::vector<std::size_t> eval_idx(n);
    std::iota(eval_idx.begin(), eval_idx.end(), 0);
    eval_rng.shuffle(eval_idx);
    const std::size_t esz = std::min(cfg.batch_size, n);
    Mat ex(esz, train.features.cols()), et(esz, targets.cols());
    for (std::size_t i = 0; i < esz; ++i) {
      const std::size_t src = eval_idx[i];
      for (std::size_t c = 0; c < ex.cols(); ++c) ex(i, c) = train.features(src, c);
      for (std::size_t c = 0; c < et.cols(); ++c) et(i, c) = targets(src, c);
    }
    obj.set_batch(std::move(ex), std::move(et));

    PowerIterationConfig pic = cfg.pi;
    pic.eps = eps_e;
    pic.seed = derive_seed(cfg.seed, SeedStream::epoch_eval, cfg.max_epochs + epoch);
    const SpectralEstimate est = power_iteration(obj, w, pic);
    auto [h_e, grad_e] = regularized_value_and_grad(obj, w, cfg.reg, est);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.f = obj.value(w);
    rec.rho_batch = est.rho;
    rec.h = h_e;
    rec.grad_norm = norm2(grad_e);
    rec.pi_iters = est.iters;
    rec.pi_residual = est.residual;
    rec.wall_ms = detail::elapsed_ms(t0);
    report.epochs.push_back(rec);

    if (val) {
      net.set_params(w);
      const double acc = dataset_accuracy(net, loss, *val);
      if (report.best_val_w.empty() || acc > report.best_val_metric) {
        report.best_val_metric = acc;
        report.best_val_w = w;
      }
    }
    if (rec.grad_norm <= cfg.convergence_grad_tol) {
      report.converged = true;
      break;
    }
  }

  net.set_params(w);
  report.final_w = std::move(w);
  if (report.best_val_w.empty()) {
    report.best_val_w = report.final_w;
    report.best_val_metric = 0.0;
  }
  return report;
}

}  // namespace srr
