#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "srr/errors.hpp"
#include "srr/matrix.hpp"
#include "srr/objective.hpp"
#include "srr/rng.hpp"

namespace srr {

struct PowerIterationConfig {
  double eps = 1e-3;            // residual threshold ||Hv - lambda v||
  std::size_t max_iters = 10000;
  enum class EpsDecay { fixed, inverse_sqrt_epoch } eps_decay = EpsDecay::fixed;
  bool warm_start = true;       // reuse the previous direction across steps
  std::uint64_t seed = 0;

  void validate() const {
    if (!(eps > 0.0)) throw ValidationError("power iteration: eps must be positive");
    if (max_iters == 0) throw ValidationError("power iteration: max_iters must be positive");
  }

  /// Residual threshold for a given 1-based epoch under the decay policy.
  double eps_at_epoch(std::size_t epoch) const {
    if (eps_decay == EpsDecay::fixed || epoch <= 1) return eps;
    return eps / std::sqrt(static_cast<double>(epoch));
  }
};

/// Estimate of the extreme eigenpair of the Hessian at one point. lambda
/// is the signed Rayleigh value of the returned unit vector v; rho is its
/// magnitude. residual is ||Hv' - lambda v'|| for the pre-update iterate
/// v'; a residual above the threshold after max_iters marks
/// non-convergence without being an error.
struct SpectralEstimate {
  double lambda = 0.0;
  double rho = 0.0;
  Vec v;
  std::size_t iters = 0;
  double residual = 0.0;
};

namespace detail {
inline Vec random_unit(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Vec v(n);
  double nrm = 0.0;
  while (nrm == 0.0) {
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    nrm = norm2(v);
  }
  scale(v, 1.0 / nrm);
  return v;
}
}  // namespace detail

/// Repeated application of the Hessian via exact Hessian-vector products.
/// Each round computes u = H v, the Rayleigh value lambda = u.v and the
/// residual ||u - lambda v||, then replaces v by u/||u||. Convergence of
/// lambda goes with the square of the eigenvalue gap ratio per round, the
/// direction with the first power, so a small gap slows the direction
/// first.
///
/// A zero u triggers one restart from a fresh seeded direction; a second
/// zero is reported as a degenerate spectrum.
inline SpectralEstimate power_iteration(ObjectiveModel& obj, const Vec& w,
                                        const PowerIterationConfig& cfg,
                                        const Vec* warm = nullptr) {
  cfg.validate();
  detail::check_point(obj, w, "power_iteration");
  const std::size_t n = obj.dim();
  if (n == 0) throw ValidationError("power_iteration: empty objective");

  Vec v;
  if (warm) {
    detail::check_direction(obj, *warm, "power_iteration warm start");
    v = *warm;
    scale(v, 1.0 / norm2(v));
  } else {
    v = detail::random_unit(n, derive_seed(cfg.seed, SeedStream::power_iteration, 0));
  }

  SpectralEstimate est;
  bool restarted = false;
  for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
    Vec u = obj.hvp(w, v);
    const double nu = norm2(u);
    if (!std::isfinite(nu)) throw NumericalError("power_iteration: non-finite Hv");
    if (nu == 0.0) {
      if (restarted)
        throw DegenerateSpectrumError(
            "power_iteration: Hv vanished twice; spectrum indistinguishable from zero");
      restarted = true;
      v = detail::random_unit(n, derive_seed(cfg.seed, SeedStream::power_iteration, 1));
      est.iters = iter;
      continue;
    }
    const double lambda = dot(u, v);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = u[i] - lambda * v[i];
      res += d * d;
    }
    res = std::sqrt(res);
    scale(u, 1.0 / nu);

    est.lambda = lambda;
    est.rho = std::fabs(lambda);
    est.v = u;
    est.iters = iter;
    est.residual = res;
    if (res <= cfg.eps) return est;
    v = std::move(u);
  }
  return est;
}

/// Gradient of the spectral radius rho(w) = |lambda_max(H(w))| along the
/// estimated extreme eigenvector: sign(lambda) times the third-order form
/// at v. Exact when v is an exact unit eigenvector of the extreme
/// eigenvalue; with a power-iteration v the error follows the residual.
inline Vec spectral_radius_gradient(ObjectiveModel& obj, const Vec& w,
                                    const SpectralEstimate& est) {
  if (est.v.empty()) throw ValidationError("spectral_radius_gradient: estimate has no vector");
  Vec g = third_order_form(obj, w, est.v);
  if (est.lambda < 0.0) scale(g, -1.0);
  return g;
}

}  // namespace srr
