#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "srr/hvp.hpp"
#include "srr/matrix.hpp"
#include "srr/network.hpp"
#include "srr/objective.hpp"
#include "srr/oracle.hpp"
#include "srr/rng.hpp"
#include "srr/spectral.hpp"
#include "srr/train.hpp"

namespace srr::validate {

/// Cross-checks of the fast directional operators against the slow
/// oracles, runnable on demand from the command line. Each check reports
/// a measured error and the bound it must stay under; the suite passes
/// only if every check does.

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tol = 0.0;
};

inline double rel_err(const Vec& got, const Vec& want) {
  if (got.size() != want.size()) throw ShapeError("rel_err: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double d = got[i] - want[i];
    num += d * d;
    den += want[i] * want[i];
  }
  den = std::sqrt(den);
  num = std::sqrt(num);
  return den < 1e-12 ? num : num / den;
}

/// ||hvp - fd_hvp|| / ||fd_hvp|| for a unit direction.
inline double hvp_fd_error(ObjectiveModel& obj, const Vec& w, const Vec& v,
                           double eps = oracle::kFdStepFirst) {
  const Vec fast = hessian_vector_product(obj, w, v);
  const Vec slow = oracle::fd_hvp(obj, w, v, eps);
  return rel_err(fast, slow);
}

/// Directional agreement of the third-order form: u . T(w, v) against a
/// central difference of v^T H(w) v along u, both via exact hvp calls.
inline double third_form_directional_error(ObjectiveModel& obj, const Vec& w, const Vec& v,
                                           const Vec& u,
                                           double eps = oracle::kFdStepSecond) {
  const Vec t = third_order_form(obj, w, v);
  const double fast = dot(t, u);
  Vec wp = w, wm = w;
  axpy(eps, u, wp);
  axpy(-eps, u, wm);
  const double qp = dot(v, obj.hvp(wp, v));
  const double qm = dot(v, obj.hvp(wm, v));
  const double slow = (qp - qm) / (2.0 * eps);
  const double den = std::fabs(slow);
  return den < 1e-12 ? std::fabs(fast - slow) : std::fabs(fast - slow) / den;
}

/// Directional agreement of the radius gradient: u . grad rho against a
/// central difference of rho, with rho on both sides re-estimated by
/// power iteration warm-started from the center direction.
inline double radius_gradient_fd_error(ObjectiveModel& obj, const Vec& w,
                                       const Vec& u, double fd_eps = 1e-4,
                                       double pi_eps = 1e-10) {
  PowerIterationConfig pic;
  pic.eps = pi_eps;
  pic.max_iters = 100000;
  pic.seed = 17;
  const SpectralEstimate center = power_iteration(obj, w, pic);
  const Vec grad = spectral_radius_gradient(obj, w, center);
  const double fast = dot(grad, u);

  Vec wp = w, wm = w;
  axpy(fd_eps, u, wp);
  axpy(-fd_eps, u, wm);
  const SpectralEstimate ep = power_iteration(obj, wp, pic, &center.v);
  const SpectralEstimate em = power_iteration(obj, wm, pic, &center.v);
  const double slow = (ep.rho - em.rho) / (2.0 * fd_eps);
  const double den = std::fabs(slow);
  return den < 1e-10 ? std::fabs(fast - slow) : std::fabs(fast - slow) / den;
}

namespace detail {

inline NetObjective fixture_objective(std::size_t input_dim,
                                      const std::vector<std::size_t>& hidden,
                                      std::size_t out_dim, std::size_t batch,
                                      std::uint64_t seed, double param_sd = 0.5) {
  Network net = make_mlp(input_dim, hidden, out_dim, ActivationKind::tanh, seed);
  randomize_params(net, seed, param_sd);
  Rng rng(derive_seed(seed, SeedStream::synth, 3));
  Mat x(batch, input_dim), t(batch, out_dim);
  for (double& v : x.data()) v = rng.gaussian();
  for (double& v : t.data()) v = rng.gaussian();
  return NetObjective(std::move(net), LossModel{LossKind::mse}, std::move(x), std::move(t));
}

inline Vec random_unit_vec(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Vec v(n);
  for (double& x : v) x = rng.gaussian();
  scale(v, 1.0 / norm2(v));
  return v;
}

}  // namespace detail

/// Largest h increase over a descent run, measured relative to |h|; a
/// negative or zero return means the trajectory was monotone.
inline double max_descent_violation(const TrainReport& report) {
  double worst = -1.0;
  for (std::size_t k = 1; k < report.epochs.size(); ++k) {
    const double prev = report.epochs[k - 1].h;
    const double cur = report.epochs[k].h;
    worst = std::max(worst, (cur - prev) / std::max(1.0, std::fabs(prev)));
  }
  return worst;
}

inline std::vector<CheckResult> run_validation_suite() {
  std::vector<CheckResult> results;
  auto add = [&](const std::string& name, double measured, double tol) {
    results.push_back({name, measured <= tol, measured, tol});
  };

  {  // gradient against the value-only finite difference
    NetObjective obj = detail::fixture_objective(4, {5}, 3, 8, 11);
    const Vec w = obj.net().flatten();
    add("gradient-vs-fd", rel_err(obj.gradient(w), oracle::fd_gradient(obj, w)), 1e-6);
  }
  {  // curvature product against the gradient finite difference, two sizes
    NetObjective small = detail::fixture_objective(4, {5}, 3, 8, 12);
    const Vec ws = small.net().flatten();
    add("hvp-vs-fd-small",
        hvp_fd_error(small, ws, detail::random_unit_vec(ws.size(), 101)), 1e-6);
    NetObjective wide = detail::fixture_objective(10, {20, 20, 20}, 3, 16, 13, 0.3);
    const Vec ww = wide.net().flatten();
    add("hvp-vs-fd-wide",
        hvp_fd_error(wide, ww, detail::random_unit_vec(ww.size(), 102)), 1e-6);
  }
  {  // third-order form against the nested difference
    NetObjective obj = detail::fixture_objective(4, {6, 5}, 2, 8, 14);
    const Vec w = obj.net().flatten();
    add("third-form-vs-fd",
        third_form_directional_error(obj, w, detail::random_unit_vec(w.size(), 103),
                                     detail::random_unit_vec(w.size(), 104)),
        1e-5);
  }
  {  // quadratic objectives must produce an identically zero third form
    Rng rng(7);
    Mat a(6, 6);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = i; j < 6; ++j) a(i, j) = a(j, i) = rng.gaussian();
    oracle::QuadraticObjective quad(a);
    Vec w = detail::random_unit_vec(6, 105);
    const Vec t = quad.third_form(w, detail::random_unit_vec(6, 106));
    add("third-form-quadratic-zero", norm2(t), 1e-12);

    Network lin = make_mlp(5, {}, 2, ActivationKind::tanh, 21);
    randomize_params(lin, 21, 0.5);
    Rng drng(22);
    Mat x(6, 5), tt(6, 2);
    for (double& v : x.data()) v = drng.gaussian();
    for (double& v : tt.data()) v = drng.gaussian();
    NetObjective netquad(std::move(lin), LossModel{LossKind::mse}, std::move(x),
                         std::move(tt));
    const Vec wl = netquad.net().flatten();
    add("third-form-linear-net-zero",
        norm2(netquad.third_form(wl, detail::random_unit_vec(wl.size(), 107))), 1e-12);
  }
  {  // power iteration on a known spectrum
    oracle::QuadraticObjective diag = oracle::QuadraticObjective::diagonal({1.0, 3.0});
    PowerIterationConfig pic;
    pic.eps = 1e-12;
    pic.max_iters = 10000;
    const Vec warm{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    const SpectralEstimate est = power_iteration(diag, {0.0, 0.0}, pic, &warm);
    add("power-iteration-diag-rho", std::fabs(est.rho - 3.0), 1e-9);
    add("power-iteration-diag-align", 1.0 - std::fabs(est.v[1]), 1e-9);
  }
  {  // power iteration against the dense eigensolver on a net Hessian
    NetObjective obj = detail::fixture_objective(4, {5}, 2, 8, 15);
    const Vec w = obj.net().flatten();
    const oracle::EigenDecomposition eig =
        oracle::sym_eigen(oracle::dense_hessian(obj, w));
    PowerIterationConfig pic;
    pic.eps = 1e-10;
    pic.max_iters = 100000;
    pic.seed = 5;
    const SpectralEstimate est = power_iteration(obj, w, pic);
    add("power-iteration-vs-jacobi", std::fabs(est.rho - std::fabs(eig.values[0])), 1e-6);
  }
  {  // radius gradient against the finite difference of rho
    NetObjective obj = detail::fixture_objective(3, {4}, 2, 8, 16);
    const Vec w = obj.net().flatten();
    add("radius-gradient-vs-fd",
        radius_gradient_fd_error(obj, w, detail::random_unit_vec(w.size(), 108)), 1e-4);
  }
  {  // guaranteed-step descent on the quartic and on a net
    oracle::MonomialObjective quartic(1.0, 4);
    const Vec w0{0.9};
    const oracle::CurvatureBounds qb =
        oracle::estimate_curvature_bounds(quartic, w0, 8, 0.3, 31, 1.5);
    TrainConfig tc;
    tc.schedule = LrSchedule::constant;
    tc.reg = {0.01, 0.0};
    tc.alpha0 = 1.0 / (qb.l1 + tc.reg.mu * qb.l2);
    tc.max_epochs = 60;
    tc.convergence_grad_tol = 0.0;
    tc.exact_dim_cap = 500;
    add("descent-quartic", max_descent_violation(gd_train(quartic, w0, tc)), 1e-12);

    NetObjective obj = detail::fixture_objective(2, {3}, 1, 6, 17);
    const Vec wn = obj.net().flatten();
    const oracle::CurvatureBounds nb =
        oracle::estimate_curvature_bounds(obj, wn, 8, 0.5, 32, 3.0);
    TrainConfig nc;
    nc.schedule = LrSchedule::constant;
    nc.reg = {0.01, 0.0};
    nc.alpha0 = 1.0 / (nb.l1 + nc.reg.mu * nb.l2);
    nc.max_epochs = 60;
    nc.convergence_grad_tol = 0.0;
    add("descent-net", max_descent_violation(gd_train(obj, wn, nc)), 1e-12);
  }
  return results;
}

inline bool print_validation(std::ostream& out, const std::vector<CheckResult>& results) {
  bool all = true;
  for (const CheckResult& r : results) {
    out << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "  measured=" << r.measured
        << "  tol=" << r.tol << "\n";
    all = all && r.pass;
  }
  out << (all ? "validation suite: all checks passed" : "validation suite: FAILURES above")
      << "\n";
  return all;
}

}  // namespace srr::validate
