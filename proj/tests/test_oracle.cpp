#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "srr/oracle.hpp"
#include "srr/rng.hpp"

using namespace srr;
using namespace srr::oracle;

namespace {

DenseMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix m;
  m.n = n;
  m.a.assign(n * n, 0.0);
  m.symmetric = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double x = rng.gaussian();
      m.a[i * n + j] = x;
      m.a[j * n + i] = x;
    }
  return m;
}

}  // namespace

TEST_CASE("jacobi solves a known 2x2") {
  DenseMatrix m;
  m.n = 2;
  m.a = {2, 1, 1, 2};
  m.symmetric = true;
  const EigenDecomposition e = sym_eigen(m);
  REQUIRE_THAT(e.values[0], Catch::Matchers::WithinAbs(3.0, 1e-12));
  REQUIRE_THAT(e.values[1], Catch::Matchers::WithinAbs(1.0, 1e-12));
  // eigenvector of 3 is (1,1)/sqrt(2) up to sign
  REQUIRE_THAT(std::fabs(e.vectors(0, 0)), Catch::Matchers::WithinAbs(std::sqrt(0.5), 1e-12));
  REQUIRE_THAT(std::fabs(e.vectors(1, 0)), Catch::Matchers::WithinAbs(std::sqrt(0.5), 1e-12));
  REQUIRE(e.vectors(0, 0) * e.vectors(1, 0) > 0.0);
}

TEST_CASE("jacobi reconstructs a random matrix") {
  const std::size_t n = 20;
  const DenseMatrix m = random_symmetric(n, 6);
  const EigenDecomposition e = sym_eigen(m);

  double norm_a = 0.0, norm_diff = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double rec = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        rec += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
      const double d = rec - m.at(i, j);
      norm_diff += d * d;
      norm_a += m.at(i, j) * m.at(i, j);
    }
  REQUIRE(std::sqrt(norm_diff) <= 1e-9 * std::sqrt(norm_a));
}

TEST_CASE("jacobi eigenvectors are orthonormal") {
  const std::size_t n = 15;
  const DenseMatrix m = random_symmetric(n, 8);
  const EigenDecomposition e = sym_eigen(m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < n; ++k) d += e.vectors(k, i) * e.vectors(k, j);
      REQUIRE_THAT(d, Catch::Matchers::WithinAbs(i == j ? 1.0 : 0.0, 1e-10));
    }
}

TEST_CASE("eigenvalues are sorted by magnitude") {
  DenseMatrix m;
  m.n = 3;
  m.a = {1, 0, 0, 0, -4, 0, 0, 0, 2};
  m.symmetric = true;
  const EigenDecomposition e = sym_eigen(m);
  REQUIRE_THAT(e.values[0], Catch::Matchers::WithinAbs(-4.0, 1e-12));
  REQUIRE_THAT(e.values[1], Catch::Matchers::WithinAbs(2.0, 1e-12));
  REQUIRE_THAT(e.values[2], Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("gap ratio") {
  DenseMatrix m;
  m.n = 2;
  m.a = {4, 0, 0, 2};
  m.symmetric = true;
  REQUIRE_THAT(eigen_gap_ratio(sym_eigen(m)), Catch::Matchers::WithinAbs(2.0, 1e-12));
  DenseMatrix one;
  one.n = 1;
  one.a = {5};
  one.symmetric = true;
  REQUIRE(std::isinf(eigen_gap_ratio(sym_eigen(one))));
}

TEST_CASE("dense hessian of a quadratic is its matrix") {
  Rng rng(4);
  Mat a(5, 5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double x = rng.gaussian();
      a(i, j) = x;
      a(j, i) = x;
    }
  QuadraticObjective obj(a);
  const Vec w = {0.1, -0.2, 0.3, 0.0, 1.0};
  const DenseMatrix h = dense_hessian(obj, w);
  REQUIRE(h.symmetric);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      REQUIRE_THAT(h.at(i, j), Catch::Matchers::WithinAbs(a(i, j), 1e-14));
}

TEST_CASE("dense hessian respects the dimension cap") {
  QuadraticObjective obj = QuadraticObjective::diagonal({1, 2, 3, 4});
  const Vec w(4, 0.0);
  REQUIRE_THROWS_AS(dense_hessian(obj, w, 3), ValidationError);
}

TEST_CASE("monomial objective derivatives are exact") {
  MonomialObjective obj(2.0, 3);  // 2 w^3
  const Vec w = {1.5};
  REQUIRE_THAT(obj.value(w), Catch::Matchers::WithinAbs(2.0 * 1.5 * 1.5 * 1.5, 1e-14));
  REQUIRE_THAT(obj.gradient(w)[0], Catch::Matchers::WithinAbs(6.0 * 1.5 * 1.5, 1e-14));
  const Vec v = {2.0};
  REQUIRE_THAT(obj.hvp(w, v)[0], Catch::Matchers::WithinAbs(12.0 * 1.5 * 2.0, 1e-14));
  // third derivative of 2 w^3 is 12; the form contracts it with v twice
  REQUIRE_THAT(obj.third_form(w, v)[0], Catch::Matchers::WithinAbs(12.0 * 4.0, 1e-14));
}

TEST_CASE("quartic third form is 24 c w v^2") {
  MonomialObjective obj(1.0, 4);
  const Vec w = {0.7};
  const Vec v = {1.0};
  REQUIRE_THAT(obj.third_form(w, v)[0], Catch::Matchers::WithinAbs(24.0 * 0.7, 1e-12));
}

TEST_CASE("separable polynomial matches hand results") {
  // f(w) = (w0^2) + (w1^3 - w1)
  SeparablePolyObjective obj({{0, 0, 1}, {0, -1, 0, 1}});
  const Vec w = {2.0, 1.5};
  REQUIRE_THAT(obj.value(w), Catch::Matchers::WithinAbs(4.0 + (3.375 - 1.5), 1e-14));
  const Vec g = obj.gradient(w);
  REQUIRE_THAT(g[0], Catch::Matchers::WithinAbs(4.0, 1e-14));
  REQUIRE_THAT(g[1], Catch::Matchers::WithinAbs(3.0 * 2.25 - 1.0, 1e-14));
  const Vec v = {1.0, 2.0};
  const Vec hv = obj.hvp(w, v);
  REQUIRE_THAT(hv[0], Catch::Matchers::WithinAbs(2.0, 1e-14));
  REQUIRE_THAT(hv[1], Catch::Matchers::WithinAbs(6.0 * 1.5 * 2.0, 1e-14));
  const Vec t = obj.third_form(w, v);
  REQUIRE_THAT(t[0], Catch::Matchers::WithinAbs(0.0, 1e-14));
  REQUIRE_THAT(t[1], Catch::Matchers::WithinAbs(6.0 * 4.0, 1e-14));
}

TEST_CASE("fd oracles agree with analytic closed forms") {
  MonomialObjective obj(1.0, 4);
  const Vec w = {0.9};
  const Vec g = fd_gradient(obj, w);
  REQUIRE_THAT(g[0], Catch::Matchers::WithinAbs(4.0 * 0.9 * 0.9 * 0.9, 1e-7));
  const Vec v = {1.0};
  const Vec hv = fd_hvp(obj, w, v);
  REQUIRE_THAT(hv[0], Catch::Matchers::WithinAbs(12.0 * 0.81, 1e-6));
}

TEST_CASE("curvature bounds cover a quadratic exactly up to safety") {
  QuadraticObjective obj = QuadraticObjective::diagonal({1.0, 3.0});
  const Vec w0 = {0.5, -0.5};
  const CurvatureBounds cb = estimate_curvature_bounds(obj, w0, 8, 0.5, 21, 2.0);
  REQUIRE(cb.l1 >= 3.0);
  REQUIRE_THAT(cb.l1, Catch::Matchers::WithinAbs(6.0, 1e-6));
  REQUIRE(cb.l2 == 0.0);
}
