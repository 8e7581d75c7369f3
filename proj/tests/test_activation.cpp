#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "srr/activation.hpp"

using namespace srr;

namespace {

// Central finite difference of act_eval's value and first two derivatives,
// compared against the analytic next-order derivative at the same point.
void check_derivative_chain(ActivationKind k, double x, double tol) {
  const double eps = 1e-5;
  double sp, d1p, d2p, d3p, sm, d1m, d2m, d3m, s0, d10, d20, d30;
  act_eval(k, x + eps, sp, d1p, d2p, d3p);
  act_eval(k, x - eps, sm, d1m, d2m, d3m);
  act_eval(k, x, s0, d10, d20, d30);

  const double fd1 = (sp - sm) / (2 * eps);
  const double fd2 = (d1p - d1m) / (2 * eps);
  const double fd3 = (d2p - d2m) / (2 * eps);
  REQUIRE(std::fabs(fd1 - d10) <= tol * std::max(1.0, std::fabs(d10)));
  REQUIRE(std::fabs(fd2 - d20) <= tol * std::max(1.0, std::fabs(d20)));
  REQUIRE(std::fabs(fd3 - d30) <= tol * std::max(1.0, std::fabs(d30)));
}

}  // namespace

TEST_CASE("derivatives match finite differences on a grid") {
  const std::vector<double> grid = {-2.3, -1.1, -0.4, 0.7, 1.9};
  for (double x : grid) {
    check_derivative_chain(ActivationKind::tanh, x, 1e-5);
    check_derivative_chain(ActivationKind::sigmoid, x, 1e-5);
    check_derivative_chain(ActivationKind::softplus, x, 1e-5);
    check_derivative_chain(ActivationKind::identity, x, 1e-10);
  }
  // relu is only smooth away from zero
  check_derivative_chain(ActivationKind::relu, 1.5, 1e-10);
  check_derivative_chain(ActivationKind::relu, -1.5, 1e-10);
}

TEST_CASE("specific values") {
  double s, d1, d2, d3;
  act_eval(ActivationKind::tanh, 0.0, s, d1, d2, d3);
  REQUIRE(s == 0.0);
  REQUIRE(d1 == 1.0);
  REQUIRE(d2 == 0.0);
  REQUIRE(d3 == -2.0);

  act_eval(ActivationKind::sigmoid, 0.0, s, d1, d2, d3);
  REQUIRE(s == 0.5);
  REQUIRE(d1 == 0.25);
  REQUIRE(d2 == 0.0);
  REQUIRE_THAT(d3, Catch::Matchers::WithinAbs(-0.125, 1e-15));

  act_eval(ActivationKind::identity, 3.25, s, d1, d2, d3);
  REQUIRE(s == 3.25);
  REQUIRE(d1 == 1.0);
  REQUIRE(d2 == 0.0);
  REQUIRE(d3 == 0.0);

  act_eval(ActivationKind::relu, -2.0, s, d1, d2, d3);
  REQUIRE(s == 0.0);
  REQUIRE(d1 == 0.0);
  act_eval(ActivationKind::relu, 2.0, s, d1, d2, d3);
  REQUIRE(s == 2.0);
  REQUIRE(d1 == 1.0);
}

TEST_CASE("softplus is stable at large inputs") {
  double s, d1, d2, d3;
  act_eval(ActivationKind::softplus, 800.0, s, d1, d2, d3);
  REQUIRE(std::isfinite(s));
  REQUIRE_THAT(s, Catch::Matchers::WithinRel(800.0, 1e-12));
  REQUIRE(d1 == 1.0);
  act_eval(ActivationKind::softplus, -800.0, s, d1, d2, d3);
  REQUIRE(s == 0.0);
  REQUIRE(d1 == 0.0);
  act_eval(ActivationKind::sigmoid, 800.0, s, d1, d2, d3);
  REQUIRE(s == 1.0);
  REQUIRE(std::isfinite(d2));
}

TEST_CASE("names round-trip") {
  for (auto k : {ActivationKind::identity, ActivationKind::tanh, ActivationKind::sigmoid,
                 ActivationKind::softplus, ActivationKind::relu})
    REQUIRE(parse_activation(activation_name(k)) == k);
  REQUIRE_THROWS(parse_activation("swish"));
}
