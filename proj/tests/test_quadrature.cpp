#include <doctest.h>

#include <cmath>

#include "hermlab/hermite.hpp"
#include "hermlab/quadrature.hpp"

using namespace hermlab;

namespace {
constexpr double kSqrtPi = 1.7724538509055160;
}

TEST_CASE("single-node rule is the center of mass of e^{-x^2}") {
  const QuadratureGrid g = gauss_hermite_grid(1);
  CHECK(g.size() == 1);
  CHECK(g.nodes[0] == 0.0);
  CHECK(g.raw_weights[0] == doctest::Approx(kSqrtPi).epsilon(1e-14));
}

TEST_CASE("raw weights sum to sqrt(pi)") {
  for (int m : {1, 5, 20, 64, 257}) {
    CAPTURE(m);
    const QuadratureGrid g = gauss_hermite_grid(m);
    CHECK(g.raw_weights.sum() ==
          doctest::Approx(kSqrtPi).epsilon(1e-12));
  }
}

TEST_CASE("nodes are increasing, symmetric; weights positive") {
  for (int m : {2, 17, 64}) {
    CAPTURE(m);
    const QuadratureGrid g = gauss_hermite_grid(m);
    for (int k = 1; k < m; ++k) {
      CHECK(g.nodes[k] > g.nodes[k - 1]);
    }
    for (int k = 0; k < m; ++k) {
      CHECK(g.nodes[k] == -g.nodes[m - 1 - k]);
      CHECK(g.weights[k] > 0.0);
      CHECK(g.raw_weights[k] >= 0.0);
    }
  }
}

TEST_CASE("degree-2 moment: int x^2 e^{-x^2} = sqrt(pi)/2 at M = 20") {
  const QuadratureGrid g = gauss_hermite_grid(20);
  double acc = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    acc += g.raw_weights[k] * g.nodes[k] * g.nodes[k];
  }
  CHECK(acc == doctest::Approx(0.5 * kSqrtPi).epsilon(1e-12));
}

TEST_CASE("adjusted weights integrate Gaussian-decaying functions") {
  // int e_5(x)^2 dx computed at M = 64 against the M = 512 reference rule
  auto integrate_e5_sq = [](int m) {
    const QuadratureGrid g = gauss_hermite_grid(m);
    std::vector<double> e(6);
    double acc = 0.0;
    for (int k = 0; k < g.size(); ++k) {
      hermite_values(g.nodes[k], 6, e);
      acc += g.weights[k] * e[5] * e[5];
    }
    return acc;
  };
  const double coarse = integrate_e5_sq(64);
  const double reference = integrate_e5_sq(512);
  CHECK(std::abs(coarse - reference) < 1e-10);
  CHECK(coarse == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("invalid sizes are rejected") {
  CHECK_THROWS_AS(gauss_hermite_grid(0), std::invalid_argument);
  CHECK_THROWS_AS(gauss_hermite_grid(-3), std::invalid_argument);
}
