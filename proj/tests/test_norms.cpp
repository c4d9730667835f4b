#include <doctest.h>

#include <cmath>

#include "hermlab/norms.hpp"
#include "hermlab/random.hpp"

using namespace hermlab;

namespace {
const BasisTable& shared_basis() {
  static const BasisTable basis = build_basis(64, gauss_hermite_grid(256));
  return basis;
}

HermiteState pure_mode(int n, int n_modes) {
  HermiteState u = HermiteState::zero(n_modes);
  u.coeffs[n] = 1.0;
  return u;
}
}  // namespace

TEST_CASE("L^p norms of the ground state") {
  const auto& basis = shared_basis();
  const HermiteState e0 = pure_mode(0, 1);
  CHECK(lp_norm(e0, 2.0, basis) == doctest::Approx(1.0).epsilon(1e-12));
  // int e_0^4 = (2 pi)^{-1/2}, so ||e_0||_4 = (2 pi)^{-1/8}
  CHECK(lp_norm(e0, 4.0, basis) ==
        doctest::Approx(std::pow(2.0 * 3.14159265358979324, -0.125))
            .epsilon(1e-12));
  CHECK_THROWS_AS(lp_norm(e0, 0.5, basis), std::invalid_argument);
}

TEST_CASE("quadrature L^2 equals coefficient L^2 (Parseval)") {
  const auto& basis = shared_basis();
  const HermiteState u = sample_gaussian_state(64, {77, 0});
  CHECK(std::abs(lp_norm(u, 2.0, basis) - u.l2_norm()) < 1e-10);
}

TEST_CASE("Sobolev norm is the weighted coefficient sum") {
  CHECK(sobolev_norm(pure_mode(4, 5), 2.0) ==
        doctest::Approx(9.0).epsilon(1e-14));
  CHECK(sobolev_norm(pure_mode(7, 8), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-14));

  // monotone in sigma since every lambda_n >= 1
  const HermiteState u = sample_gaussian_state(32, {3, 9});
  double prev = sobolev_norm(u, -0.5);
  for (double sigma : {-0.1, 0.0, 0.3, 1.0, 2.0}) {
    const double cur = sobolev_norm(u, sigma);
    CHECK(cur >= prev);
    prev = cur;
  }
}

TEST_CASE("spectrally weighted L^p norms") {
  const auto& basis = shared_basis();
  const HermiteState u = sample_gaussian_state(48, {5, 2});

  SUBCASE("sigma = 0 reduces to the plain norm") {
    CHECK(weighted_sobolev_norm(u, 0.0, 3.0, basis) ==
          doctest::Approx(lp_norm(u, 3.0, basis)).epsilon(1e-14));
  }
  SUBCASE("single mode picks up lambda^sigma") {
    const HermiteState e6 = pure_mode(6, 7);
    CHECK(weighted_sobolev_norm(e6, 0.8, 4.0, basis) ==
          doctest::Approx(std::pow(13.0, 0.4) * lp_norm(e6, 4.0, basis))
              .epsilon(1e-12));
  }
  SUBCASE("p = 2 collapses to the Sobolev norm") {
    CHECK(std::abs(weighted_sobolev_norm(u, 0.7, 2.0, basis) -
                   sobolev_norm(u, 0.7)) < 1e-10);
  }
  SUBCASE("negative regularity is rejected") {
    CHECK_THROWS_AS(weighted_sobolev_norm(u, -0.1, 2.0, basis),
                    std::invalid_argument);
  }
}

TEST_CASE("dyadic block structure") {
  // I(0) = {0,1}, I(1) = {2..7}, I(2) = {8..31}
  CHECK(besov_block_index(0) == 0);
  CHECK(besov_block_index(1) == 0);
  CHECK(besov_block_index(2) == 1);
  CHECK(besov_block_index(7) == 1);
  CHECK(besov_block_index(8) == 2);
  CHECK(besov_block_index(31) == 2);
  CHECK(besov_block_index(32) == 3);
  CHECK(besov_block_start(0) == 0);
  CHECK(besov_block_start(1) == 2);
  CHECK(besov_block_start(2) == 8);

  // blocks partition the mode indices: 4^j <= 2n+1 < 4^{j+1}
  for (int n = 0; n < 5000; ++n) {
    const int j = besov_block_index(n);
    const long long lam2 = 2LL * n + 1;
    CHECK(lam2 >= (1LL << (2 * j)));
    CHECK(lam2 < (1LL << (2 * j + 2)));
  }
}

TEST_CASE("Besov norms") {
  const auto& basis = shared_basis();
  const BesovSpec sup_spec{};  // (0, 2, inf)

  SUBCASE("single mode in a single block") {
    CHECK(besov_norm(pure_mode(0, 1), sup_spec, basis) ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("sup of block masses is at most the total mass") {
    for (std::uint64_t i = 0; i < 20; ++i) {
      const HermiteState u = sample_gaussian_state(64, {11, i});
      CHECK(besov_norm(u, sup_spec, basis) <= u.l2_norm() + 1e-14);
    }
  }
  SUBCASE("(sigma,2,2) brackets the Sobolev norm within 2^{|sigma|}") {
    for (double sigma : {0.4, -0.6}) {
      CAPTURE(sigma);
      const BesovSpec spec{sigma, 2.0, 2.0};
      const HermiteState u = sample_gaussian_state(64, {13, 3});
      const double b = besov_norm(u, spec, basis);
      const double s = sobolev_norm(u, sigma);
      const double factor = std::exp2(std::abs(sigma));
      CHECK(b <= s * factor * (1 + 1e-12));
      CHECK(s <= b * factor * (1 + 1e-12));
    }
  }
  SUBCASE("block means of the base ensemble match the eigenvalue sums") {
    const int n_modes = 128;  // blocks 0..3 complete
    const int count = 4000;
    Eigen::VectorXd mean_mass = Eigen::VectorXd::Zero(4);
    for (int i = 0; i < count; ++i) {
      const HermiteState u =
          sample_gaussian_state(n_modes, {2024, static_cast<std::uint64_t>(i)});
      const Eigen::VectorXd mass = besov_block_l2(u);
      for (int j = 0; j < 4; ++j) mean_mass[j] += mass[j] * mass[j];
    }
    mean_mass /= count;
    for (int j = 0; j < 4; ++j) {
      double exact = 0.0;
      const int lo = besov_block_start(j);
      const int hi = std::min(n_modes, besov_block_start(j + 1));
      for (int n = lo; n < hi; ++n) exact += 1.0 / (2.0 * n + 1.0);
      // var of |c_n|^2 is 1/lambda^4; 3 standard errors
      double var = 0.0;
      for (int n = lo; n < hi; ++n) var += std::pow(2.0 * n + 1.0, -2.0);
      const double se = std::sqrt(var / count);
      CHECK(std::abs(mean_mass[j] - exact) < 3.0 * se + 1e-12);
      if (j == 3) {
        // tail blocks approach log 2
        CHECK(exact == doctest::Approx(std::log(2.0)).epsilon(0.02));
      }
    }
  }
}

TEST_CASE("space-time norm of the free flow") {
  const auto& basis = shared_basis();
  const HermiteState u = sample_gaussian_state(32, {21, 4});

  std::vector<double> grid;
  for (int i = 0; i <= 64; ++i) {
    grid.push_back(-3.14159265358979324 + 2.0 * 3.14159265358979324 * i / 64.0);
  }

  SUBCASE("L^2 in space is time-invariant") {
    const double v =
        linear_spacetime_norm(u, 0.0, 2.0, grid, TimeReduce::Sup, 2.0, basis);
    CHECK(v == doctest::Approx(u.l2_norm()).epsilon(1e-10));
  }
  SUBCASE("single modes only rotate") {
    const HermiteState e5 = pure_mode(5, 6);
    const double a =
        linear_spacetime_norm(e5, 0.3, 4.0, {0.0}, TimeReduce::Sup, 2.0, basis);
    const double b = linear_spacetime_norm(e5, 0.3, 4.0, {0.4, 1.1},
                                           TimeReduce::Sup, 2.0, basis);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
  SUBCASE("2 pi periodicity") {
    std::vector<double> shifted = grid;
    for (double& t : shifted) t += 2.0 * 3.14159265358979324;
    const double a =
        linear_spacetime_norm(u, 0.2, 4.0, grid, TimeReduce::Lq, 8.0, basis);
    const double b = linear_spacetime_norm(u, 0.2, 4.0, shifted,
                                           TimeReduce::Lq, 8.0, basis);
    CHECK(std::abs(a - b) < 1e-12 * std::max(1.0, a));
  }
  SUBCASE("empty grid is rejected") {
    CHECK_THROWS_AS(
        linear_spacetime_norm(u, 0.0, 2.0, {}, TimeReduce::Sup, 2.0, basis),
        std::invalid_argument);
  }
  SUBCASE("default grid covers one period") {
    const std::vector<double> def = default_spacetime_grid();
    REQUIRE(def.size() == 257);
    CHECK(def.front() == doctest::Approx(-3.14159265358979324));
    CHECK(def.back() == doctest::Approx(3.14159265358979324));
    const double v =
        linear_spacetime_norm(u, 0.1, 4.0, def, TimeReduce::Sup, 2.0, basis);
    CHECK(v > 0.0);
    CHECK(std::isfinite(v));
  }
}
