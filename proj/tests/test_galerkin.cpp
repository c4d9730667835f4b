#include <doctest.h>

#include <cmath>

#include "hermlab/galerkin.hpp"
#include "hermlab/random.hpp"

using namespace hermlab;

namespace {
const BasisTable& dyn_basis() {
  static const BasisTable basis = build_basis(32, gauss_hermite_grid(128));
  return basis;
}

GalerkinConfig small_config(double p) {
  GalerkinConfig cfg;
  cfg.p = p;
  cfg.trunc_level = 8;
  cfg.n_modes = 16;
  cfg.dt0 = 5e-4;
  return cfg;
}
}  // namespace

TEST_CASE("cutoff profile and multipliers") {
  const CutoffSpec chi;
  CHECK(chi.value(0.0) == 1.0);
  CHECK(chi.value(0.5) == 1.0);
  CHECK(chi.value(1.0) == 0.0);
  CHECK(chi.value(2.0) == 0.0);
  double prev = 1.0;
  for (double r = 0.5; r <= 1.0; r += 0.01) {
    const double v = chi.value(r);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }

  GalerkinConfig cfg = small_config(3.0);
  const Eigen::VectorXd m = cutoff_multipliers(cfg);
  for (int n = 0; n < cfg.n_modes; ++n) {
    const double ratio = (2.0 * n + 1.0) / (2.0 * cfg.trunc_level + 1.0);
    if (ratio <= 0.5) CHECK(m[n] == 1.0);
    if (ratio >= 1.0) CHECK(m[n] == 0.0);
    if (n > 0) CHECK(m[n] <= m[n - 1] + 1e-15);
  }
  CHECK(m[cfg.trunc_level] == 0.0);
}

TEST_CASE("configuration validation") {
  GalerkinConfig cfg = small_config(3.0);
  cfg.p = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config(3.0);
  cfg.n_modes = 4;  // below trunc_level
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config(3.0);
  cfg.delta_stop = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("nonlinear right-hand side") {
  const auto& basis = dyn_basis();
  const GalerkinConfig cfg = small_config(3.0);

  SUBCASE("states beyond the cutoff are annihilated") {
    HermiteState high = HermiteState::zero(16);
    high.coeffs[10] = 1.0;  // multiplier 0 at n >= 8
    high.coeffs[14] = {0.0, 2.0};
    const HermiteState rhs = nonlinear_rhs(high, 0.1, cfg, basis);
    CHECK(rhs.l2_norm() < 1e-15);
  }
  SUBCASE("output is supported on the active modes") {
    const HermiteState u = sample_gaussian_state(16, {1, 1});
    const HermiteState rhs = nonlinear_rhs(u, 0.1, cfg, basis);
    const Eigen::VectorXd m = cutoff_multipliers(cfg);
    for (int n = 0; n < 16; ++n) {
      if (m[n] == 0.0) CHECK(std::abs(rhs.coeffs[n]) == 0.0);
    }
  }
  SUBCASE("p = 5 has no time-dependent prefactor") {
    const GalerkinConfig quintic = small_config(5.0);
    const HermiteState u = sample_gaussian_state(16, {1, 2});
    const HermiteState a = nonlinear_rhs(u, 0.0, quintic, basis);
    const HermiteState b = nonlinear_rhs(u, 0.7, quintic, basis);
    CHECK((a.coeffs - b.coeffs).norm() < 1e-14);
  }
  SUBCASE("vacuum and low-power states stay finite") {
    const GalerkinConfig rough = small_config(1.5);
    const HermiteState rhs =
        nonlinear_rhs(HermiteState::zero(16), 0.0, rough, basis);
    CHECK(rhs.l2_norm() == 0.0);
    const HermiteState u = sample_gaussian_state(16, {2, 0});
    CHECK(nonlinear_rhs(u, 0.2, rough, basis).all_finite());
  }
  SUBCASE("window enforcement") {
    CHECK_THROWS_AS(
        nonlinear_rhs(HermiteState::zero(16), kQuarterPi, cfg, basis),
        std::domain_error);
  }
}

TEST_CASE("stepping") {
  const auto& basis = dyn_basis();

  SUBCASE("disabled nonlinearity gives the exact phase flow") {
    GalerkinConfig cfg = small_config(3.0);
    cfg.nonlinearity_enabled = false;
    const HermiteState u0 = sample_gaussian_state(16, {3, 0});
    HermiteState u = u0;
    const double dt = 1e-2;
    for (int i = 0; i < 50; ++i) {
      u = step(u, i * dt, dt, cfg, basis);
    }
    const HermiteState exact = harmonic_phase_evolve(u0, 50 * dt);
    CHECK((u.coeffs - exact.coeffs).norm() < 1e-12);
    CHECK(std::abs(sobolev_norm(u, 0.7) - sobolev_norm(u0, 0.7)) < 1e-14);
  }

  SUBCASE("mass conservation along a nonlinear run") {
    const GalerkinConfig cfg = small_config(3.0);
    const HermiteState u0 = sample_gaussian_state(16, {4, 0});
    const Trajectory traj = evolve(u0, 0.0, 0.6, cfg, basis, {});
    const double m0 = traj.observables.front().mass;
    for (const auto& obs : traj.observables) {
      CHECK(std::abs(obs.mass - m0) / m0 < 1e-8);
    }
  }

  SUBCASE("self-convergence at order two or better") {
    GalerkinConfig cfg = small_config(3.0);
    const HermiteState u0 = sample_gaussian_state(16, {5, 0});
    auto run = [&](double dt) {
      cfg.dt0 = dt;
      cfg.c_dt = 1e9;  // fixed step for the convergence measurement
      return evolve(u0, 0.0, 0.32, cfg, basis, {}).final_state;
    };
    const HermiteState ref = run(0.0005);
    const double e1 = (run(0.008).coeffs - ref.coeffs).norm();
    const double e2 = (run(0.004).coeffs - ref.coeffs).norm();
    const double e3 = (run(0.002).coeffs - ref.coeffs).norm();
    CHECK(e1 / e2 > 3.0);
    CHECK(e2 / e3 > 3.0);
  }

  SUBCASE("blow-up reports an integration error") {
    const GalerkinConfig cfg = small_config(5.0);
    HermiteState huge = HermiteState::zero(16);
    huge.coeffs[0] = 1e80;
    CHECK_THROWS_AS(step(huge, 0.0, 1e-3, cfg, basis), std::runtime_error);
  }
}

TEST_CASE("evolve") {
  const auto& basis = dyn_basis();
  const GalerkinConfig cfg = small_config(3.0);
  const HermiteState u0 = sample_gaussian_state(16, {6, 0});

  SUBCASE("no-op interval returns the data") {
    const Trajectory traj = evolve(u0, 0.2, 0.2, cfg, basis, {});
    CHECK(traj.times.size() == 1);
    CHECK((traj.final_state.coeffs - u0.coeffs).norm() == 0.0);
  }

  SUBCASE("two-leg composition matches the direct run") {
    const Trajectory leg1 = evolve(u0, 0.0, 0.3, cfg, basis, {});
    const Trajectory leg2 = evolve(leg1.final_state, 0.3, 0.55, cfg, basis, {});
    const Trajectory direct = evolve(u0, 0.0, 0.55, cfg, basis, {});
    CHECK((leg2.final_state.coeffs - direct.final_state.coeffs).norm() <
          1e-6 * direct.final_state.l2_norm());
  }

  SUBCASE("checkpoints are hit exactly, times strictly monotone") {
    ObservableSpec spec;
    spec.checkpoints = {0.15, 0.3, 0.45};
    const Trajectory traj = evolve(u0, 0.0, 0.45, cfg, basis, spec);
    REQUIRE(traj.checkpoint_times.size() == 3);
    CHECK(traj.checkpoint_times[0] == 0.15);
    CHECK(traj.checkpoint_times[2] == 0.45);
    CHECK((traj.checkpoint_states[2].coeffs - traj.final_state.coeffs).norm() ==
          0.0);
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
      CHECK(traj.times[i] > traj.times[i - 1]);
    }
  }

  SUBCASE("modes above the cutoff evolve linearly") {
    HermiteState data = u0;
    data.coeffs[12] = {0.4, -0.2};
    const Trajectory traj = evolve(data, 0.0, 0.5, cfg, basis, {});
    const double before = std::abs(data.coeffs[12]);
    const double after = std::abs(traj.final_state.coeffs[12]);
    CHECK(std::abs(after - before) < 1e-12);
  }

  SUBCASE("window violations are domain errors") {
    CHECK_THROWS_AS(evolve(u0, 0.0, kQuarterPi, cfg, basis, {}),
                    std::domain_error);
    GalerkinConfig quintic = small_config(5.0);
    CHECK_THROWS_AS(evolve(u0, -kQuarterPi, 0.0, quintic, basis, {}),
                    std::domain_error);
    // p >= 5 may run right up to (but not onto) the window edge
    const Trajectory ok =
        evolve(u0, 0.0, kQuarterPi - 1e-4, quintic, basis, {});
    CHECK(ok.final_state.all_finite());
  }
}

TEST_CASE("energy and its derivative") {
  const auto& basis = dyn_basis();

  SUBCASE("vacuum has zero energy") {
    const GalerkinConfig cfg = small_config(3.0);
    CHECK(energy(HermiteState::zero(16), 0.1, cfg, basis) == 0.0);
  }

  SUBCASE("single-mode closed form") {
    GalerkinConfig cfg = small_config(3.0);
    HermiteState e0 = HermiteState::zero(16);
    e0.coeffs[0] = 1.0;
    const double t = 0.2;
    const double lp = lp_norm(apply_cutoff(e0, cutoff_multipliers(cfg)),
                              cfg.p + 1.0, basis);
    const double expected =
        0.5 + std::pow(std::cos(2 * t), 0.5 * (cfg.p - 5.0)) / (cfg.p + 1.0) *
                  std::pow(lp, cfg.p + 1.0);
    CHECK(energy(e0, t, cfg, basis) == doctest::Approx(expected).epsilon(1e-13));
  }

  SUBCASE("derivative formula signs") {
    const auto& cfg3 = small_config(3.0);
    const auto& cfg7 = small_config(7.0);
    const HermiteState u = sample_gaussian_state(16, {7, 0});
    CHECK(energy_derivative_rhs(u, 0.0, cfg3, basis) == 0.0);  // sin(0)
    const double sub = energy_derivative_rhs(u, 0.3, cfg3, basis);
    const double super = energy_derivative_rhs(u, 0.3, cfg7, basis);
    CHECK(sub > 0.0);
    CHECK(super < 0.0);
    const auto& cfg5 = small_config(5.0);
    CHECK(energy_derivative_rhs(u, 0.3, cfg5, basis) == 0.0);
  }

  SUBCASE("energy law along a trajectory") {
    const GalerkinConfig cfg = small_config(3.0);
    const HermiteState u0 = sample_gaussian_state(16, {8, 0});
    const Trajectory traj = evolve(u0, 0.0, 0.5, cfg, basis, {});
    // trapezoid integral of the recorded right-hand side
    double integral = 0.0;
    double max_energy = 0.0;
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
      integral += 0.5 * (traj.times[i] - traj.times[i - 1]) *
                  (traj.observables[i].energy_rhs +
                   traj.observables[i - 1].energy_rhs);
      max_energy = std::max(max_energy, traj.observables[i].energy);
    }
    const double delta =
        traj.observables.back().energy - traj.observables.front().energy;
    CHECK(std::abs(delta - integral) < 1e-4 * std::max(1.0, max_energy));

    // centered finite differences of E against the recorded derivative
    int checked = 0;
    for (std::size_t i = 2; i + 2 < traj.times.size(); i += 5) {
      const double dt = traj.times[i + 1] - traj.times[i - 1];
      const double fd = (traj.observables[i + 1].energy -
                         traj.observables[i - 1].energy) /
                        dt;
      const double rhs = traj.observables[i].energy_rhs;
      CHECK(std::abs(fd - rhs) < 1e-4 * std::max(1.0, std::abs(rhs)) +
                                     1e-4 * std::max(1.0, max_energy));
      ++checked;
    }
    CHECK(checked > 0);
  }

  SUBCASE("p = 5 energy is conserved") {
    GalerkinConfig cfg = small_config(5.0);
    cfg.dt0 = 2.5e-4;
    const HermiteState u0 = sample_gaussian_state(16, {9, 0});
    const Trajectory traj = evolve(u0, 0.0, 0.5, cfg, basis, {});
    const double e0 = traj.observables.front().energy;
    for (const auto& obs : traj.observables) {
      CHECK(std::abs(obs.energy - e0) / std::abs(e0) < 1e-6);
    }
  }
}

TEST_CASE("volume preservation of the tangent map") {
  const BasisTable basis = build_basis(4, gauss_hermite_grid(32));
  GalerkinConfig cfg;
  cfg.trunc_level = 1;
  cfg.n_modes = 2;
  cfg.dt0 = 2.5e-4;

  const HermiteState u0 = sample_gaussian_state(2, {10, 0});

  SUBCASE("identity interval") {
    cfg.p = 3.0;
    CHECK(jacobian_determinant(u0, 0.1, 0.1, cfg, basis) == 1.0);
  }
  SUBCASE("unitary flow when the nonlinearity is off") {
    cfg.p = 3.0;
    cfg.nonlinearity_enabled = false;
    const double det = jacobian_determinant(u0, 0.0, 0.4, cfg, basis);
    CHECK(std::abs(det - 1.0) < 1e-12);
  }
  SUBCASE("full flow at small dimension") {
    for (double p : {3.0, 5.0}) {
      CAPTURE(p);
      cfg.p = p;
      const double fwd = jacobian_determinant(u0, 0.0, 0.5, cfg, basis);
      const double bwd = jacobian_determinant(u0, 0.0, -0.5, cfg, basis);
      CHECK(std::abs(fwd - 1.0) < 1e-6);
      CHECK(std::abs(bwd - 1.0) < 1e-6);
    }
  }
  SUBCASE("dimension cap") {
    GalerkinConfig big;
    big.trunc_level = 20;
    big.n_modes = 24;
    const BasisTable big_basis = build_basis(24, gauss_hermite_grid(96));
    CHECK_THROWS_AS(
        jacobian_determinant(sample_gaussian_state(24, {1, 1}), 0.0, 0.1, big,
                             big_basis),
        std::runtime_error);
  }
}
