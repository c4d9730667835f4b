#include "hermlab/lens.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hermlab/fit.hpp"

namespace hermlab {

namespace {

void check_window(double t, const char* where) {
  if (!(std::abs(t) < kQuarterPi)) {
    std::ostringstream msg;
    msg << where << ": t = " << t << " outside |t| < pi/4";
    throw std::domain_error(msg.str());
  }
}

}  // namespace

double t_of_s(double s) { return 0.5 * std::atan(2.0 * s); }

double s_of_t(double t) {
  check_window(t, "s_of_t");
  return 0.5 * std::tan(2.0 * t);
}

double lp_norm(const GridFunction& f, double p) {
  return lp_norm(f.values, p, f.weights);
}

GridFunction lens_forward(const GridFunction& U, double t,
                          const QuadratureGrid& grid) {
  check_window(t, "lens_forward");
  if (U.values.size() != grid.size()) {
    throw std::invalid_argument("lens_forward: grid size mismatch");
  }
  const double c = std::cos(2.0 * t);
  const double half_tan = 0.5 * std::tan(2.0 * t);
  GridFunction u;
  u.nodes = grid.nodes;
  u.weights = grid.weights;
  u.values.resize(grid.size());
  const double amp = 1.0 / std::sqrt(c);
  for (int k = 0; k < grid.size(); ++k) {
    const double x = grid.nodes[k];
    u.values[k] = amp * U.values[k] * std::polar(1.0, -x * x * half_tan);
  }
  return u;
}

GridFunction lens_inverse(const HermiteState& u, double t,
                          const BasisTable& basis) {
  check_window(t, "lens_inverse");
  const double c = std::cos(2.0 * t);
  const double s = std::sin(2.0 * t);
  const Eigen::VectorXcd vals = to_grid(u, basis);
  GridFunction U;
  U.nodes = basis.grid.nodes / c;
  U.weights = basis.grid.weights / c;
  U.values.resize(vals.size());
  const double amp = std::sqrt(c);
  for (int k = 0; k < vals.size(); ++k) {
    const double y = U.nodes[k];
    U.values[k] = amp * vals[k] * std::polar(1.0, 0.5 * y * y * c * s);
  }
  return U;
}

GridFunction free_propagate(const HermiteState& u0, double s,
                            const BasisTable& basis) {
  const double t = t_of_s(s);
  return lens_inverse(harmonic_phase_evolve(u0, t), t, basis);
}

Eigen::VectorXcd free_propagate_at(const HermiteState& u0, double s,
                                   const Eigen::VectorXd& points) {
  const double t = t_of_s(s);
  const double c = std::cos(2.0 * t);
  const double sn = std::sin(2.0 * t);
  const HermiteState evolved = harmonic_phase_evolve(u0, t);
  Eigen::VectorXcd vals = evaluate_at(evolved, points * c);
  const double amp = std::sqrt(c);
  for (int k = 0; k < vals.size(); ++k) {
    const double y = points[k];
    vals[k] *= amp * std::polar(1.0, 0.5 * y * y * c * sn);
  }
  return vals;
}

double nls_side_norm(const HermiteState& u, double t, double q,
                     const BasisTable& basis) {
  check_window(t, "nls_side_norm");
  if (!(q >= 1.0)) {
    throw std::invalid_argument("nls_side_norm: q must be >= 1");
  }
  // ||L_t G||_q = cos^{1/q-1/2}(2t) ||G||_q, hence the line-side norm is
  // cos^{1/2-1/q}(2t) times the oscillator-side one.
  return std::pow(std::cos(2.0 * t), 0.5 - 1.0 / q) * lp_norm(u, q, basis);
}

ScatteringProfile scattering_profile(const Trajectory& traj,
                                     const HermiteState& u0, double sigma,
                                     const BasisTable& basis) {
  ScatteringProfile prof;
  const std::size_t k_count = traj.checkpoint_states.size();
  if (k_count == 0) {
    prof.w_plus = HermiteState::zero(std::max(1, u0.n_modes()));
    return prof;
  }
  prof.checkpoint_times = traj.checkpoint_times;

  // fluctuations v(t_k) = u(t_k) - e^{-i(t_k - t0)H} u0
  std::vector<HermiteState> fluct(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    HermiteState v = traj.checkpoint_states[k];
    const HermiteState lin =
        harmonic_phase_evolve(u0, traj.checkpoint_times[k] - traj.t0);
    v.coeffs.head(lin.n_modes()) -= lin.coeffs;
    fluct[k] = std::move(v);
  }

  const double scale = 1.0 + u0.l2_norm();
  prof.cauchy_increments.resize(k_count > 1 ? k_count - 1 : 0);
  for (std::size_t k = 1; k < k_count; ++k) {
    HermiteState d = fluct[k];
    d.coeffs -= fluct[k - 1].coeffs;
    prof.cauchy_increments[k - 1] = sobolev_norm(d, sigma);
  }

  bool monotone = true;
  bool all_negligible = true;
  for (std::size_t k = 0; k < prof.cauchy_increments.size(); ++k) {
    if (prof.cauchy_increments[k] > 1e-13 * scale) all_negligible = false;
    if (k > 0 &&
        prof.cauchy_increments[k] >= prof.cauchy_increments[k - 1]) {
      monotone = false;
    }
  }
  if (all_negligible) monotone = true;
  prof.cauchy_monotone = monotone;
  prof.flagged = !monotone;

  if (prof.cauchy_increments.size() >= 2 && !all_negligible) {
    std::vector<double> xs, ys;
    for (std::size_t k = 1; k < k_count; ++k) {
      const double gap =
          kQuarterPi -
          0.5 * (traj.checkpoint_times[k] + traj.checkpoint_times[k - 1]);
      const double d = prof.cauchy_increments[k - 1];
      if (gap > 0.0 && d > 0.0) {
        xs.push_back(std::log(gap));
        ys.push_back(std::log(d));
      }
    }
    prof.cauchy_rate = linear_fit(xs, ys).slope;
  }

  // profile from the last reachable checkpoint, pulled back by e^{i pi H/4}
  prof.w_plus = harmonic_phase_evolve(fluct[k_count - 1], -kQuarterPi);

  // line-side residuals ||U(s_k) - e^{i s_k d^2}(u0 + W+)||_{L^2}
  HermiteState asym = HermiteState::zero(
      std::max(u0.n_modes(), prof.w_plus.n_modes()));
  asym.coeffs.head(u0.n_modes()) = u0.coeffs;
  asym.coeffs.head(prof.w_plus.n_modes()) += prof.w_plus.coeffs;

  prof.residual_s.resize(k_count);
  prof.residuals.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double t_k = traj.checkpoint_times[k];
    const double s_k = s_of_t(t_k);
    prof.residual_s[k] = s_k;
    const GridFunction line_state =
        lens_inverse(traj.checkpoint_states[k], t_k, basis);
    const GridFunction predicted = free_propagate(asym, s_k, basis);
    double acc = 0.0;
    for (int j = 0; j < line_state.values.size(); ++j) {
      acc += line_state.weights[j] *
             std::norm(line_state.values[j] - predicted.values[j]);
    }
    prof.residuals[k] = std::sqrt(acc);
  }
  {
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < k_count; ++k) {
      if (prof.residuals[k] > 1e-14 * scale) {
        xs.push_back(std::log(std::hypot(1.0, prof.residual_s[k])));
        ys.push_back(std::log(prof.residuals[k]));
      }
    }
    if (xs.size() >= 2) prof.residual_rate = linear_fit(xs, ys).slope;
  }
  return prof;
}

}  // namespace hermlab
