#include "hermlab/galerkin.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hermlab {

namespace {

double bump(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

void check_inside_window(double t, const char* where) {
  if (!(std::abs(t) < kQuarterPi)) {
    std::ostringstream msg;
    msg << where << ": t = " << t << " outside the window |t| < pi/4";
    throw std::domain_error(msg.str());
  }
}

double cos_factor(double t, double exponent) {
  if (exponent == 0.0) return 1.0;
  return std::pow(std::cos(2.0 * t), exponent);
}

// Number of modes with a nonzero multiplier: chi((2n+1)/(2N+1)) > 0 iff
// 2n+1 < 2N+1, i.e. n < N.
int active_modes(const GalerkinConfig& cfg) {
  return std::min(cfg.n_modes, cfg.trunc_level);
}

// |v|^{p-1} v with the continuous extension 0 at v = 0 (p > 1).
inline Complex power_nonlinearity(Complex v, double p) {
  const double a = std::abs(v);
  if (a == 0.0) return {0.0, 0.0};
  return std::pow(a, p - 1.0) * v;
}

// The projected nonlinearity restricted to the active modes:
// a -> m .* analysis(|U|^{p-1} U), U = synthesis(m .* a).
struct ActiveNonlinearity {
  double p;
  Eigen::VectorXd mult;    // multipliers over the active modes
  Eigen::MatrixXd synth;   // M x n_act eigenfunction values
  Eigen::VectorXd weights;

  ActiveNonlinearity(const GalerkinConfig& cfg, const BasisTable& basis)
      : p(cfg.p) {
    const int n_act = active_modes(cfg);
    mult = cutoff_multipliers(cfg).head(n_act);
    synth = basis.values.leftCols(n_act);
    weights = basis.grid.weights;
  }

  int n_active() const { return static_cast<int>(mult.size()); }

  Eigen::VectorXcd grid_values(const Eigen::VectorXcd& active) const {
    const Eigen::VectorXd cr = mult.cwiseProduct(active.real());
    const Eigen::VectorXd ci = mult.cwiseProduct(active.imag());
    Eigen::VectorXcd g(synth.rows());
    g.real() = synth * cr;
    g.imag() = synth * ci;
    return g;
  }

  Eigen::VectorXcd analyze(const Eigen::VectorXcd& grid) const {
    const Eigen::VectorXd wr = weights.cwiseProduct(grid.real());
    const Eigen::VectorXd wi = weights.cwiseProduct(grid.imag());
    Eigen::VectorXcd out(n_active());
    out.real() = mult.cwiseProduct(synth.transpose() * wr);
    out.imag() = mult.cwiseProduct(synth.transpose() * wi);
    return out;
  }

  // S_N(|S_N u|^{p-1} S_N u) on the active block
  Eigen::VectorXcd apply(const Eigen::VectorXcd& active) const {
    Eigen::VectorXcd g = grid_values(active);
    for (int k = 0; k < g.size(); ++k) {
      g[k] = power_nonlinearity(g[k], p);
    }
    return analyze(g);
  }

  // Real-linearization of apply at `active` in direction h:
  // d(|U|^{p-1}U).H = |U|^{p-1} H + (p-1)|U|^{p-3} U Re(conj(U) H)
  Eigen::VectorXcd apply_tangent(const Eigen::VectorXcd& active,
                                 const Eigen::VectorXcd& h) const {
    const Eigen::VectorXcd ug = grid_values(active);
    Eigen::VectorXcd hg = grid_values(h);
    for (int k = 0; k < ug.size(); ++k) {
      const double a = std::abs(ug[k]);
      if (a == 0.0) {
        hg[k] = {0.0, 0.0};
        continue;
      }
      const double re =
          ug[k].real() * hg[k].real() + ug[k].imag() * hg[k].imag();
      hg[k] = std::pow(a, p - 1.0) * hg[k] +
              (p - 1.0) * std::pow(a, p - 3.0) * re * ug[k];
    }
    return analyze(hg);
  }
};

// classical RK4 on the active block for da/dt = -i coef NL(a), coef frozen
void rk4_substep(Eigen::VectorXcd& a, double coef, double dt,
                 const ActiveNonlinearity& nl) {
  const Complex mi(0.0, -1.0);
  const Eigen::VectorXcd k1 = mi * coef * nl.apply(a);
  const Eigen::VectorXcd k2 = mi * coef * nl.apply(a + 0.5 * dt * k1);
  const Eigen::VectorXcd k3 = mi * coef * nl.apply(a + 0.5 * dt * k2);
  const Eigen::VectorXcd k4 = mi * coef * nl.apply(a + dt * k3);
  a += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

HermiteState step_impl(const HermiteState& u, double t, double dt,
                       const GalerkinConfig& cfg,
                       const ActiveNonlinearity* nl) {
  check_inside_window(t, "step");
  check_inside_window(t + dt, "step");

  HermiteState out = harmonic_phase_evolve(u, 0.5 * dt);
  if (cfg.nonlinearity_enabled && nl != nullptr && nl->n_active() > 0) {
    const double coef = cos_factor(t + 0.5 * dt, 0.5 * (cfg.p - 5.0));
    Eigen::VectorXcd active = out.coeffs.head(nl->n_active());
    rk4_substep(active, coef, dt, *nl);
    out.coeffs.head(nl->n_active()) = active;
  }
  out = harmonic_phase_evolve(out, 0.5 * dt);

  if (!out.all_finite()) {
    std::ostringstream msg;
    msg << "step: state became non-finite at t = " << t << ", dt = " << dt
        << " (p = " << cfg.p << ", N = " << cfg.trunc_level << ")";
    throw std::runtime_error(msg.str());
  }
  return out;
}

}  // namespace

double CutoffSpec::value(double r) const {
  if (r <= 0.5) return 1.0;
  if (r >= 1.0) return 0.0;
  const double a = bump(2.0 - 2.0 * r);
  const double b = bump(2.0 * r - 1.0);
  return a / (a + b);
}

void GalerkinConfig::validate() const {
  if (!(p > 1.0)) {
    throw std::invalid_argument("GalerkinConfig: p must be > 1");
  }
  if (trunc_level < 1) {
    throw std::invalid_argument("GalerkinConfig: trunc_level must be >= 1");
  }
  if (n_modes < trunc_level) {
    throw std::invalid_argument(
        "GalerkinConfig: n_modes must cover every mode with a nonzero "
        "cutoff multiplier (n_modes >= trunc_level)");
  }
  if (!(delta_stop > 0.0 && delta_stop < kQuarterPi)) {
    throw std::invalid_argument("GalerkinConfig: delta_stop outside (0, pi/4)");
  }
  if (!(dt0 > 0.0) || !(c_dt > 0.0)) {
    throw std::invalid_argument("GalerkinConfig: dt0 and c_dt must be > 0");
  }
}

Eigen::VectorXd cutoff_multipliers(const GalerkinConfig& cfg) {
  Eigen::VectorXd m(cfg.n_modes);
  const double scale = 2.0 * cfg.trunc_level + 1.0;
  for (int n = 0; n < cfg.n_modes; ++n) {
    m[n] = cfg.cutoff.value((2.0 * n + 1.0) / scale);
  }
  return m;
}

HermiteState apply_cutoff(const HermiteState& u,
                          const Eigen::VectorXd& multipliers) {
  if (u.n_modes() > multipliers.size()) {
    throw std::invalid_argument("apply_cutoff: multiplier vector too short");
  }
  HermiteState out = u;
  for (int n = 0; n < out.n_modes(); ++n) {
    out.coeffs[n] *= multipliers[n];
  }
  return out;
}

HermiteState nonlinear_rhs(const HermiteState& u, double t,
                           const GalerkinConfig& cfg,
                           const BasisTable& basis) {
  check_inside_window(t, "nonlinear_rhs");
  cfg.validate();
  HermiteState out = HermiteState::zero(cfg.n_modes);
  if (!cfg.nonlinearity_enabled) return out;

  const ActiveNonlinearity nl(cfg, basis);
  const int n_act = nl.n_active();
  if (n_act == 0) return out;

  Eigen::VectorXcd active = Eigen::VectorXcd::Zero(n_act);
  const int have = std::min(n_act, u.n_modes());
  active.head(have) = u.coeffs.head(have);
  const double coef = cos_factor(t, 0.5 * (cfg.p - 5.0));
  out.coeffs.head(n_act) = Complex(0.0, -1.0) * coef * nl.apply(active);
  return out;
}

HermiteState step(const HermiteState& u, double t, double dt,
                  const GalerkinConfig& cfg, const BasisTable& basis) {
  if (cfg.nonlinearity_enabled) {
    const ActiveNonlinearity nl(cfg, basis);
    return step_impl(u, t, dt, cfg, &nl);
  }
  return step_impl(u, t, dt, cfg, nullptr);
}

double energy(const HermiteState& u, double t, const GalerkinConfig& cfg,
              const BasisTable& basis) {
  check_inside_window(t, "energy");
  double quad = 0.0;
  for (int n = 0; n < u.n_modes(); ++n) {
    quad += (2.0 * n + 1.0) * std::norm(u.coeffs[n]);
  }
  const HermiteState cut = apply_cutoff(u, cutoff_multipliers(cfg));
  const double lp = lp_norm(cut, cfg.p + 1.0, basis);
  return 0.5 * quad + cos_factor(t, 0.5 * (cfg.p - 5.0)) / (cfg.p + 1.0) *
                          std::pow(lp, cfg.p + 1.0);
}

double energy_derivative_rhs(const HermiteState& u, double t,
                             const GalerkinConfig& cfg,
                             const BasisTable& basis) {
  check_inside_window(t, "energy_derivative_rhs");
  const HermiteState cut = apply_cutoff(u, cutoff_multipliers(cfg));
  const double lp = lp_norm(cut, cfg.p + 1.0, basis);
  return (5.0 - cfg.p) * std::sin(2.0 * t) *
         cos_factor(t, 0.5 * (cfg.p - 7.0)) / (cfg.p + 1.0) *
         std::pow(lp, cfg.p + 1.0);
}

double interaction_weight(const HermiteState& u, double t, double p,
                          std::optional<int> trunc_level,
                          const CutoffSpec& cutoff, const BasisTable& basis) {
  check_inside_window(t, "interaction_weight");
  if (!(p > 1.0)) {
    throw std::invalid_argument("interaction_weight: p must be > 1");
  }
  double lp;
  if (trunc_level) {
    if (*trunc_level < 1) {
      throw std::invalid_argument("interaction_weight: trunc_level must be >= 1");
    }
    GalerkinConfig proxy;
    proxy.p = p;
    proxy.trunc_level = *trunc_level;
    proxy.n_modes = std::max(u.n_modes(), *trunc_level);
    proxy.cutoff = cutoff;
    const Eigen::VectorXd mult = cutoff_multipliers(proxy).head(u.n_modes());
    lp = lp_norm(apply_cutoff(u, mult), p + 1.0, basis);
  } else {
    lp = lp_norm(u, p + 1.0, basis);
  }
  return std::exp(-cos_factor(t, 0.5 * (p - 5.0)) / (p + 1.0) *
                  std::pow(lp, p + 1.0));
}

namespace {

struct WindowBounds {
  double lo, hi;
};

WindowBounds admissible_window(const GalerkinConfig& cfg) {
  if (cfg.p < 5.0) {
    return {-(kQuarterPi - cfg.delta_stop), kQuarterPi - cfg.delta_stop};
  }
  return {-kQuarterPi, kQuarterPi};
}

void check_endpoint(double t, const GalerkinConfig& cfg, const char* where) {
  const WindowBounds w = admissible_window(cfg);
  const double slack = 1e-12;
  const bool ok = cfg.p < 5.0 ? (t >= w.lo - slack && t <= w.hi + slack)
                              : (t > w.lo && t < w.hi);
  if (!ok) {
    std::ostringstream msg;
    msg << where << ": endpoint t = " << t
        << " outside the admissible window [" << w.lo << ", " << w.hi
        << "] (p = " << cfg.p << ")";
    throw std::domain_error(msg.str());
  }
}

double policy_dt(double t, const GalerkinConfig& cfg) {
  if (cfg.p < 5.0) {
    return std::min(cfg.dt0, cfg.c_dt * (kQuarterPi - std::abs(t)));
  }
  return cfg.dt0;
}

StepObservables observe(const HermiteState& u, double t,
                        const GalerkinConfig& cfg, const BasisTable& basis,
                        const ObservableSpec& spec, const HermiteState& u0,
                        double t0) {
  StepObservables obs;
  obs.mass = u.coeffs.squaredNorm();
  if (spec.record_energy) {
    obs.energy = energy(u, t, cfg, basis);
    obs.energy_rhs = energy_derivative_rhs(u, t, cfg, basis);
    const HermiteState cut = apply_cutoff(u, cutoff_multipliers(cfg));
    obs.cutoff_lp = lp_norm(cut, cfg.p + 1.0, basis);
  }
  if (spec.record_fluctuation) {
    HermiteState fluct = u;
    const HermiteState lin = harmonic_phase_evolve(u0, t - t0);
    fluct.coeffs.head(lin.n_modes()) -= lin.coeffs;
    obs.fluctuation = sobolev_norm(fluct, spec.fluctuation_sigma);
  }
  return obs;
}

}  // namespace

Trajectory evolve(const HermiteState& u0, double t0, double t1,
                  const GalerkinConfig& cfg, const BasisTable& basis,
                  const ObservableSpec& record) {
  cfg.validate();
  check_endpoint(t0, cfg, "evolve");
  check_endpoint(t1, cfg, "evolve");
  if (u0.n_modes() > cfg.n_modes) {
    throw std::invalid_argument(
        "evolve: initial state has more modes than cfg.n_modes");
  }
  if (basis.n_max < cfg.n_modes) {
    throw std::invalid_argument("evolve: basis too small for cfg.n_modes");
  }

  Trajectory traj;
  traj.t0 = t0;
  traj.t1 = t1;

  HermiteState u = HermiteState::zero(cfg.n_modes);
  u.coeffs.head(u0.n_modes()) = u0.coeffs;
  const HermiteState uref = u;

  const double dir = t1 >= t0 ? 1.0 : -1.0;
  std::vector<double> pending;
  {
    std::vector<double> cps = record.checkpoints;
    std::sort(cps.begin(), cps.end());
    if (dir < 0) std::reverse(cps.begin(), cps.end());
    for (double c : cps) {
      if (dir * (c - t0) > 1e-15 && dir * (t1 - c) >= -1e-15 &&
          (pending.empty() || std::abs(pending.back() - c) > 1e-15)) {
        pending.push_back(c);
      }
    }
  }

  auto record_step = [&](double t) {
    traj.times.push_back(t);
    traj.observables.push_back(observe(u, t, cfg, basis, record, uref, t0));
  };
  record_step(t0);

  if (t0 == t1) {
    traj.final_state = u;
    return traj;
  }

  const ActiveNonlinearity nl(cfg, basis);
  const ActiveNonlinearity* nlp = cfg.nonlinearity_enabled ? &nl : nullptr;

  const long max_steps = 200'000'000L;
  long steps = 0;
  double t = t0;
  std::size_t next_cp = 0;

  while (dir * (t1 - t) > 1e-15) {
    const double target = next_cp < pending.size() ? pending[next_cp] : t1;
    double dt;
    bool reaches_target = false;
    const double dt_max = policy_dt(t, cfg);
    if (dir * (target - t) <= dt_max * (1.0 + 1e-9)) {
      dt = target - t;  // signed
      reaches_target = true;
    } else {
      dt = dir * dt_max;
    }

    u = step_impl(u, t, dt, cfg, nlp);
    t = reaches_target ? target : t + dt;

    if (u.coeffs.squaredNorm() > 1e24) {
      throw std::runtime_error("evolve: observable blow-up (mass > 1e24)");
    }
    record_step(t);
    if (reaches_target && next_cp < pending.size()) {
      traj.checkpoint_times.push_back(t);
      traj.checkpoint_states.push_back(u);
      ++next_cp;
    }
    if (++steps > max_steps) {
      throw std::runtime_error("evolve: step budget exhausted");
    }
  }

  traj.final_state = u;
  return traj;
}

double jacobian_determinant(const HermiteState& u0, double t0, double t1,
                            const GalerkinConfig& cfg, const BasisTable& basis,
                            int hard_cap_real_dims) {
  cfg.validate();
  check_endpoint(t0, cfg, "jacobian_determinant");
  check_endpoint(t1, cfg, "jacobian_determinant");

  // the dynamical block E_N: modes 0..N (multipliers vanish from n = N on;
  // mode N rides along linearly with determinant contribution 1)
  const int n_dyn = std::min(cfg.n_modes, cfg.trunc_level + 1);
  const int dims = 2 * n_dyn;
  if (dims > hard_cap_real_dims) {
    std::ostringstream msg;
    msg << "jacobian_determinant: " << dims
        << " real dimensions exceed the cap " << hard_cap_real_dims
        << "; reduce trunc_level";
    throw std::runtime_error(msg.str());
  }
  if (t0 == t1) return 1.0;

  HermiteState u = HermiteState::zero(cfg.n_modes);
  const int have = std::min(u0.n_modes(), cfg.n_modes);
  u.coeffs.head(have) = u0.coeffs.head(have);

  const ActiveNonlinearity nl(cfg, basis);
  const int n_act = nl.n_active();
  const Complex mi(0.0, -1.0);

  using RealMat = Eigen::MatrixXd;
  RealMat jac = RealMat::Identity(dims, dims);

  auto rotate_tangent = [&](double dt) {
    for (int n = 0; n < n_dyn; ++n) {
      const double phi = -(2.0 * n + 1.0) * dt;
      const double c = std::cos(phi), s = std::sin(phi);
      Eigen::Matrix2d rot;
      rot << c, -s, s, c;
      jac.middleRows(2 * n, 2) = (rot * jac.middleRows(2 * n, 2)).eval();
    }
  };

  auto tangent_matrix = [&](const Eigen::VectorXcd& active, double coef) {
    RealMat dg = RealMat::Zero(dims, dims);
    for (int j = 0; j < 2 * n_act; ++j) {
      Eigen::VectorXcd h = Eigen::VectorXcd::Zero(n_act);
      h[j / 2] = (j % 2 == 0) ? Complex{1.0, 0.0} : Complex{0.0, 1.0};
      const Eigen::VectorXcd col = mi * coef * nl.apply_tangent(active, h);
      for (int n = 0; n < n_act; ++n) {
        dg(2 * n, j) = col[n].real();
        dg(2 * n + 1, j) = col[n].imag();
      }
    }
    return dg;
  };

  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double t = t0;
  while (dir * (t1 - t) > 1e-15) {
    const double dt_max = policy_dt(t, cfg);
    double dt;
    bool last = false;
    if (dir * (t1 - t) <= dt_max * (1.0 + 1e-9)) {
      dt = t1 - t;
      last = true;
    } else {
      dt = dir * dt_max;
    }

    rotate_tangent(0.5 * dt);
    u = harmonic_phase_evolve(u, 0.5 * dt);

    if (cfg.nonlinearity_enabled && n_act > 0) {
      const double coef = cos_factor(t + 0.5 * dt, 0.5 * (cfg.p - 5.0));
      const Eigen::VectorXcd a = u.coeffs.head(n_act);

      // RK4 stage values and the exact tangent of the discrete substep
      const Eigen::VectorXcd k1 = mi * coef * nl.apply(a);
      const RealMat dg1 = tangent_matrix(a, coef);
      const Eigen::VectorXcd a2 = a + 0.5 * dt * k1;
      const Eigen::VectorXcd k2 = mi * coef * nl.apply(a2);
      const RealMat dg2 = tangent_matrix(a2, coef);
      const Eigen::VectorXcd a3 = a + 0.5 * dt * k2;
      const Eigen::VectorXcd k3 = mi * coef * nl.apply(a3);
      const RealMat dg3 = tangent_matrix(a3, coef);
      const Eigen::VectorXcd a4 = a + dt * k3;
      const Eigen::VectorXcd k4 = mi * coef * nl.apply(a4);
      const RealMat dg4 = tangent_matrix(a4, coef);

      const RealMat eye = RealMat::Identity(dims, dims);
      const RealMat m1 = dg1;
      const RealMat m2 = dg2 * (eye + 0.5 * dt * m1);
      const RealMat m3 = dg3 * (eye + 0.5 * dt * m2);
      const RealMat m4 = dg4 * (eye + dt * m3);
      jac = (eye + (dt / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4)) * jac;

      u.coeffs.head(n_act) =
          a + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    rotate_tangent(0.5 * dt);
    u = harmonic_phase_evolve(u, 0.5 * dt);

    t = last ? t1 : t + dt;
    if (!u.all_finite()) {
      throw std::runtime_error("jacobian_determinant: state became non-finite");
    }
  }

  return Eigen::PartialPivLU<RealMat>(jac).determinant();
}

}  // namespace hermlab
