#pragma once

#include <optional>
#include <vector>

#include "hermlab/hermite.hpp"
#include "hermlab/norms.hpp"

namespace hermlab {

inline constexpr double kQuarterPi = 0.78539816339744831;

/// Smooth spectral cutoff profile: 1 on [0, 1/2], 0 on [1, inf), C^inf
/// monotone bridge chi(r) = phi(2-2r) / (phi(2-2r) + phi(2r-1)) with
/// phi(x) = e^{-1/x} for x > 0.
struct CutoffSpec {
  double value(double r) const;
};

/// Truncated-flow configuration.  trunc_level is the cutoff scale N: mode n
/// carries the multiplier chi((2n+1)/(2N+1)), so multipliers vanish for
/// n >= N and the state needs n_modes >= N.
struct GalerkinConfig {
  double p = 5.0;  // nonlinearity exponent, > 1
  int trunc_level = 16;
  int n_modes = 64;
  CutoffSpec cutoff;
  double dt0 = 2.5e-4;
  double c_dt = 0.05;        // adaptive shrink toward the p<5 window edge
  double delta_stop = 1e-3;  // unreachable margin at t = +-pi/4 for p < 5
  bool nonlinearity_enabled = true;

  void validate() const;  // throws std::invalid_argument
};

/// m_n = chi((2n+1)/(2N+1)) for n < n_modes; in [0,1], nonincreasing,
/// m_n = 1 while 2n+1 <= (2N+1)/2 and m_n = 0 once 2n+1 >= 2N+1.
Eigen::VectorXd cutoff_multipliers(const GalerkinConfig& cfg);

HermiteState apply_cutoff(const HermiteState& u,
                          const Eigen::VectorXd& multipliers);

/// -i cos^{(p-5)/2}(2t) S_N(|S_N u|^{p-1} S_N u); zero when the nonlinearity
/// is disabled.  Output is supported on the modes with nonzero multiplier.
HermiteState nonlinear_rhs(const HermiteState& u, double t,
                           const GalerkinConfig& cfg, const BasisTable& basis);

/// One Strang step over [t, t+dt]: half-step exact linear phases, one RK4
/// substep of the projected nonlinearity with the cos factor frozen at the
/// midpoint, half-step phases.  Modes with zero multiplier evolve purely
/// linearly.  Throws std::runtime_error if the state stops being finite.
HermiteState step(const HermiteState& u, double t, double dt,
                  const GalerkinConfig& cfg, const BasisTable& basis);

/// E_N(t,u) = 1/2 sum lambda_n^2 |c_n|^2
///            + cos^{(p-5)/2}(2t)/(p+1) ||S_N u||_{L^{p+1}}^{p+1}
double energy(const HermiteState& u, double t, const GalerkinConfig& cfg,
              const BasisTable& basis);

/// dE_N/dt along the flow:
/// (5-p) sin(2t) cos^{(p-7)/2}(2t)/(p+1) ||S_N u||_{L^{p+1}}^{p+1}
double energy_derivative_rhs(const HermiteState& u, double t,
                             const GalerkinConfig& cfg,
                             const BasisTable& basis);

/// exp(-cos^{(p-5)/2}(2t)/(p+1) ||v||_{L^{p+1}}^{p+1}) with v the cutoff of u
/// at trunc_level when given, v = u otherwise.  Always in (0, 1]; requires
/// |t| < pi/4.
double interaction_weight(const HermiteState& u, double t, double p,
                          std::optional<int> trunc_level,
                          const CutoffSpec& cutoff, const BasisTable& basis);

struct StepObservables {
  double mass = 0.0;       // ||u||_{L^2}^2
  double energy = 0.0;     // E_N(t, u)
  double energy_rhs = 0.0; // value of the energy-law right-hand side
  double cutoff_lp = 0.0;  // ||S_N u||_{L^{p+1}}
  double fluctuation = 0.0;  // ||u - e^{-i(t-t0)H} u0||_{H^rho}
};

struct ObservableSpec {
  bool record_energy = true;
  bool record_fluctuation = false;
  double fluctuation_sigma = 0.1;
  /// times at which full states are stored (clipped to the evolved interval)
  std::vector<double> checkpoints;
};

struct Trajectory {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<double> times;  // every accepted step, strictly monotone
  std::vector<StepObservables> observables;
  std::vector<double> checkpoint_times;
  std::vector<HermiteState> checkpoint_states;
  HermiteState final_state;
};

/// Integrates the truncated flow from t0 to t1 (either direction).  Step
/// control: dt = min(dt0, c_dt (pi/4 - |t|)) for p < 5 (the cos factor blows
/// up at the window edge), constant dt0 for p >= 5.  For p < 5 both endpoints
/// must stay delta_stop away from +-pi/4.  Checkpoints are hit exactly.
Trajectory evolve(const HermiteState& u0, double t0, double t1,
                  const GalerkinConfig& cfg, const BasisTable& basis,
                  const ObservableSpec& record = {});

/// Determinant of the tangent map of the numerical flow on E_N, the state
/// treated as a real vector of dimension 2(N+1).  The variational equations
/// ride along the same splitting steps, so this is the exact Jacobian of the
/// discrete map.  Refuses dimensions above hard_cap_real_dims.
double jacobian_determinant(const HermiteState& u0, double t0, double t1,
                            const GalerkinConfig& cfg, const BasisTable& basis,
                            int hard_cap_real_dims = 32);

}  // namespace hermlab
