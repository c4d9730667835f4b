#pragma once

#include <vector>

#include "hermlab/galerkin.hpp"
#include "hermlab/hermite.hpp"
#include "hermlab/norms.hpp"

namespace hermlab {

/// Time maps between the line (s) and the oscillator window (t):
/// t = arctan(2s)/2, s = tan(2t)/2; t is strictly increasing in s and tends
/// to +-pi/4 as s -> +-infinity.
double t_of_s(double s);
double s_of_t(double t);  // requires |t| < pi/4

/// Samples of a function on an explicit grid with quadrature weights, used
/// for line-side (y variable) data produced by the lens maps.
struct GridFunction {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  Eigen::VectorXcd values;
};

double lp_norm(const GridFunction& f, double p);

/// u(x) = cos^{-1/2}(2t) U(x/cos 2t) e^{-i x^2 tan(2t)/2}.  The input is
/// expected on the dilated grid nodes/cos(2t) (as produced by lens_inverse),
/// so no interpolation occurs; output lives on the oscillator grid.
GridFunction lens_forward(const GridFunction& U, double t,
                          const QuadratureGrid& grid);

/// U(y) = cos^{1/2}(2t) u(y cos 2t) e^{+i y^2 cos(2t) sin(2t)/2}, evaluated
/// on the dilated grid y_k = nodes_k / cos(2t) where sampling u is native.
GridFunction lens_inverse(const HermiteState& u, double t,
                          const BasisTable& basis);

/// e^{i s d_y^2} u0 through the conjugation with the oscillator flow: exact
/// phases e^{-i(2n+1)t(s)} followed by the inverse lens map.  Exact up to
/// basis truncation, for arbitrary s.
GridFunction free_propagate(const HermiteState& u0, double s,
                            const BasisTable& basis);

/// Same propagation evaluated at arbitrary points.
Eigen::VectorXcd free_propagate_at(const HermiteState& u0, double s,
                                   const Eigen::VectorXd& points);

/// ||U(s(t))||_{L^q} = cos^{1/2 - 1/q}(2t) ||u||_{L^q}: the exact scaling of
/// L^q norms under the lens map, no grid transform needed.
double nls_side_norm(const HermiteState& u, double t, double q,
                     const BasisTable& basis);

struct ScatteringProfile {
  HermiteState w_plus;  // e^{i pi H/4} v(t_last)
  std::vector<double> checkpoint_times;
  /// ||v(t_k) - v(t_{k-1})||_{H^sigma} for consecutive checkpoints
  std::vector<double> cauchy_increments;
  /// slope of log increment against log(pi/4 - t); positive when Cauchy
  double cauchy_rate = 0.0;
  std::vector<double> residual_s;
  /// ||U(s_k) - e^{i s_k d^2}(u0 + W+)||_{L^2} on the line side
  std::vector<double> residuals;
  /// slope of log residual against log<s>; negative when converging
  double residual_rate = 0.0;
  bool cauchy_monotone = true;
  /// non-Cauchy diagnostic (increments failed to decrease); never an exception
  bool flagged = false;
};

/// Asymptotic-profile extraction from a trajectory with recorded checkpoint
/// states approaching pi/4: fluctuations v(t_k) = u(t_k) - e^{-i(t_k-t0)H}u0,
/// their Cauchy increments in H^sigma, the profile W+ pulled back from the
/// last checkpoint, and line-side residuals via free propagation.
ScatteringProfile scattering_profile(const Trajectory& traj,
                                     const HermiteState& u0, double sigma,
                                     const BasisTable& basis);

}  // namespace hermlab
