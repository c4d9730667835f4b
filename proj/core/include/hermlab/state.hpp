#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

namespace hermlab {

using Complex = std::complex<double>;

/// lambda_n = sqrt(2n+1), the frequency of the n-th oscillator eigenmode.
inline double mode_frequency(int n) { return std::sqrt(2.0 * n + 1.0); }

/// A function represented by its coefficients in the oscillator eigenbasis,
/// u = sum_n c_n e_n.  Parseval: ||u||_{L^2}^2 = sum |c_n|^2.
struct HermiteState {
  Eigen::VectorXcd coeffs;

  HermiteState() = default;
  explicit HermiteState(Eigen::VectorXcd c) : coeffs(std::move(c)) {}

  static HermiteState zero(int n_modes) {
    return HermiteState(Eigen::VectorXcd::Zero(n_modes));
  }

  int n_modes() const { return static_cast<int>(coeffs.size()); }
  double l2_norm() const { return coeffs.norm(); }
  bool all_finite() const { return coeffs.allFinite(); }
};

/// Exact free oscillator flow e^{-i dt H}: c_n -> e^{-i(2n+1) dt} c_n.
HermiteState harmonic_phase_evolve(const HermiteState& u, double dt);

}  // namespace hermlab
