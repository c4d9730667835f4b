#pragma once

#include <span>
#include <vector>

#include "hermlab/quadrature.hpp"
#include "hermlab/state.hpp"

namespace hermlab {

/// Evaluates the L^2-normalized oscillator eigenfunctions e_0..e_{n_max-1}
/// at x with the three-term recurrence
///   e_{n+1} = x sqrt(2/(n+1)) e_n - sqrt(n/(n+1)) e_{n-1},
///   e_0 = pi^{-1/4} e^{-x^2/2}.
/// The pair (e_{n-1}, e_n) is carried with a shared power-of-two exponent so
/// the seed cannot underflow at large |x|; values below DBL_MIN come out as 0.
void hermite_values(double x, int n_max, std::span<double> out);

/// Cached eigenfunction values on a quadrature grid.  Immutable after
/// construction and safe to share across threads.
struct BasisTable {
  QuadratureGrid grid;
  int n_max = 0;
  Eigen::MatrixXd values;       // M x n_max, column n holds e_n at the nodes
  Eigen::VectorXd eigenvalues;  // lambda_n = sqrt(2n+1)

  int size() const { return grid.size(); }
};

/// Warns on stderr when M < 2*n_max+1 (quadrature Gram loses orthonormality).
BasisTable build_basis(int n_max, QuadratureGrid grid);

/// Pointwise synthesis u(x_k) = sum_n c_n e_n(x_k).
Eigen::VectorXcd to_grid(const HermiteState& u, const BasisTable& basis);

/// Quadrature analysis c_n = sum_k w_k v_k e_n(x_k); exact on
/// span{e_0..e_{n_modes-1}} when the quadrature degree suffices.
HermiteState to_coeffs(const Eigen::VectorXcd& values, const BasisTable& basis,
                       int n_modes);

/// Synthesis at arbitrary points (per-point recurrence, no table required).
Eigen::VectorXcd evaluate_at(const HermiteState& u,
                             const Eigen::VectorXd& points);

/// Closed form of sum_n alpha^n e_n(x) e_n(y) for 0 <= alpha < 1:
///   (pi(1-a^2))^{-1/2} exp(-(1-a)/(1+a) (x+y)^2/4 - (1+a)/(1-a) (x-y)^2/4).
double mehler_kernel(double x, double y, double alpha);

/// Truncated series, the independent cross-check of the closed form; the
/// geometric tail is bounded by alpha^{n_terms}/(1-alpha) times sup e_n^2.
double mehler_series(double x, double y, double alpha, int n_terms);

enum class BoundKind { L4, Linf, WeightedL4 };

struct BoundScanEntry {
  int n;
  double value;
};

/// Quadrature norms ||e_n||_{L^4}, ||e_n||_{L^inf} (max over nodes) or
/// || |x|^{-gamma} e_n ||_{L^4} with gamma < 1/4.  For the weighted kind the
/// node at x = 0 (odd M) is skipped; the bias vanishes as the grid grows.
/// Warns when M < 4*max(n_list) (grid too coarse to resolve e_n).
std::vector<BoundScanEntry> eigenfunction_bound_scan(
    BoundKind kind, const std::vector<int>& n_list, const BasisTable& basis,
    double gamma = 0.0);

}  // namespace hermlab
