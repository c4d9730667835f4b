#pragma once

#include <Eigen/Dense>

namespace hermlab {

/// Gauss-Hermite rule.  `weights` carry the e^{x_k^2} adjustment so that
/// sum_k weights[k] f(nodes[k]) approximates \int f(x) dx for Gaussian-decaying
/// f; `raw_weights` are the classical weights for integrals against e^{-x^2}.
/// Nodes are strictly increasing and symmetric about 0.
struct QuadratureGrid {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  Eigen::VectorXd raw_weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

/// Golub-Welsch construction: nodes are the eigenvalues of the symmetric
/// tridiagonal Jacobi matrix, weights come from the Christoffel sum
/// 1 / sum_{n<M} e_n(x_k)^2 evaluated with the stable normalized recurrence.
/// The rule integrates (polynomials of degree <= 2M-1) x e^{-x^2} exactly.
QuadratureGrid gauss_hermite_grid(int m);

}  // namespace hermlab
