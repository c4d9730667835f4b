#include "hermlab/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hermlab/hermite.hpp"

namespace hermlab {

QuadratureGrid gauss_hermite_grid(int m) {
  if (m < 1) {
    throw std::invalid_argument("gauss_hermite_grid: M must be >= 1");
  }

  // Jacobi matrix of the (physicists') Hermite polynomials: zero diagonal,
  // off-diagonal sqrt(k/2).  Its eigenvalues are the nodes.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sub = Eigen::VectorXd::Zero(m > 1 ? m - 1 : 1);
  for (int k = 1; k < m; ++k) {
    sub[k - 1] = std::sqrt(0.5 * k);
  }

  Eigen::VectorXd nodes;
  if (m == 1) {
    nodes = Eigen::VectorXd::Zero(1);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub.head(m - 1),
                                  Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error(
          "gauss_hermite_grid: tridiagonal eigenvalue iteration failed to "
          "converge for M = " + std::to_string(m));
    }
    nodes = solver.eigenvalues();  // ascending
  }

  // The exact rule is symmetric; enforce node_k = -node_{M-1-k} and a true
  // zero at the center for odd M.
  for (int k = 0; k < m / 2; ++k) {
    const double v = 0.5 * (nodes[m - 1 - k] - nodes[k]);
    nodes[k] = -v;
    nodes[m - 1 - k] = v;
  }
  if (m % 2 == 1) {
    nodes[m / 2] = 0.0;
  }

  QuadratureGrid grid;
  grid.nodes = nodes;
  grid.weights.resize(m);
  grid.raw_weights.resize(m);

  // Adjusted weight = reciprocal Christoffel sum over the normalized
  // eigenfunctions; raw weight restores the e^{-x^2} factor.
  std::vector<double> e(m);
  for (int k = 0; k < m; ++k) {
    hermite_values(nodes[k], m, e);
    double christoffel = 0.0;
    for (double v : e) {
      christoffel += v * v;
    }
    grid.weights[k] = 1.0 / christoffel;
    grid.raw_weights[k] = std::exp(-nodes[k] * nodes[k]) / christoffel;
  }
  return grid;
}

}  // namespace hermlab
