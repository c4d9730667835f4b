#pragma once

#include <limits>
#include <vector>

#include "hermlab/hermite.hpp"

namespace hermlab {

/// (sum_k w_k |u(x_k)|^p)^{1/p}, p >= 1.  Non-integer powers go through
/// pow(|u|, p) with |u| = 0 mapped to 0.
double lp_norm(const HermiteState& u, double p, const BasisTable& basis);

/// Grid form for values already sampled on a quadrature grid.
double lp_norm(const Eigen::VectorXcd& values, double p,
               const Eigen::VectorXd& weights);

/// (sum_n lambda_n^{2 sigma} |c_n|^2)^{1/2}
double sobolev_norm(const HermiteState& u, double sigma);

/// ||H^{sigma/2} u||_{L^p}: spectral multiplier lambda_n^sigma, then L^p on
/// the grid.  Requires sigma >= 0.
double weighted_sobolev_norm(const HermiteState& u, double sigma, double p,
                             const BasisTable& basis);

/// Dyadic spectral blocks I(j) = {n : 4^j <= 2n+1 < 4^{j+1}}; they partition
/// the mode indices.
struct BesovSpec {
  double sigma = 0.0;
  double p = 2.0;
  /// summation exponent over blocks; infinity selects the sup.
  double q = std::numeric_limits<double>::infinity();
};

/// Block index j with n in I(j) (exact integer computation).
int besov_block_index(int n);

/// First mode of block j, i.e. smallest n with 2n+1 >= 4^j.
int besov_block_start(int j);

/// Per-block coefficient masses (sum_{n in I(j)} |c_n|^2)^{1/2}.
Eigen::VectorXd besov_block_l2(const HermiteState& u);

/// l^q over j of 2^{j sigma} || block_j(u) ||_{L^p}.  For p = 2 the block
/// norms are taken in coefficients (Parseval), otherwise on the grid.
double besov_norm(const HermiteState& u, const BesovSpec& spec,
                  const BasisTable& basis);

enum class TimeReduce { Sup, Lq };

/// Default sampling of the time window for the space-time proxy:
/// 257 equispaced points on [-pi, pi].
std::vector<double> default_spacetime_grid();

/// Finite-sample space-time norm of the free flow: evolves u0 by exact phases
/// at each grid time, takes || . ||_{W^{sigma,r}}, and reduces by sup or by a
/// trapezoid L^q quadrature in t.  The continuum sup is not computable; the
/// grid density is the caller's choice (default elsewhere: 257 points).
double linear_spacetime_norm(const HermiteState& u0, double sigma, double r,
                             const std::vector<double>& t_grid,
                             TimeReduce reduce, double q,
                             const BasisTable& basis);

}  // namespace hermlab
