#include "hermlab/norms.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace hermlab {

double lp_norm(const Eigen::VectorXcd& values, double p,
               const Eigen::VectorXd& weights) {
  if (!(p >= 1.0)) {
    throw std::invalid_argument("lp_norm: p must be >= 1");
  }
  if (values.size() != weights.size()) {
    throw std::invalid_argument("lp_norm: values/weights size mismatch");
  }
  double acc = 0.0;
  for (int k = 0; k < values.size(); ++k) {
    acc += weights[k] * std::pow(std::abs(values[k]), p);
  }
  return std::pow(acc, 1.0 / p);
}

double lp_norm(const HermiteState& u, double p, const BasisTable& basis) {
  return lp_norm(to_grid(u, basis), p, basis.grid.weights);
}

double sobolev_norm(const HermiteState& u, double sigma) {
  double acc = 0.0;
  for (int n = 0; n < u.n_modes(); ++n) {
    acc += std::pow(2.0 * n + 1.0, sigma) * std::norm(u.coeffs[n]);
  }
  return std::sqrt(acc);
}

double weighted_sobolev_norm(const HermiteState& u, double sigma, double p,
                             const BasisTable& basis) {
  if (sigma < 0.0) {
    throw std::invalid_argument("weighted_sobolev_norm: sigma must be >= 0");
  }
  HermiteState scaled = u;
  for (int n = 0; n < scaled.n_modes(); ++n) {
    scaled.coeffs[n] *= std::pow(2.0 * n + 1.0, 0.5 * sigma);
  }
  return lp_norm(scaled, p, basis);
}

int besov_block_index(int n) {
  // j with 4^j <= 2n+1 < 4^{j+1}: half the bit position of 2n+1.
  const unsigned v = static_cast<unsigned>(2 * n + 1);
  return (std::bit_width(v) - 1) / 2;
}

int besov_block_start(int j) {
  // smallest n with 2n+1 >= 4^j
  const long long lo = 1LL << (2 * j);
  return static_cast<int>(lo / 2);
}

Eigen::VectorXd besov_block_l2(const HermiteState& u) {
  const int n = u.n_modes();
  if (n == 0) return Eigen::VectorXd::Zero(1);
  const int j_max = besov_block_index(n - 1);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(j_max + 1);
  for (int k = 0; k < n; ++k) {
    mass[besov_block_index(k)] += std::norm(u.coeffs[k]);
  }
  return mass.cwiseSqrt();
}

double besov_norm(const HermiteState& u, const BesovSpec& spec,
                  const BasisTable& basis) {
  const int n = u.n_modes();
  if (n == 0) return 0.0;
  const int j_max = besov_block_index(n - 1);

  std::vector<double> block_norms(j_max + 1, 0.0);
  if (spec.p == 2.0) {
    const Eigen::VectorXd mass = besov_block_l2(u);
    for (int j = 0; j <= j_max; ++j) block_norms[j] = mass[j];
  } else {
    for (int j = 0; j <= j_max; ++j) {
      HermiteState block = HermiteState::zero(n);
      const int lo = besov_block_start(j);
      const int hi = std::min(n, besov_block_start(j + 1));
      for (int k = lo; k < hi; ++k) block.coeffs[k] = u.coeffs[k];
      block_norms[j] = lp_norm(block, spec.p, basis);
    }
  }

  if (std::isinf(spec.q)) {
    double best = 0.0;
    for (int j = 0; j <= j_max; ++j) {
      best = std::max(best, std::exp2(j * spec.sigma) * block_norms[j]);
    }
    return best;
  }
  if (!(spec.q >= 1.0)) {
    throw std::invalid_argument("besov_norm: q must be in [1, inf]");
  }
  double acc = 0.0;
  for (int j = 0; j <= j_max; ++j) {
    acc += std::pow(std::exp2(j * spec.sigma) * block_norms[j], spec.q);
  }
  return std::pow(acc, 1.0 / spec.q);
}

std::vector<double> default_spacetime_grid() {
  constexpr double kPi = 3.14159265358979324;
  std::vector<double> grid(257);
  for (int i = 0; i < 257; ++i) {
    grid[i] = -kPi + 2.0 * kPi * i / 256.0;
  }
  return grid;
}

double linear_spacetime_norm(const HermiteState& u0, double sigma, double r,
                             const std::vector<double>& t_grid,
                             TimeReduce reduce, double q,
                             const BasisTable& basis) {
  if (t_grid.empty()) {
    throw std::invalid_argument("linear_spacetime_norm: empty time grid");
  }
  std::vector<double> vals(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const HermiteState ut = harmonic_phase_evolve(u0, t_grid[i]);
    vals[i] = weighted_sobolev_norm(ut, sigma, r, basis);
  }
  if (reduce == TimeReduce::Sup) {
    double best = 0.0;
    for (double v : vals) best = std::max(best, v);
    return best;
  }
  if (!(q >= 1.0)) {
    throw std::invalid_argument("linear_spacetime_norm: q must be >= 1");
  }
  if (t_grid.size() == 1) return vals[0];
  // trapezoid quadrature in t
  double acc = 0.0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    double w;
    if (i == 0) {
      w = 0.5 * (t_grid[1] - t_grid[0]);
    } else if (i + 1 == t_grid.size()) {
      w = 0.5 * (t_grid[i] - t_grid[i - 1]);
    } else {
      w = 0.5 * (t_grid[i + 1] - t_grid[i - 1]);
    }
    acc += w * std::pow(vals[i], q);
  }
  return std::pow(acc, 1.0 / q);
}

}  // namespace hermlab
