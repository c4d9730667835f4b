#include "hermlab/hermite.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace hermlab {

namespace {
constexpr double kPiQuarterInv = 0.75112554446494248;  // pi^{-1/4}
constexpr double kLog2E = 1.4426950408889634;
}  // namespace

HermiteState harmonic_phase_evolve(const HermiteState& u, double dt) {
  HermiteState out = u;
  for (int n = 0; n < out.n_modes(); ++n) {
    out.coeffs[n] *= std::polar(1.0, -(2.0 * n + 1.0) * dt);
  }
  return out;
}

void hermite_values(double x, int n_max, std::span<double> out) {
  if (n_max <= 0) return;
  // Seed e_0 = pi^{-1/4} e^{-x^2/2} as mantissa * 2^ex so the envelope never
  // underflows; the recurrence envelope only grows until the classically
  // allowed region, so a one-sided rescale keeps the pair in range.
  const double l2 = -0.5 * x * x * kLog2E;
  int ex = static_cast<int>(std::floor(l2));
  double cur = kPiQuarterInv * std::exp2(l2 - ex);
  double prev = 0.0;
  for (int n = 0; n < n_max; ++n) {
    out[n] = std::ldexp(cur, ex);
    const double next = x * std::sqrt(2.0 / (n + 1)) * cur -
                        std::sqrt(static_cast<double>(n) / (n + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > 0x1p500 || std::abs(prev) > 0x1p500) {
      cur = std::ldexp(cur, -512);
      prev = std::ldexp(prev, -512);
      ex += 512;
    }
  }
}

BasisTable build_basis(int n_max, QuadratureGrid grid) {
  if (n_max < 1) {
    throw std::invalid_argument("build_basis: n_max must be >= 1");
  }
  if (grid.size() < 1) {
    throw std::invalid_argument("build_basis: empty quadrature grid");
  }
  if (grid.size() < 2 * n_max + 1) {
    std::cerr << "hermlab: basis with M = " << grid.size() << " < 2*n_max+1 = "
              << 2 * n_max + 1
              << "; quadrature orthonormality is not guaranteed\n";
  }

  BasisTable basis;
  basis.grid = std::move(grid);
  basis.n_max = n_max;
  const int m = basis.grid.size();
  basis.values.resize(m, n_max);
  std::vector<double> buf(n_max);
  for (int k = 0; k < m; ++k) {
    hermite_values(basis.grid.nodes[k], n_max, buf);
    for (int n = 0; n < n_max; ++n) {
      basis.values(k, n) = buf[n];
    }
  }
  basis.eigenvalues.resize(n_max);
  for (int n = 0; n < n_max; ++n) {
    basis.eigenvalues[n] = mode_frequency(n);
  }
  if (!basis.values.allFinite()) {
    throw std::runtime_error("build_basis: non-finite eigenfunction value");
  }
  return basis;
}

Eigen::VectorXcd to_grid(const HermiteState& u, const BasisTable& basis) {
  if (u.n_modes() < 1 || u.n_modes() > basis.n_max) {
    throw std::invalid_argument(
        "to_grid: state has " + std::to_string(u.n_modes()) +
        " modes, basis holds " + std::to_string(basis.n_max));
  }
  const auto view = basis.values.leftCols(u.n_modes());
  Eigen::VectorXcd out(basis.size());
  out.real() = view * u.coeffs.real();
  out.imag() = view * u.coeffs.imag();
  return out;
}

HermiteState to_coeffs(const Eigen::VectorXcd& values, const BasisTable& basis,
                       int n_modes) {
  if (values.size() != basis.size()) {
    throw std::invalid_argument(
        "to_coeffs: " + std::to_string(values.size()) + " values on a grid of " +
        std::to_string(basis.size()) + " nodes");
  }
  if (n_modes < 1 || n_modes > basis.n_max) {
    throw std::invalid_argument("to_coeffs: n_modes out of basis range");
  }
  const auto view = basis.values.leftCols(n_modes);
  Eigen::VectorXd wr = basis.grid.weights.cwiseProduct(values.real());
  Eigen::VectorXd wi = basis.grid.weights.cwiseProduct(values.imag());
  HermiteState out = HermiteState::zero(n_modes);
  out.coeffs.real() = view.transpose() * wr;
  out.coeffs.imag() = view.transpose() * wi;
  return out;
}

Eigen::VectorXcd evaluate_at(const HermiteState& u,
                             const Eigen::VectorXd& points) {
  const int n = u.n_modes();
  Eigen::VectorXcd out(points.size());
  std::vector<double> buf(n);
  for (int k = 0; k < points.size(); ++k) {
    hermite_values(points[k], n, buf);
    Complex acc = 0.0;
    for (int j = 0; j < n; ++j) {
      acc += u.coeffs[j] * buf[j];
    }
    out[k] = acc;
  }
  return out;
}

double mehler_kernel(double x, double y, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::domain_error("mehler_kernel: alpha must lie in [0, 1)");
  }
  const double pi = 3.14159265358979324;
  const double plus = (1.0 - alpha) / (1.0 + alpha) * (x + y) * (x + y) / 4.0;
  const double minus = (1.0 + alpha) / (1.0 - alpha) * (x - y) * (x - y) / 4.0;
  return std::exp(-plus - minus) / std::sqrt(pi * (1.0 - alpha * alpha));
}

double mehler_series(double x, double y, double alpha, int n_terms) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::domain_error("mehler_series: alpha must lie in [0, 1)");
  }
  std::vector<double> ex(n_terms), ey(n_terms);
  hermite_values(x, n_terms, ex);
  hermite_values(y, n_terms, ey);
  double acc = 0.0;
  double a_pow = 1.0;
  for (int n = 0; n < n_terms; ++n) {
    acc += a_pow * ex[n] * ey[n];
    a_pow *= alpha;
  }
  return acc;
}

std::vector<BoundScanEntry> eigenfunction_bound_scan(
    BoundKind kind, const std::vector<int>& n_list, const BasisTable& basis,
    double gamma) {
  if (kind == BoundKind::WeightedL4 && !(gamma < 0.25)) {
    throw std::domain_error(
        "eigenfunction_bound_scan: weighted kind needs gamma < 1/4");
  }
  int n_top = 0;
  for (int n : n_list) {
    if (n < 0 || n >= basis.n_max) {
      throw std::invalid_argument(
          "eigenfunction_bound_scan: n outside basis range");
    }
    n_top = std::max(n_top, n);
  }
  if (basis.size() < 4 * n_top) {
    std::cerr << "hermlab: bound scan with M = " << basis.size() << " < 4*"
              << n_top << "; oscillations of e_n may be under-resolved\n";
  }

  const int m = basis.size();
  std::vector<BoundScanEntry> table;
  table.reserve(n_list.size());
  for (int n : n_list) {
    const auto col = basis.values.col(n);
    double value = 0.0;
    switch (kind) {
      case BoundKind::L4: {
        double acc = 0.0;
        for (int k = 0; k < m; ++k) {
          const double v2 = col[k] * col[k];
          acc += basis.grid.weights[k] * v2 * v2;
        }
        value = std::pow(acc, 0.25);
        break;
      }
      case BoundKind::Linf: {
        value = col.cwiseAbs().maxCoeff();
        break;
      }
      case BoundKind::WeightedL4: {
        double acc = 0.0;
        for (int k = 0; k < m; ++k) {
          const double xk = basis.grid.nodes[k];
          if (xk == 0.0) continue;  // removable bias for gamma < 1/4
          const double v2 = col[k] * col[k];
          acc += basis.grid.weights[k] * v2 * v2 *
                 std::pow(std::abs(xk), -4.0 * gamma);
        }
        value = std::pow(acc, 0.25);
        break;
      }
    }
    table.push_back({n, value});
  }
  return table;
}

}  // namespace hermlab
