#include "hermlab/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hermlab/fit.hpp"
#include "hermlab/lens.hpp"

namespace hermlab {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c,
                         const std::array<std::uint32_t, 2>& k) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
  const std::array<std::uint32_t, 4> next = {
      static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
      static_cast<std::uint32_t>(p1),
      static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
      static_cast<std::uint32_t>(p0),
  };
  c = next;
}

inline double to_unit_double(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>(bits) * 0x1p-64;
}

std::array<std::uint32_t, 4> draw_block(const SampleSeed& seed,
                                        std::uint32_t slot,
                                        std::uint32_t stream) {
  const std::array<std::uint32_t, 4> counter = {
      static_cast<std::uint32_t>(seed.sample_index),
      static_cast<std::uint32_t>(seed.sample_index >> 32),
      slot,
      stream,
  };
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed.master_seed),
      static_cast<std::uint32_t>(seed.master_seed >> 32),
  };
  return philox4x32(counter, key);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    philox_round(counter, key);
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return counter;
}

double uniform01(const SampleSeed& seed, std::uint32_t slot,
                 std::uint32_t stream) {
  const auto r = draw_block(seed, slot, stream);
  return to_unit_double(r[0], r[1]);
}

Complex complex_gaussian(const SampleSeed& seed, std::uint32_t mode_index,
                         std::uint32_t stream) {
  const auto r = draw_block(seed, mode_index, stream);
  const double u1 = to_unit_double(r[0], r[1]);
  const double u2 = to_unit_double(r[2], r[3]);
  // |g|^2 = -log(1-u1) ~ Exp(1), phase uniform: E|g|^2 = 1.
  const double radius = std::sqrt(-std::log1p(-u1));
  const double angle = 2.0 * 3.14159265358979324 * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

HermiteState sample_gaussian_state(int n_modes, const SampleSeed& seed,
                                   double variance_scale) {
  if (n_modes < 1) {
    throw std::invalid_argument("sample_gaussian_state: n_modes must be >= 1");
  }
  if (!(variance_scale > 0.0)) {
    throw std::invalid_argument("sample_gaussian_state: variance_scale <= 0");
  }
  const double scale = std::sqrt(variance_scale);
  HermiteState out = HermiteState::zero(n_modes);
  for (int n = 0; n < n_modes; ++n) {
    out.coeffs[n] = scale * complex_gaussian(seed, static_cast<std::uint32_t>(n)) /
                    mode_frequency(n);
  }
  return out;
}

namespace {

// Relative L^2 mass outside the retained modes after a grid projection.
double projection_residual(const Eigen::VectorXcd& values,
                           const HermiteState& projected,
                           const Eigen::VectorXd& weights) {
  double grid_mass = 0.0;
  for (int k = 0; k < values.size(); ++k) {
    grid_mass += weights[k] * std::norm(values[k]);
  }
  if (grid_mass <= 0.0) return 0.0;
  const double kept = projected.coeffs.squaredNorm();
  return std::sqrt(std::max(0.0, grid_mass - kept) / grid_mass);
}

}  // namespace

TransformedSample sample_gaussian_family(const MeasureParams& params,
                                         int n_modes, const SampleSeed& seed,
                                         const BasisTable& basis,
                                         double residual_warn_threshold) {
  if (!(params.dilation > 0.0)) {
    throw std::domain_error("sample_gaussian_family: dilation must be > 0");
  }
  if (params.homothety == Complex{0.0, 0.0}) {
    throw std::domain_error("sample_gaussian_family: homothety must be nonzero");
  }
  if (n_modes > basis.n_max) {
    throw std::invalid_argument("sample_gaussian_family: n_modes beyond basis");
  }

  TransformedSample out;
  HermiteState state = sample_gaussian_state(n_modes, seed);
  double residual = 0.0;

  // shift then dilation, one grid resampling:
  // (Lambda_beta tau_theta u)(x) = beta^{1/2} u(beta x - theta)
  if (params.dilation != 1.0 || params.shift != 0.0) {
    const Eigen::VectorXd points =
        params.dilation * basis.grid.nodes.array() - params.shift;
    Eigen::VectorXcd values = evaluate_at(state, points);
    values *= std::sqrt(params.dilation);
    HermiteState projected = to_coeffs(values, basis, n_modes);
    residual = std::max(
        residual, projection_residual(values, projected, basis.grid.weights));
    state = std::move(projected);
  }

  state.coeffs *= params.homothety;

  // exact free propagation through the lens identity, then re-projection
  if (params.free_time != 0.0) {
    const Eigen::VectorXcd values =
        free_propagate_at(state, params.free_time, basis.grid.nodes);
    HermiteState projected = to_coeffs(values, basis, n_modes);
    residual = std::max(
        residual, projection_residual(values, projected, basis.grid.weights));
    state = std::move(projected);
  }

  out.state = std::move(state);
  out.projection_residual = residual;
  out.warn = residual > residual_warn_threshold;
  return out;
}

TailFit tail_estimate(const std::vector<double>& values,
                      const std::vector<double>& thresholds,
                      std::uint64_t bootstrap_seed, int bootstrap_rounds) {
  if (values.empty()) {
    throw std::invalid_argument("tail_estimate: empty sample set");
  }
  const double m = static_cast<double>(values.size());

  auto survival_at = [](const std::vector<double>& vals, double k) {
    std::size_t hits = 0;
    for (double v : vals) {
      if (v > k) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(vals.size());
  };

  TailFit fit;
  fit.thresholds = thresholds;
  fit.survival.resize(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    fit.survival[i] = survival_at(values, thresholds[i]);
  }

  auto fit_curvature = [&](const std::vector<double>& surv) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (surv[i] >= 10.0 / m && surv[i] <= 0.5) {
        xs.push_back(thresholds[i] * thresholds[i]);
        ys.push_back(std::log(surv[i]));
      }
    }
    LinearFit lf = linear_fit(xs, ys);
    return std::pair<double, int>{-lf.slope, lf.n};
  };

  auto [curv, npts] = fit_curvature(fit.survival);
  fit.curvature = curv;
  fit.fit_points = npts;
  {  // intercept from the same restricted fit
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (fit.survival[i] >= 10.0 / m && fit.survival[i] <= 0.5) {
        xs.push_back(thresholds[i] * thresholds[i]);
        ys.push_back(std::log(fit.survival[i]));
      }
    }
    fit.intercept = linear_fit(xs, ys).intercept;
  }

  if (bootstrap_rounds > 0 && fit.fit_points >= 2) {
    std::vector<double> curvatures;
    curvatures.reserve(bootstrap_rounds);
    std::vector<double> resampled(values.size());
    for (int b = 0; b < bootstrap_rounds; ++b) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        const SampleSeed seed{bootstrap_seed, static_cast<std::uint64_t>(b)};
        const double u = uniform01(seed, static_cast<std::uint32_t>(i), 1u);
        resampled[i] = values[static_cast<std::size_t>(u * m)];
      }
      std::vector<double> surv(thresholds.size());
      for (std::size_t i = 0; i < thresholds.size(); ++i) {
        surv[i] = survival_at(resampled, thresholds[i]);
      }
      auto [c, n] = fit_curvature(surv);
      if (n >= 2) curvatures.push_back(c);
    }
    fit.curvature_stderr = stddev(curvatures);
  }
  return fit;
}

TailFit tail_estimate(const std::vector<HermiteState>& samples,
                      const std::function<double(const HermiteState&)>& functional,
                      const std::vector<double>& thresholds,
                      std::uint64_t bootstrap_seed, int bootstrap_rounds) {
  if (samples.empty()) {
    throw std::invalid_argument("tail_estimate: empty sample set");
  }
  std::vector<double> values(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    values[i] = functional(samples[i]);
  }
  return tail_estimate(values, thresholds, bootstrap_seed, bootstrap_rounds);
}

std::vector<double> quantile_thresholds(std::vector<double> values, int count,
                                        double lo_quantile, double hi_quantile) {
  if (values.empty() || count < 1) return {};
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * (values.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= values.size()) return values.back();
    return values[i] * (1.0 - frac) + values[i + 1] * frac;
  };
  const double lo = at(lo_quantile);
  const double hi = at(hi_quantile);
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * (count == 1 ? 0.0 : static_cast<double>(i) / (count - 1));
  }
  return out;
}

}  // namespace hermlab
