#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "hermlab/hermite.hpp"

namespace hermlab {

/// Philox4x32-10 block: a pure function of (counter, key), so parallel sample
/// streams need no coordination and every draw is reproducible.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

struct SampleSeed {
  std::uint64_t master_seed = 0;
  std::uint64_t sample_index = 0;
};

/// Uniform double in [0,1), keyed by (seed, slot, stream).
double uniform01(const SampleSeed& seed, std::uint32_t slot,
                 std::uint32_t stream = 0);

/// Complex Gaussian with E|g|^2 = 1 (Re and Im independent N(0,1/2)),
/// keyed by (seed, mode_index, stream).
Complex complex_gaussian(const SampleSeed& seed, std::uint32_t mode_index,
                         std::uint32_t stream = 0);

/// Draw from the base Gaussian ensemble: c_n = sqrt(variance_scale) g_n /
/// lambda_n, i.e. E|c_n|^2 = variance_scale/(2n+1).  variance_scale = 1 is the
/// reference ensemble; variance_scale = 2 matches densities written with
/// exp(-1/2 ||sqrt(H) u||^2).
HermiteState sample_gaussian_state(int n_modes, const SampleSeed& seed,
                                   double variance_scale = 1.0);

/// Parameters of the transformed Gaussian family: free-time translation,
/// homothety, dilation, spatial shift.  (0, 1, 1, 0) is the identity.
struct MeasureParams {
  double free_time = 0.0;
  Complex homothety = {1.0, 0.0};
  double dilation = 1.0;
  double shift = 0.0;

  bool is_identity() const {
    return free_time == 0.0 && homothety == Complex{1.0, 0.0} &&
           dilation == 1.0 && shift == 0.0;
  }
};

struct TransformedSample {
  HermiteState state;
  /// relative L^2 mass lost when re-projecting onto the retained modes
  double projection_residual = 0.0;
  bool warn = false;
};

/// Pushforward sampler for the measure family: draws the base Gaussian, then
/// applies shift, dilation, homothety and exact free propagation (through the
/// lens identity), re-projecting onto the Hermite basis.  The projection
/// residual is always reported, never dropped.  Dilations far outside
/// [1/2, 2] need a larger n_modes to keep the residual small.
TransformedSample sample_gaussian_family(const MeasureParams& params,
                                         int n_modes, const SampleSeed& seed,
                                         const BasisTable& basis,
                                         double residual_warn_threshold = 1e-6);

struct TailFit {
  std::vector<double> thresholds;
  std::vector<double> survival;  // P(value > K) per threshold
  /// c and a in the model log P = a - c K^2, fitted over thresholds where
  /// P in [10/M, 1/2] (extreme bins with < 10 hits are excluded).
  double curvature = 0.0;
  double intercept = 0.0;
  double curvature_stderr = 0.0;  // bootstrap standard error
  int fit_points = 0;
};

/// Empirical survival probabilities and Gaussian-tail fit.  Throws on an
/// empty sample set.  Bootstrap resampling is keyed by bootstrap_seed.
TailFit tail_estimate(const std::vector<double>& values,
                      const std::vector<double>& thresholds,
                      std::uint64_t bootstrap_seed = 0,
                      int bootstrap_rounds = 200);

TailFit tail_estimate(const std::vector<HermiteState>& samples,
                      const std::function<double(const HermiteState&)>& functional,
                      const std::vector<double>& thresholds,
                      std::uint64_t bootstrap_seed = 0,
                      int bootstrap_rounds = 200);

/// Evenly spaced thresholds between the given quantiles of the data.
std::vector<double> quantile_thresholds(std::vector<double> values, int count,
                                        double lo_quantile, double hi_quantile);

}  // namespace hermlab
