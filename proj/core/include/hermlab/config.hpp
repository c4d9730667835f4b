#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hermlab/galerkin.hpp"
#include "hermlab/random.hpp"

namespace hermlab {

/// Flat "key = value" text with [section] headers; '#' and ';' start
/// comments.  Keys are reported as "section.key".
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

enum class ExperimentKind {
  Sample,
  Evolve,
  DecayScan,
  Scatter,
  MeasureRatio,
  Diagnostics,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct EvolveParams {
  double t0 = 0.0;
  double t1 = 0.7;
  bool record_fluctuation = true;
  double fluctuation_sigma = 0.1;
  double mass_tol = 1e-8;
  double energy_drift_tol = 1e-6;  // gated at p = 5 only
  double energy_law_tol = 1e-4;
};

struct DecayParams {
  double s_min = 1.0;
  double s_max = 50.0;
  int checkpoints = 25;     // log-spaced in s
  double fit_s_min = 5.0;
  double fit_s_max = 50.0;
  bool control = true;      // also fit the exact linear flow
  double exponent_tol = 0.1;
};

struct ScatterParams {
  double base_gap = 0.2;  // checkpoints t_k = pi/4 - base_gap 2^{-k}
  int n_checkpoints = 8;
  double sigma = 0.1;  // H^sigma regularity of the Cauchy diagnostics
  double monotone_fraction = 0.9;
};

struct MeasureRatioParams {
  std::vector<double> t_grid{0.0, 0.15, 0.3, 0.45, 0.6};
  /// L^2 ball radius of the set A; <= 0 selects the ensemble median
  double ball_radius = -1.0;
  double ball_quantile = 0.5;  // used when ball_radius <= 0
  int bootstrap = 400;
  double ess_threshold = 0.05;  // flag when ESS/M falls below this
  bool lp_ball = false;         // measure A with the L^{p+1} norm instead
};

struct DiagnosticsParams {
  bool mehler = true;
  bool bounds = true;
  bool liouville = true;
  bool tails = true;
  bool spacetime = true;
  int spacetime_samples = 400;
  int spacetime_grid = 33;   // t points over [-pi, pi]
  int spacetime_modes = 64;
  double spacetime_sigma = 0.2;  // regularity, below the q = 4 threshold 1/4
  double spacetime_q = 4.0;
  double mehler_tol = 1e-9;
  int mehler_terms = 2000;
  int bound_n_min = 100;
  int bound_n_max = 2000;
  int bound_points = 24;
  double bound_gamma = 0.1;
  double slope_tol = 0.05;
  double liouville_tol = 1e-6;
  double liouville_t = 0.5;
  int tail_samples = 10000;
  int tail_modes = 512;
  double tail_eps = 0.3;  // regularity of the H^{-eps} mean check
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Diagnostics;
  GalerkinConfig galerkin;
  MeasureParams measure;
  int ensemble = 64;
  std::uint64_t master_seed = 0;
  int threads = 1;
  std::string out_dir = "out";
  EvolveParams evolve;
  DecayParams decay;
  ScatterParams scatter;
  MeasureRatioParams measure_ratio;
  DiagnosticsParams diagnostics;

  /// Rejects unknown keys and malformed values with std::invalid_argument.
  static ExperimentConfig from_map(const ConfigMap& map);
  static ExperimentConfig from_file(const std::string& path);

  /// Canonical, lossless serialization: every known key, floats at full
  /// precision.  parse(canonical_text()) round-trips exactly.
  ConfigMap to_map() const;
  std::string canonical_text() const;

  /// FNV-1a 64-bit hash of canonical_text(), embedded in every record.
  std::string content_hash() const;

  /// Applies "section.key=value"; same validation as from_map.
  void apply_override(const std::string& assignment);
};

}  // namespace hermlab
