#pragma once

// Internal helpers shared by the experiment runners; not installed.

#include <json.hpp>
#include <string>
#include <vector>

#include "hermlab/config.hpp"
#include "hermlab/experiments.hpp"
#include "hermlab/records.hpp"

namespace hermlab::detail {

using OrderedJson = nlohmann::ordered_json;

struct RecordBuilder {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string config_hash;

  RunRecord make(std::optional<long long> sample, std::optional<double> t,
                 std::optional<double> s, const std::string& observable,
                 double value, std::vector<std::string> flags = {}) const {
    RunRecord r;
    r.experiment = experiment;
    r.sample = sample;
    r.t = t;
    r.s = s;
    r.observable = observable;
    r.value = value;
    r.seed = seed;
    r.config_hash = config_hash;
    r.flags = std::move(flags);
    return r;
  }
};

inline RecordBuilder record_builder(const ExperimentConfig& cfg) {
  return RecordBuilder{to_string(cfg.kind), cfg.master_seed,
                       cfg.content_hash()};
}

inline CheckResult check(const std::string& name, bool pass,
                         const std::string& detail) {
  return CheckResult{name, pass, detail};
}

/// Deterministic bootstrap index: sample m of round b.
std::size_t bootstrap_index(std::uint64_t seed, int round, std::size_t m,
                            std::size_t count);

/// Builds the oscillator basis sized for a Galerkin run (M = 4 n_modes).
BasisTable run_basis(const GalerkinConfig& cfg);

/// Log-spaced values between lo and hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int count);

std::string make_csv(const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns);

}  // namespace hermlab::detail
