#pragma once

#include <map>
#include <string>
#include <vector>

#include "hermlab/config.hpp"
#include "hermlab/lens.hpp"
#include "hermlab/records.hpp"

namespace hermlab {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Everything a run produces, kept in memory so runs are deterministic and
/// directly testable; write_outputs handles the file layout.
struct ExperimentOutcome {
  std::vector<CheckResult> checks;
  std::vector<std::string> record_lines;  // ordered by sample index
  std::string summary_json;
  std::map<std::string, std::string> csv_files;  // filename -> contents

  bool all_passed() const;
};

ExperimentOutcome run_sample(const ExperimentConfig& cfg);
ExperimentOutcome run_evolve(const ExperimentConfig& cfg);
ExperimentOutcome run_decay_scan(const ExperimentConfig& cfg);
ExperimentOutcome run_scattering(const ExperimentConfig& cfg);
ExperimentOutcome run_measure_ratio(const ExperimentConfig& cfg);
ExperimentOutcome run_diagnostics(const ExperimentConfig& cfg);

ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

/// Writes records.jsonl, summary.json, any CSV series and meta.json (the only
/// file carrying a timestamp) into cfg.out_dir.
void write_outputs(const ExperimentConfig& cfg, const ExperimentOutcome& out);

/// Runs fn(0..count-1) on a small worker pool; results must be stored by
/// index so output order never depends on scheduling.
void parallel_for_samples(int count, int threads,
                          const std::function<void(int)>& fn);

}  // namespace hermlab
