#include <cmath>
#include <stdexcept>

#include "experiment_util.hpp"
#include "hermlab/experiments.hpp"
#include "hermlab/fit.hpp"

namespace hermlab {

ExperimentOutcome run_scattering(const ExperimentConfig& cfg) {
  using detail::OrderedJson;
  const auto& gc = cfg.galerkin;
  gc.validate();
  const auto& sp = cfg.scatter;
  if (sp.n_checkpoints < 2) {
    throw std::invalid_argument("scatter: need at least 2 checkpoints");
  }
  // verdicts are only meaningful above the scattering threshold p > 3;
  // below it the run acts as a control and reports the non-Cauchy rate
  const bool control_mode = !(gc.p > 3.0);

  std::vector<double> t_checks(sp.n_checkpoints);
  for (int k = 1; k <= sp.n_checkpoints; ++k) {
    t_checks[k - 1] = kQuarterPi - sp.base_gap * std::exp2(-k);
  }
  if (t_checks.front() <= 0.0) {
    throw std::invalid_argument("scatter: base_gap too large for the window");
  }
  const double t_last = t_checks.back();
  if (gc.p < 5.0 && t_last > kQuarterPi - gc.delta_stop + 1e-12) {
    throw std::invalid_argument(
        "scatter: checkpoints run past the stop margin; lower delta_stop or "
        "n_checkpoints");
  }

  const auto rb = detail::record_builder(cfg);
  const BasisTable basis = detail::run_basis(gc);
  const int count = cfg.ensemble;

  struct PerSample {
    std::vector<std::string> lines;
    bool integrated = false;
    bool monotone = false;
    double residual_rate = 0.0;
    double cauchy_rate = 0.0;
  };
  std::vector<PerSample> results(count);

  parallel_for_samples(count, cfg.threads, [&](int i) {
    PerSample& out = results[i];
    const SampleSeed seed{cfg.master_seed, static_cast<std::uint64_t>(i)};
    const TransformedSample ts =
        sample_gaussian_family(cfg.measure, gc.n_modes, seed, basis);
    std::vector<std::string> base_flags;
    if (ts.warn) base_flags.push_back("projection_warn");

    ObservableSpec spec;
    spec.record_energy = false;
    spec.checkpoints = t_checks;

    Trajectory traj;
    try {
      traj = evolve(ts.state, 0.0, t_last, gc, basis, spec);
      out.integrated = traj.checkpoint_states.size() == t_checks.size();
    } catch (const std::exception&) {
      out.integrated = false;
    }
    if (!out.integrated) {
      auto flags = base_flags;
      flags.push_back("integration_error");
      out.lines.push_back(
          rb.make(i, {}, {}, "integration_error", 1.0, flags).to_json_line());
      return;
    }

    const ScatteringProfile prof =
        scattering_profile(traj, ts.state, sp.sigma, basis);
    out.monotone = prof.cauchy_monotone;
    out.residual_rate = prof.residual_rate;
    out.cauchy_rate = prof.cauchy_rate;

    auto flags = base_flags;
    if (prof.flagged) flags.push_back("non_cauchy");

    for (std::size_t k = 0; k < prof.cauchy_increments.size(); ++k) {
      out.lines.push_back(rb.make(i, prof.checkpoint_times[k + 1],
                                  s_of_t(prof.checkpoint_times[k + 1]),
                                  "cauchy_increment",
                                  prof.cauchy_increments[k], flags)
                              .to_json_line());
    }
    for (std::size_t k = 0; k < prof.residuals.size(); ++k) {
      out.lines.push_back(rb.make(i, prof.checkpoint_times[k],
                                  prof.residual_s[k], "residual_l2",
                                  prof.residuals[k], flags)
                              .to_json_line());
    }
    out.lines.push_back(rb.make(i, {}, {}, "w_plus_sobolev",
                                sobolev_norm(prof.w_plus, sp.sigma), flags)
                            .to_json_line());
    out.lines.push_back(
        rb.make(i, {}, {}, "cauchy_rate", prof.cauchy_rate, flags)
            .to_json_line());
    out.lines.push_back(
        rb.make(i, {}, {}, "residual_rate", prof.residual_rate, flags)
            .to_json_line());
  });

  ExperimentOutcome out;
  int integrated = 0, monotone = 0;
  std::vector<double> residual_rates;
  for (auto& r : results) {
    for (auto& l : r.lines) out.record_lines.push_back(std::move(l));
    if (r.integrated) {
      ++integrated;
      if (r.monotone) ++monotone;
      residual_rates.push_back(r.residual_rate);
    }
  }

  const double fraction =
      integrated > 0 ? static_cast<double>(monotone) / integrated : 0.0;
  const double median_rate =
      residual_rates.empty() ? 0.0 : median(residual_rates);

  OrderedJson summary;
  summary["experiment"] = to_string(cfg.kind);
  summary["config"] = cfg.content_hash();
  summary["ensemble"] = count;
  summary["integrated"] = integrated;
  summary["monotone_cauchy"] = monotone;
  summary["monotone_fraction"] = fraction;
  summary["non_cauchy_rate"] = 1.0 - fraction;
  summary["median_residual_rate"] = median_rate;
  summary["control_mode"] = control_mode;
  summary["sigma"] = sp.sigma;

  if (!control_mode) {
    out.checks.push_back(detail::check(
        "cauchy_monotone_fraction",
        integrated > 0 && fraction >= sp.monotone_fraction,
        format_double(fraction) + " of unflagged samples monotone, need >= " +
            format_double(sp.monotone_fraction)));
    out.checks.push_back(detail::check(
        "residual_rate_negative", !residual_rates.empty() && median_rate < 0.0,
        "median fitted rate " + format_double(median_rate)));
  }

  OrderedJson checks = OrderedJson::array();
  for (const auto& c : out.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  summary["checks"] = checks;
  out.summary_json = summary.dump(2) + "\n";
  return out;
}

}  // namespace hermlab
