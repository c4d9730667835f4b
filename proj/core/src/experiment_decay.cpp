#include <cmath>
#include <optional>
#include <stdexcept>

#include "experiment_util.hpp"
#include "hermlab/experiments.hpp"
#include "hermlab/fit.hpp"

namespace hermlab {

namespace {

// log ||U(s)|| minus the logarithmic correction of the p < 5 decay law
double corrected_log(double value, double s, double p) {
  double y = std::log(value);
  if (p < 5.0) {
    y -= std::log1p(std::log(std::hypot(1.0, s))) / (p + 1.0);
  }
  return y;
}

}  // namespace

ExperimentOutcome run_decay_scan(const ExperimentConfig& cfg) {
  using detail::OrderedJson;
  const auto& gc = cfg.galerkin;
  gc.validate();
  if (cfg.ensemble < 16) {
    throw std::invalid_argument("decay-scan: ensemble must be >= 16");
  }
  const auto& dp = cfg.decay;
  if (!(dp.s_min > 0.0 && dp.s_max > dp.s_min)) {
    throw std::invalid_argument("decay-scan: need 0 < s_min < s_max");
  }

  const std::vector<double> s_checks =
      detail::log_spaced(dp.s_min, dp.s_max, dp.checkpoints);
  std::vector<double> t_checks(s_checks.size());
  for (std::size_t k = 0; k < s_checks.size(); ++k) {
    t_checks[k] = t_of_s(s_checks[k]);
  }
  const double t_max = t_checks.back();
  if (gc.p < 5.0 && t_max > kQuarterPi - gc.delta_stop + 1e-12) {
    throw std::invalid_argument(
        "decay-scan: s_max unreachable, raise it or lower delta_stop");
  }

  const auto rb = detail::record_builder(cfg);
  const BasisTable basis = detail::run_basis(gc);
  const double q = gc.p + 1.0;
  const int count = cfg.ensemble;

  struct PerSample {
    std::vector<std::string> lines;
    std::vector<double> values;
    std::vector<double> values_linear;
    std::optional<double> exponent;
    std::optional<double> exponent_linear;
    bool flagged = false;
  };
  std::vector<PerSample> results(count);

  auto fit_exponent = [&](const std::vector<double>& values) {
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < s_checks.size(); ++k) {
      const double s = s_checks[k];
      if (s < dp.fit_s_min || s > dp.fit_s_max) continue;
      if (!(values[k] > 0.0) || !std::isfinite(values[k])) continue;
      xs.push_back(std::log(std::hypot(1.0, s)));
      ys.push_back(corrected_log(values[k], s, gc.p));
    }
    return xs.size() >= 2 ? std::optional<double>(-linear_fit(xs, ys).slope)
                          : std::nullopt;
  };

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

    bool integrated = true;
    Trajectory traj;
    try {
      traj = evolve(ts.state, 0.0, t_max, gc, basis, spec);
    } catch (const std::exception&) {
      integrated = false;
    }

    if (!integrated || traj.checkpoint_states.size() != s_checks.size()) {
      out.flagged = true;
      auto flags = base_flags;
      flags.push_back("integration_error");
      out.lines.push_back(
          rb.make(i, {}, {}, "integration_error", 1.0, flags).to_json_line());
    } else {
      out.values.resize(s_checks.size());
      for (std::size_t k = 0; k < s_checks.size(); ++k) {
        out.values[k] = nls_side_norm(traj.checkpoint_states[k], t_checks[k],
                                      q, basis);
        out.lines.push_back(rb.make(i, t_checks[k], s_checks[k], "nls_lq",
                                    out.values[k], base_flags)
                                .to_json_line());
      }
      out.exponent = fit_exponent(out.values);
      if (out.exponent) {
        out.lines.push_back(
            rb.make(i, {}, {}, "decay_exponent", *out.exponent, base_flags)
                .to_json_line());
      }
    }

    if (dp.control) {
      // exact free flow of the same data, through the same norm pipeline
      out.values_linear.resize(s_checks.size());
      for (std::size_t k = 0; k < s_checks.size(); ++k) {
        const HermiteState lin = harmonic_phase_evolve(ts.state, t_checks[k]);
        out.values_linear[k] = nls_side_norm(lin, t_checks[k], q, basis);
        out.lines.push_back(rb.make(i, t_checks[k], s_checks[k],
                                    "nls_lq_linear", out.values_linear[k],
                                    base_flags)
                                .to_json_line());
      }
      out.exponent_linear = fit_exponent(out.values_linear);
      if (out.exponent_linear) {
        out.lines.push_back(rb.make(i, {}, {}, "decay_exponent_linear",
                                    *out.exponent_linear, base_flags)
                                .to_json_line());
      }
    }
  });

  ExperimentOutcome out;
  std::vector<double> exponents, exponents_linear;
  int flagged = 0;
  for (auto& r : results) {
    for (auto& l : r.lines) out.record_lines.push_back(std::move(l));
    if (r.flagged) ++flagged;
    if (r.exponent) exponents.push_back(*r.exponent);
    if (r.exponent_linear) exponents_linear.push_back(*r.exponent_linear);
  }

  const double theory = 0.5 - 1.0 / (gc.p + 1.0);
  OrderedJson summary;
  summary["experiment"] = to_string(cfg.kind);
  summary["config"] = cfg.content_hash();
  summary["ensemble"] = count;
  summary["flagged"] = flagged;
  summary["fit_window"] = {dp.fit_s_min, dp.fit_s_max};
  summary["log_correction_applied"] = gc.p < 5.0;
  summary["theory_exponent"] = theory;
  summary["tolerance"] = dp.exponent_tol;

  if (!exponents.empty()) {
    const double med = median(exponents);
    summary["median_exponent"] = med;
    summary["fitted_samples"] = exponents.size();
    out.checks.push_back(detail::check(
        "decay_exponent_median", std::abs(med - theory) <= dp.exponent_tol,
        "median " + format_double(med) + " vs " + format_double(theory) +
            " +- " + format_double(dp.exponent_tol)));
  } else {
    out.checks.push_back(
        detail::check("decay_exponent_median", false, "no fitted samples"));
  }
  if (dp.control) {
    if (!exponents_linear.empty()) {
      const double med = median(exponents_linear);
      summary["median_exponent_linear"] = med;
      out.checks.push_back(detail::check(
          "decay_exponent_linear_median",
          std::abs(med - theory) <= dp.exponent_tol,
          "median " + format_double(med) + " vs " + format_double(theory) +
              " +- " + format_double(dp.exponent_tol)));
    } else {
      out.checks.push_back(detail::check("decay_exponent_linear_median", false,
                                         "no fitted samples"));
    }
  }

  OrderedJson checks = OrderedJson::array();
  for (const auto& c : out.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  summary["checks"] = checks;
  out.summary_json = summary.dump(2) + "\n";

  // median decay curves across unflagged samples
  {
    std::vector<double> med_curve(s_checks.size(), 0.0);
    std::vector<double> med_lin(s_checks.size(), 0.0);
    for (std::size_t k = 0; k < s_checks.size(); ++k) {
      std::vector<double> col, col_lin;
      for (const auto& r : results) {
        if (!r.flagged && r.values.size() == s_checks.size()) {
          col.push_back(r.values[k]);
        }
        if (r.values_linear.size() == s_checks.size()) {
          col_lin.push_back(r.values_linear[k]);
        }
      }
      med_curve[k] = col.empty() ? 0.0 : median(col);
      med_lin[k] = col_lin.empty() ? 0.0 : median(col_lin);
    }
    if (dp.control) {
      out.csv_files["decay_series.csv"] =
          detail::make_csv({"s", "median_nls_lq", "median_nls_lq_linear"},
                           {s_checks, med_curve, med_lin});
    } else {
      out.csv_files["decay_series.csv"] =
          detail::make_csv({"s", "median_nls_lq"}, {s_checks, med_curve});
    }
  }

  return out;
}

}  // namespace hermlab
