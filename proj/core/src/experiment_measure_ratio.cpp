#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "experiment_util.hpp"
#include "hermlab/experiments.hpp"
#include "hermlab/fit.hpp"

namespace hermlab {

namespace {

// Half-convention Hamiltonian quadratic form 1/2 ||sqrt(H) u||^2.
double half_h1(const HermiteState& u) {
  double acc = 0.0;
  for (int n = 0; n < u.n_modes(); ++n) {
    acc += (2.0 * n + 1.0) * std::norm(u.coeffs[n]);
  }
  return 0.5 * acc;
}

}  // namespace

ExperimentOutcome run_measure_ratio(const ExperimentConfig& cfg) {
  using detail::OrderedJson;
  const auto& gc = cfg.galerkin;
  gc.validate();
  const auto& mp = cfg.measure_ratio;

  std::vector<double> t_grid = mp.t_grid;
  std::sort(t_grid.begin(), t_grid.end());
  if (t_grid.empty()) {
    throw std::invalid_argument("measure-ratio: empty t grid");
  }
  if (t_grid.front() < 0.0) {
    throw std::invalid_argument("measure-ratio: t grid must be nonnegative");
  }
  const double t_max = t_grid.back();
  const int count = cfg.ensemble;
  const int n_t = static_cast<int>(t_grid.size());

  const auto rb = detail::record_builder(cfg);
  const BasisTable basis = detail::run_basis(gc);

  // The reference ensemble is the half-convention Gaussian (density
  // proportional to e^{-1/2 ||sqrt(H) u||^2} on the retained modes, i.e.
  // E|c_n|^2 = 2/(2n+1)), normalized to a probability measure.  With the
  // flow volume-preserving, nu_{N,t}(Phi(t,0)A) equals the expectation of
  //   1_A(u0) exp(1/2 ||sqrt(H) u0||^2 - E_N(t, u(t))).
  auto draw = [&](int i) {
    const SampleSeed seed{cfg.master_seed, static_cast<std::uint64_t>(i)};
    return sample_gaussian_state(gc.n_modes, seed, 2.0);
  };

  // ball radius: configured, or the ensemble quantile of the chosen norm
  std::vector<double> ball_norms(count);
  parallel_for_samples(count, cfg.threads, [&](int i) {
    const HermiteState u0 = draw(i);
    ball_norms[i] =
        mp.lp_ball ? lp_norm(u0, gc.p + 1.0, basis) : u0.l2_norm();
  });
  double radius = mp.ball_radius;
  if (!(radius > 0.0)) {
    std::vector<double> sorted = ball_norms;
    std::sort(sorted.begin(), sorted.end());
    const double pos = mp.ball_quantile * (count - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    radius = lo + 1 < sorted.size()
                 ? sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
                 : sorted.back();
  }

  struct PerSample {
    std::vector<std::string> lines;
    std::vector<double> z;  // exp(h0 - E_N(t, u(t))) per grid time
    bool in_ball = false;
    bool integrated = false;
  };
  std::vector<PerSample> results(count);

  parallel_for_samples(count, cfg.threads, [&](int i) {
    PerSample& out = results[i];
    const HermiteState u0 = draw(i);
    out.in_ball = ball_norms[i] <= radius;
    const double h0 = half_h1(u0);

    std::vector<double> cps;
    for (double t : t_grid) {
      if (t > 0.0) cps.push_back(t);
    }
    ObservableSpec spec;
    spec.record_energy = false;
    spec.checkpoints = cps;

    Trajectory traj;
    try {
      traj = evolve(u0, 0.0, t_max, gc, basis, spec);
      out.integrated = traj.checkpoint_states.size() == cps.size();
    } catch (const std::exception&) {
      out.integrated = false;
    }
    if (!out.integrated) {
      out.lines.push_back(rb.make(i, {}, {}, "integration_error", 1.0,
                                  {"integration_error"})
                              .to_json_line());
      return;
    }

    out.z.resize(n_t);
    std::size_t cp = 0;
    for (int j = 0; j < n_t; ++j) {
      const double t = t_grid[j];
      const HermiteState& ut = t == 0.0 ? u0 : traj.checkpoint_states[cp];
      out.z[j] = std::exp(h0 - energy(ut, t, gc, basis));
      if (t != 0.0) ++cp;
      std::vector<std::string> flags;
      if (out.in_ball) flags.push_back("in_ball");
      out.lines.push_back(
          rb.make(i, t, s_of_t(t), "importance_weight", out.z[j], flags)
              .to_json_line());
    }
  });

  ExperimentOutcome out;
  int integrated = 0;
  for (auto& r : results) {
    for (auto& l : r.lines) out.record_lines.push_back(std::move(l));
    if (r.integrated) ++integrated;
  }
  if (integrated == 0) {
    throw std::runtime_error("measure-ratio: no sample integrated");
  }

  // estimators over the integrated samples (flagged ones stay in records)
  std::vector<double> vhat(n_t, 0.0), zhat(n_t, 0.0), ess(n_t, 0.0);
  for (int j = 0; j < n_t; ++j) {
    double sw = 0.0, sz = 0.0, sz2 = 0.0;
    for (const auto& r : results) {
      if (!r.integrated) continue;
      sz += r.z[j];
      sz2 += r.z[j] * r.z[j];
      if (r.in_ball) sw += r.z[j];
    }
    vhat[j] = sw / integrated;
    zhat[j] = sz / integrated;
    ess[j] = sz2 > 0.0 ? sz * sz / sz2 : 0.0;
  }

  // paired bootstrap over samples
  const int rounds = std::max(0, mp.bootstrap);
  std::vector<std::vector<double>> boot(rounds, std::vector<double>(n_t, 0.0));
  std::vector<const PerSample*> pool;
  for (const auto& r : results) {
    if (r.integrated) pool.push_back(&r);
  }
  for (int b = 0; b < rounds; ++b) {
    for (std::size_t m = 0; m < pool.size(); ++m) {
      const std::size_t idx =
          detail::bootstrap_index(cfg.master_seed, b, m, pool.size());
      const PerSample& r = *pool[idx];
      for (int j = 0; j < n_t; ++j) {
        if (r.in_ball) boot[b][j] += r.z[j];
      }
    }
    for (int j = 0; j < n_t; ++j) boot[b][j] /= static_cast<double>(pool.size());
  }

  std::vector<double> vhat_sigma(n_t, 0.0);
  if (rounds >= 2) {
    std::vector<double> vals(rounds);
    for (int j = 0; j < n_t; ++j) {
      for (int b = 0; b < rounds; ++b) vals[b] = boot[b][j];
      vhat_sigma[j] = stddev(vals);
    }
  }
  // band for a comparison of two estimates; marginal sigmas combined, which
  // is conservative since the estimates share their samples
  auto band = [&](int i, int j) {
    return 2.0 * std::hypot(vhat_sigma[i], vhat_sigma[j]);
  };

  // (a)/(b): nonincreasing for p < 5, constant at p = 5, nondecreasing for
  // p > 5, each within the 2-sigma bootstrap bands of the estimates
  bool mono_pass = true;
  std::string mono_detail;
  if (gc.p == 5.0) {
    for (int j = 1; j < n_t; ++j) {
      const double diff = vhat[j] - vhat[0];
      if (std::abs(diff) > band(0, j)) {
        mono_pass = false;
        mono_detail += "t=" + format_double(t_grid[j]) + " |dV|=" +
                       format_double(std::abs(diff)) + ">" +
                       format_double(band(0, j)) + "; ";
      }
    }
  } else {
    const double sign = gc.p < 5.0 ? 1.0 : -1.0;  // decreasing vs increasing
    for (int j = 1; j < n_t; ++j) {
      const double diff = vhat[j] - vhat[j - 1];
      if (sign * diff > band(j - 1, j)) {
        mono_pass = false;
        mono_detail += "t=" + format_double(t_grid[j]) + " dV=" +
                       format_double(diff) + " vs " +
                       format_double(band(j - 1, j)) + "; ";
      }
    }
  }
  const char* mono_name = gc.p == 5.0  ? "vhat_constant"
                          : gc.p < 5.0 ? "vhat_nonincreasing"
                                       : "vhat_nondecreasing";
  out.checks.push_back(detail::check(
      mono_name, mono_pass,
      mono_detail.empty() ? "within 2-sigma bands" : mono_detail));

  // (c): two-sided power bounds for ordered pairs, t_j the later time; the
  // band on V^e comes from the delta method
  bool pair_pass = true;
  std::string pair_detail;
  for (int i = 0; i < n_t; ++i) {
    for (int j = i + 1; j < n_t; ++j) {
      const double ratio =
          std::cos(2.0 * t_grid[i]) / std::cos(2.0 * t_grid[j]);
      double gap, sd;
      if (gc.p <= 5.0) {
        const double e = std::pow(ratio, 0.5 * (5.0 - gc.p));
        const double powered = std::pow(vhat[i], e);
        gap = vhat[j] - powered;
        const double dpow =
            vhat[i] > 0.0 ? e * powered / vhat[i] * vhat_sigma[i] : 0.0;
        sd = std::hypot(vhat_sigma[j], dpow);
      } else {
        const double e = std::pow(1.0 / ratio, 0.5 * (gc.p - 5.0));
        const double powered = std::pow(vhat[i], e);
        gap = powered - vhat[j];
        const double dpow =
            vhat[i] > 0.0 ? e * powered / vhat[i] * vhat_sigma[i] : 0.0;
        sd = std::hypot(vhat_sigma[j], dpow);
      }
      if (gap < -2.0 * sd) {
        pair_pass = false;
        pair_detail += "(" + format_double(t_grid[i]) + "," +
                       format_double(t_grid[j]) + ") gap=" +
                       format_double(gap) + "; ";
      }
    }
  }
  out.checks.push_back(detail::check(
      "vhat_two_sided_bound", pair_pass,
      pair_detail.empty() ? "all ordered pairs within 2-sigma" : pair_detail));

  // estimator sanity: 0 <= V <= Z per grid time
  bool sane = true;
  for (int j = 0; j < n_t; ++j) {
    if (!(vhat[j] >= 0.0 && vhat[j] <= zhat[j] + 1e-12)) sane = false;
  }
  out.checks.push_back(
      detail::check("estimator_sanity", sane, "0 <= V(t) <= Z(t)"));

  const double min_ess = *std::min_element(ess.begin(), ess.end());
  const bool low_confidence = min_ess < mp.ess_threshold * integrated;

  for (int j = 0; j < n_t; ++j) {
    std::vector<std::string> flags;
    if (low_confidence) flags.push_back("low_ess");
    out.record_lines.push_back(
        rb.make({}, t_grid[j], s_of_t(t_grid[j]), "vhat", vhat[j], flags)
            .to_json_line());
    out.record_lines.push_back(
        rb.make({}, t_grid[j], s_of_t(t_grid[j]), "vhat_sigma", vhat_sigma[j],
                flags)
            .to_json_line());
    out.record_lines.push_back(
        rb.make({}, t_grid[j], s_of_t(t_grid[j]), "zhat", zhat[j], flags)
            .to_json_line());
    out.record_lines.push_back(
        rb.make({}, t_grid[j], s_of_t(t_grid[j]), "ess", ess[j], flags)
            .to_json_line());
  }

  OrderedJson summary;
  summary["experiment"] = to_string(cfg.kind);
  summary["config"] = cfg.content_hash();
  summary["ensemble"] = count;
  summary["integrated"] = integrated;
  summary["gaussian_convention"] =
      "half: density ~ exp(-0.5||sqrt(H)u||^2), E|c_n|^2 = 2/(2n+1)";
  summary["ball_norm"] = mp.lp_ball ? "lp" : "l2";
  summary["ball_radius"] = radius;
  summary["t_grid"] = t_grid;
  summary["vhat"] = vhat;
  summary["vhat_sigma"] = vhat_sigma;
  summary["zhat"] = zhat;
  summary["ess"] = ess;
  summary["low_confidence"] = low_confidence;
  OrderedJson checks = OrderedJson::array();
  for (const auto& c : out.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  summary["checks"] = checks;
  out.summary_json = summary.dump(2) + "\n";

  out.csv_files["measure_ratio_series.csv"] = detail::make_csv(
      {"t", "vhat", "vhat_sigma", "zhat", "ess"},
      {t_grid, vhat, vhat_sigma, zhat, ess});
  return out;
}

}  // namespace hermlab
