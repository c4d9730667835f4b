#include "hermlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hermlab/records.hpp"

namespace hermlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing garbage");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": '" +
                                value + "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing garbage");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for " + key + ": '" +
                                value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing garbage");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad unsigned integer for " + key +
                                ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": '" +
                              value + "'");
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double(key, item));
  }
  return out;
}

std::string format_double_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

std::string format_bool(bool b) { return b ? "true" : "false"; }

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": empty section name");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key");
    }
    if (section.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": key outside any [section]");
    }
    map[section + "." + key] = value;
  }
  return map;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Sample: return "sample";
    case ExperimentKind::Evolve: return "evolve";
    case ExperimentKind::DecayScan: return "decay-scan";
    case ExperimentKind::Scatter: return "scatter";
    case ExperimentKind::MeasureRatio: return "measure-ratio";
    case ExperimentKind::Diagnostics: return "diagnostics";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "sample") return ExperimentKind::Sample;
  if (name == "evolve") return ExperimentKind::Evolve;
  if (name == "decay-scan") return ExperimentKind::DecayScan;
  if (name == "scatter") return ExperimentKind::Scatter;
  if (name == "measure-ratio") return ExperimentKind::MeasureRatio;
  if (name == "diagnostics") return ExperimentKind::Diagnostics;
  throw std::invalid_argument("unknown experiment kind: '" + name + "'");
}

ExperimentConfig ExperimentConfig::from_map(const ConfigMap& map) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : map) {
    if (key == "experiment.kind") {
      cfg.kind = experiment_kind_from_string(value);
    } else if (key == "experiment.ensemble") {
      cfg.ensemble = static_cast<int>(parse_int(key, value));
    } else if (key == "experiment.master_seed") {
      cfg.master_seed = parse_u64(key, value);
    } else if (key == "experiment.threads") {
      cfg.threads = static_cast<int>(parse_int(key, value));
    } else if (key == "experiment.out") {
      cfg.out_dir = value;
    } else if (key == "galerkin.p") {
      cfg.galerkin.p = parse_double(key, value);
    } else if (key == "galerkin.trunc_level") {
      cfg.galerkin.trunc_level = static_cast<int>(parse_int(key, value));
    } else if (key == "galerkin.n_modes") {
      cfg.galerkin.n_modes = static_cast<int>(parse_int(key, value));
    } else if (key == "galerkin.dt0") {
      cfg.galerkin.dt0 = parse_double(key, value);
    } else if (key == "galerkin.c_dt") {
      cfg.galerkin.c_dt = parse_double(key, value);
    } else if (key == "galerkin.delta_stop") {
      cfg.galerkin.delta_stop = parse_double(key, value);
    } else if (key == "galerkin.nonlinearity") {
      cfg.galerkin.nonlinearity_enabled = parse_bool(key, value);
    } else if (key == "measure.free_time") {
      cfg.measure.free_time = parse_double(key, value);
    } else if (key == "measure.homothety_re") {
      cfg.measure.homothety.real(parse_double(key, value));
    } else if (key == "measure.homothety_im") {
      cfg.measure.homothety.imag(parse_double(key, value));
    } else if (key == "measure.dilation") {
      cfg.measure.dilation = parse_double(key, value);
    } else if (key == "measure.shift") {
      cfg.measure.shift = parse_double(key, value);
    } else if (key == "evolve.t0") {
      cfg.evolve.t0 = parse_double(key, value);
    } else if (key == "evolve.t1") {
      cfg.evolve.t1 = parse_double(key, value);
    } else if (key == "evolve.record_fluctuation") {
      cfg.evolve.record_fluctuation = parse_bool(key, value);
    } else if (key == "evolve.fluctuation_sigma") {
      cfg.evolve.fluctuation_sigma = parse_double(key, value);
    } else if (key == "evolve.mass_tol") {
      cfg.evolve.mass_tol = parse_double(key, value);
    } else if (key == "evolve.energy_drift_tol") {
      cfg.evolve.energy_drift_tol = parse_double(key, value);
    } else if (key == "evolve.energy_law_tol") {
      cfg.evolve.energy_law_tol = parse_double(key, value);
    } else if (key == "decay.s_min") {
      cfg.decay.s_min = parse_double(key, value);
    } else if (key == "decay.s_max") {
      cfg.decay.s_max = parse_double(key, value);
    } else if (key == "decay.checkpoints") {
      cfg.decay.checkpoints = static_cast<int>(parse_int(key, value));
    } else if (key == "decay.fit_s_min") {
      cfg.decay.fit_s_min = parse_double(key, value);
    } else if (key == "decay.fit_s_max") {
      cfg.decay.fit_s_max = parse_double(key, value);
    } else if (key == "decay.control") {
      cfg.decay.control = parse_bool(key, value);
    } else if (key == "decay.exponent_tol") {
      cfg.decay.exponent_tol = parse_double(key, value);
    } else if (key == "scatter.base_gap") {
      cfg.scatter.base_gap = parse_double(key, value);
    } else if (key == "scatter.n_checkpoints") {
      cfg.scatter.n_checkpoints = static_cast<int>(parse_int(key, value));
    } else if (key == "scatter.sigma") {
      cfg.scatter.sigma = parse_double(key, value);
    } else if (key == "scatter.monotone_fraction") {
      cfg.scatter.monotone_fraction = parse_double(key, value);
    } else if (key == "measure_ratio.t_grid") {
      cfg.measure_ratio.t_grid = parse_double_list(key, value);
    } else if (key == "measure_ratio.ball_radius") {
      cfg.measure_ratio.ball_radius = parse_double(key, value);
    } else if (key == "measure_ratio.ball_quantile") {
      cfg.measure_ratio.ball_quantile = parse_double(key, value);
    } else if (key == "measure_ratio.bootstrap") {
      cfg.measure_ratio.bootstrap = static_cast<int>(parse_int(key, value));
    } else if (key == "measure_ratio.ess_threshold") {
      cfg.measure_ratio.ess_threshold = parse_double(key, value);
    } else if (key == "measure_ratio.lp_ball") {
      cfg.measure_ratio.lp_ball = parse_bool(key, value);
    } else if (key == "diagnostics.mehler") {
      cfg.diagnostics.mehler = parse_bool(key, value);
    } else if (key == "diagnostics.bounds") {
      cfg.diagnostics.bounds = parse_bool(key, value);
    } else if (key == "diagnostics.liouville") {
      cfg.diagnostics.liouville = parse_bool(key, value);
    } else if (key == "diagnostics.tails") {
      cfg.diagnostics.tails = parse_bool(key, value);
    } else if (key == "diagnostics.spacetime") {
      cfg.diagnostics.spacetime = parse_bool(key, value);
    } else if (key == "diagnostics.spacetime_samples") {
      cfg.diagnostics.spacetime_samples = static_cast<int>(parse_int(key, value));
    } else if (key == "diagnostics.spacetime_grid") {
      cfg.diagnostics.spacetime_grid = static_cast<int>(parse_int(key, value));
    } else if (key == "diagnostics.spacetime_modes") {
      cfg.diagnostics.spacetime_modes = static_cast<int>(parse_int(key, value));
    } else if (key == "diagnostics.spacetime_sigma") {
      cfg.diagnostics.spacetime_sigma = parse_double(key, value);
    } else if (key == "diagnostics.spacetime_q") {
      cfg.diagnostics.spacetime_q = parse_double(key, value);
    } else if (key == "diagnostics.mehler_tol") {
      cfg.diagnostics.mehler_tol = parse_double(key, value);
    } else if (key == "diagnostics.mehler_terms") {
      cfg.diagnostics.mehler_terms = static_cast<int>(parse_int(key, value));
    } else if (key == "diagnostics.bound_n_min") {
      cfg.diagnostics.bound_n_min = static_cast<int>(parse_int(key, value));
    } else if (key == "diagnostics.bound_n_max") {
      cfg.diagnostics.bound_n_max = static_cast<int>(parse_int(key, value));
    } else if (key == "diagnostics.bound_points") {
      cfg.diagnostics.bound_points = static_cast<int>(parse_int(key, value));
    } else if (key == "diagnostics.bound_gamma") {
      cfg.diagnostics.bound_gamma = parse_double(key, value);
    } else if (key == "diagnostics.slope_tol") {
      cfg.diagnostics.slope_tol = parse_double(key, value);
    } else if (key == "diagnostics.liouville_tol") {
      cfg.diagnostics.liouville_tol = parse_double(key, value);
    } else if (key == "diagnostics.liouville_t") {
      cfg.diagnostics.liouville_t = parse_double(key, value);
    } else if (key == "diagnostics.tail_samples") {
      cfg.diagnostics.tail_samples = static_cast<int>(parse_int(key, value));
    } else if (key == "diagnostics.tail_modes") {
      cfg.diagnostics.tail_modes = static_cast<int>(parse_int(key, value));
    } else if (key == "diagnostics.tail_eps") {
      cfg.diagnostics.tail_eps = parse_double(key, value);
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_map(parse_config_file(path));
}

ConfigMap ExperimentConfig::to_map() const {
  ConfigMap m;
  m["experiment.kind"] = to_string(kind);
  m["experiment.ensemble"] = std::to_string(ensemble);
  m["experiment.master_seed"] = std::to_string(master_seed);
  m["experiment.threads"] = std::to_string(threads);
  m["experiment.out"] = out_dir;
  m["galerkin.p"] = format_double(galerkin.p);
  m["galerkin.trunc_level"] = std::to_string(galerkin.trunc_level);
  m["galerkin.n_modes"] = std::to_string(galerkin.n_modes);
  m["galerkin.dt0"] = format_double(galerkin.dt0);
  m["galerkin.c_dt"] = format_double(galerkin.c_dt);
  m["galerkin.delta_stop"] = format_double(galerkin.delta_stop);
  m["galerkin.nonlinearity"] = format_bool(galerkin.nonlinearity_enabled);
  m["measure.free_time"] = format_double(measure.free_time);
  m["measure.homothety_re"] = format_double(measure.homothety.real());
  m["measure.homothety_im"] = format_double(measure.homothety.imag());
  m["measure.dilation"] = format_double(measure.dilation);
  m["measure.shift"] = format_double(measure.shift);
  m["evolve.t0"] = format_double(evolve.t0);
  m["evolve.t1"] = format_double(evolve.t1);
  m["evolve.record_fluctuation"] = format_bool(evolve.record_fluctuation);
  m["evolve.fluctuation_sigma"] = format_double(evolve.fluctuation_sigma);
  m["evolve.mass_tol"] = format_double(evolve.mass_tol);
  m["evolve.energy_drift_tol"] = format_double(evolve.energy_drift_tol);
  m["evolve.energy_law_tol"] = format_double(evolve.energy_law_tol);
  m["decay.s_min"] = format_double(decay.s_min);
  m["decay.s_max"] = format_double(decay.s_max);
  m["decay.checkpoints"] = std::to_string(decay.checkpoints);
  m["decay.fit_s_min"] = format_double(decay.fit_s_min);
  m["decay.fit_s_max"] = format_double(decay.fit_s_max);
  m["decay.control"] = format_bool(decay.control);
  m["decay.exponent_tol"] = format_double(decay.exponent_tol);
  m["scatter.base_gap"] = format_double(scatter.base_gap);
  m["scatter.n_checkpoints"] = std::to_string(scatter.n_checkpoints);
  m["scatter.sigma"] = format_double(scatter.sigma);
  m["scatter.monotone_fraction"] = format_double(scatter.monotone_fraction);
  m["measure_ratio.t_grid"] = format_double_list(measure_ratio.t_grid);
  m["measure_ratio.ball_radius"] = format_double(measure_ratio.ball_radius);
  m["measure_ratio.ball_quantile"] = format_double(measure_ratio.ball_quantile);
  m["measure_ratio.bootstrap"] = std::to_string(measure_ratio.bootstrap);
  m["measure_ratio.ess_threshold"] = format_double(measure_ratio.ess_threshold);
  m["measure_ratio.lp_ball"] = format_bool(measure_ratio.lp_ball);
  m["diagnostics.mehler"] = format_bool(diagnostics.mehler);
  m["diagnostics.bounds"] = format_bool(diagnostics.bounds);
  m["diagnostics.liouville"] = format_bool(diagnostics.liouville);
  m["diagnostics.tails"] = format_bool(diagnostics.tails);
  m["diagnostics.spacetime"] = format_bool(diagnostics.spacetime);
  m["diagnostics.spacetime_samples"] = std::to_string(diagnostics.spacetime_samples);
  m["diagnostics.spacetime_grid"] = std::to_string(diagnostics.spacetime_grid);
  m["diagnostics.spacetime_modes"] = std::to_string(diagnostics.spacetime_modes);
  m["diagnostics.spacetime_sigma"] = format_double(diagnostics.spacetime_sigma);
  m["diagnostics.spacetime_q"] = format_double(diagnostics.spacetime_q);
  m["diagnostics.mehler_tol"] = format_double(diagnostics.mehler_tol);
  m["diagnostics.mehler_terms"] = std::to_string(diagnostics.mehler_terms);
  m["diagnostics.bound_n_min"] = std::to_string(diagnostics.bound_n_min);
  m["diagnostics.bound_n_max"] = std::to_string(diagnostics.bound_n_max);
  m["diagnostics.bound_points"] = std::to_string(diagnostics.bound_points);
  m["diagnostics.bound_gamma"] = format_double(diagnostics.bound_gamma);
  m["diagnostics.slope_tol"] = format_double(diagnostics.slope_tol);
  m["diagnostics.liouville_tol"] = format_double(diagnostics.liouville_tol);
  m["diagnostics.liouville_t"] = format_double(diagnostics.liouville_t);
  m["diagnostics.tail_samples"] = std::to_string(diagnostics.tail_samples);
  m["diagnostics.tail_modes"] = std::to_string(diagnostics.tail_modes);
  m["diagnostics.tail_eps"] = format_double(diagnostics.tail_eps);
  return m;
}

namespace {

std::string render_ini(const ConfigMap& m) {
  std::string out;
  std::string section;
  for (const auto& [key, value] : m) {
    const std::size_t dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!out.empty()) out += "\n";
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

}  // namespace

std::string ExperimentConfig::canonical_text() const {
  return render_ini(to_map());
}

std::string ExperimentConfig::content_hash() const {
  // execution details (worker count, output path) do not change what is
  // computed, so identical runs hash identically across hosts
  ConfigMap m = to_map();
  m.erase("experiment.threads");
  m.erase("experiment.out");
  const std::string text = render_ini(m);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

void ExperimentConfig::apply_override(const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("override must be section.key=value, got '" +
                                assignment + "'");
  }
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  // round-trip through from_map for identical validation
  ConfigMap m = to_map();
  if (m.find(key) == m.end()) {
    throw std::invalid_argument("unknown config key: " + key);
  }
  m[key] = value;
  *this = from_map(m);
}

}  // namespace hermlab
