#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hermlab {

/// Shortest fixed-width float form used everywhere in outputs: %.17g, enough
/// digits to round-trip any double.
std::string format_double(double v);

/// One serialized observation.  Records are append-only, one JSON object per
/// line with a fixed key order; nonfinite values serialize as null and gain a
/// "nonfinite" flag.  Timestamps never appear here (they live in meta.json).
struct RunRecord {
  std::string experiment;
  std::optional<long long> sample;
  std::optional<double> t;
  std::optional<double> s;
  std::string observable;
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<std::string> flags;

  std::string to_json_line() const;
};

std::string json_escape(const std::string& s);

void write_text_file(const std::string& path, const std::string& content);

/// Creates the directory (and parents) if missing; throws on failure.
void ensure_directory(const std::string& path);

}  // namespace hermlab
