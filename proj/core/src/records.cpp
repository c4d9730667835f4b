#include "hermlab/records.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hermlab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string RunRecord::to_json_line() const {
  std::ostringstream os;
  os << "{\"experiment\":\"" << json_escape(experiment) << "\"";
  os << ",\"sample\":";
  if (sample) {
    os << *sample;
  } else {
    os << "null";
  }
  os << ",\"t\":" << (t ? format_double(*t) : "null");
  os << ",\"s\":" << (s ? format_double(*s) : "null");
  os << ",\"observable\":\"" << json_escape(observable) << "\"";

  std::vector<std::string> all_flags = flags;
  os << ",\"value\":";
  if (std::isfinite(value)) {
    os << format_double(value);
  } else {
    os << "null";
    all_flags.push_back("nonfinite");
  }
  os << ",\"seed\":" << seed;
  os << ",\"config\":\"" << json_escape(config_hash) << "\"";
  os << ",\"flags\":[";
  for (std::size_t i = 0; i < all_flags.size(); ++i) {
    if (i) os << ",";
    os << "\"" << json_escape(all_flags[i]) << "\"";
  }
  os << "]}";
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << content;
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) {
    throw std::runtime_error("cannot create directory " + path + ": " +
                             ec.message());
  }
}

}  // namespace hermlab
