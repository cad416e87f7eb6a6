#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "longmat/errors.hpp"
#include "longmat/format.hpp"

namespace longmat::cli {

/// Minimal CSV writer: fixed header, one call per row, %.17g numbers.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw ConfigError("cannot write " + path.string());
    row(header);
    width_ = header.size();
  }

  void row(const std::vector<std::string>& cells) {
    if (width_ && cells.size() != width_) throw Error("csv: row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << quote(cells[i]);
    out_ << '\n';
  }

  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + '"';
  }

 private:
  std::ofstream out_;
  std::size_t width_ = 0;
};

inline std::string cell(double v) { return format_g17(v); }
inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "true" : "false"; }

/// Reads a CSV with a header line into rows of header -> field.
std::vector<std::map<std::string, std::string>> read_csv(const std::filesystem::path& path);

}  // namespace longmat::cli
