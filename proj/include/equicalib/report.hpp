#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "equicalib/dataset_io.hpp"
#include "equicalib/error.hpp"

namespace equicalib {

inline constexpr const char* kVersion = "0.1.0";

/// 17 significant digits, '.' decimal; round-trips any double.
inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct RunManifest {
  std::vector<std::string> command;
  std::vector<std::uint64_t> seeds;
  std::string version = kVersion;
  std::map<std::string, std::string> input_digests;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> outputs;

  /// Reproducibility-relevant fields only; wall clock and output paths are
  /// left out so identical runs produce identical headers.
  [[nodiscard]] nlohmann::json stable_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["seeds"] = seeds;
    j["version"] = version;
    j["inputs"] = input_digests;
    return j;
  }

  [[nodiscard]] nlohmann::json full_json() const {
    nlohmann::json j = stable_json();
    j["wall_clock_seconds"] = wall_clock_seconds;
    j["outputs"] = outputs;
    return j;
  }

  [[nodiscard]] std::string header_line() const { return "# manifest " + stable_json().dump(); }

  void add_input(const std::string& path) { input_digests[path] = io::file_digest(path); }
};

/// CSV table whose first line is the manifest header.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<std::string> row) {
    if (row.size() != columns_.size()) throw UsageError("CSV row width mismatch");
    rows_.push_back(std::move(row));
  }

  [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }

  void write(std::ostream& os, const RunManifest* manifest = nullptr) const {
    if (manifest) os << manifest->header_line() << '\n';
    write_row(os, columns_);
    for (const auto& r : rows_) write_row(os, r);
  }

  void save(const std::string& path, const RunManifest* manifest = nullptr) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    write(f, manifest);
  }

private:
  static void write_row(std::ostream& os, const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

} // namespace equicalib
