// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace steiner {

/// Shortest round-trip decimal form, independent of the C locale.
std::string format_double(double v);

/// Comma-separated writer with a mandatory header row.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);
  std::size_t columns() const { return header_.size(); }
  const std::string& text() const { return text_; }
  /// Writes the buffered text; throws Error on failure.
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::string text_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  /// Column index of `name`, or -1.
  int column(const std::string& name) const;
};

/// Reads a numeric CSV with a header row; `#` lines are skipped.
CsvTable read_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& data);

}  // namespace steiner
