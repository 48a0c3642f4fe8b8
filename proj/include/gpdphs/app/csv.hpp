// SPDX-License-Identifier: Apache-2.0
//
// Plain CSV output. Lines starting with '#' are comments (units, schema
// version); the first non-comment line is the header.

#pragma once

#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace gpdphs::app {

/// Shortest text that reads back to the same double ("{:.17g}").
std::string format_double(double v);

class CsvWriter {
 public:
  /// Throws Error if the file cannot be opened.
  explicit CsvWriter(const std::string& path);

  void comment(const std::string& text);
  void header(const std::vector<std::string>& columns);
  /// Throws DimensionError if the width differs from the header.
  void row(std::span<const double> values);

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t width_ = 0;
};

struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path);

}  // namespace gpdphs::app
