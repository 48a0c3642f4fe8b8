// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/app/csv.hpp"

#include <sstream>

#include <fmt/format.h>

#include "gpdphs/error.hpp"

namespace gpdphs::app {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

CsvWriter::CsvWriter(const std::string& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) {
    throw Error(fmt::format("cannot open '{}' for writing", path));
  }
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << '\n'; }

void CsvWriter::header(const std::vector<std::string>& columns) {
  width_ = columns.size();
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out_ << (i ? "," : "") << columns[i];
  }
  out_ << '\n';
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != width_) {
    throw DimensionError(fmt::format("{}: row has {} values, header has {}", path_, values.size(), width_));
  }
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) {
      line += ',';
    }
    line += format_double(values[i]);
  }
  out_ << line << '\n';
  if (!out_) {
    throw Error(fmt::format("write to '{}' failed", path_));
  }
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(fmt::format("cannot open '{}'", path));
  }
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    if (line[0] == '#') {
      t.comments.push_back(line.size() > 2 ? line.substr(2) : std::string());
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!have_header) {
      while (std::getline(ss, cell, ',')) {
        t.columns.push_back(cell);
      }
      have_header = true;
      continue;
    }
    std::vector<double> r;
    while (std::getline(ss, cell, ',')) {
      r.push_back(std::stod(cell));
    }
    if (r.size() != t.columns.size()) {
      throw DimensionError(fmt::format("{}: ragged row", path));
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace gpdphs::app
