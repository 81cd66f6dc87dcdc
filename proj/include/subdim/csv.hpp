#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "subdim/errors.hpp"

namespace subdim {

/// Parsed CSV: numeric columns as a matrix, categorical columns kept only by
/// name (they exist to be filtered on, not analyzed).
struct CsvData {
  std::vector<std::string> numericNames;
  Eigen::MatrixXd values;
  bool hadHeader = false;
  std::vector<std::string> categoricalNames;
};

namespace detail {

[[nodiscard]] inline std::string trim(const std::string& s) {
  const char* ws = " \t\v\f";
  const std::size_t begin = s.find_first_not_of(ws);
  if (begin == std::string::npos) {
    return "";
  }
  const std::size_t end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

[[nodiscard]] inline std::vector<std::string> split_fields(
    const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

[[nodiscard]] inline bool parse_double(const std::string& field,
                                       double& value) {
  if (field.empty()) {
    return false;
  }
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  return ec == std::errc() && ptr == field.data() + field.size();
}

}  // namespace detail

/// Reads a comma-separated file. The header row is auto-detected (a first row
/// whose fields are all numeric is data); columns are classified numeric or
/// categorical from the first data row and must stay consistent. A non-empty
/// `speciesFilter` keeps only rows whose categorical value matches it.
[[nodiscard]] inline CsvData read_csv(const std::string& path,
                                      const std::string& speciesFilter = "") {
  std::ifstream in(path);
  if (!in) {
    throw CsvParseError("cannot open file: " + path);
  }
  std::vector<std::pair<long, std::vector<std::string>>> rows;
  std::string line;
  long lineNumber = 0;
  while (std::getline(in, line)) {
    ++lineNumber;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (detail::trim(line).empty()) {
      continue;
    }
    rows.emplace_back(lineNumber, detail::split_fields(line));
  }
  if (rows.empty()) {
    throw CsvParseError("file contains no data: " + path);
  }

  const std::size_t width = rows.front().second.size();
  for (const auto& [ln, fields] : rows) {
    if (fields.size() != width) {
      throw CsvParseError("expected " + std::to_string(width) +
                              " fields, found " +
                              std::to_string(fields.size()),
                          ln);
    }
  }

  double scratch = 0.0;
  bool firstRowNumeric = true;
  for (const std::string& f : rows.front().second) {
    if (!detail::parse_double(f, scratch)) {
      firstRowNumeric = false;
      break;
    }
  }
  CsvData out;
  out.hadHeader = !firstRowNumeric;
  std::vector<std::string> names(width);
  std::size_t firstData = 0;
  if (out.hadHeader) {
    for (std::size_t c = 0; c < width; ++c) {
      names[c] = rows.front().second[c];
    }
    firstData = 1;
    if (rows.size() == 1) {
      throw CsvParseError("file contains a header but no data rows: " + path);
    }
  } else {
    for (std::size_t c = 0; c < width; ++c) {
      names[c] = "col" + std::to_string(c + 1);
    }
  }

  std::vector<bool> numeric(width, true);
  for (std::size_t c = 0; c < width; ++c) {
    numeric[c] = detail::parse_double(rows[firstData].second[c], scratch);
  }
  std::vector<std::size_t> numericCols;
  std::vector<std::size_t> categoricalCols;
  for (std::size_t c = 0; c < width; ++c) {
    if (numeric[c]) {
      numericCols.push_back(c);
      out.numericNames.push_back(names[c]);
    } else {
      categoricalCols.push_back(c);
      out.categoricalNames.push_back(names[c]);
    }
  }
  if (numericCols.empty()) {
    throw CsvParseError("no numeric columns found: " + path);
  }
  if (!speciesFilter.empty() && categoricalCols.empty()) {
    throw ConfigError(
        "species filter requires a categorical column, none found");
  }

  std::vector<Eigen::VectorXd> kept;
  for (std::size_t r = firstData; r < rows.size(); ++r) {
    const auto& [ln, fields] = rows[r];
    if (!speciesFilter.empty()) {
      bool matches = false;
      for (std::size_t c : categoricalCols) {
        if (fields[c] == speciesFilter) {
          matches = true;
          break;
        }
      }
      if (!matches) {
        continue;
      }
    }
    Eigen::VectorXd row(static_cast<Eigen::Index>(numericCols.size()));
    for (std::size_t j = 0; j < numericCols.size(); ++j) {
      double v = 0.0;
      if (!detail::parse_double(fields[numericCols[j]], v)) {
        throw CsvParseError("expected a number in column '" +
                                names[numericCols[j]] + "', found '" +
                                fields[numericCols[j]] + "'",
                            ln);
      }
      row(static_cast<Eigen::Index>(j)) = v;
    }
    kept.push_back(std::move(row));
  }
  if (kept.empty()) {
    throw InsufficientSampleError("no rows match species '" + speciesFilter +
                                  "'");
  }
  out.values.resize(static_cast<Eigen::Index>(kept.size()),
                    static_cast<Eigen::Index>(numericCols.size()));
  for (std::size_t r = 0; r < kept.size(); ++r) {
    out.values.row(static_cast<Eigen::Index>(r)) = kept[r].transpose();
  }
  return out;
}

}  // namespace subdim
