#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "grabit/dataset.hpp"

namespace grabit {

/// Comma-separated table with a required header row. Fields may be wrapped
/// in double quotes ("" escapes a quote).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws kSchema when absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

/// Throws kSchema on a missing header or a row of the wrong width.
CsvTable parse_csv(const std::string& text);
std::string to_csv(const CsvTable& table);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
CsvTable read_csv_file(const std::string& path);

/// Shortest text that parses back to the same double; inf, -inf and NA for
/// non-finite values.
std::string format_number(double v);

/// Empty and "NA" cells are NaN; "inf" / "-inf" are accepted. Anything else
/// non-numeric throws kSchema naming the column and the 1-based data row.
double parse_cell(const std::string& cell, const std::string& column, std::size_t row);

/// Numeric day count, or an ISO date YYYY-MM-DD converted to days since
/// 1970-01-01.
double parse_timestamp(const std::string& cell, const std::string& column, std::size_t row);

struct IngestOptions {
  std::string target;    // empty: no response column
  std::string time_col;  // empty: no timestamps
};

/// Features are every column other than the target and the time column.
/// A missing target or timestamp cell is a schema error. Without a target
/// the response is all zeros.
Dataset table_to_dataset(const CsvTable& table, const IngestOptions& options);

}  // namespace grabit
