#include "grabit/csv.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <sstream>

#include "grabit/error.hpp"

namespace grabit {
namespace {

std::vector<std::string> split_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) fail(ErrorKind::kSchema, fmt::format("line {}: unterminated quoted field", line_no));
  fields.push_back(std::move(cur));
  return fields;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  return out + "\"";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  fail(ErrorKind::kSchema, fmt::format("column '{}' not found", name));
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

CsvTable parse_csv(const std::string& text) {
  std::stringstream in(text);
  std::string line;
  CsvTable t;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line.empty()) continue;
      t.header = split_line(line, line_no);
      for (auto& h : t.header) h = trim(h);
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_line(line, line_no);
    if (fields.size() != t.header.size()) {
      fail(ErrorKind::kSchema,
           fmt::format("line {}: {} fields, header has {}", line_no, fields.size(), t.header.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (!have_header) fail(ErrorKind::kSchema, "CSV input has no header row");
  return t;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto emit = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += quote_if_needed(fields[i]);
    }
    out.push_back('\n');
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, fmt::format("cannot read '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::kIo, fmt::format("error while reading '{}'", path));
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, fmt::format("cannot write '{}'", path));
  out << content;
  out.flush();
  if (!out) fail(ErrorKind::kIo, fmt::format("error while writing '{}'", path));
}

CsvTable read_csv_file(const std::string& path) { return parse_csv(read_text_file(path)); }

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

double parse_cell(const std::string& cell, const std::string& column, std::size_t row) {
  const std::string s = trim(cell);
  if (s.empty() || s == "NA") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf" || s == "+inf" || s == "Inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf" || s == "-Inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* first = s.data() + (s.front() == '+' ? 1 : 0);
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(ErrorKind::kSchema, fmt::format("column '{}', row {}: '{}' is not numeric", column, row, cell));
  }
  return v;
}

double parse_timestamp(const std::string& cell, const std::string& column, std::size_t row) {
  const std::string s = trim(cell);
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (s.size() == 10 && std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) == 3) {
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) fail(ErrorKind::kSchema, fmt::format("column '{}', row {}: invalid date '{}'", column, row, s));
    return static_cast<double>(std::chrono::sys_days{ymd}.time_since_epoch().count());
  }
  const double v = parse_cell(s, column, row);
  if (!std::isfinite(v)) fail(ErrorKind::kSchema, fmt::format("column '{}', row {}: missing timestamp", column, row));
  return v;
}

Dataset table_to_dataset(const CsvTable& table, const IngestOptions& options) {
  const std::size_t none = table.header.size();
  const std::size_t target = options.target.empty() ? none : table.column(options.target);
  const std::size_t time = options.time_col.empty() ? none : table.column(options.time_col);

  std::vector<std::size_t> feature_cols;
  Dataset d;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == target || c == time) continue;
    feature_cols.push_back(c);
    d.feature_names.push_back(table.header[c]);
  }
  d.features = Matrix(table.rows.size(), feature_cols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      d.features(r, k) = parse_cell(row[feature_cols[k]], table.header[feature_cols[k]], r + 1);
    }
    if (target != none) {
      const double y = parse_cell(row[target], options.target, r + 1);
      if (std::isnan(y)) fail(ErrorKind::kSchema, fmt::format("column '{}', row {}: missing response", options.target, r + 1));
      d.response.push_back(y);
    }
    if (time != none) d.timestamps.push_back(parse_timestamp(row[time], options.time_col, r + 1));
  }
  if (target == none) d.response.assign(d.rows(), 0.0);
  return d;
}

}  // namespace grabit
