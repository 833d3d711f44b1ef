#include "modalreg_cli/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <iterator>

namespace modalreg::cli {

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  throw DataError(source + ": no column named '" + name + "'");
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const std::size_t j = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.push_back(parse_cell(rows[i][j], source, i + 1, name));
  return out;
}

double parse_cell(const std::string& cell, const std::string& source, std::size_t row,
                  const std::string& column) {
  std::size_t b = 0, e = cell.size();
  while (b < e && (cell[b] == ' ' || cell[b] == '\t')) ++b;
  while (e > b && (cell[e - 1] == ' ' || cell[e - 1] == '\t')) --e;
  const char* first = cell.data() + b;
  const char* last = cell.data() + e;
  if (first != last && *first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (first == last || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw DataError(source + ": row " + std::to_string(row) + ", column '" + column + "': '" +
                    cell + "' is not a finite number");
  }
  return v;
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::size_t pos = 0;
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) pos = 3;

  CsvTable table;
  table.source = source;
  std::vector<std::string> record;
  std::string field;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool quoted = false;
  bool field_started = false;

  auto end_record = [&] {
    const bool blank = record.empty() && field.empty() && !field_started;
    if (!blank) {
      record.push_back(field);
      if (table.header.empty()) {
        table.header = record;
      } else if (record.size() != table.header.size()) {
        throw DataError(source + ": line " + std::to_string(record_line) + ": expected " +
                        std::to_string(table.header.size()) + " fields, found " +
                        std::to_string(record.size()));
      } else {
        table.rows.push_back(record);
      }
    }
    record.clear();
    field.clear();
    field_started = false;
  };

  while (pos < text.size()) {
    const char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          field += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) {
          throw DataError(source + ": line " + std::to_string(line) + ": stray quote inside a field");
        }
        quoted = true;
        field_started = true;
        break;
      case ',':
        record.push_back(field);
        field.clear();
        field_started = true;
        break;
      case '\r':
        if (pos < text.size() && text[pos] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        record_line = ++line;
        break;
      default:
        field += c;
    }
  }
  if (quoted) throw DataError(source + ": unterminated quoted field starting on line " + std::to_string(record_line));
  end_record();
  if (table.header.empty()) throw DataError(source + ": empty file, a header row is required");
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      if (table.header[j] == table.header[k]) {
        throw DataError(source + ": duplicate column '" + table.header[j] + "'");
      }
    }
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in, path);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RowMatrix load_design(const CsvTable& table, const std::vector<std::string>& covariates,
                      bool intercept) {
  const std::size_t p = covariates.size() + (intercept ? 1 : 0);
  RowMatrix X(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(p));
  std::size_t j = 0;
  if (intercept) X.col(static_cast<Eigen::Index>(j++)).setOnes();
  for (const auto& name : covariates) {
    const auto col = table.numeric_column(name);
    for (std::size_t i = 0; i < col.size(); ++i) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    ++j;
  }
  return X;
}

Dataset load_dataset(const CsvTable& table, const std::string& response,
                     const std::vector<std::string>& covariates, bool intercept) {
  for (const auto& name : covariates) {
    if (name == response) throw DataError("the response '" + response + "' is also listed as a covariate");
  }
  if (table.rows.empty()) throw DataError(table.source + ": no data rows");
  if (covariates.empty() && !intercept) throw DataError("no covariates and no intercept: nothing to fit");
  const auto y = table.numeric_column(response);
  std::vector<std::vector<double>> cols;
  for (const auto& name : covariates) cols.push_back(table.numeric_column(name));
  return make_dataset(y, cols, covariates, intercept);
}

}  // namespace modalreg::cli
