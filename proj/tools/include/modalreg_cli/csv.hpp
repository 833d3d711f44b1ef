#ifndef MODALREG_CLI_CSV_HPP
#define MODALREG_CLI_CSV_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "modalreg/dataset.hpp"

namespace modalreg::cli {

/// Bad input data: unreadable files, malformed CSV, missing or non-numeric columns.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string source;

  bool has_column(const std::string& name) const;
  std::size_t column(const std::string& name) const;  // throws DataError
  /// Parses every cell of a column as a finite number.
  std::vector<double> numeric_column(const std::string& name) const;
};

/// RFC 4180 style: comma separated, optional double quotes with "" escapes,
/// LF or CRLF line ends, a header row. A leading UTF-8 byte order mark is
/// skipped and blank lines are ignored.
CsvTable read_csv(std::istream& in, const std::string& source = "<input>");
CsvTable read_csv_file(const std::string& path);

double parse_cell(const std::string& cell, const std::string& source, std::size_t row,
                  const std::string& column);

/// Quotes a field when it holds a comma, quote or line break.
std::string csv_escape(const std::string& field);
/// 17 significant digits, so the value reads back exactly. NA for NaN.
std::string format_double(double v);

/// Design from named columns; the ones column comes first when `intercept` is set.
Dataset load_dataset(const CsvTable& table, const std::string& response,
                     const std::vector<std::string>& covariates, bool intercept);

/// Design rows only, for prediction.
RowMatrix load_design(const CsvTable& table, const std::vector<std::string>& covariates,
                      bool intercept);

}  // namespace modalreg::cli

#endif  // MODALREG_CLI_CSV_HPP
