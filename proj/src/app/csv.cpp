#include "septensor/app/csv.hpp"

#include <cstdio>

#include "septensor/error.hpp"

namespace septensor::app {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), columns_(header.size()) {
  if (!out_) throw InvalidArgument("cannot write '" + path + "'");
  row(header);
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw InvalidArgument(path_ + ": row width does not match header");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_double(values[i]);
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw InvalidArgument(path_ + ": row width does not match header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

}  // namespace septensor::app
