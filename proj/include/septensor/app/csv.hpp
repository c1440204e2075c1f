#pragma once

// CSV output with round-trippable 17-significant-digit floats.

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace septensor::app {

std::string format_double(double v);

class CsvWriter {
 public:
  /// Opens (truncating) the file and writes the header row.
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t columns_;
};

}  // namespace septensor::app
