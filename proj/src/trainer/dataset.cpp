#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "septensor/error.hpp"
#include "septensor/trainer.hpp"

namespace septensor {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw FormatError("dataset row " + std::to_string(row) + ", column " + std::to_string(col) +
                      ": not a finite number '" + cell + "'");
  return v;
}

}  // namespace

void Dataset::validate(const FieldSpace& space) const {
  if (inputs.size() != targets.size()) throw InvalidArgument("dataset inputs and targets differ in length");
  const std::size_t dims = space.num_dims();
  if (!columns.empty() && num_inputs() != dims)
    throw InvalidArgument("dataset has " + std::to_string(num_inputs()) + " inputs, field has " +
                          std::to_string(dims));
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (inputs[k].size() != dims)
      throw InvalidArgument("dataset row " + std::to_string(k) + " has wrong length");
    for (std::size_t d = 0; d < dims; ++d)
      if (!space.dim(d).mesh.contains(inputs[k][d]))
        throw OutOfDomain("dataset row " + std::to_string(k) + ": '" + space.dim(d).name +
                          "' outside the domain");
    if (!std::isfinite(targets[k]))
      throw InvalidArgument("dataset row " + std::to_string(k) + ": non-finite target");
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.columns = columns;
  out.inputs.reserve(rows.size());
  out.targets.reserve(rows.size());
  for (std::size_t r : rows) {
    out.inputs.push_back(inputs.at(r));
    out.targets.push_back(targets.at(r));
  }
  return out;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open dataset '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw FormatError("dataset '" + path + "' is empty");
  Dataset data;
  data.columns = split_csv_line(line);
  if (data.columns.size() < 2) throw FormatError("dataset needs at least one input and a target");
  const std::size_t width = data.columns.size();
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != width)
      throw FormatError("dataset row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " cells, expected " + std::to_string(width));
    std::vector<double> x(width - 1);
    for (std::size_t c = 0; c + 1 < width; ++c) x[c] = parse_number(cells[c], row, c);
    data.inputs.push_back(std::move(x));
    data.targets.push_back(parse_number(cells.back(), row, width - 1));
    ++row;
  }
  if (data.targets.empty()) throw FormatError("dataset '" + path + "' has no rows");
  return data;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write dataset '" + path + "'");
  out << std::setprecision(17);
  for (std::size_t c = 0; c < data.columns.size(); ++c) out << (c ? "," : "") << data.columns[c];
  out << '\n';
  for (std::size_t k = 0; k < data.size(); ++k) {
    for (double v : data.inputs[k]) out << v << ',';
    out << data.targets[k] << '\n';
  }
  if (!out) throw FormatError("failed writing dataset '" + path + "'");
}

}  // namespace septensor
