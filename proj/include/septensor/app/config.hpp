#pragma once

// Run configuration: a JSON document with a fixed schema. Unknown keys are
// rejected with the path of the offending entry.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "septensor/basis.hpp"
#include "septensor/field.hpp"
#include "septensor/inverse.hpp"
#include "septensor/solver.hpp"
#include "septensor/trainer.hpp"

namespace septensor::app {

/// Mesh and patch defaults applied to every dimension of a built-in problem.
struct Discretization {
  std::size_t n_elem = 32;
  std::optional<std::size_t> time_elem;   ///< time dimension, defaults to n_elem
  std::optional<std::size_t> param_elem;  ///< param dimensions, defaults to n_elem
  PatchConfig patch{2, 20.0, 3, KernelKind::InterpMls};
};

struct DimConfig {
  std::string name;
  std::optional<DimKind> kind;
  std::optional<std::pair<double, double>> domain;
  std::optional<std::size_t> n_elem;
  std::vector<GradedSegment> graded;
  std::optional<int> s;
  std::optional<double> a;
  std::optional<int> p;
  std::optional<KernelKind> kernel;
};

struct StudyConfig {
  std::vector<std::size_t> elems{10, 20, 40, 80};
  std::vector<std::pair<int, int>> patches{{1, 1}, {2, 2}};  ///< (s, p)
  std::size_t repeats = 1;
};

struct OracleConfig {
  std::string kind = "heat_2d";  ///< heat_2d | heat_3d | poisson_2d
  std::size_t grid = 33;
  std::size_t steps = 50;
  double t_end = 0.04;
  std::vector<double> k_values{1.0, 1.75, 2.5, 3.25, 4.0};
  std::vector<double> p_values{100.0, 125.0, 150.0, 175.0, 200.0};
  std::size_t max_rows = 0;  ///< 0 keeps every row; otherwise a seeded subsample
};

struct InverseSection {
  InverseConfig cfg;
  std::string field;   ///< saved field container
  std::string target;  ///< CSV of coordinates and value; empty with true_params set
  std::vector<double> true_params;  ///< generate the target from the field itself
  std::size_t target_grid = 9;      ///< points per non-free dimension for generated targets
};

struct AppConfig {
  std::string problem;
  std::uint64_t seed = 0;
  std::string output = "out";
  std::string base_dir = ".";
  nlohmann::json params = nlohmann::json::object();
  Discretization discretization;
  bool has_discretization = false;
  std::vector<DimConfig> dims;
  SolverConfig solver;
  TrainConfig trainer;
  std::string dataset;
  InverseSection inverse;
  StudyConfig study;
  OracleConfig oracle;
  std::string text;  ///< the document as read, for hashing
};

AppConfig parse_config(const std::string& text, const std::string& base_dir = ".");
AppConfig load_config(const std::string& path);

/// Resolves a path from the config relative to the config's directory.
std::string resolve_path(const AppConfig& cfg, const std::string& path);

}  // namespace septensor::app
