#pragma once

// Recovery of parametric coordinates from space-time measurements.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "septensor/field.hpp"

namespace septensor {

struct InverseConfig {
  std::vector<std::string> free_dims;                ///< Param dimensions to recover
  std::vector<std::pair<double, double>> box;        ///< one [min, max] per free dim
  double learning_rate = 0.1;                        ///< in box-normalized coordinates
  std::size_t max_steps = 1000;
  double grad_tol = 1e-10;
  std::size_t restarts = 8;
  std::size_t plateau_patience = 10;  ///< steps without improvement before halving the rate
  double min_rate_ratio = 1e-7;       ///< stop once the rate falls below this fraction
  std::uint64_t seed = 0;
};

/// Measurement points over the non-free dimensions, in the field's
/// dimension order with the free dimensions left out.
struct TargetField {
  std::vector<std::vector<double>> points;
  std::vector<double> values;
};

struct RestartTrace {
  std::vector<double> initial;
  std::vector<double> estimate;
  std::vector<double> loss;       ///< loss at each iterate, starting point included
  std::vector<double> best_loss;  ///< running minimum of loss
  std::vector<std::vector<double>> iterates;  ///< parameters at each loss entry
  std::size_t steps = 0;
  bool converged = false;
};

struct InverseResult {
  std::vector<double> estimate;  ///< best parameters, in free_dims order
  double loss = 0.0;
  bool converged = false;
  std::size_t best_restart = 0;
  std::vector<RestartTrace> restarts;
};

/// Projected Adam on ||u(x_s, t; x_p) - u*||_2 over the target samples.
InverseResult invert(const SeparableField& field, const TargetField& target,
                     const InverseConfig& cfg);

/// Derivative of the field along dimension d at a point.
double eval_param_grad(const SeparableField& field, std::span<const double> point, std::size_t d);

/// Samples a field on the target points with the free dimensions set to `params`.
TargetField sample_target(const SeparableField& field, const std::vector<std::string>& free_dims,
                          std::span<const double> params,
                          const std::vector<std::vector<double>>& points);

}  // namespace septensor
