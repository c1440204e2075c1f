#pragma once

// Data-driven fitting of separable fields by mini-batch Adam on the MSE.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "septensor/field.hpp"

namespace septensor {

struct Dataset {
  std::vector<std::string> columns;  ///< input names followed by the target name
  std::vector<std::vector<double>> inputs;
  std::vector<double> targets;

  std::size_t size() const noexcept { return targets.size(); }
  std::size_t num_inputs() const noexcept { return columns.empty() ? 0 : columns.size() - 1; }

  /// Throws InvalidArgument on ragged rows and OutOfDomain (with the row
  /// index) when an input falls outside the space's box.
  void validate(const FieldSpace& space) const;
  Dataset subset(const std::vector<std::size_t>& rows) const;
};

/// Header row of column names, then one row per sample; the last column is the target.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const Dataset& data, const std::string& path);

enum class TrainScheme { Boosting, AllAtOnce };

std::string to_string(TrainScheme scheme);
TrainScheme train_scheme_from_string(const std::string& name);

struct TrainConfig {
  TrainScheme scheme = TrainScheme::AllAtOnce;
  std::size_t modes = 1;
  std::size_t epochs_max = 500;
  std::size_t batch_size = 128;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t patience = 10;  ///< consecutive epochs of rising validation error
  double validation_fraction = 0.1;
  double target_mse = 0.0;  ///< boosting stops adding modes once the train MSE is below this
  std::uint64_t seed = 0;

  void validate() const;
};

struct StageRecord {
  std::size_t mode = 0;
  std::size_t epochs = 0;
  double train_mse = 0.0;
  double validation_mse = 0.0;
  std::string stop_reason;
};

struct TrainReport {
  std::vector<double> train_mse;  ///< per epoch, all stages concatenated
  std::vector<double> validation_mse;
  std::vector<StageRecord> stages;  ///< one per boosting stage, or one for all-at-once
  std::string stop_reason;
  std::size_t parameters = 0;
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;

  std::string to_json() const;
};

struct TrainResult {
  SeparableField field;
  TrainReport report;
};

/// (1/K) sum_k (u(x_k) - y_k)^2
double loss_mse(const SeparableField& field, const Dataset& data);

/// Gradient of loss_mse with respect to every coefficient, laid out like the
/// field's modes: index m * mode_size + offset(d) + node.
std::vector<double> grad_mse(const SeparableField& field, const Dataset& batch);

TrainResult train_all_at_once(FieldSpacePtr space, const Dataset& data, const TrainConfig& cfg);
TrainResult train_boosting(FieldSpacePtr space, const Dataset& data, const TrainConfig& cfg);
TrainResult train(FieldSpacePtr space, const Dataset& data, const TrainConfig& cfg);

}  // namespace septensor
