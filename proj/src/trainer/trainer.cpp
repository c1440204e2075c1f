#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "septensor/error.hpp"
#include "septensor/trainer.hpp"

namespace septensor {
namespace {

// Shape-function values of every row and dimension, computed once.
struct SampleCache {
  std::vector<std::vector<BasisEval>> evals;  // [row][d]
  std::vector<double> targets;
};

SampleCache make_cache(const FieldSpace& space, const Dataset& data) {
  SampleCache cache;
  cache.evals.resize(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    cache.evals[k].reserve(space.num_dims());
    for (std::size_t d = 0; d < space.num_dims(); ++d) {
      try {
        cache.evals[k].push_back(space.shape(d).eval(data.inputs[k][d]));
      } catch (const OutOfDomain& err) {
        throw OutOfDomain("dataset row " + std::to_string(k) + ": " + err.what());
      }
    }
  }
  cache.targets = data.targets;
  return cache;
}

double mode_value(const SeparableField& field, const std::vector<BasisEval>& ev, std::size_t m) {
  double prod = 1.0;
  for (std::size_t d = 0; d < ev.size(); ++d) prod *= ev[d].interpolate(field.coeffs(m, d));
  return prod;
}

double predict(const SeparableField& field, const std::vector<BasisEval>& ev, std::size_t first) {
  double s = 0.0;
  for (std::size_t m = first; m < field.num_modes(); ++m) s += mode_value(field, ev, m);
  return s;
}

double cache_mse(const SeparableField& field, const SampleCache& cache, std::size_t first) {
  if (cache.targets.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < cache.targets.size(); ++k) {
    const double r = predict(field, cache.evals[k], first) - cache.targets[k];
    s += r * r;
  }
  return s / static_cast<double>(cache.targets.size());
}

// Accumulates d(MSE over rows)/d(coefficients of modes >= first) into grad,
// laid out from mode `first` on.
void accumulate_grad(const SeparableField& field, const SampleCache& cache,
                     std::span<const std::size_t> rows, std::size_t first,
                     std::vector<double>& grad) {
  const FieldSpace& space = field.space();
  const std::size_t dims = space.num_dims();
  const std::size_t ms = space.mode_size();
  std::fill(grad.begin(), grad.end(), 0.0);
  const double scale = 2.0 / static_cast<double>(rows.size());
  std::vector<double> vals(dims);
  std::vector<double> prefix(dims + 1);
  std::vector<double> suffix(dims + 1);
  for (std::size_t k : rows) {
    const auto& ev = cache.evals[k];
    const double r = predict(field, ev, first) - cache.targets[k];
    if (r == 0.0) continue;
    for (std::size_t m = first; m < field.num_modes(); ++m) {
      for (std::size_t d = 0; d < dims; ++d) vals[d] = ev[d].interpolate(field.coeffs(m, d));
      prefix[0] = 1.0;
      for (std::size_t d = 0; d < dims; ++d) prefix[d + 1] = prefix[d] * vals[d];
      suffix[dims] = 1.0;
      for (std::size_t d = dims; d-- > 0;) suffix[d] = suffix[d + 1] * vals[d];
      double* g = grad.data() + (m - first) * ms;
      for (std::size_t d = 0; d < dims; ++d) {
        const double c = scale * r * prefix[d] * suffix[d + 1];
        if (c == 0.0) continue;
        double* gd = g + space.offset(d);
        for (std::size_t j = 0; j < ev[d].size(); ++j) gd[ev[d].node_index(j)] += c * ev[d].values[j];
      }
    }
  }
}

struct Split {
  SampleCache train;
  SampleCache validation;
};

Split make_split(const FieldSpace& space, const Dataset& data, const TrainConfig& cfg,
                 std::mt19937_64& rng) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_val = static_cast<std::size_t>(
      std::floor(cfg.validation_fraction * static_cast<double>(data.size())));
  if (cfg.validation_fraction > 0.0 && n_val == 0 && data.size() >= 2) n_val = 1;
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> tr(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(tr.begin(), tr.end());
  return {make_cache(space, data.subset(tr)), make_cache(space, data.subset(val))};
}

std::vector<double> random_mode(const FieldSpace& space, std::size_t modes, bool zero_first,
                                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(-0.1, 0.1);
  std::vector<double> flat(space.mode_size());
  for (std::size_t d = 0; d < space.num_dims(); ++d)
    for (std::size_t i = 0; i < space.num_nodes(d); ++i) {
      const double r = uniform(rng);
      double& v = flat[space.offset(d) + i];
      if (d == 0)
        v = zero_first ? 0.0 : r / static_cast<double>(modes);
      else
        v = 1.0 + r;
    }
  return flat;
}

struct FitOutcome {
  std::size_t epochs = 0;
  double train_mse = 0.0;
  double validation_mse = 0.0;
  std::string stop_reason;
};

// Adam on the modes from `first` on; restores the best-validation state.
FitOutcome fit(SeparableField& field, std::size_t first, Split& split, const TrainConfig& cfg,
               std::mt19937_64& rng, TrainReport& report) {
  const std::size_t ms = field.space().mode_size();
  const std::size_t np = (field.num_modes() - first) * ms;
  std::vector<double> grad(np);
  std::vector<double> m1(np, 0.0);
  std::vector<double> m2(np, 0.0);
  const bool has_val = !split.validation.targets.empty();
  auto val_mse = [&] {
    return has_val ? cache_mse(field, split.validation, first) : cache_mse(field, split.train, first);
  };
  auto snapshot = [&] {
    std::vector<double> s;
    s.reserve(np);
    for (std::size_t m = first; m < field.num_modes(); ++m)
      s.insert(s.end(), field.mode(m).begin(), field.mode(m).end());
    return s;
  };
  std::vector<double> best = snapshot();
  double best_val = val_mse();
  double prev_val = best_val;
  std::size_t rising = 0;

  std::vector<std::size_t> order(split.train.targets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);
  std::size_t step = 0;
  FitOutcome out;
  out.stop_reason = "max_epochs";
  for (std::size_t epoch = 1; epoch <= cfg.epochs_max; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < order.size(); b += batch) {
      const std::size_t e = std::min(order.size(), b + batch);
      accumulate_grad(field, split.train, std::span<const std::size_t>(order).subspan(b, e - b),
                      first, grad);
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t m = first; m < field.num_modes(); ++m) {
        auto coeffs = field.mode(m);
        const std::size_t base = (m - first) * ms;
        for (std::size_t i = 0; i < ms; ++i) {
          const double g = grad[base + i];
          double& a = m1[base + i];
          double& v = m2[base + i];
          a = cfg.beta1 * a + (1.0 - cfg.beta1) * g;
          v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
          coeffs[i] -= cfg.learning_rate * (a / c1) / (std::sqrt(v / c2) + cfg.eps);
        }
      }
    }
    const double tr = cache_mse(field, split.train, first);
    const double va = val_mse();
    if (!std::isfinite(tr) || !std::isfinite(va))
      throw TrainingError("training diverged at epoch " + std::to_string(epoch));
    report.train_mse.push_back(tr);
    report.validation_mse.push_back(va);
    out.epochs = epoch;
    if (va < best_val) {
      best_val = va;
      best = snapshot();
    }
    rising = va > prev_val ? rising + 1 : 0;
    prev_val = va;
    if (rising >= cfg.patience) {
      out.stop_reason = "early_stop";
      break;
    }
  }
  for (std::size_t m = first; m < field.num_modes(); ++m) {
    auto coeffs = field.mode(m);
    std::copy_n(best.begin() + static_cast<std::ptrdiff_t>((m - first) * ms), ms, coeffs.begin());
  }
  out.train_mse = cache_mse(field, split.train, first);
  out.validation_mse = val_mse();
  return out;
}

}  // namespace

std::string to_string(TrainScheme scheme) {
  return scheme == TrainScheme::Boosting ? "boosting" : "all_at_once";
}

TrainScheme train_scheme_from_string(const std::string& name) {
  if (name == "boosting") return TrainScheme::Boosting;
  if (name == "all_at_once") return TrainScheme::AllAtOnce;
  throw ConfigError("unknown training scheme '" + name + "'");
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("Adam eps must be positive");
  if (patience == 0) throw ConfigError("patience must be at least 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ConfigError("validation_fraction must lie in [0, 1)");
  if (!(target_mse >= 0.0)) throw ConfigError("target_mse must be non-negative");
}

std::string TrainReport::to_json() const {
  nlohmann::ordered_json j;
  j["stop_reason"] = stop_reason;
  j["parameters"] = parameters;
  j["train_rows"] = train_rows;
  j["validation_rows"] = validation_rows;
  j["epochs"] = train_mse.size();
  j["train_mse"] = train_mse;
  j["validation_mse"] = validation_mse;
  auto st = nlohmann::ordered_json::array();
  for (const auto& s : stages)
    st.push_back({{"mode", s.mode},
                  {"epochs", s.epochs},
                  {"train_mse", s.train_mse},
                  {"validation_mse", s.validation_mse},
                  {"stop_reason", s.stop_reason}});
  j["stages"] = std::move(st);
  return j.dump(2);
}

double loss_mse(const SeparableField& field, const Dataset& data) {
  if (data.size() == 0) throw InvalidArgument("loss of an empty dataset");
  const auto pred = field.evaluate_batch(data.inputs);
  double s = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double r = pred[k] - data.targets[k];
    s += r * r;
  }
  return s / static_cast<double>(pred.size());
}

std::vector<double> grad_mse(const SeparableField& field, const Dataset& batch) {
  if (batch.size() == 0) throw InvalidArgument("gradient of an empty batch");
  const SampleCache cache = make_cache(field.space(), batch);
  std::vector<std::size_t> rows(batch.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::vector<double> grad(field.num_parameters());
  accumulate_grad(field, cache, rows, 0, grad);
  return grad;
}

TrainResult train_all_at_once(FieldSpacePtr space, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate(*space);
  std::mt19937_64 rng(cfg.seed);
  Split split = make_split(*space, data, cfg, rng);
  TrainResult result{SeparableField(space), TrainReport{}};
  result.report.train_rows = split.train.targets.size();
  result.report.validation_rows = split.validation.targets.size();
  if (cfg.modes == 0) {
    result.report.stop_reason = "no_modes";
    return result;
  }
  for (std::size_t m = 0; m < cfg.modes; ++m)
    result.field.add_mode_flat(random_mode(*space, cfg.modes, false, rng));
  const FitOutcome fo = fit(result.field, 0, split, cfg, rng, result.report);
  result.report.stages.push_back({cfg.modes, fo.epochs, fo.train_mse, fo.validation_mse, fo.stop_reason});
  result.report.stop_reason = fo.stop_reason;
  result.report.parameters = result.field.num_parameters();
  return result;
}

TrainResult train_boosting(FieldSpacePtr space, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate(*space);
  std::mt19937_64 rng(cfg.seed);
  Split split = make_split(*space, data, cfg, rng);
  const std::vector<double> train_targets = split.train.targets;
  const std::vector<double> val_targets = split.validation.targets;
  TrainResult result{SeparableField(space), TrainReport{}};
  TrainReport& report = result.report;
  report.train_rows = split.train.targets.size();
  report.validation_rows = split.validation.targets.size();
  report.stop_reason = cfg.modes == 0 ? "no_modes" : "max_modes";
  double prev_train = cache_mse(result.field, split.train, 0);
  for (std::size_t m = 0; m < cfg.modes; ++m) {
    if (m > 0 && prev_train <= cfg.target_mse) {
      report.stop_reason = "target_reached";
      break;
    }
    // Each weak learner fits the residual of the frozen partial sum.
    for (std::size_t k = 0; k < train_targets.size(); ++k)
      split.train.targets[k] = train_targets[k] - predict(result.field, split.train.evals[k], 0);
    for (std::size_t k = 0; k < val_targets.size(); ++k)
      split.validation.targets[k] =
          val_targets[k] - predict(result.field, split.validation.evals[k], 0);
    result.field.add_mode_flat(random_mode(*space, 1, true, rng));
    const FitOutcome fo = fit(result.field, m, split, cfg, rng, report);
    report.stages.push_back({m + 1, fo.epochs, fo.train_mse, fo.validation_mse, fo.stop_reason});
    if (fo.train_mse > prev_train) {
      result.field.remove_last_mode();
      report.stop_reason = "no_improvement";
      break;
    }
    prev_train = fo.train_mse;
  }
  report.parameters = result.field.num_parameters();
  return result;
}

TrainResult train(FieldSpacePtr space, const Dataset& data, const TrainConfig& cfg) {
  return cfg.scheme == TrainScheme::Boosting ? train_boosting(space, data, cfg)
                                             : train_all_at_once(space, data, cfg);
}

}  // namespace septensor
