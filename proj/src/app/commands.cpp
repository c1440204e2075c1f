#include "septensor/app/commands.hpp"

#include <zlib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "septensor/app/csv.hpp"
#include "septensor/app/problems.hpp"
#include "septensor/error.hpp"
#include "septensor/oracle.hpp"

namespace septensor::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

void write_manifest(const AppConfig& cfg, const std::string& command, const RunOutputs& outs) {
  ordered_json j;
  j["command"] = command;
  j["problem"] = cfg.problem;
  j["config_crc32"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["versions"] = {{"septensor", kVersion},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                   {"zlib", ZLIB_VERSION}};
  j["outputs"] = outs.files;
  write_text(fs::path(outs.out_dir) / "manifest.json", j.dump(2));
}

RunOutputs open_output(const std::string& out_dir) {
  fs::create_directories(out_dir);
  return RunOutputs{out_dir, {}};
}

std::string path_in(RunOutputs& outs, const std::string& name) {
  outs.files.push_back(name);
  return (fs::path(outs.out_dir) / name).string();
}

std::vector<double> uniform_points_on(const Mesh1D& mesh, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = n == 1 ? 0.5 * (mesh.x_min() + mesh.x_max())
                  : mesh.x_min() + mesh.length() * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

struct ErrorSummary {
  double integral = 0.0;
  double pointwise = 0.0;
};

ErrorSummary measure_errors(const SeparableField& field, const SeparableFunction& exact,
                            std::uint64_t seed) {
  ErrorSummary e;
  e.integral = rel_l2_integral(field, exact);
  const FieldSpace& space = field.space();
  std::mt19937_64 rng(seed);
  std::vector<double> pred;
  std::vector<double> ref;
  std::vector<double> x(space.num_dims());
  for (int k = 0; k < 1000; ++k) {
    for (std::size_t d = 0; d < space.num_dims(); ++d) {
      const Mesh1D& m = space.dim(d).mesh;
      x[d] = std::uniform_real_distribution<double>(m.x_min(), m.x_max())(rng);
    }
    pred.push_back(field.evaluate(x));
    ref.push_back(exact.evaluate(x));
  }
  e.pointwise = rel_l2_pointwise(pred, ref);
  return e;
}

FieldSpacePtr training_space(const AppConfig& cfg) {
  if (cfg.problem == "custom") return space_from_dims(cfg);
  return build_problem(cfg).space;
}

void check_columns(const std::vector<std::string>& got, const std::vector<std::string>& want,
                   const std::string& what) {
  if (got == want) return;
  std::string w;
  for (const auto& s : want) w += (w.empty() ? "" : ",") + s;
  throw ConfigError(what + ": expected columns " + w);
}

}  // namespace

std::string config_hash(const AppConfig& cfg) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(cfg.text.data()), static_cast<uInt>(cfg.text.size()));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

void apply_seed(AppConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.solver.seed = seed;
  cfg.trainer.seed = seed;
  cfg.inverse.cfg.seed = seed;
}

RunOutputs cmd_solve(const AppConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const Problem pr = build_problem(cfg);
  RunOutputs outs = open_output(out_dir);
  const SolveResult r = solve(pr.space, pr.op, pr.source, pr.bc, cfg.solver);
  save_field(r.field, path_in(outs, "field.inntd"));
  write_text(path_in(outs, "solve_report.json"), r.report.to_json());
  log << pr.name << ": " << r.report.modes_used << " modes, " << r.field.num_parameters()
      << " parameters\n";
  if (pr.exact) {
    const ErrorSummary e = measure_errors(r.field, *pr.exact, cfg.seed);
    CsvWriter csv(path_in(outs, "errors.csv"), {"metric", "value"});
    csv.row(std::vector<std::string>{"rel_l2_integral", format_double(e.integral)});
    csv.row(std::vector<std::string>{"rel_l2_pointwise", format_double(e.pointwise)});
    log << "relative L2 error " << format_double(e.integral) << '\n';
  }
  return outs;
}

RunOutputs cmd_train(const AppConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const FieldSpacePtr space = training_space(cfg);
  cfg.trainer.validate();
  if (cfg.dataset.empty()) throw ConfigError("config.trainer.dataset: required for train");
  const Dataset data = read_dataset_csv(resolve_path(cfg, cfg.dataset));
  std::vector<std::string> names;
  for (const auto& d : space->dims()) names.push_back(d.name);
  std::vector<std::string> inputs(data.columns.begin(), data.columns.end() - (data.columns.empty() ? 0 : 1));
  check_columns(inputs, names, "dataset '" + cfg.dataset + "'");
  data.validate(*space);

  RunOutputs outs = open_output(out_dir);
  const TrainResult r = train(space, data, cfg.trainer);
  save_field(r.field, path_in(outs, "field.inntd"));
  write_text(path_in(outs, "train_report.json"), r.report.to_json());
  CsvWriter csv(path_in(outs, "train_history.csv"), {"epoch", "train_mse", "validation_mse"});
  for (std::size_t e = 0; e < r.report.train_mse.size(); ++e)
    csv.row(std::vector<double>{static_cast<double>(e + 1), r.report.train_mse[e],
                                r.report.validation_mse[e]});
  log << "trained " << r.field.num_modes() << " modes, stop: " << r.report.stop_reason
      << ", train MSE " << format_double(r.report.stages.back().train_mse) << '\n';
  return outs;
}

RunOutputs cmd_invert(const AppConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const InverseSection& sec = cfg.inverse;
  InverseConfig icfg = sec.cfg;
  if (icfg.free_dims.empty()) throw ConfigError("config.inverse.free_dims: required");
  if (sec.target.empty() && sec.true_params.empty())
    throw ConfigError("config.inverse: give a target file or true_params");
  if (!sec.true_params.empty() && sec.true_params.size() != icfg.free_dims.size())
    throw ConfigError("config.inverse.true_params: one value per free dimension");

  std::optional<SeparableField> loaded;
  if (!sec.field.empty()) {
    loaded = load_field(resolve_path(cfg, sec.field));
  } else {
    const Problem pr = build_problem(cfg);
    loaded = solve(pr.space, pr.op, pr.source, pr.bc, cfg.solver).field;
  }
  const SeparableField& field = *loaded;
  const FieldSpace& space = field.space();
  std::vector<bool> is_free(space.num_dims(), false);
  for (const auto& name : icfg.free_dims) {
    const std::size_t d = space.index_of(name);
    if (space.dim(d).kind != DimKind::Param)
      throw ConfigError("config.inverse.free_dims: '" + name + "' is not a parameter dimension");
    is_free[d] = true;
  }
  if (icfg.box.empty())
    for (const auto& name : icfg.free_dims) {
      const Mesh1D& m = space.dim(space.index_of(name)).mesh;
      icfg.box.emplace_back(m.x_min(), m.x_max());
    }

  std::vector<std::string> fixed_names;
  for (std::size_t d = 0; d < space.num_dims(); ++d)
    if (!is_free[d]) fixed_names.push_back(space.dim(d).name);

  TargetField target;
  if (!sec.target.empty()) {
    const Dataset t = read_dataset_csv(resolve_path(cfg, sec.target));
    std::vector<std::string> cols(t.columns.begin(), t.columns.end() - (t.columns.empty() ? 0 : 1));
    check_columns(cols, fixed_names, "target '" + sec.target + "'");
    target.points = t.inputs;
    target.values = t.targets;
  } else {
    std::vector<std::vector<double>> axes;
    for (std::size_t d = 0; d < space.num_dims(); ++d)
      if (!is_free[d]) axes.push_back(uniform_points_on(space.dim(d).mesh, sec.target_grid));
    std::vector<std::vector<double>> points;
    std::vector<std::size_t> idx(axes.size(), 0);
    for (bool more = !axes.empty(); more;) {
      std::vector<double> p(axes.size());
      for (std::size_t i = 0; i < axes.size(); ++i) p[i] = axes[i][idx[i]];
      points.push_back(std::move(p));
      more = false;
      for (std::size_t i = axes.size(); i-- > 0;) {
        if (++idx[i] < axes[i].size()) {
          more = true;
          break;
        }
        idx[i] = 0;
      }
    }
    target = sample_target(field, icfg.free_dims, sec.true_params, points);
  }

  RunOutputs outs = open_output(out_dir);
  const InverseResult r = invert(field, target, icfg);

  std::vector<std::string> header{"restart"};
  for (const auto& n : icfg.free_dims) header.push_back("initial_" + n);
  for (const auto& n : icfg.free_dims) header.push_back("estimate_" + n);
  header.insert(header.end(), {"loss", "steps", "converged"});
  CsvWriter restarts(path_in(outs, "inverse_restarts.csv"), header);
  CsvWriter history(path_in(outs, "inverse_history.csv"), {"restart", "step", "loss", "best_loss"});
  for (std::size_t k = 0; k < r.restarts.size(); ++k) {
    const RestartTrace& t = r.restarts[k];
    std::vector<double> row{static_cast<double>(k)};
    row.insert(row.end(), t.initial.begin(), t.initial.end());
    row.insert(row.end(), t.estimate.begin(), t.estimate.end());
    row.insert(row.end(), {t.best_loss.empty() ? 0.0 : t.best_loss.back(), static_cast<double>(t.steps),
                           t.converged ? 1.0 : 0.0});
    restarts.row(row);
    for (std::size_t s = 0; s < t.loss.size(); ++s)
      history.row(std::vector<double>{static_cast<double>(k), static_cast<double>(s), t.loss[s], t.best_loss[s]});
    log << "restart " << k << ": loss " << format_double(row[row.size() - 3]) << '\n';
  }
  CsvWriter summary(path_in(outs, "inverse.csv"), {"param", "estimate"});
  for (std::size_t i = 0; i < icfg.free_dims.size(); ++i) {
    summary.row(std::vector<std::string>{icfg.free_dims[i], format_double(r.estimate[i])});
    log << icfg.free_dims[i] << " = " << format_double(r.estimate[i]);
    if (!sec.true_params.empty())
      log << " (relative error "
          << format_double(std::abs(r.estimate[i] - sec.true_params[i]) / std::abs(sec.true_params[i])) << ')';
    log << '\n';
  }
  return outs;
}

RunOutputs cmd_study(const AppConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const StudyConfig& st = cfg.study;
  if (st.repeats == 0) throw ConfigError("config.study.repeats: must be at least 1");
  if (st.elems.empty() || st.patches.empty()) throw ConfigError("config.study: empty sweep");
  // Validate every sweep point before any output exists.
  for (std::size_t e : st.elems)
    for (auto [s, p] : st.patches) {
      AppConfig c = cfg;
      c.discretization.n_elem = e;
      c.discretization.patch.s = s;
      c.discretization.patch.p = p;
      c.has_discretization = true;
      validate(c.discretization.patch);
      if (!build_problem(c).exact) throw ConfigError("config.problem: study needs a problem with an exact solution");
    }

  RunOutputs outs = open_output(out_dir);
  CsvWriter csv(path_in(outs, "study.csv"),
                {"elems", "s", "p", "params", "mean_error", "std_error", "mean_wall_time"});
  for (std::size_t e : st.elems)
    for (auto [s, p] : st.patches) {
      AppConfig c = cfg;
      c.discretization.n_elem = e;
      c.discretization.patch.s = s;
      c.discretization.patch.p = p;
      c.has_discretization = true;
      const Problem pr = build_problem(c);
      std::vector<double> errs;
      double wall = 0.0;
      std::size_t params = 0;
      for (std::size_t r = 0; r < st.repeats; ++r) {
        SolverConfig sc = c.solver;
        sc.seed = cfg.seed + r;
        const SolveResult res = solve(pr.space, pr.op, pr.source, pr.bc, sc);
        errs.push_back(rel_l2_integral(res.field, *pr.exact));
        wall += res.report.wall_time_s;
        if (r == 0) params = res.field.num_parameters();
      }
      const double n = static_cast<double>(errs.size());
      const double mean = std::accumulate(errs.begin(), errs.end(), 0.0) / n;
      double var = 0.0;
      for (double x : errs) var += (x - mean) * (x - mean);
      const double sd = errs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
      csv.row(std::vector<double>{static_cast<double>(e), static_cast<double>(s), static_cast<double>(p),
                                  static_cast<double>(params), mean, sd, wall / n});
      log << "elems " << e << " s " << s << " p " << p << ": error " << format_double(mean) << '\n';
    }
  return outs;
}

RunOutputs cmd_oracle(const AppConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const OracleConfig& o = cfg.oracle;
  if (o.steps == 0 || !(o.t_end > 0.0)) throw ConfigError("config.oracle: steps and t_end must be positive");
  if (o.grid < 3) throw ConfigError("config.oracle.grid: at least 3 nodes");
  HeatSources sources = HeatSources::grid16();
  if (cfg.problem == "heat_spt") {
    if (cfg.params.contains("r0")) sources.r0 = cfg.params["r0"].get<double>();
    if (cfg.params.contains("depth")) sources.depth = cfg.params["depth"].get<double>();
  }
  std::mt19937_64 rng(cfg.seed);

  if (o.kind == "heat_2d") {
    if (o.k_values.empty() || o.p_values.empty()) throw ConfigError("config.oracle: k_values and p_values required");
    Dataset data;
    data.columns = {"x", "y", "k", "P", "t", "u"};
    for (double k : o.k_values)
      for (double p : o.p_values) {
        const HeatTrajectory tr = fd_heat_2d_param(o.grid, o.steps, o.t_end, k, p, sources);
        const std::size_t n = tr.axis.size();
        for (std::size_t s = 0; s < tr.times.size(); ++s)
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
              data.inputs.push_back({tr.axis[i], tr.axis[j], k, p, tr.times[s]});
              data.targets.push_back(tr.values[s][i * n + j]);
            }
      }
    if (o.max_rows > 0 && data.size() > o.max_rows) {
      std::vector<std::size_t> rows(data.size());
      std::iota(rows.begin(), rows.end(), 0);
      std::shuffle(rows.begin(), rows.end(), rng);
      rows.resize(o.max_rows);
      std::sort(rows.begin(), rows.end());
      data = data.subset(rows);
    }
    RunOutputs outs = open_output(out_dir);
    write_dataset_csv(data, path_in(outs, "dataset.csv"));
    log << "wrote " << data.size() << " rows\n";
    return outs;
  }
  if (o.kind == "heat_3d") {
    if (o.k_values.empty() || o.p_values.empty()) throw ConfigError("config.oracle: k_values and p_values required");
    const double k = o.k_values.front();
    const double p = o.p_values.front();
    const HeatTrajectory tr = fd_heat_3d_param(o.grid, o.steps, o.t_end, k, p, sources);
    const std::size_t n = tr.axis.size();
    Dataset data;
    data.columns = {"x", "y", "z", "t", "u"};
    for (std::size_t s = 0; s < tr.times.size(); ++s)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t l = 0; l < n; ++l) {
            data.inputs.push_back({tr.axis[i], tr.axis[j], tr.axis[l], tr.times[s]});
            data.targets.push_back(tr.values[s][(i * n + j) * n + l]);
          }
    if (o.max_rows > 0 && data.size() > o.max_rows) {
      std::vector<std::size_t> rows(data.size());
      std::iota(rows.begin(), rows.end(), 0);
      std::shuffle(rows.begin(), rows.end(), rng);
      rows.resize(o.max_rows);
      std::sort(rows.begin(), rows.end());
      data = data.subset(rows);
    }
    RunOutputs outs = open_output(out_dir);
    write_dataset_csv(data, path_in(outs, "target.csv"));
    log << "wrote " << data.size() << " rows at k = " << format_double(k) << ", P = " << format_double(p) << '\n';
    return outs;
  }
  if (o.kind == "poisson_2d") {
    const Problem pr = build_problem(cfg);
    const FieldSpace& space = *pr.space;
    if (space.num_dims() != 2) throw ConfigError("config.oracle.kind: poisson_2d needs a two-dimensional problem");
    const SeparableFunction f = pr.source;
    const std::optional<SeparableFunction> exact = pr.exact;
    auto src = [&f](double x, double y) {
      const double pt[2] = {x, y};
      return f.evaluate(pt);
    };
    auto bnd = [&exact](double x, double y) {
      const double pt[2] = {x, y};
      return exact ? exact->evaluate(pt) : 0.0;
    };
    const Mesh1D& mx = space.dim(0).mesh;
    const Mesh1D& my = space.dim(1).mesh;
    const Grid2D g = fd_poisson_2d(o.grid, mx.x_min(), mx.x_max(), my.x_min(), my.x_max(), src, bnd);
    RunOutputs outs = open_output(out_dir);
    CsvWriter csv(path_in(outs, "solution.csv"), {space.dim(0).name, space.dim(1).name, "u"});
    for (std::size_t i = 0; i < g.x.size(); ++i)
      for (std::size_t j = 0; j < g.y.size(); ++j) csv.row(std::vector<double>{g.x[i], g.y[j], g.at(i, j)});
    log << "wrote " << g.values.size() << " rows\n";
    return outs;
  }
  throw ConfigError("config.oracle.kind: unknown kind '" + o.kind + "'");
}

int run_command(const std::string& command, const RunOptions& opts, std::ostream& log,
                std::ostream& err) {
  try {
    AppConfig cfg = load_config(opts.config_path);
    if (opts.seed) apply_seed(cfg, *opts.seed);
    const std::string out_dir = opts.out_dir ? *opts.out_dir : resolve_path(cfg, cfg.output);
    RunOutputs outs;
    if (command == "solve") outs = cmd_solve(cfg, out_dir, log);
    else if (command == "train") outs = cmd_train(cfg, out_dir, log);
    else if (command == "invert") outs = cmd_invert(cfg, out_dir, log);
    else if (command == "study") outs = cmd_study(cfg, out_dir, log);
    else if (command == "oracle") outs = cmd_oracle(cfg, out_dir, log);
    else throw ConfigError("unknown command '" + command + "'");
    write_manifest(cfg, command, outs);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const OutOfDomain& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace septensor::app
