#include "septensor/app/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "septensor/error.hpp"

namespace septensor::app {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) fail(path + "." + it.key(), "unknown key");
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::uint64_t unsigned_int(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
    fail(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

int signed_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

std::string string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::pair<double, double> interval(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) fail(path, "expected [min, max]");
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
}

template <class F>
void opt(const json& obj, const char* key, const std::string& path, F&& f) {
  auto it = obj.find(key);
  if (it != obj.end()) f(*it, path + "." + key);
}

KernelKind kernel(const json& v, const std::string& path) {
  try {
    return kernel_from_string(string(v, path));
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

DimKind dim_kind(const json& v, const std::string& path) {
  try {
    return dim_kind_from_string(string(v, path));
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

std::vector<GradedSegment> graded(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of segments");
  std::vector<GradedSegment> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    check_keys(v[i], p, {"interval", "n_elem"});
    if (!v[i].contains("interval") || !v[i].contains("n_elem")) fail(p, "needs interval and n_elem");
    const auto iv = interval(v[i]["interval"], p + ".interval");
    out.push_back({iv.first, iv.second, unsigned_int(v[i]["n_elem"], p + ".n_elem")});
  }
  return out;
}

void parse_discretization(const json& v, const std::string& path, Discretization& d) {
  check_keys(v, path, {"n_elem", "time_elem", "param_elem", "s", "a", "p", "kernel"});
  opt(v, "n_elem", path, [&](const json& x, const std::string& p) { d.n_elem = unsigned_int(x, p); });
  opt(v, "time_elem", path, [&](const json& x, const std::string& p) { d.time_elem = unsigned_int(x, p); });
  opt(v, "param_elem", path, [&](const json& x, const std::string& p) { d.param_elem = unsigned_int(x, p); });
  opt(v, "s", path, [&](const json& x, const std::string& p) { d.patch.s = signed_int(x, p); });
  opt(v, "a", path, [&](const json& x, const std::string& p) { d.patch.a = number(x, p); });
  opt(v, "p", path, [&](const json& x, const std::string& p) { d.patch.p = signed_int(x, p); });
  opt(v, "kernel", path, [&](const json& x, const std::string& p) { d.patch.kernel = kernel(x, p); });
  try {
    validate(d.patch);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

DimConfig parse_dim(const json& v, const std::string& path) {
  check_keys(v, path, {"name", "kind", "domain", "n_elem", "graded", "s", "a", "p", "kernel"});
  DimConfig d;
  if (!v.contains("name")) fail(path, "dimension needs a name");
  d.name = string(v["name"], path + ".name");
  opt(v, "kind", path, [&](const json& x, const std::string& p) { d.kind = dim_kind(x, p); });
  opt(v, "domain", path, [&](const json& x, const std::string& p) { d.domain = interval(x, p); });
  opt(v, "n_elem", path, [&](const json& x, const std::string& p) { d.n_elem = unsigned_int(x, p); });
  opt(v, "graded", path, [&](const json& x, const std::string& p) { d.graded = graded(x, p); });
  opt(v, "s", path, [&](const json& x, const std::string& p) { d.s = signed_int(x, p); });
  opt(v, "a", path, [&](const json& x, const std::string& p) { d.a = number(x, p); });
  opt(v, "p", path, [&](const json& x, const std::string& p) { d.p = signed_int(x, p); });
  opt(v, "kernel", path, [&](const json& x, const std::string& p) { d.kernel = kernel(x, p); });
  return d;
}

void parse_solver(const json& v, const std::string& path, SolverConfig& s) {
  check_keys(v, path, {"max_modes", "max_subspace_iters", "iter_tol", "mode_tol", "quad_points"});
  opt(v, "max_modes", path, [&](const json& x, const std::string& p) { s.max_modes = unsigned_int(x, p); });
  opt(v, "max_subspace_iters", path,
      [&](const json& x, const std::string& p) { s.max_subspace_iters = unsigned_int(x, p); });
  opt(v, "iter_tol", path, [&](const json& x, const std::string& p) { s.iter_tol = number(x, p); });
  opt(v, "mode_tol", path, [&](const json& x, const std::string& p) { s.mode_tol = number(x, p); });
  opt(v, "quad_points", path, [&](const json& x, const std::string& p) { s.quad_points = signed_int(x, p); });
  if (s.max_subspace_iters == 0) fail(path + ".max_subspace_iters", "must be positive");
  if (!(s.iter_tol > 0.0)) fail(path + ".iter_tol", "must be positive");
  if (!(s.mode_tol > 0.0)) fail(path + ".mode_tol", "must be positive");
  if (s.quad_points < 0 || s.quad_points > 10) fail(path + ".quad_points", "must lie in [0, 10]");
}

void parse_trainer(const json& v, const std::string& path, TrainConfig& t, std::string& dataset) {
  check_keys(v, path, {"scheme", "modes", "epochs_max", "batch_size", "learning_rate", "beta1", "beta2",
                       "eps", "patience", "validation_fraction", "target_mse", "dataset"});
  opt(v, "scheme", path, [&](const json& x, const std::string& p) {
    try {
      t.scheme = train_scheme_from_string(string(x, p));
    } catch (const Error& e) {
      fail(p, e.what());
    }
  });
  opt(v, "modes", path, [&](const json& x, const std::string& p) { t.modes = unsigned_int(x, p); });
  opt(v, "epochs_max", path, [&](const json& x, const std::string& p) { t.epochs_max = unsigned_int(x, p); });
  opt(v, "batch_size", path, [&](const json& x, const std::string& p) { t.batch_size = unsigned_int(x, p); });
  opt(v, "learning_rate", path, [&](const json& x, const std::string& p) { t.learning_rate = number(x, p); });
  opt(v, "beta1", path, [&](const json& x, const std::string& p) { t.beta1 = number(x, p); });
  opt(v, "beta2", path, [&](const json& x, const std::string& p) { t.beta2 = number(x, p); });
  opt(v, "eps", path, [&](const json& x, const std::string& p) { t.eps = number(x, p); });
  opt(v, "patience", path, [&](const json& x, const std::string& p) { t.patience = unsigned_int(x, p); });
  opt(v, "validation_fraction", path,
      [&](const json& x, const std::string& p) { t.validation_fraction = number(x, p); });
  opt(v, "target_mse", path, [&](const json& x, const std::string& p) { t.target_mse = number(x, p); });
  opt(v, "dataset", path, [&](const json& x, const std::string& p) { dataset = string(x, p); });
  try {
    t.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

void parse_inverse(const json& v, const std::string& path, InverseSection& s) {
  check_keys(v, path, {"free_dims", "box", "learning_rate", "max_steps", "grad_tol", "restarts",
                       "plateau_patience", "field", "target", "true_params", "target_grid"});
  auto& c = s.cfg;
  opt(v, "free_dims", path, [&](const json& x, const std::string& p) {
    if (!x.is_array()) fail(p, "expected an array of names");
    for (std::size_t i = 0; i < x.size(); ++i)
      c.free_dims.push_back(string(x[i], p + "[" + std::to_string(i) + "]"));
  });
  opt(v, "box", path, [&](const json& x, const std::string& p) {
    if (!x.is_array()) fail(p, "expected an array of intervals");
    for (std::size_t i = 0; i < x.size(); ++i)
      c.box.push_back(interval(x[i], p + "[" + std::to_string(i) + "]"));
  });
  opt(v, "learning_rate", path, [&](const json& x, const std::string& p) { c.learning_rate = number(x, p); });
  opt(v, "max_steps", path, [&](const json& x, const std::string& p) { c.max_steps = unsigned_int(x, p); });
  opt(v, "grad_tol", path, [&](const json& x, const std::string& p) { c.grad_tol = number(x, p); });
  opt(v, "restarts", path, [&](const json& x, const std::string& p) { c.restarts = unsigned_int(x, p); });
  opt(v, "plateau_patience", path,
      [&](const json& x, const std::string& p) { c.plateau_patience = unsigned_int(x, p); });
  opt(v, "field", path, [&](const json& x, const std::string& p) { s.field = string(x, p); });
  opt(v, "target", path, [&](const json& x, const std::string& p) { s.target = string(x, p); });
  opt(v, "true_params", path, [&](const json& x, const std::string& p) {
    if (!x.is_array()) fail(p, "expected an array of numbers");
    for (std::size_t i = 0; i < x.size(); ++i)
      s.true_params.push_back(number(x[i], p + "[" + std::to_string(i) + "]"));
  });
  opt(v, "target_grid", path, [&](const json& x, const std::string& p) { s.target_grid = unsigned_int(x, p); });
  if (c.box.size() != c.free_dims.size()) fail(path + ".box", "needs one interval per free dimension");
  if (!(c.learning_rate > 0.0)) fail(path + ".learning_rate", "must be positive");
  if (c.restarts == 0) fail(path + ".restarts", "must be positive");
  if (!s.true_params.empty() && s.true_params.size() != c.free_dims.size())
    fail(path + ".true_params", "needs one value per free dimension");
  if (s.target_grid < 2) fail(path + ".target_grid", "must be at least 2");
}

void parse_study(const json& v, const std::string& path, StudyConfig& s) {
  check_keys(v, path, {"elems", "patches", "repeats"});
  opt(v, "elems", path, [&](const json& x, const std::string& p) {
    if (!x.is_array() || x.empty()) fail(p, "expected a non-empty array");
    s.elems.clear();
    for (std::size_t i = 0; i < x.size(); ++i)
      s.elems.push_back(unsigned_int(x[i], p + "[" + std::to_string(i) + "]"));
  });
  opt(v, "patches", path, [&](const json& x, const std::string& p) {
    if (!x.is_array() || x.empty()) fail(p, "expected a non-empty array");
    s.patches.clear();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const std::string q = p + "[" + std::to_string(i) + "]";
      check_keys(x[i], q, {"s", "p"});
      if (!x[i].contains("s") || !x[i].contains("p")) fail(q, "needs s and p");
      s.patches.emplace_back(signed_int(x[i]["s"], q + ".s"), signed_int(x[i]["p"], q + ".p"));
    }
  });
  opt(v, "repeats", path, [&](const json& x, const std::string& p) { s.repeats = unsigned_int(x, p); });
  if (s.repeats == 0) fail(path + ".repeats", "must be at least 1");
}

void parse_oracle(const json& v, const std::string& path, OracleConfig& o) {
  check_keys(v, path, {"kind", "grid", "steps", "t_end", "k_values", "p_values", "max_rows"});
  opt(v, "kind", path, [&](const json& x, const std::string& p) { o.kind = string(x, p); });
  opt(v, "grid", path, [&](const json& x, const std::string& p) { o.grid = unsigned_int(x, p); });
  opt(v, "steps", path, [&](const json& x, const std::string& p) { o.steps = unsigned_int(x, p); });
  opt(v, "t_end", path, [&](const json& x, const std::string& p) { o.t_end = number(x, p); });
  auto list = [&](const json& x, const std::string& p, std::vector<double>& out) {
    if (!x.is_array() || x.empty()) fail(p, "expected a non-empty array");
    out.clear();
    for (std::size_t i = 0; i < x.size(); ++i) out.push_back(number(x[i], p + "[" + std::to_string(i) + "]"));
  };
  opt(v, "k_values", path, [&](const json& x, const std::string& p) { list(x, p, o.k_values); });
  opt(v, "p_values", path, [&](const json& x, const std::string& p) { list(x, p, o.p_values); });
  opt(v, "max_rows", path, [&](const json& x, const std::string& p) { o.max_rows = unsigned_int(x, p); });
  if (o.kind != "heat_2d" && o.kind != "heat_3d" && o.kind != "poisson_2d")
    fail(path + ".kind", "expected heat_2d, heat_3d or poisson_2d");
  if (o.grid < 3) fail(path + ".grid", "must be at least 3");
  if (o.steps == 0) fail(path + ".steps", "must be positive");
  if (!(o.t_end > 0.0)) fail(path + ".t_end", "must be positive");
}

}  // namespace

AppConfig parse_config(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  const std::string root = "config";
  check_keys(doc, root, {"problem", "seed", "output", "params", "discretization", "dims", "solver",
                         "trainer", "inverse", "study", "oracle"});
  AppConfig cfg;
  cfg.text = text;
  cfg.base_dir = base_dir;
  if (!doc.contains("problem")) fail(root, "missing 'problem'");
  cfg.problem = string(doc["problem"], root + ".problem");
  opt(doc, "seed", root, [&](const json& x, const std::string& p) { cfg.seed = unsigned_int(x, p); });
  opt(doc, "output", root, [&](const json& x, const std::string& p) { cfg.output = string(x, p); });
  opt(doc, "params", root, [&](const json& x, const std::string& p) {
    if (!x.is_object()) fail(p, "expected an object");
    cfg.params = x;
  });
  opt(doc, "discretization", root, [&](const json& x, const std::string& p) {
    parse_discretization(x, p, cfg.discretization);
    cfg.has_discretization = true;
  });
  opt(doc, "dims", root, [&](const json& x, const std::string& p) {
    if (!x.is_array()) fail(p, "expected an array");
    for (std::size_t i = 0; i < x.size(); ++i) cfg.dims.push_back(parse_dim(x[i], p + "[" + std::to_string(i) + "]"));
  });
  opt(doc, "solver", root, [&](const json& x, const std::string& p) { parse_solver(x, p, cfg.solver); });
  opt(doc, "trainer", root, [&](const json& x, const std::string& p) { parse_trainer(x, p, cfg.trainer, cfg.dataset); });
  opt(doc, "inverse", root, [&](const json& x, const std::string& p) { parse_inverse(x, p, cfg.inverse); });
  opt(doc, "study", root, [&](const json& x, const std::string& p) { parse_study(x, p, cfg.study); });
  opt(doc, "oracle", root, [&](const json& x, const std::string& p) { parse_oracle(x, p, cfg.oracle); });
  cfg.solver.seed = cfg.seed;
  cfg.trainer.seed = cfg.seed;
  cfg.inverse.cfg.seed = cfg.seed;
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto parent = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), parent.empty() ? "." : parent.string());
}

std::string resolve_path(const AppConfig& cfg, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(cfg.base_dir) / p).string();
}

}  // namespace septensor::app
