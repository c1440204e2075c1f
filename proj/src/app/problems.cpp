#include "septensor/app/problems.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "septensor/error.hpp"

namespace septensor::app {
namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

Function1D constant(double c) {
  return [c](double) { return c; };
}

// Builds dimension specs from defaults, applying per-name overrides.
class DimBuilder {
 public:
  DimBuilder(const Discretization& disc, const std::vector<DimConfig>& overrides)
      : disc_(disc), overrides_(overrides) {}

  DimensionSpec make(const std::string& name, DimKind kind, double lo, double hi,
                     std::optional<Mesh1D> mesh = std::nullopt) {
    std::size_t n = disc_.n_elem;
    if (kind == DimKind::Time && disc_.time_elem) n = *disc_.time_elem;
    if (kind == DimKind::Param && disc_.param_elem) n = *disc_.param_elem;
    PatchConfig patch = disc_.patch;
    for (const auto& o : overrides_) {
      if (o.name != name) continue;
      used_.insert(name);
      if (o.kind && *o.kind != kind) throw ConfigError("dims." + name + ".kind: fixed by the problem");
      if (o.domain) {
        lo = o.domain->first;
        hi = o.domain->second;
        mesh.reset();
      }
      if (o.n_elem) {
        n = *o.n_elem;
        mesh.reset();
      }
      if (o.s) patch.s = *o.s;
      if (o.a) patch.a = *o.a;
      if (o.p) patch.p = *o.p;
      if (o.kernel) patch.kernel = *o.kernel;
      if (!o.graded.empty()) mesh = make_graded_mesh(o.graded);
    }
    if (!mesh) {
      if (n == 0) throw ConfigError("dims." + name + ": n_elem must be positive");
      mesh = make_uniform_mesh(lo, hi, n);
    }
    return DimensionSpec{name, *mesh, patch, kind};
  }

  void finish() const {
    for (const auto& o : overrides_)
      if (!used_.count(o.name)) throw ConfigError("dims: problem has no dimension '" + o.name + "'");
  }

 private:
  const Discretization& disc_;
  const std::vector<DimConfig>& overrides_;
  std::set<std::string> used_;
};

std::vector<Function1D> ones(std::size_t dims) { return std::vector<Function1D>(dims, constant(1.0)); }

void check_params(const json& params, std::initializer_list<const char*> allowed) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = params.begin(); it != params.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("config.params." + it.key() + ": unknown key");
}

double param_number(const json& params, const char* key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (!it->is_number()) throw ConfigError(std::string("config.params.") + key + ": expected a number");
  return it->get<double>();
}

std::pair<double, double> param_interval(const json& params, const char* key,
                                         std::pair<double, double> fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
    throw ConfigError(std::string("config.params.") + key + ": expected [min, max]");
  return {(*it)[0].get<double>(), (*it)[1].get<double>()};
}

// --- declarative functions and operators for custom problems ---

Function1D parse_function(const json& v, const std::string& path) {
  if (v.is_number()) return constant(v.get<double>());
  if (!v.is_object() || !v.contains("fn") || !v["fn"].is_string())
    throw ConfigError(path + ": expected a number or an object with 'fn'");
  const std::string fn = v["fn"].get<std::string>();
  auto num = [&](const char* key, double fallback) {
    auto it = v.find(key);
    if (it == v.end()) return fallback;
    if (!it->is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return it->get<double>();
  };
  auto keys = [&](std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    ok.insert("fn");
    for (auto it = v.begin(); it != v.end(); ++it)
      if (!ok.count(it.key())) throw ConfigError(path + "." + it.key() + ": unknown key");
  };
  if (fn == "const") {
    keys({"value"});
    return constant(num("value", 1.0));
  }
  if (fn == "identity") {
    keys({});
    return [](double x) { return x; };
  }
  if (fn == "sin" || fn == "cos") {
    keys({"freq", "phase"});
    const double w = num("freq", 1.0);
    const double ph = num("phase", 0.0);
    if (fn == "sin") return [w, ph](double x) { return std::sin(w * x + ph); };
    return [w, ph](double x) { return std::cos(w * x + ph); };
  }
  if (fn == "gauss") {
    keys({"center", "width"});
    const double c = num("center", 0.0);
    const double r = num("width", 1.0);
    if (!(r > 0.0)) throw ConfigError(path + ".width: must be positive");
    return [c, r](double x) { return std::exp(-2.0 * (x - c) * (x - c) / (r * r)); };
  }
  if (fn == "step") {
    keys({"at"});
    const double at = num("at", 0.0);
    return [at](double x) { return x >= at ? 1.0 : 0.0; };
  }
  if (fn == "poly") {
    keys({"coeffs"});
    if (!v.contains("coeffs") || !v["coeffs"].is_array())
      throw ConfigError(path + ".coeffs: expected an array of numbers");
    std::vector<double> c;
    for (const auto& x : v["coeffs"]) {
      if (!x.is_number()) throw ConfigError(path + ".coeffs: expected numbers");
      c.push_back(x.get<double>());
    }
    return [c](double x) {
      double s = 0.0;
      for (std::size_t i = c.size(); i-- > 0;) s = s * x + c[i];
      return s;
    };
  }
  throw ConfigError(path + ".fn: unknown function '" + fn + "'");
}

SeparableFunction parse_separable(const json& v, const std::string& path, std::size_t dims) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of terms");
  SeparableFunction f;
  for (std::size_t t = 0; t < v.size(); ++t) {
    const std::string p = path + "[" + std::to_string(t) + "]";
    const json& term = v[t];
    check_params(term, {"coeff", "factors"});
    if (!term.contains("factors") || !term["factors"].is_array() || term["factors"].size() != dims)
      throw ConfigError(p + ".factors: expected one function per dimension");
    RankOneTerm r;
    r.coeff = term.contains("coeff") ? term["coeff"].get<double>() : 1.0;
    for (std::size_t d = 0; d < dims; ++d)
      r.factors.push_back(parse_function(term["factors"][d], p + ".factors[" + std::to_string(d) + "]"));
    f.terms.push_back(std::move(r));
  }
  return f;
}

Op1D parse_op(const json& v, const std::string& path) {
  if (v.is_string()) {
    const std::string k = v.get<std::string>();
    if (k == "mass") return Op1D::mass();
    if (k == "stiffness") return Op1D::stiffness();
    if (k == "convection") return Op1D::convection();
    throw ConfigError(path + ": unknown operator '" + k + "'");
  }
  if (!v.is_object() || !v.contains("kind") || !v["kind"].is_string())
    throw ConfigError(path + ": expected an operator name or {kind, weight}");
  for (auto it = v.begin(); it != v.end(); ++it)
    if (it.key() != "kind" && it.key() != "weight") throw ConfigError(path + "." + it.key() + ": unknown key");
  const std::string k = v["kind"].get<std::string>();
  if (!v.contains("weight")) throw ConfigError(path + ".weight: required for weighted operators");
  Function1D w = parse_function(v["weight"], path + ".weight");
  if (k == "weighted_mass") return Op1D::weighted_mass(std::move(w));
  if (k == "weighted_stiffness") return Op1D::weighted_stiffness(std::move(w));
  throw ConfigError(path + ".kind: unknown operator '" + k + "'");
}

Problem make_custom(const AppConfig& cfg) {
  const json& params = cfg.params;
  check_params(params, {"operator", "source", "boundary", "exact", "dirichlet"});
  Problem pr;
  pr.name = "custom";
  pr.space = space_from_dims(cfg);
  const std::size_t dims = pr.space->num_dims();
  if (!params.contains("operator") || !params["operator"].is_array() || params["operator"].empty())
    throw ConfigError("config.params.operator: expected a non-empty array of terms");
  for (std::size_t t = 0; t < params["operator"].size(); ++t) {
    const std::string p = "config.params.operator[" + std::to_string(t) + "]";
    const json& term = params["operator"][t];
    check_params(term, {"coeff", "factors"});
    if (!term.contains("factors") || !term["factors"].is_array() || term["factors"].size() != dims)
      throw ConfigError(p + ".factors: expected one operator per dimension");
    OperatorTerm ot;
    ot.coeff = term.contains("coeff") ? term["coeff"].get<double>() : 1.0;
    for (std::size_t d = 0; d < dims; ++d)
      ot.factors.push_back(parse_op(term["factors"][d], p + ".factors[" + std::to_string(d) + "]"));
    pr.op.terms.push_back(std::move(ot));
  }
  if (params.contains("source")) pr.source = parse_separable(params["source"], "config.params.source", dims);
  pr.bc = default_dirichlet(*pr.space);
  if (params.contains("dirichlet")) {
    const json& dj = params["dirichlet"];
    if (!dj.is_object()) throw ConfigError("config.params.dirichlet: expected an object");
    for (auto it = dj.begin(); it != dj.end(); ++it) {
      const std::size_t d = pr.space->index_of(it.key());
      const std::string mode = it->is_string() ? it->get<std::string>() : "";
      const std::size_t last = pr.space->num_nodes(d) - 1;
      if (mode == "both") pr.bc.constrained[d] = {0, last};
      else if (mode == "first") pr.bc.constrained[d] = {0};
      else if (mode == "last") pr.bc.constrained[d] = {last};
      else if (mode == "none") pr.bc.constrained[d].clear();
      else throw ConfigError("config.params.dirichlet." + it.key() + ": expected both, first, last or none");
    }
  }
  if (params.contains("boundary"))
    pr.bc.lift = make_lift_for_separable_boundary(
        pr.space, parse_separable(params["boundary"], "config.params.boundary", dims));
  if (params.contains("exact")) pr.exact = parse_separable(params["exact"], "config.params.exact", dims);
  return pr;
}

}  // namespace

FieldSpacePtr space_from_dims(const AppConfig& cfg) {
  if (cfg.dims.empty()) throw ConfigError("config.dims: custom problems declare their dimensions");
  std::vector<DimensionSpec> specs;
  for (std::size_t i = 0; i < cfg.dims.size(); ++i) {
    const auto& d = cfg.dims[i];
    const std::string path = "config.dims[" + std::to_string(i) + "]";
    if (!d.kind) throw ConfigError(path + ".kind: required for custom problems");
    PatchConfig patch = cfg.discretization.patch;
    if (d.s) patch.s = *d.s;
    if (d.a) patch.a = *d.a;
    if (d.p) patch.p = *d.p;
    if (d.kernel) patch.kernel = *d.kernel;
    std::optional<Mesh1D> mesh;
    if (!d.graded.empty()) {
      mesh = make_graded_mesh(d.graded);
    } else {
      if (!d.domain) throw ConfigError(path + ".domain: required without a graded mesh");
      mesh = make_uniform_mesh(d.domain->first, d.domain->second, d.n_elem.value_or(cfg.discretization.n_elem));
    }
    specs.push_back({d.name, *mesh, patch, *d.kind});
  }
  return make_space(std::move(specs));
}

Mesh1D mesh_with_breakpoint(double lo, double hi, std::size_t n_elem, double at) {
  if (!(at > lo && at < hi)) return make_uniform_mesh(lo, hi, n_elem);
  const double frac = (at - lo) / (hi - lo);
  const double left = frac * static_cast<double>(n_elem);
  if (std::abs(left - std::round(left)) < 1e-9) return make_uniform_mesh(lo, hi, n_elem);
  const std::size_t nl = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(left)));
  const std::size_t nr = std::max<std::size_t>(1, n_elem > nl ? n_elem - nl : 1);
  const GradedSegment segs[2] = {{lo, at, nl}, {at, hi, nr}};
  return make_graded_mesh(segs);
}

Problem make_poisson_case1(std::size_t dims, double lo, double hi, const Discretization& disc,
                           const std::vector<DimConfig>& overrides) {
  if (dims == 0) throw ConfigError("dimension count must be positive");
  DimBuilder b(disc, overrides);
  std::vector<DimensionSpec> specs;
  for (std::size_t d = 0; d < dims; ++d)
    specs.push_back(b.make("x" + std::to_string(d + 1), DimKind::Space, lo, hi));
  b.finish();
  Problem pr;
  pr.name = "poisson_case1";
  pr.space = make_space(std::move(specs));
  pr.op = make_poisson_operator(*pr.space);
  SeparableFunction exact;
  for (std::size_t d = 0; d < dims; ++d) {
    RankOneTerm t{1.0, ones(dims)};
    t.factors[d] = [](double x) { return std::sin(0.5 * kPi * x); };
    exact.terms.push_back(t);
    t.coeff = -0.25 * kPi * kPi;
    pr.source.terms.push_back(std::move(t));
  }
  pr.bc = default_dirichlet(*pr.space);
  pr.bc.lift = make_lift_for_separable_boundary(pr.space, exact);
  pr.exact = std::move(exact);
  return pr;
}

Problem make_poisson_case2(std::size_t dims, double lo, double hi, const Discretization& disc,
                           const std::vector<DimConfig>& overrides) {
  if (dims == 0) throw ConfigError("dimension count must be positive");
  DimBuilder b(disc, overrides);
  std::vector<DimensionSpec> specs;
  for (std::size_t d = 0; d < dims; ++d)
    specs.push_back(b.make("x" + std::to_string(d + 1), DimKind::Space, lo, hi));
  b.finish();
  Problem pr;
  pr.name = "poisson_case2";
  pr.space = make_space(std::move(specs));
  pr.op = make_poisson_operator(*pr.space);
  RankOneTerm t{1.0, std::vector<Function1D>(dims, [](double x) { return std::sin(kPi * x); })};
  pr.exact = SeparableFunction{{t}};
  t.coeff = -static_cast<double>(dims) * kPi * kPi;
  pr.source.terms.push_back(std::move(t));
  pr.bc = default_dirichlet(*pr.space);
  // Boundary values vanish only on integer boxes; otherwise carry them in a lift.
  if (std::abs(lo - std::round(lo)) > 1e-12 || std::abs(hi - std::round(hi)) > 1e-12)
    pr.bc.lift = make_lift_for_separable_boundary(pr.space, *pr.exact);
  return pr;
}

Problem make_helmholtz(const HelmholtzParams& hp, const Discretization& disc,
                       const std::vector<DimConfig>& overrides) {
  DimBuilder b(disc, overrides);
  std::vector<DimensionSpec> specs{b.make("x", DimKind::Space, -1.0, 1.0),
                                   b.make("y", DimKind::Space, -1.0, 1.0)};
  b.finish();
  Problem pr;
  pr.name = "helmholtz";
  pr.space = make_space(std::move(specs));
  pr.op = make_helmholtz_operator(*pr.space, hp.wavenumber);
  const double a1 = hp.a1;
  const double a2 = hp.a2;
  RankOneTerm t{1.0,
                {[a1](double x) { return std::sin(a1 * kPi * x); },
                 [a2](double y) { return std::sin(a2 * kPi * y); }}};
  pr.exact = SeparableFunction{{t}};
  t.coeff = -(a1 * kPi) * (a1 * kPi) - (a2 * kPi) * (a2 * kPi) + hp.wavenumber * hp.wavenumber;
  pr.source.terms.push_back(std::move(t));
  pr.bc = default_dirichlet(*pr.space);
  const bool integral = std::abs(a1 - std::round(a1)) < 1e-12 && std::abs(a2 - std::round(a2)) < 1e-12;
  if (!integral) pr.bc.lift = make_lift_for_separable_boundary(pr.space, *pr.exact);
  return pr;
}

Problem make_heat_spacetime(const Discretization& disc, const std::vector<DimConfig>& overrides) {
  DimBuilder b(disc, overrides);
  std::vector<DimensionSpec> specs{b.make("x", DimKind::Space, -10.0, 10.0),
                                   b.make("y", DimKind::Space, -10.0, 10.0),
                                   b.make("z", DimKind::Space, -10.0, 10.0),
                                   b.make("t", DimKind::Time, 0.0, 0.1)};
  b.finish();
  Problem pr;
  pr.name = "heat_spacetime";
  pr.space = make_space(std::move(specs));
  pr.op = make_heat_operator(*pr.space, "", 1.0);

  // Source centre c(t) = 100 t - 5 sweeps x from -5 to 5.
  auto ramp = [](double t) { return 1.0 - std::exp(-15.0 * t); };
  auto a_xt = [ramp](double x, double t) {
    const double s = x - (100.0 * t - 5.0);
    return ramp(t) * std::exp(-s * s);
  };
  auto b_xt = [ramp](double x, double t) {
    const double s = x - (100.0 * t - 5.0);
    const double g = std::exp(-s * s);
    return ramp(t) * (2.0 * (1.0 - 2.0 * s * s) + 200.0 * s) * g + 15.0 * std::exp(-15.0 * t) * g;
  };
  const auto& xs_mesh = pr.space->dim(0).mesh;
  const auto& ts_mesh = pr.space->dim(3).mesh;
  std::vector<double> xs(801);
  std::vector<double> ts(401);
  for (std::size_t i = 0; i < xs.size(); ++i)
    xs[i] = xs_mesh.x_min() + xs_mesh.length() * static_cast<double>(i) / static_cast<double>(xs.size() - 1);
  for (std::size_t i = 0; i < ts.size(); ++i)
    ts[i] = ts_mesh.x_min() + ts_mesh.length() * static_cast<double>(i) / static_cast<double>(ts.size() - 1);

  const Function1D gy = [](double y) { return std::exp(-y * y); };
  const Function1D gy2 = [](double y) { return 2.0 * (1.0 - 2.0 * y * y) * std::exp(-y * y); };
  auto add_terms = [&](SeparableFunction& out, const CrossApproximation& ca, const Function1D& fy) {
    for (std::size_t r = 0; r < ca.first.size(); ++r)
      out.terms.push_back(RankOneTerm{1.0, {ca.first[r], fy, constant(1.0), ca.second[r]}});
  };
  const CrossApproximation ca_a = cross_approximate(a_xt, xs, ts, 1e-10, 80);
  const CrossApproximation ca_b = cross_approximate(b_xt, xs, ts, 1e-10, 80);
  add_terms(pr.source, ca_a, gy2);
  add_terms(pr.source, ca_b, gy);
  SeparableFunction exact;
  add_terms(exact, ca_a, gy);
  pr.exact = std::move(exact);

  pr.bc = default_dirichlet(*pr.space);
  pr.bc.constrained[2].clear();
  return pr;
}

Problem make_heat_spt(const SptParams& sp, const Discretization& disc,
                      const std::vector<DimConfig>& overrides) {
  DimBuilder b(disc, overrides);
  const std::size_t nz = disc.n_elem;
  std::vector<DimensionSpec> specs{
      b.make("x", DimKind::Space, 0.0, 1.0), b.make("y", DimKind::Space, 0.0, 1.0),
      b.make("z", DimKind::Space, 0.0, 1.0, mesh_with_breakpoint(0.0, 1.0, nz, sp.depth)),
      b.make("k", DimKind::Param, sp.k_range.first, sp.k_range.second),
      b.make("P", DimKind::Param, sp.p_range.first, sp.p_range.second),
      b.make("t", DimKind::Time, 0.0, sp.t_end)};
  b.finish();
  Problem pr;
  pr.name = "heat_spt";
  pr.space = make_space(std::move(specs));
  pr.op = make_heat_operator(*pr.space, "k");
  HeatSources src = HeatSources::grid16();
  src.r0 = sp.r0;
  src.depth = sp.depth;
  // The 4 x 4 grid of centres factorizes: sum_i g(x - x_i) g(y - y_i) = G(x) G(y).
  const double r0 = sp.r0;
  const Function1D g = [r0](double x) {
    double s = 0.0;
    for (double c : {0.125, 0.375, 0.625, 0.875}) s += std::exp(-2.0 * (x - c) * (x - c) / (r0 * r0));
    return s;
  };
  const double depth = sp.depth;
  pr.source.terms.push_back(RankOneTerm{1.0,
                                        {g, g, [depth](double z) { return z >= depth ? 1.0 : 0.0; },
                                         constant(1.0), [](double p) { return p; }, constant(1.0)}});
  pr.bc = default_dirichlet(*pr.space);
  return pr;
}

Problem make_poisson_local_source(const Discretization& disc, const std::vector<DimConfig>& overrides) {
  DimBuilder b(disc, overrides);
  const GradedSegment gx[] = {{0, 10, 2}, {10, 30, 20}, {30, 50, 4}, {50, 70, 20}, {70, 100, 6}};
  const GradedSegment gy[] = {{0, 15, 3}, {15, 35, 20}, {35, 65, 6}, {65, 85, 20}, {85, 100, 3}};
  std::vector<DimensionSpec> specs{b.make("x", DimKind::Space, 0.0, 100.0, make_graded_mesh(gx)),
                                   b.make("y", DimKind::Space, 0.0, 100.0, make_graded_mesh(gy))};
  b.finish();
  Problem pr;
  pr.name = "poisson_local_source";
  pr.space = make_space(std::move(specs));
  pr.op = make_poisson_operator(*pr.space);
  auto bump = [](double c) { return Function1D([c](double x) { return std::exp(-(x - c) * (x - c) / 25.0); }); };
  auto bump2 = [](double c) {
    return Function1D([c](double x) {
      const double s = x - c;
      return (4.0 * s * s / 625.0 - 2.0 / 25.0) * std::exp(-s * s / 25.0);
    });
  };
  SeparableFunction exact;
  for (auto [cx, cy] : {std::pair{20.0, 25.0}, std::pair{60.0, 75.0}}) {
    exact.terms.push_back({10.0, {bump(cx), bump(cy)}});
    pr.source.terms.push_back({10.0, {bump2(cx), bump(cy)}});
    pr.source.terms.push_back({10.0, {bump(cx), bump2(cy)}});
  }
  pr.bc = default_dirichlet(*pr.space);
  pr.bc.lift = make_lift_for_separable_boundary(pr.space, exact);
  pr.exact = std::move(exact);
  return pr;
}

Problem make_operator_kl(const KlParams& kp, const Discretization& disc,
                         const std::vector<DimConfig>& overrides) {
  if (kp.n_e == 0) throw ConfigError("n_e must be positive");
  DimBuilder b(disc, overrides);
  std::vector<DimensionSpec> specs{b.make("x", DimKind::Space, 0.0, 1.0)};
  for (std::size_t j = 0; j < kp.n_e; ++j)
    specs.push_back(b.make("zeta" + std::to_string(j + 1), DimKind::Param, kp.zeta_range.first,
                           kp.zeta_range.second));
  specs.push_back(b.make("t", DimKind::Time, 0.0, kp.t_end));
  b.finish();
  Problem pr;
  pr.name = "operator_kl";
  pr.space = make_space(std::move(specs));
  const std::size_t dims = pr.space->num_dims();
  auto kl = std::make_shared<const KLExpansion>(
      kl_build(kp.k_mu, kp.sigma, kp.ell, pr.space->dim(0).mesh, pr.space->dim(0).patch, kp.n_e));
  pr.kl = kl;

  std::vector<Op1D> mass(dims, Op1D::mass());
  OperatorTerm time_term{1.0, mass};
  time_term.factors[dims - 1] = Op1D::convection();
  pr.op.terms.push_back(time_term);
  OperatorTerm mean_term{kp.k_mu, mass};
  mean_term.factors[0] = Op1D::stiffness();
  pr.op.terms.push_back(mean_term);
  for (std::size_t j = 0; j < kp.n_e; ++j) {
    const double amp = std::sqrt(std::max(0.0, kl->eigenvalues[j]));
    OperatorTerm t{amp, mass};
    t.factors[0] = Op1D::weighted_stiffness([kl, j](double x) { return kl->mode_function(j, x); },
                                            "weighted_stiffness(phi" + std::to_string(j + 1) + ")");
    t.factors[1 + j] = Op1D::weighted_mass([](double z) { return z; }, "weighted_mass(zeta)");
    pr.op.terms.push_back(std::move(t));
  }
  pr.source.terms.push_back(RankOneTerm{1.0, ones(dims)});
  pr.bc = default_dirichlet(*pr.space);
  return pr;
}

Problem build_problem(const AppConfig& cfg) {
  const json& p = cfg.params;
  Discretization disc = cfg.discretization;
  const std::string& name = cfg.problem;
  if (name == "poisson_case1" || name == "poisson_case2") {
    check_params(p, {"dimension", "domain"});
    const double d = param_number(p, "dimension", 2.0);
    if (d < 1.0 || d != std::floor(d)) throw ConfigError("config.params.dimension: expected a positive integer");
    const auto dom = param_interval(p, "domain", {0.0, 1.0});
    return name == "poisson_case1"
               ? make_poisson_case1(static_cast<std::size_t>(d), dom.first, dom.second, disc, cfg.dims)
               : make_poisson_case2(static_cast<std::size_t>(d), dom.first, dom.second, disc, cfg.dims);
  }
  if (name == "helmholtz") {
    check_params(p, {"a1", "a2", "wavenumber"});
    if (!cfg.has_discretization) disc = Discretization{250, {}, {}, {1, 20.0, 1, KernelKind::InterpMls}};
    return make_helmholtz({param_number(p, "a1", 1.0), param_number(p, "a2", 4.0),
                           param_number(p, "wavenumber", 1.0)},
                          disc, cfg.dims);
  }
  if (name == "heat_spacetime") {
    check_params(p, {});
    return make_heat_spacetime(disc, cfg.dims);
  }
  if (name == "heat_spt") {
    check_params(p, {"k_range", "p_range", "t_end", "r0", "depth"});
    SptParams sp;
    sp.k_range = param_interval(p, "k_range", sp.k_range);
    sp.p_range = param_interval(p, "p_range", sp.p_range);
    sp.t_end = param_number(p, "t_end", sp.t_end);
    sp.r0 = param_number(p, "r0", sp.r0);
    sp.depth = param_number(p, "depth", sp.depth);
    return make_heat_spt(sp, disc, cfg.dims);
  }
  if (name == "poisson_local_source") {
    check_params(p, {});
    return make_poisson_local_source(disc, cfg.dims);
  }
  if (name == "operator_kl") {
    check_params(p, {"k_mu", "sigma", "ell", "n_e", "zeta_range", "t_end"});
    KlParams kp;
    kp.k_mu = param_number(p, "k_mu", kp.k_mu);
    kp.sigma = param_number(p, "sigma", kp.sigma);
    kp.ell = param_number(p, "ell", kp.ell);
    const double ne = param_number(p, "n_e", static_cast<double>(kp.n_e));
    if (ne < 1.0 || ne != std::floor(ne)) throw ConfigError("config.params.n_e: expected a positive integer");
    kp.n_e = static_cast<std::size_t>(ne);
    kp.zeta_range = param_interval(p, "zeta_range", kp.zeta_range);
    kp.t_end = param_number(p, "t_end", kp.t_end);
    return make_operator_kl(kp, disc, cfg.dims);
  }
  if (name == "custom") return make_custom(cfg);
  throw ConfigError("config.problem: unknown problem '" + name + "'");
}

}  // namespace septensor::app
