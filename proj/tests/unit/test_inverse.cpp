#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "septensor/error.hpp"
#include "septensor/inverse.hpp"

using namespace septensor;

namespace {

constexpr double kPi = std::numbers::pi;

// Dimensions x, t, k, P with smooth nodal modes whose response to k and P differs.
SeparableField heat_like_field() {
  const PatchConfig patch{1, 20.0, 2, KernelKind::InterpMls};
  auto space = make_space({{"x", make_uniform_mesh(0, 1, 12), patch, DimKind::Space},
                           {"t", make_uniform_mesh(0, 1, 10), patch, DimKind::Time},
                           {"k", make_uniform_mesh(1, 4, 8), patch, DimKind::Param},
                           {"P", make_uniform_mesh(100, 200, 8), patch, DimKind::Param}});
  SeparableField f(space);
  auto nodal = [&](std::size_t d, auto g) {
    std::vector<double> v;
    for (double x : space->dim(d).mesh.nodes()) v.push_back(g(x));
    return v;
  };
  f.add_mode(std::vector<std::vector<double>>{
      nodal(0, [](double x) { return std::sin(kPi * x); }), nodal(1, [](double t) { return t; }),
      nodal(2, [](double k) { return 1.0 / k; }), nodal(3, [](double p) { return p / 100; })});
  f.add_mode(std::vector<std::vector<double>>{
      nodal(0, [](double x) { return x * (1 - x); }), nodal(1, [](double t) { return t * t; }),
      nodal(2, [](double k) { return k; }), nodal(3, [](double) { return 1.0; })});
  f.add_mode(std::vector<std::vector<double>>{
      nodal(0, [](double x) { return std::cos(x); }), nodal(1, [](double t) { return std::exp(-t); }),
      nodal(2, [](double k) { return std::sqrt(k); }),
      nodal(3, [](double p) { return std::sin(p / 50); })});
  return f;
}

std::vector<std::vector<double>> grid_xt(std::size_t n) {
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= n; ++j)
      pts.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
  return pts;
}

InverseConfig base_config() {
  InverseConfig cfg;
  cfg.free_dims = {"k", "P"};
  cfg.box = {{1, 4}, {100, 200}};
  cfg.max_steps = 2000;
  cfg.restarts = 4;
  cfg.seed = 3;
  return cfg;
}

double prediction_error(const SeparableField& f, const TargetField& target,
                        std::span<const double> params) {
  const TargetField s = sample_target(f, {"k", "P"}, params, target.points);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    num += (s.values[i] - target.values[i]) * (s.values[i] - target.values[i]);
    den += target.values[i] * target.values[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("parameter derivative") {
  const SeparableField f = heat_like_field();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> p{u(rng), u(rng), 1 + 3 * u(rng), 100 + 100 * u(rng)};
    for (std::size_t d = 0; d < 4; ++d) {
      const double h = 1e-6 * (d == 3 ? 100 : 1);
      auto up = p, down = p;
      up[d] += h;
      down[d] -= h;
      const double fd = (f.evaluate(up) - f.evaluate(down)) / (2 * h);
      const double an = eval_param_grad(f, p, d);
      CHECK(std::abs(fd - an) <= 1e-6 * std::max(std::abs(an), 1e-3));
    }
  }

  auto space = make_space({{"x", make_uniform_mesh(0, 1, 4), {}, DimKind::Space},
                           {"k", make_uniform_mesh(0, 2, 4), {}, DimKind::Param}});
  SeparableField c(space);
  c.add_mode(std::vector<std::vector<double>>{{1, 2, 3, 4, 5}, {7, 7, 7, 7, 7}});
  const double pt[] = {0.3, 1.1};
  CHECK(std::abs(eval_param_grad(c, pt, 1)) < 1e-13);
  SeparableField ramp(space);
  ramp.add_mode(std::vector<std::vector<double>>{{1, 1, 1, 1, 1}, {0, 1, 2, 3, 4}});
  for (double k : {0.0, 0.2, 0.77, 1.5, 2.0}) {
    const double q[] = {0.4, k};
    CHECK(eval_param_grad(ramp, q, 1) == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("self-consistent recovery") {
  const SeparableField f = heat_like_field();
  const double truth[] = {2.5, 150};
  const TargetField target = sample_target(f, {"k", "P"}, truth, grid_xt(10));
  const InverseResult r = invert(f, target, base_config());
  REQUIRE(r.estimate.size() == 2);
  CHECK(std::abs(r.estimate[0] - 2.5) / 2.5 <= 1e-3);
  CHECK(std::abs(r.estimate[1] - 150) / 150 <= 1e-3);
  CHECK(r.restarts.size() == 4);
  for (const auto& tr : r.restarts) {
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(tr.initial[j] >= base_config().box[j].first);
      CHECK(tr.initial[j] <= base_config().box[j].second);
      CHECK(tr.estimate[j] >= base_config().box[j].first);
      CHECK(tr.estimate[j] <= base_config().box[j].second);
    }
    CHECK(tr.loss.size() == tr.steps + 1);
    CHECK(tr.best_loss.size() == tr.loss.size());
    CHECK(tr.iterates.size() == tr.loss.size());
    for (const auto& it : tr.iterates)
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(it[j] >= base_config().box[j].first);
        CHECK(it[j] <= base_config().box[j].second);
      }
    for (std::size_t s = 1; s < tr.best_loss.size(); ++s) CHECK(tr.best_loss[s] <= tr.best_loss[s - 1]);
  }
}

TEST_CASE("recovery from a perturbed target stays near the true error") {
  const SeparableField f = heat_like_field();
  SeparableField other = f;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0, 1);
  for (std::size_t m = 0; m < other.num_modes(); ++m) {
    auto c = other.coeffs(m, 0);
    for (double& v : c) v *= 1 + 0.01 * noise(rng);
  }
  for (const auto& truth : {std::vector<double>{1.6, 120}, std::vector<double>{3.2, 185}}) {
    const TargetField target = sample_target(other, {"k", "P"}, truth, grid_xt(8));
    const InverseResult r = invert(f, target, base_config());
    CHECK(prediction_error(f, target, r.estimate) <= 3 * prediction_error(f, target, truth));
  }
}

TEST_CASE("collapsed box and a single free dimension") {
  const SeparableField f = heat_like_field();
  const double truth[] = {2.0, 160};
  const TargetField target = sample_target(f, {"k", "P"}, truth, grid_xt(5));
  InverseConfig cfg = base_config();
  cfg.box = {{2.0, 2.0}, {170, 170}};
  const InverseResult r = invert(f, target, cfg);
  CHECK(r.estimate == std::vector<double>{2.0, 170});
  for (const auto& tr : r.restarts) CHECK(tr.steps == 0);

  // Fix P at its true value by collapsing its box and recover k alone.
  cfg.box = {{1, 4}, {160, 160}};
  const InverseResult k = invert(f, target, cfg);
  CHECK(std::abs(k.estimate[0] - 2.0) < 2e-3);
  CHECK(k.estimate[1] == 160);
}

TEST_CASE("inverse errors") {
  const SeparableField f = heat_like_field();
  InverseConfig cfg = base_config();
  CHECK_THROWS_AS(invert(f, TargetField{}, cfg), InvalidArgument);
  const double truth[] = {2.0, 160};
  const TargetField target = sample_target(f, {"k", "P"}, truth, grid_xt(3));

  InverseConfig bad = cfg;
  bad.free_dims = {"x", "P"};
  CHECK_THROWS_AS(invert(f, target, bad), ConfigError);
  bad = cfg;
  bad.free_dims = {"kk", "P"};
  CHECK_THROWS_AS(invert(f, target, bad), ConfigError);
  bad = cfg;
  bad.box = {{0.5, 4}, {100, 200}};
  CHECK_THROWS_AS(invert(f, target, bad), ConfigError);
  bad = cfg;
  bad.box.pop_back();
  CHECK_THROWS_AS(invert(f, target, bad), ConfigError);

  TargetField outside = target;
  outside.points[2][1] = 1.3;
  CHECK_THROWS_AS(invert(f, outside, cfg), OutOfDomain);

  InverseConfig few = cfg;
  few.max_steps = 2;
  few.restarts = 2;
  const InverseResult r = invert(f, target, few);
  CHECK_FALSE(r.converged);
  CHECK(r.estimate.size() == 2);
}

TEST_CASE("inversion is reproducible") {
  const SeparableField f = heat_like_field();
  const double truth[] = {3.0, 110};
  const TargetField target = sample_target(f, {"k", "P"}, truth, grid_xt(6));
  const InverseResult a = invert(f, target, base_config());
  const InverseResult b = invert(f, target, base_config());
  CHECK(a.estimate == b.estimate);
  CHECK(a.restarts.back().loss == b.restarts.back().loss);
}
