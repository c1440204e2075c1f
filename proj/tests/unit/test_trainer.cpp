#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>

#include "septensor/error.hpp"
#include "septensor/trainer.hpp"

using namespace septensor;

namespace {

FieldSpacePtr unit_box(std::size_t dims, std::size_t n, PatchConfig patch = {}) {
  std::vector<DimensionSpec> specs;
  for (std::size_t d = 0; d < dims; ++d)
    specs.push_back({"x" + std::to_string(d), make_uniform_mesh(0, 1, n), patch, DimKind::Space});
  return make_space(std::move(specs));
}

Dataset sample(std::size_t dims, std::size_t k, std::uint64_t seed,
               const std::function<double(const std::vector<double>&)>& f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  Dataset data;
  for (std::size_t d = 0; d < dims; ++d) data.columns.push_back("x" + std::to_string(d));
  data.columns.push_back("y");
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> x(dims);
    for (double& v : x) v = u(rng);
    data.targets.push_back(f(x));
    data.inputs.push_back(std::move(x));
  }
  return data;
}

SeparableField random_field(const FieldSpacePtr& space, std::size_t modes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  SeparableField f(space);
  for (std::size_t m = 0; m < modes; ++m) {
    std::vector<double> flat(space->mode_size());
    for (double& v : flat) v = u(rng);
    f.add_mode_flat(flat);
  }
  return f;
}

double rmse(const SeparableField& f, const Dataset& d) { return std::sqrt(loss_mse(f, d)); }

double r_train_mse(const TrainResult& r) { return r.report.stages.empty() ? 0.0 : r.report.stages.back().train_mse; }

}  // namespace

TEST_CASE("loss_mse trivial cases") {
  const auto space = unit_box(2, 4);
  SeparableField zero(space);
  Dataset d = sample(2, 20, 1, [](const auto&) { return 3.0; });
  CHECK(loss_mse(zero, d) == doctest::Approx(9.0).epsilon(1e-15));

  std::mt19937_64 rng(2);
  const SeparableField f = random_field(space, 2, rng);
  Dataset exact = sample(2, 30, 3, [&](const auto& x) { return f.evaluate(x); });
  CHECK(loss_mse(f, exact) == 0.0);

  Dataset one = sample(2, 1, 4, [](const auto&) { return 0.5; });
  const double r = f.evaluate(one.inputs[0]) - 0.5;
  CHECK(loss_mse(f, one) == doctest::Approx(r * r));
}

TEST_CASE("dataset validation") {
  const auto space = unit_box(2, 4);
  Dataset d = sample(2, 5, 1, [](const auto&) { return 0.0; });
  d.validate(*space);
  d.inputs[3][1] = 1.5;
  try {
    d.validate(*space);
    FAIL("expected OutOfDomain");
  } catch (const OutOfDomain& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
  d.inputs[3] = {0.5};
  CHECK_THROWS_AS(d.validate(*space), InvalidArgument);

  SeparableField f(space);
  Dataset bad = sample(2, 3, 2, [](const auto&) { return 0.0; });
  bad.inputs[1][0] = -0.2;
  CHECK_THROWS_AS(loss_mse(f, bad), OutOfDomain);
}

TEST_CASE("dataset csv round trip") {
  const Dataset d = sample(3, 17, 5, [](const auto& x) { return x[0] - x[2]; });
  const auto path = std::filesystem::temp_directory_path() / "septensor_dataset.csv";
  write_dataset_csv(d, path.string());
  const Dataset r = read_dataset_csv(path.string());
  CHECK(r.columns == d.columns);
  CHECK(r.inputs == d.inputs);
  CHECK(r.targets == d.targets);
  std::filesystem::remove(path);
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(11);
  const PatchConfig patches[] = {{0, 20.0, 1, KernelKind::InterpMls},
                                 {1, 20.0, 2, KernelKind::InterpMls},
                                 {2, 3.0, 3, KernelKind::Lagrange}};
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dims = 1 + trial % 3;
    const auto space = unit_box(dims, 3 + trial % 4, patches[trial % 3]);
    SeparableField f = random_field(space, 1 + trial % 3, rng);
    const Dataset batch = sample(dims, 8, 100 + trial, [](const auto& x) { return std::sin(x[0]); });
    const auto g = grad_mse(f, batch);
    REQUIRE(g.size() == f.num_parameters());
    const double h = 1e-6;
    double err = 0.0, scale = 0.0;
    for (std::size_t m = 0; m < f.num_modes(); ++m) {
      auto c = f.mode(m);
      for (std::size_t i = 0; i < c.size(); ++i) {
        const double keep = c[i];
        c[i] = keep + h;
        const double up = loss_mse(f, batch);
        c[i] = keep - h;
        const double down = loss_mse(f, batch);
        c[i] = keep;
        const double fd = (up - down) / (2 * h);
        err = std::max(err, std::abs(fd - g[m * space->mode_size() + i]));
        scale = std::max(scale, std::abs(fd));
      }
    }
    CHECK(err <= 1e-5 * scale);
  }
}

TEST_CASE("gradient locality and zero residuals") {
  const auto space = unit_box(1, 10, {1, 20.0, 2, KernelKind::InterpMls});
  std::mt19937_64 rng(7);
  const SeparableField f = random_field(space, 1, rng);
  Dataset one = sample(1, 1, 9, [](const auto&) { return 10.0; });
  one.inputs[0] = {0.43};
  const auto g = grad_mse(f, one);
  // Element 4 spans [0.4, 0.5]; with s=1 its patch is nodes 3..6.
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i >= 3 && i <= 6) continue;
    CHECK(g[i] == 0.0);
  }
  std::size_t nonzero = 0;
  for (double v : g) nonzero += v != 0.0;
  CHECK(nonzero <= 2 * (1 + 1));

  Dataset exact = sample(1, 10, 3, [&](const auto& x) { return f.evaluate(x); });
  for (double v : grad_mse(f, exact)) CHECK(v == 0.0);
}

TEST_CASE("config validation") {
  TrainConfig c;
  c.validate();
  c.patience = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(train_scheme_from_string("boosting") == TrainScheme::Boosting);
  CHECK_THROWS_AS(train_scheme_from_string("greedy"), ConfigError);
}

TEST_CASE("all-at-once fits a bilinear target") {
  const auto space = unit_box(2, 10);
  const Dataset d = sample(2, 2000, 21, [](const auto& x) { return x[0] * x[1]; });
  TrainConfig cfg;
  cfg.modes = 1;
  cfg.epochs_max = 300;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 64;
  cfg.patience = 50;
  const TrainResult r = train_all_at_once(space, d, cfg);
  CHECK(rmse(r.field, d) <= 1e-3);
  CHECK(r.report.train_mse.size() == r.report.validation_mse.size());
  CHECK(r.report.stages.size() == 1);
  CHECK(r.report.parameters == 22);
  CHECK(r.report.validation_rows == 200);
}

TEST_CASE("all-at-once on a zero target") {
  const auto space = unit_box(2, 6);
  const Dataset d = sample(2, 400, 22, [](const auto&) { return 0.0; });
  TrainConfig cfg;
  cfg.modes = 2;
  cfg.epochs_max = 3000;
  cfg.learning_rate = 1e-3;
  cfg.patience = 3000;
  const TrainResult r = train_all_at_once(space, d, cfg);
  CHECK(rmse(r.field, d) <= 1e-8);
}

TEST_CASE("boosting") {
  const auto space = unit_box(2, 10);
  const Dataset d = sample(2, 2000, 23, [](const auto& x) { return x[0] * x[1]; });
  TrainConfig cfg;
  cfg.scheme = TrainScheme::Boosting;
  cfg.modes = 3;
  cfg.epochs_max = 300;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 64;
  cfg.patience = 50;
  const TrainResult r = train_boosting(space, d, cfg);
  REQUIRE(r.field.num_modes() >= 1);
  CHECK(rmse(r.field.single_mode(0), d) <= 1e-3);
  const double total = norm_l2(r.field);
  for (std::size_t m = 1; m < r.field.num_modes(); ++m)
    CHECK(norm_l2(r.field.single_mode(m)) < 1e-4 * total);
  for (std::size_t s = 1; s < r.report.stages.size(); ++s)
    CHECK(r.report.stages[s].train_mse <= r.report.stages[s - 1].train_mse);

  cfg.modes = 0;
  const TrainResult none = train_boosting(space, d, cfg);
  CHECK(none.field.num_modes() == 0);
  CHECK(train(space, d, cfg).field.num_modes() == 0);
}

TEST_CASE("training is reproducible") {
  const auto space = unit_box(3, 5);
  const Dataset d = sample(3, 300, 24, [](const auto& x) { return std::sin(3 * x[0]) * x[1] + x[2]; });
  for (TrainScheme s : {TrainScheme::AllAtOnce, TrainScheme::Boosting}) {
    TrainConfig cfg;
    cfg.scheme = s;
    cfg.modes = 3;
    cfg.epochs_max = 20;
    cfg.learning_rate = 1e-2;
    cfg.seed = 5;
    const TrainResult a = train(space, d, cfg);
    const TrainResult b = train(space, d, cfg);
    CHECK(a.report.train_mse == b.report.train_mse);
    REQUIRE(a.field.num_modes() == b.field.num_modes());
    for (std::size_t m = 0; m < a.field.num_modes(); ++m) {
      const auto x = a.field.mode(m);
      const auto y = b.field.mode(m);
      CHECK(std::equal(x.begin(), x.end(), y.begin(), y.end()));
    }
  }
}

TEST_CASE("all-at-once is no worse than boosting on average") {
  const auto space = unit_box(2, 8);
  const Dataset d = sample(2, 1000, 25, [](const auto& x) {
    return std::sin(4 * x[0] + 3 * x[1]) + std::exp(-5 * (x[0] - x[1]) * (x[0] - x[1]));
  });
  double all = 0.0, boost = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig cfg;
    cfg.modes = 4;
    cfg.epochs_max = 150;
    cfg.learning_rate = 1e-2;
    cfg.batch_size = 64;
    cfg.patience = 20;
    cfg.seed = seed;
    all += r_train_mse(train_all_at_once(space, d, cfg));
    boost += r_train_mse(train_boosting(space, d, cfg));
  }
  CHECK(all <= boost);
}
