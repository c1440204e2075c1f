#include <doctest.h>

#include <cmath>
#include <random>

#include "septensor/basis.hpp"
#include "septensor/error.hpp"

using namespace septensor;

namespace {

std::vector<Mesh1D> test_meshes() {
  const GradedSegment segs[] = {{0.0, 0.3, 3}, {0.3, 0.5, 8}, {0.5, 1.0, 4}};
  return {make_uniform_mesh(0.0, 1.0, 12), make_graded_mesh(segs)};
}

std::vector<PatchConfig> test_configs() {
  std::vector<PatchConfig> out;
  for (int s = 0; s <= 3; ++s)
    for (int p = 1; p <= 3; ++p) {
      if (s > 0 && p > 2 * s) continue;
      out.push_back({s, 20.0, p, KernelKind::InterpMls});
      out.push_back({s, 20.0, p, KernelKind::Lagrange});
    }
  return out;
}

}  // namespace

TEST_CASE("uniform mesh nodes") {
  const Mesh1D m = make_uniform_mesh(0.0, 1.0, 4);
  REQUIRE(m.num_nodes() == 5);
  const double want[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int i = 0; i < 5; ++i) CHECK(m.node(i) == doctest::Approx(want[i]).epsilon(1e-15));

  const Mesh1D m12 = make_uniform_mesh(0.0, 12.0, 32);
  CHECK(m12.num_nodes() == 33);
  CHECK(m12.element_length(7) == doctest::Approx(0.375));
  CHECK(make_uniform_mesh(-1.0, 1.0, 250).num_nodes() == 251);

  CHECK_THROWS_AS(make_uniform_mesh(0.0, 1.0, 0), InvalidArgument);
  CHECK_THROWS_AS(make_uniform_mesh(0.0, NAN, 3), InvalidArgument);
  CHECK_THROWS_AS(make_uniform_mesh(1.0, 0.0, 3), InvalidArgument);
}

TEST_CASE("graded mesh") {
  const GradedSegment a[] = {{0, 10, 2}, {10, 30, 20}, {30, 100, 7}};
  const Mesh1D m = make_graded_mesh(a);
  CHECK(m.num_elements() == 29);
  std::size_t fine = 0;
  for (std::size_t e = 0; e < m.num_elements(); ++e)
    if (m.node(e) >= 10.0 - 1e-12 && m.node(e + 1) <= 30.0 + 1e-12) ++fine;
  CHECK(fine == 20);

  const GradedSegment one[] = {{0, 1, 1}};
  CHECK(make_graded_mesh(one).num_nodes() == 2);

  const GradedSegment b[] = {{0, 1, 2}, {1, 3, 4}};
  const Mesh1D mb = make_graded_mesh(b);
  const double want[] = {0, .5, 1, 1.5, 2, 2.5, 3};
  REQUIRE(mb.num_nodes() == 7);
  for (int i = 0; i < 7; ++i) CHECK(mb.node(i) == doctest::Approx(want[i]));

  const GradedSegment gap[] = {{0, 1, 2}, {1.5, 3, 4}};
  CHECK_THROWS_AS(make_graded_mesh(gap), InvalidArgument);
  const GradedSegment overlap[] = {{0, 1, 2}, {0.5, 3, 4}};
  CHECK_THROWS_AS(make_graded_mesh(overlap), InvalidArgument);
}

TEST_CASE("locate element") {
  const Mesh1D m = make_uniform_mesh(0.0, 1.0, 4);
  CHECK(locate_element(m, 0.3) == 1);
  CHECK(locate_element(m, 1.0) == 3);
  CHECK(locate_element(m, 0.0) == 0);
  CHECK_THROWS_AS(locate_element(m, 1.0 + 1e-6), OutOfDomain);
  CHECK_THROWS_AS(locate_element(m, -1e-6), OutOfDomain);
}

TEST_CASE("s = 0 reduces to linear hats") {
  const Mesh1D m = make_uniform_mesh(0.0, 1.0, 4);
  for (KernelKind k : {KernelKind::InterpMls, KernelKind::Lagrange}) {
    const BasisEval b = eval_basis(m, {0, 5.0, 1, k}, 0.3);
    REQUIRE(b.size() == 2);
    CHECK(b.first_node == 1);
    CHECK(std::abs(b.values[0] - 0.8) < 1e-14);
    CHECK(std::abs(b.values[1] - 0.2) < 1e-14);
    CHECK(std::abs(b.derivs[0] + 4.0) < 1e-14);
    CHECK(std::abs(b.derivs[1] - 4.0) < 1e-14);
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ShapeFunctions sf(m, {0, 20.0, 1, KernelKind::InterpMls});
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng);
    const std::size_t e = locate_element(m, x);
    const double h = m.element_length(e);
    const BasisEval b = sf.eval(x);
    CHECK(std::abs(b.values[b.size() == 2 ? 0 : 0] - (m.node(e + 1) - x) / h) < 1e-14);
  }
}

TEST_CASE("quadrature rules") {
  const QuadratureRule& g1 = gauss_rule(1);
  CHECK(g1.points[0] == 0.0);
  CHECK(g1.weights[0] == doctest::Approx(2.0));
  const QuadratureRule& g2 = gauss_rule(2);
  CHECK(std::abs(std::abs(g2.points[0]) - 1.0 / std::sqrt(3.0)) < 1e-15);
  CHECK(g2.weights[0] == doctest::Approx(1.0));
  double x4 = 0.0;
  for (std::size_t i = 0; i < 3; ++i) x4 += gauss_rule(3).weights[i] * std::pow(gauss_rule(3).points[i], 4);
  CHECK(std::abs(x4 - 0.4) < 1e-15);
  for (int g = 1; g <= 10; ++g) {
    const QuadratureRule& r = gauss_rule(g);
    double sum = 0.0;
    for (double w : r.weights) sum += w;
    CHECK(std::abs(sum - 2.0) < 1e-14);
    for (int deg = 0; deg <= 2 * g - 1; ++deg) {
      double q = 0.0;
      for (std::size_t i = 0; i < r.points.size(); ++i) q += r.weights[i] * std::pow(r.points[i], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      CHECK(std::abs(q - exact) < 1e-13);
    }
  }
  CHECK_THROWS_AS(gauss_rule(0), InvalidArgument);
  CHECK_THROWS_AS(gauss_rule(11), InvalidArgument);
}

TEST_CASE("invalid patch configs") {
  CHECK_THROWS_AS(validate(PatchConfig{1, 20.0, 3, KernelKind::InterpMls}), ConfigError);
  CHECK_THROWS_AS(validate(PatchConfig{-1, 20.0, 1, KernelKind::InterpMls}), ConfigError);
  CHECK_THROWS_AS(validate(PatchConfig{1, 0.0, 1, KernelKind::InterpMls}), ConfigError);
  CHECK_THROWS_AS(eval_basis(make_uniform_mesh(0, 1, 4), {1, 20.0, 5, KernelKind::InterpMls}, 0.5),
                  ConfigError);
}

TEST_CASE("quadratic reproduction with Lagrange s=1 p=2") {
  const Mesh1D m = make_uniform_mesh(0.0, 1.0, 10);
  const ShapeFunctions sf(m, {1, 20.0, 2, KernelKind::Lagrange});
  auto q = [](double x) { return 3.0 * x * x - x + 0.5; };
  // Boundary elements use truncated, linear patches; check the interior ones.
  for (double x = 0.1; x <= 0.9; x += 0.01) {
    const BasisEval b = sf.eval(x);
    double v = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) v += b.values[k] * q(m.node(b.node_index(k)));
    CHECK(std::abs(v - q(x)) < 1e-12);
  }
}

TEST_CASE("basis invariants over kernels, patches and meshes") {
  std::mt19937_64 rng(42);
  for (const Mesh1D& m : test_meshes())
    for (const PatchConfig& cfg : test_configs()) {
      CAPTURE(cfg.s);
      CAPTURE(cfg.p);
      CAPTURE(to_string(cfg.kernel));
      const ShapeFunctions sf(m, cfg);
      std::uniform_real_distribution<double> u(m.x_min(), m.x_max());
      double pu = 0.0, du = 0.0, delta = 0.0, repro = 0.0, fd = 0.0;
      std::size_t widest = 0;
      for (int i = 0; i < 1000; ++i) {
        const double x = u(rng);
        const BasisEval b = sf.eval(x);
        widest = std::max(widest, b.size());
        double s = 0.0, sd = 0.0;
        for (std::size_t k = 0; k < b.size(); ++k) {
          s += b.values[k];
          sd += b.derivs[k];
        }
        pu = std::max(pu, std::abs(s - 1.0));
        du = std::max(du, std::abs(sd));
      }
      for (std::size_t l = 0; l < m.num_nodes(); ++l) {
        const BasisEval b = sf.eval(m.node(l));
        for (std::size_t k = 0; k < b.size(); ++k)
          delta = std::max(delta, std::abs(b.values[k] - (b.node_index(k) == l ? 1.0 : 0.0)));
      }
      // Monomial reproduction on elements whose patches are all interior.
      const std::size_t s = static_cast<std::size_t>(cfg.s);
      for (std::size_t e = 2 * s; e + 2 * s + 1 < m.num_elements() + 1 && e < m.num_elements(); ++e) {
        for (double t : {0.13, 0.5, 0.91}) {
          const double x = m.node(e) + t * m.element_length(e);
          const BasisEval b = sf.eval_in_element(e, x);
          const int order = cfg.s == 0 ? std::min(cfg.p, 1) : cfg.p;
          for (int q = 0; q <= order; ++q) {
            double v = 0.0;
            for (std::size_t k = 0; k < b.size(); ++k) v += b.values[k] * std::pow(m.node(b.node_index(k)), q);
            repro = std::max(repro, std::abs(v - std::pow(x, q)));
          }
        }
      }
      // Analytic derivatives against central differences inside elements.
      for (std::size_t e = 0; e < m.num_elements(); ++e) {
        const double h = m.element_length(e);
        const double x = m.node(e) + 0.37 * h;
        const double step = 1e-6 * h;
        const BasisEval b = sf.eval_in_element(e, x);
        const BasisEval bp = sf.eval_in_element(e, x + step);
        const BasisEval bm = sf.eval_in_element(e, x - step);
        double scale = 0.0;
        for (double d : b.derivs) scale = std::max(scale, std::abs(d));
        for (std::size_t k = 0; k < b.size(); ++k) {
          const double num = (bp.values[k] - bm.values[k]) / (2.0 * step);
          fd = std::max(fd, std::abs(num - b.derivs[k]) / scale);
        }
      }
      CHECK(pu < 1e-10);
      CHECK(du < 1e-8);
      CHECK(delta < 1e-10);
      CHECK(repro < 1e-9);
      CHECK(fd < 1e-6);
      CHECK(widest <= 2 * (s + 1));
    }
}

TEST_CASE("effective order is capped at boundary patches") {
  const ShapeFunctions sf(make_uniform_mesh(0, 1, 8), {2, 20.0, 4, KernelKind::InterpMls});
  CHECK(sf.effective_order(0) == 2);
  CHECK(sf.effective_order(4) == 4);
  CHECK(sf.half_bandwidth() >= 2);
}
