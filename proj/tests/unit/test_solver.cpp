#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "septensor/app/problems.hpp"
#include "septensor/error.hpp"
#include "septensor/oracle.hpp"
#include "septensor/solver.hpp"

using namespace septensor;

namespace {

constexpr double kPi = std::numbers::pi;

FieldSpacePtr square(std::size_t n, PatchConfig patch = {1, 20.0, 2, KernelKind::InterpMls}) {
  return make_space({{"x", make_uniform_mesh(0, 1, n), patch, DimKind::Space},
                     {"y", make_uniform_mesh(0, 1, n), patch, DimKind::Space}});
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Dense 2D Galerkin operator: sum_t c_t K_t,x (x) K_t,y, row index i*ny + j.
std::vector<double> dense_operator(const GalerkinSystem& sys, const SeparableOperator& op) {
  const std::size_t nx = sys.space().num_nodes(0), ny = sys.space().num_nodes(1);
  std::vector<double> a(nx * ny * nx * ny, 0.0);
  for (std::size_t t = 0; t < op.terms.size(); ++t) {
    const auto kx = sys.matrix(t, 0).to_dense();
    const auto ky = sys.matrix(t, 1).to_dense();
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t k = 0; k < nx; ++k)
          for (std::size_t l = 0; l < ny; ++l)
            a[(i * ny + j) * nx * ny + k * ny + l] += op.terms[t].coeff * kx[i * nx + k] * ky[j * ny + l];
  }
  return a;
}

}  // namespace

TEST_CASE("per-dimension system matches the dense operator") {
  const auto space = square(6);
  const SeparableOperator op = make_poisson_operator(*space);
  SeparableFunction src;
  src.terms.push_back({1.0, {[](double x) { return x; }, [](double y) { return 1 - y; }}});
  const GalerkinSystem sys(space, op, src);
  std::mt19937_64 rng(3);
  const std::vector<std::vector<double>> cur{random_vec(7, rng), random_vec(7, rng)};
  const DimSystem ds = build_dim_system(sys, cur, 0);

  // Hand form: A_x = -(K_x uy'M uy + M_x uy'K uy).
  const BandedMatrix& kx = sys.matrix(0, 0);
  const BandedMatrix& my = sys.matrix(0, 1);
  const BandedMatrix& mx = sys.matrix(1, 0);
  const BandedMatrix& ky = sys.matrix(1, 1);
  const double a1 = my.bilinear(cur[1], cur[1]);
  const double a2 = ky.bilinear(cur[1], cur[1]);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j)
      CHECK(std::abs(ds.a(i, j) + kx(i, j) * a1 + mx(i, j) * a2) < 1e-10);

  // Dense action: (v (x) uy)^T A (w (x) uy) equals v^T A_x w.
  const auto dense = dense_operator(sys, op);
  for (int trial = 0; trial < 5; ++trial) {
    const auto v = random_vec(7, rng);
    const auto w = random_vec(7, rng);
    std::vector<double> vv(49), ww(49);
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 7; ++j) {
        vv[i * 7 + j] = v[i] * cur[1][j];
        ww[i * 7 + j] = w[i] * cur[1][j];
      }
    double full = 0.0;
    for (std::size_t r = 0; r < 49; ++r)
      for (std::size_t c = 0; c < 49; ++c) full += vv[r] * dense[r * 49 + c] * ww[c];
    CHECK(std::abs(full - ds.a.bilinear(v, w)) < 1e-10 * std::max(1.0, std::abs(full)));
  }
}

TEST_CASE("first mode has no history term and a converged field zeroes the load") {
  const auto space = square(8, {1, 20.0, 2, KernelKind::Lagrange});
  const SeparableOperator op = make_poisson_operator(*space);
  SeparableFunction src;
  src.terms.push_back({-2 * kPi * kPi, {[](double x) { return std::sin(kPi * x); }, [](double y) { return std::sin(kPi * y); }}});
  GalerkinSystem sys(space, op, src);
  std::mt19937_64 rng(4);
  std::vector<std::vector<double>> cur{random_vec(9, rng), random_vec(9, rng)};
  cur[1].front() = cur[1].back() = 0.0;
  const DimSystem first = build_dim_system(sys, cur, 0);
  double expect = 0.0;
  const auto lx = sys.load(0, 0);
  const auto ly = sys.load(0, 1);
  for (std::size_t j = 0; j < 9; ++j) expect += ly[j] * cur[1][j];
  for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(first.q[i] - src.terms[0].coeff * lx[i] * expect) < 1e-10);

  // Push the dense Galerkin solution; the remaining residual load vanishes.
  const DirichletSpec bc = default_dirichlet(*space);
  const SeparableField exact = dense_galerkin_solve(space, op, src, bc);
  for (std::size_t m = 0; m < exact.num_modes(); ++m) sys.push_mode(exact.mode(m));
  DimSystem after = build_dim_system(sys, cur, 0);
  std::vector<double> q = after.q;
  apply_dirichlet(after.a, q, bc.constrained[0]);
  double qn = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    qn = std::max(qn, std::abs(q[i]));
    scale = std::max(scale, std::abs(first.q[i]));
  }
  CHECK(qn < 1e-8 * scale);
}

TEST_CASE("apply_dirichlet") {
  BandedMatrix a(5, 1);
  for (std::size_t i = 0; i < 5; ++i) {
    a.at(i, i) = 2.0;
    if (i) a.at(i, i - 1) = -1.0;
    if (i + 1 < 5) a.at(i, i + 1) = -1.0;
  }
  std::vector<double> q{1, 1, 1, 1, 1};
  BandedMatrix b = a;
  std::vector<double> qb = q;
  apply_dirichlet(b, qb, std::vector<std::size_t>{});
  CHECK(b.to_dense() == a.to_dense());
  CHECK(qb == q);

  BandedMatrix c = a;
  std::vector<double> qc = q;
  const std::size_t first[] = {0};
  apply_dirichlet(c, qc, first);
  CHECK(c(0, 0) == 2.0);
  CHECK(c(0, 1) == 0.0);
  CHECK(c(1, 0) == 0.0);
  CHECK(qc[0] == 0.0);

  const std::size_t ends[] = {0, 4};
  apply_dirichlet(a, q, ends);
  const auto x = banded_lu_solve(a, q);
  CHECK(x[0] == 0.0);
  CHECK(x[4] == 0.0);
  // Interior block {2,-1;-1,2,-1;-1,2} x = 1 gives 1.5, 2, 1.5.
  CHECK(std::abs(x[1] - 1.5) < 1e-14);
  CHECK(std::abs(x[2] - 2.0) < 1e-14);
  CHECK(std::abs(x[3] - 1.5) < 1e-14);
}

TEST_CASE("lift construction") {
  const auto space = make_space({{"a", make_uniform_mesh(0, 1, 4), {}, DimKind::Space},
                                 {"b", make_uniform_mesh(0, 1, 4), {}, DimKind::Space},
                                 {"c", make_uniform_mesh(0, 1, 4), {}, DimKind::Space}});
  SeparableFunction sum;
  for (std::size_t d = 0; d < 3; ++d) {
    RankOneTerm t{1.0, std::vector<Function1D>(3, [](double) { return 1.0; })};
    t.factors[d] = [](double x) { return std::sin(kPi * x / 2); };
    sum.terms.push_back(t);
  }
  const SeparableField lift = make_lift_for_separable_boundary(space, sum);
  CHECK(lift.num_modes() == 3);
  CHECK(std::abs(lift.coeffs(1, 1)[4] - 1.0) < 1e-15);
  CHECK(lift.coeffs(1, 0)[2] == 1.0);

  const SeparableField zero = make_lift_for_separable_boundary(space, SeparableFunction{});
  CHECK(zero.num_modes() == 0);

  SeparableFunction c;
  c.terms.push_back({2.5, std::vector<Function1D>(3, [](double) { return 1.0; })});
  const SeparableField cl = make_lift_for_separable_boundary(space, c);
  REQUIRE(cl.num_modes() == 1);
  const double pt[] = {0.3, 0.6, 0.9};
  CHECK(std::abs(cl.evaluate(pt) - 2.5) < 1e-12);
}

TEST_CASE("Poisson case 2, one mode") {
  app::Discretization disc;
  const app::Problem pr = app::make_poisson_case2(2, 0, 1, disc);
  SolverConfig cfg;
  cfg.max_modes = 1;
  const SolveResult r = solve(pr.space, pr.op, pr.source, pr.bc, cfg);
  CHECK(r.report.modes_used == 1);
  CHECK(rel_l2_integral(r.field, *pr.exact) <= 1e-4);
}

TEST_CASE("Poisson case 1, four modes") {
  app::Discretization disc;
  const app::Problem pr = app::make_poisson_case1(2, 0, 1, disc);
  SolverConfig cfg;
  cfg.max_modes = 4;
  const SolveResult r = solve(pr.space, pr.op, pr.source, pr.bc, cfg);
  CHECK(r.report.lift_modes == 2);
  CHECK(rel_l2_integral(r.field, *pr.exact) <= 1e-5);
}

TEST_CASE("zero source gives the zero field") {
  const auto space = square(8);
  const SolveResult r = solve(space, make_poisson_operator(*space), SeparableFunction{}, default_dirichlet(*space), {});
  CHECK(r.report.modes_used == 0);
  CHECK(r.field.num_modes() == 0);
}

TEST_CASE("defaults, validation and errors") {
  const auto space = make_space({{"x", make_uniform_mesh(0, 1, 4), {}, DimKind::Space},
                                 {"k", make_uniform_mesh(1, 2, 4), {}, DimKind::Param},
                                 {"t", make_uniform_mesh(0, 1, 4), {}, DimKind::Time}});
  const DirichletSpec bc = default_dirichlet(*space);
  CHECK(bc.constrained[0] == std::vector<std::size_t>{0, 4});
  CHECK(bc.constrained[1].empty());
  CHECK(bc.constrained[2] == std::vector<std::size_t>{0});

  DirichletSpec all = bc;
  all.constrained[0] = {0, 1, 2, 3, 4};
  CHECK_THROWS_AS(solve(space, make_heat_operator(*space), SeparableFunction{}, all, {}), ConfigError);

  // A zero operator makes every per-dimension system singular.
  const auto sq = square(4);
  SeparableOperator zero;
  zero.terms.push_back({0.0, {Op1D::mass(), Op1D::mass()}});
  SeparableFunction src;
  src.terms.push_back({1.0, {[](double) { return 1.0; }, [](double) { return 1.0; }}});
  try {
    solve(sq, zero, src, default_dirichlet(*sq), {});
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("dimension 'x'") != std::string::npos);
    CHECK(std::string(e.what()).find("mode 0") != std::string::npos);
  }
}

TEST_CASE("argmin consistency with the dense Galerkin solve") {
  for (KernelKind k : {KernelKind::InterpMls, KernelKind::Lagrange}) {
    const auto space = square(16, {1, 20.0, 2, k});
    const SeparableOperator op = make_poisson_operator(*space);
    SeparableFunction src;
    src.terms.push_back({1.0, {[](double x) { return std::exp(x); }, [](double y) { return y * y; }}});
    src.terms.push_back({-3.0, {[](double x) { return std::cos(3 * x); }, [](double y) { return 1 + y; }}});
    const DirichletSpec bc = default_dirichlet(*space);
    const SeparableField dense = dense_galerkin_solve(space, op, src, bc);
    SolverConfig cfg;
    cfg.max_modes = 40;
    cfg.max_subspace_iters = 30;
    cfg.iter_tol = 1e-10;
    cfg.mode_tol = 1e-12;
    const SolveResult r = solve(space, op, src, bc, cfg);
    CHECK(rel_l2_integral(r.field, dense) <= 1e-6);
  }
}

TEST_CASE("residual energy does not grow as modes are added") {
  const auto space = square(10);
  const SeparableOperator op = make_poisson_operator(*space);
  SeparableFunction src;
  src.terms.push_back({1.0, {[](double x) { return std::exp(2 * x); }, [](double y) { return std::sin(5 * y); }}});
  src.terms.push_back({1.0, {[](double x) { return x * x; }, [](double y) { return std::cos(y); }}});
  const DirichletSpec bc = default_dirichlet(*space);
  SolverConfig cfg;
  cfg.max_modes = 8;
  cfg.max_subspace_iters = 20;
  const SolveResult r = solve(space, op, src, bc, cfg);
  const SeparableField dense = dense_galerkin_solve(space, op, src, bc);

  // Energy norm of the error: for -Laplace, (e, e)_a = -e^T A e with A from the operator.
  const GalerkinSystem sys(space, op, src);
  const auto a = dense_operator(sys, op);
  const std::size_t n = 11 * 11;
  auto energy = [&](const SeparableField& f) {
    std::vector<double> e(n, 0.0);
    for (std::size_t i = 0; i < 11; ++i)
      for (std::size_t j = 0; j < 11; ++j) {
        double v = 0.0;
        for (std::size_t m = 0; m < f.num_modes(); ++m) v += f.coeffs(m, 0)[i] * f.coeffs(m, 1)[j];
        for (std::size_t m = 0; m < dense.num_modes(); ++m) v -= dense.coeffs(m, 0)[i] * dense.coeffs(m, 1)[j];
        e[i * 11 + j] = v;
      }
    double s = 0.0;
    for (std::size_t r2 = 0; r2 < n; ++r2)
      for (std::size_t c = 0; c < n; ++c) s -= e[r2] * a[r2 * n + c] * e[c];
    return s;
  };
  double prev = energy(SeparableField(space));
  for (std::size_t m = 1; m <= r.field.num_modes(); ++m) {
    SeparableField part(space);
    for (std::size_t k = 0; k < m; ++k) part.add_mode_flat(r.field.mode(k));
    const double e = energy(part);
    CHECK(e <= prev + 1e-10 * std::max(1.0, prev));
    prev = e;
  }
}

TEST_CASE("per-dimension solves do not raise the Rayleigh energy within a sweep") {
  const auto space = square(12);
  const SeparableOperator op = make_poisson_operator(*space);
  SeparableFunction src;
  src.terms.push_back({1.0, {[](double x) { return 1 + x; }, [](double y) { return std::exp(y); }}});
  const GalerkinSystem sys(space, op, src);
  const DirichletSpec bc = default_dirichlet(*space);
  std::mt19937_64 rng(6);
  std::vector<std::vector<double>> u{random_vec(13, rng), random_vec(13, rng)};
  for (std::size_t d = 0; d < 2; ++d) {
    u[d].front() = 0.0;
    u[d].back() = 0.0;
  }
  // The system is A u = q with A negative definite, so J(u) = -u'Au/2 + q'u is minimised.
  auto functional = [&](const std::vector<std::vector<double>>& v) {
    const DimSystem s0 = build_dim_system(sys, v, 0);
    double f = 0.0;
    for (std::size_t i = 0; i < v[0].size(); ++i) f += s0.q[i] * v[0][i];
    return -0.5 * s0.a.bilinear(v[0], v[0]) + f;
  };
  double prev = functional(u);
  for (int sweep = 0; sweep < 4; ++sweep)
    for (std::size_t d = 0; d < 2; ++d) {
      DimSystem s = build_dim_system(sys, u, d);
      apply_dirichlet(s.a, s.q, bc.constrained[d]);
      u[d] = banded_lu_solve(std::move(s.a), s.q);
      const double now = functional(u);
      CHECK(now <= prev + 1e-12 * std::abs(prev));
      prev = now;
    }
}

TEST_CASE("identical seeds give identical reports") {
  app::Discretization disc;
  const app::Problem pr = app::make_poisson_case1(3, 0, 1, disc);
  SolverConfig cfg;
  cfg.max_modes = 3;
  cfg.seed = 99;
  const SolveResult a = solve(pr.space, pr.op, pr.source, pr.bc, cfg);
  const SolveResult b = solve(pr.space, pr.op, pr.source, pr.bc, cfg);
  REQUIRE(a.report.modes.size() == b.report.modes.size());
  for (std::size_t m = 0; m < a.report.modes.size(); ++m) {
    CHECK(a.report.modes[m].changes == b.report.modes[m].changes);
    CHECK(a.report.modes[m].energy_increment == b.report.modes[m].energy_increment);
  }
  for (std::size_t m = 0; m < a.field.num_modes(); ++m) {
    const auto ma = a.field.mode(m);
    const auto mb = b.field.mode(m);
    CHECK(std::equal(ma.begin(), ma.end(), mb.begin(), mb.end()));
  }
}
