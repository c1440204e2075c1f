#pragma once

// Built-in problems: spaces, operators, sources, constraints and, where
// known, exact solutions.

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "septensor/app/config.hpp"
#include "septensor/assembly.hpp"
#include "septensor/oracle.hpp"
#include "septensor/solver.hpp"

namespace septensor::app {

struct Problem {
  std::string name;
  FieldSpacePtr space;
  SeparableOperator op;
  SeparableFunction source;
  DirichletSpec bc;
  std::optional<SeparableFunction> exact;
  std::shared_ptr<const KLExpansion> kl;
};

/// u = sum_d sin(pi x_d / 2); nonzero boundary data carried by a lift.
Problem make_poisson_case1(std::size_t dims, double lo, double hi, const Discretization& disc,
    const std::vector<DimConfig>& overrides = {});
/// u = prod_d sin(pi x_d), zero on the boundary of integer-length boxes.
Problem make_poisson_case2(std::size_t dims, double lo, double hi, const Discretization& disc,
    const std::vector<DimConfig>& overrides = {});

struct HelmholtzParams {
  double a1 = 1.0;
  double a2 = 4.0;
  double wavenumber = 1.0;
};
/// u = sin(a1 pi x) sin(a2 pi y) on [-1, 1]^2.
Problem make_helmholtz(const HelmholtzParams& hp, const Discretization& disc,
    const std::vector<DimConfig>& overrides = {});

/// u = (1 - e^{-15t}) e^{-y^2 - (x - 100t + 5)^2} on [-10,10]^3 x [0, 0.1],
/// zero data on x and y faces, natural condition on z.
Problem make_heat_spacetime(const Discretization& disc,
    const std::vector<DimConfig>& overrides = {});

struct SptParams {
  std::pair<double, double> k_range{1.0, 4.0};
  std::pair<double, double> p_range{100.0, 200.0};
  double t_end = 0.04;
  double r0 = 0.05;
  double depth = 0.5;
};
/// (x, y, z, k, P, t) heat conduction with 16 Gaussian sources below a depth.
Problem make_heat_spt(const SptParams& sp, const Discretization& disc,
    const std::vector<DimConfig>& overrides = {});

/// Two Gaussian bumps on [0,100]^2 with locally refined meshes.
Problem make_poisson_local_source(const Discretization& disc,
    const std::vector<DimConfig>& overrides = {});

struct KlParams {
  double k_mu = 1.0;
  double sigma = 0.05;
  double ell = 0.2;
  std::size_t n_e = 5;
  std::pair<double, double> zeta_range{-5.0, 5.0};
  double t_end = 0.01;
};
/// u_t - (k(x, zeta) u_x)_x = 1 with k from a truncated KL expansion.
Problem make_operator_kl(const KlParams& kp, const Discretization& disc,
    const std::vector<DimConfig>& overrides = {});

/// Space declared entirely by the config's dims list (kind and domain or
/// graded mesh required for each entry).
FieldSpacePtr space_from_dims(const AppConfig& cfg);

/// Problem named by the config, with dimension overrides applied.
Problem build_problem(const AppConfig& cfg);

/// Mesh with a node at `at` when it lies strictly inside the interval.
Mesh1D mesh_with_breakpoint(double lo, double hi, std::size_t n_elem, double at);

}  // namespace septensor::app
