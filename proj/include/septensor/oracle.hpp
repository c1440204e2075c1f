#pragma once

// Reference solvers and metrics kept independent of the separated solver:
// dense Galerkin, finite differences, error norms and Karhunen-Loeve fields.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "septensor/assembly.hpp"
#include "septensor/basis.hpp"
#include "septensor/field.hpp"
#include "septensor/solver.hpp"

namespace septensor {

/// Dense LU with partial pivoting on a row-major n x n matrix.
std::vector<double> dense_lu_solve(std::vector<double> a, std::vector<double> b, std::size_t n);

/// Full tensor-product Galerkin solve, assembled densely. The result is
/// returned as a field with one mode per multi-index of the trailing
/// dimensions. Limited to 6000 total unknowns.
SeparableField dense_galerkin_solve(FieldSpacePtr space, const SeparableOperator& op,
                                    const SeparableFunction& source, const DirichletSpec& bc,
                                    int quad_points = 0);

/// Values on a tensor grid, row-major with the last axis fastest.
struct Grid2D {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> values;
  double at(std::size_t i, std::size_t j) const { return values[i * y.size() + j]; }
};

/// Laplace(u) = f with the 5-point stencil on an n x n node grid over the
/// box, boundary nodes taken from `boundary`. Solved by conjugate gradients.
Grid2D fd_poisson_2d(std::size_t n, double x_min, double x_max, double y_min, double y_max,
                     const std::function<double(double, double)>& f,
                     const std::function<double(double, double)>& boundary);

/// Gaussian heat sources P * sum_i exp(-2 |x - c_i|^2 / r0^2).
struct HeatSources {
  std::vector<double> cx;
  std::vector<double> cy;
  double r0 = 0.05;
  double depth = 0.5;  ///< sources act where z >= depth (3D only)

  /// 16 centers on a 4 x 4 grid at 0.125, 0.375, 0.625, 0.875.
  static HeatSources grid16();
  double gauss_1d(double x, double c) const;
  double plane(double x, double y) const;
};

/// Space-time samples: times[s] and values[s][node], nodes row-major with the
/// last axis fastest.
struct HeatTrajectory {
  std::vector<double> axis;  ///< node coordinates, shared by all spatial axes
  std::vector<double> times;
  std::vector<std::vector<double>> values;
};

/// u_t - k Laplace(u) = b on [0,1]^2, zero boundary and initial data,
/// Crank-Nicolson in time. Snapshots every `stride` steps plus t = 0.
HeatTrajectory fd_heat_2d_param(std::size_t n, std::size_t steps, double t_end, double k,
                                double power, const HeatSources& sources,
                                std::size_t stride = 1);

/// Same on [0,1]^3 with the depth indicator on z; the node at the depth
/// carries half the source.
HeatTrajectory fd_heat_3d_param(std::size_t n, std::size_t steps, double t_end, double k,
                                double power, const HeatSources& sources,
                                std::size_t stride = 1);

/// u_t - (k(x) u_x)_x = f(x) on [0,1] with zero boundary and initial data,
/// conservative Crank-Nicolson with midpoint conductivities.
HeatTrajectory fd_heat_1d_variable(std::size_t n, std::size_t steps, double t_end,
                                   const std::function<double(double)>& k,
                                   const std::function<double(double)>& f,
                                   std::size_t stride = 1);

/// sqrt(sum (pred - exact)^2) / sqrt(sum exact^2).
double rel_l2_pointwise(std::span<const double> pred, std::span<const double> exact);

/// ||f - g|| / ||g|| in L2 over the box.
double rel_l2_integral(const SeparableField& f, const SeparableField& g);
/// ||f - g|| / ||g|| for a separable reference function, by per-dimension
/// Gauss quadrature on the field's meshes.
double rel_l2_integral(const SeparableField& f, const SeparableFunction& g, int quad_points = 10);

struct SymmetricEigen {
  std::vector<double> values;   ///< descending
  std::vector<double> vectors;  ///< row-major n x n, column j is eigenvector j
};

/// Cyclic Jacobi rotations until the off-diagonal norm is below 1e-12 ||A||_F.
SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t n, int max_sweeps = 100);

struct KLExpansion {
  double k_mu = 1.0;
  double sigma = 0.0;
  double ell = 1.0;
  std::size_t n_e = 0;
  std::vector<double> eigenvalues;   ///< all n, descending
  std::vector<double> eigenvectors;  ///< row-major n x n
  std::shared_ptr<const ShapeFunctions> shape;

  std::size_t num_nodes() const { return shape->num_nodes(); }
  double phi(std::size_t node, std::size_t j) const {
    return eigenvectors[node * num_nodes() + j];
  }
  /// sum_I N~_I(x) phi_IJ
  double mode_function(std::size_t j, double x) const;
};

/// C_ij = sigma^2 exp(-(x_i - x_j)^2 / (2 ell^2)) on the mesh nodes.
KLExpansion kl_build(double k_mu, double sigma, double ell, const Mesh1D& mesh,
                     const PatchConfig& patch, std::size_t n_e);

/// k(x, zeta) = k_mu + sum_I N~_I(x) sum_J sqrt(lambda_J) phi_IJ zeta_J
double kl_sample(const KLExpansion& kl, std::span<const double> zeta, double x);

}  // namespace septensor
