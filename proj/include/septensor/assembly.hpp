#pragma once

// 1D Galerkin matrices and loads, banded storage, and PDEs written as sums of
// separable operator and source terms.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "septensor/basis.hpp"
#include "septensor/field.hpp"

namespace septensor {

using Function1D = std::function<double(double)>;

/// Square matrix with equal lower and upper half-bandwidth. Storage keeps
/// room for the extra upper diagonals produced by pivoting during LU.
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(std::size_t size, std::size_t half_bandwidth);

  std::size_t size() const noexcept { return n_; }
  std::size_t half_bandwidth() const noexcept { return hb_; }

  /// Entry access within the band; reading outside the band yields 0.
  double operator()(std::size_t i, std::size_t j) const;
  double& at(std::size_t i, std::size_t j);
  bool in_band(std::size_t i, std::size_t j) const noexcept;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  /// x^T A y
  double bilinear(std::span<const double> x, std::span<const double> y) const;

  /// A += alpha * B (same size; B's band must fit).
  void add_scaled(const BandedMatrix& other, double alpha);
  void scale(double alpha);
  void set_zero();
  double norm_inf() const;

  /// Dense row-major copy, for tests and small oracles.
  std::vector<double> to_dense() const;

 private:
  friend std::vector<double> banded_lu_solve(BandedMatrix a, std::span<const double> q);
  std::size_t width() const noexcept { return 3 * hb_ + 1; }
  std::size_t n_ = 0;
  std::size_t hb_ = 0;
  std::vector<double> data_;  // row i, column j at data_[i * width + (j - i + hb)]
};

/// Banded LU with partial pivoting. Throws SingularMatrix when a pivot falls
/// below 1e-14 * ||A||_inf.
std::vector<double> banded_lu_solve(BandedMatrix a, std::span<const double> q);

enum class OpKind { Mass, Stiffness, Convection, WeightedMass, WeightedStiffness };

std::string to_string(OpKind kind);

/// One 1D factor of a separable operator term. Entries are
/// integral(test_k * trial_l) with derivatives as the kind dictates:
/// Mass N_k N_l, Stiffness N_k' N_l', Convection N_k N_l' (trial differentiated).
struct Op1D {
  OpKind kind = OpKind::Mass;
  Function1D weight;  ///< only for weighted kinds
  std::string label;  ///< description for logs

  static Op1D mass() { return {OpKind::Mass, {}, "mass"}; }
  static Op1D stiffness() { return {OpKind::Stiffness, {}, "stiffness"}; }
  static Op1D convection() { return {OpKind::Convection, {}, "convection"}; }
  static Op1D weighted_mass(Function1D w, std::string label = "weighted_mass") {
    return {OpKind::WeightedMass, std::move(w), std::move(label)};
  }
  static Op1D weighted_stiffness(Function1D w, std::string label = "weighted_stiffness") {
    return {OpKind::WeightedStiffness, std::move(w), std::move(label)};
  }
};

struct OperatorTerm {
  double coeff = 1.0;
  std::vector<Op1D> factors;  ///< one per dimension
};

/// Bilinear form a(v, u) = sum_terms coeff * prod_d a_d(v_d, u_d).
struct SeparableOperator {
  std::vector<OperatorTerm> terms;
};

/// coeff * prod_d g_d(x_d)
struct RankOneTerm {
  double coeff = 1.0;
  std::vector<Function1D> factors;
};

/// Sum of rank-1 functions; used for sources, boundary data and exact solutions.
struct SeparableFunction {
  std::vector<RankOneTerm> terms;

  double evaluate(std::span<const double> point) const;
  std::size_t rank() const noexcept { return terms.size(); }
};

using SeparableSource = SeparableFunction;

/// Gauss points per element used by assemble_matrix for this factor kind:
/// max(p+1, 2) for plain kinds, p+3 for weighted kinds.
int quadrature_points_for(const PatchConfig& cfg, OpKind kind);

/// Element-loop Gauss quadrature of shape-function products. A positive
/// quad_points overrides the default when it is larger.
BandedMatrix assemble_matrix(const ShapeFunctions& shape, const Op1D& op, int quad_points = 0);
BandedMatrix assemble_matrix(const Mesh1D& mesh, const PatchConfig& cfg, const Op1D& op,
                             int quad_points = 0);

/// F_k = integral N~_k g.
std::vector<double> assemble_load(const ShapeFunctions& shape, const Function1D& g,
                                  int quad_points = 0);
std::vector<double> assemble_load(const Mesh1D& mesh, const PatchConfig& cfg,
                                  const Function1D& g, int quad_points = 0);

/// -Laplace in weak form: sum_i -1 * (stiffness in x_i, mass elsewhere) over
/// space dimensions; non-space dimensions carry mass.
SeparableOperator make_poisson_operator(const FieldSpace& space);

/// Poisson terms plus k^2 * (mass in every dimension).
SeparableOperator make_helmholtz_operator(const FieldSpace& space, double wavenumber);

/// du/dt - k Laplace(u): a convection term in the time dimension and one
/// conductivity term per space dimension. When the space has a Param
/// dimension named conductivity_dim, the conductivity is that coordinate;
/// otherwise a constant conductivity is used.
SeparableOperator make_heat_operator(const FieldSpace& space,
                                     const std::string& conductivity_dim = "k",
                                     double constant_conductivity = 1.0);

/// Low-rank separation f(a, b) ~ sum_r u_r(a) v_r(b) by adaptive cross
/// approximation with full pivoting on a sample grid. Factors are built from
/// exact evaluations of f along the pivot lines, so they can be called at
/// any coordinate, not only on the grid.
struct CrossApproximation {
  std::vector<Function1D> first;
  std::vector<Function1D> second;
  double estimated_error = 0.0;  ///< max residual on the sample grid
};

CrossApproximation cross_approximate(const std::function<double(double, double)>& f,
                                     std::span<const double> samples_a,
                                     std::span<const double> samples_b, double rel_tol,
                                     std::size_t max_rank);

}  // namespace septensor
