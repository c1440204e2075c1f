#pragma once

// Data-free separated solver: the field grows one rank-1 mode at a time and
// each mode is found by alternating banded solves over the dimensions.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "septensor/assembly.hpp"
#include "septensor/field.hpp"

namespace septensor {

/// Homogeneous Dirichlet constraints per dimension plus an optional lift
/// carrying nonhomogeneous boundary data.
struct DirichletSpec {
  std::vector<std::vector<std::size_t>> constrained;  ///< node indices per dimension
  std::optional<SeparableField> lift;
};

/// Both end nodes of space dimensions and the first node of time
/// dimensions; parameter dimensions stay free.
DirichletSpec default_dirichlet(const FieldSpace& space);

struct SolverConfig {
  std::size_t max_modes = 10;
  std::size_t max_subspace_iters = 5;
  double iter_tol = 1e-6;
  double mode_tol = 1e-10;
  std::uint64_t seed = 0;
  int quad_points = 0;  ///< raises the per-element Gauss order when larger than the default
};

struct ModeRecord {
  std::size_t iterations = 0;
  std::vector<double> changes;  ///< vector change after each sweep
  double energy_increment = 0.0;  ///< ||mode|| / ||field|| once added
  bool converged = false;
  bool accepted = false;
};

struct SolveReport {
  SolverConfig config;
  std::size_t lift_modes = 0;
  std::size_t modes_used = 0;  ///< accepted modes, lift excluded
  std::vector<ModeRecord> modes;
  std::vector<std::string> warnings;
  double wall_time_s = 0.0;

  /// Run log as a JSON document.
  std::string to_json() const;
};

struct DimSystem {
  BandedMatrix a;
  std::vector<double> q;
};

/// 1D matrices and loads of an operator/source pair on a space, plus the
/// operator action of every mode pushed so far.
class GalerkinSystem {
 public:
  GalerkinSystem(FieldSpacePtr space, const SeparableOperator& op, const SeparableFunction& source,
                 int quad_points = 0);

  const FieldSpace& space() const noexcept { return *space_; }
  std::size_t num_terms() const noexcept { return coeffs_.size(); }
  const BandedMatrix& matrix(std::size_t term, std::size_t d) const;
  std::span<const double> load(std::size_t src_term, std::size_t d) const;

  /// Records a finalized mode so later systems subtract its action.
  void push_mode(std::span<const double> concatenated);
  std::size_t num_prior_modes() const noexcept { return history_.size(); }

 private:
  friend DimSystem build_dim_system(const GalerkinSystem&,
                                   std::span<const std::vector<double>>, std::size_t);
  FieldSpacePtr space_;
  std::vector<double> coeffs_;
  std::vector<std::vector<std::size_t>> term_matrix_;  // [term][d] -> index in unique_[d]
  std::vector<std::vector<BandedMatrix>> unique_;      // [d][k]
  std::vector<double> src_coeffs_;
  std::vector<std::vector<std::vector<double>>> loads_;  // [src term][d]
  // For each prior mode, [d][k] -> unique_[d][k] * u_d.
  std::vector<std::vector<std::vector<std::vector<double>>>> history_;
};

/// A_d = sum_t c_t K_{t,d} prod_{d'!=d} u_{d'}^T K_{t,d'} u_{d'} and Q_d the source
/// loads contracted alike, minus the prior modes' action on the same test space.
DimSystem build_dim_system(const GalerkinSystem& system,
                           std::span<const std::vector<double>> current, std::size_t d);

/// Symmetric elimination of homogeneous constraints: zeroed rows and columns,
/// zero right-hand side entries, and a diagonal equal to the largest free
/// diagonal magnitude (1 when there is none) so the pivot scale is kept.
void apply_dirichlet(BandedMatrix& a, std::vector<double>& q,
                     std::span<const std::size_t> constrained);

/// Nodal interpolation of sum_r prod_d g_d^(r), one mode per term.
SeparableField make_lift_for_separable_boundary(FieldSpacePtr space,
                                                const SeparableFunction& data);

struct SolveResult {
  SeparableField field;
  SolveReport report;
};

SolveResult solve(FieldSpacePtr space, const SeparableOperator& op,
                  const SeparableFunction& source, const DirichletSpec& bc,
                  const SolverConfig& cfg);

}  // namespace septensor
