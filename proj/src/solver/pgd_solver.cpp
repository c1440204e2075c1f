#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "septensor/error.hpp"
#include "septensor/solver.hpp"

namespace septensor {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool is_unweighted(OpKind kind) {
  return kind == OpKind::Mass || kind == OpKind::Stiffness || kind == OpKind::Convection;
}

// Largest change between unit directions, up to sign.
double direction_change(std::span<const double> a, std::span<const double> b) {
  const double na = norm2(a);
  const double nb = norm2(b);
  if (na == 0.0 || nb == 0.0) return (na == nb) ? 0.0 : 1.0;
  double minus = 0.0;
  double plus = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] / na;
    const double y = b[i] / nb;
    minus += (x - y) * (x - y);
    plus += (x + y) * (x + y);
  }
  return std::sqrt(std::min(minus, plus));
}

}  // namespace

DirichletSpec default_dirichlet(const FieldSpace& space) {
  DirichletSpec bc;
  bc.constrained.resize(space.num_dims());
  for (std::size_t d = 0; d < space.num_dims(); ++d) {
    const std::size_t last = space.num_nodes(d) - 1;
    switch (space.dim(d).kind) {
      case DimKind::Space: bc.constrained[d] = {0, last}; break;
      case DimKind::Time: bc.constrained[d] = {0}; break;
      case DimKind::Param: break;
    }
  }
  return bc;
}

std::string SolveReport::to_json() const {
  nlohmann::ordered_json j;
  j["config"] = {{"max_modes", config.max_modes},
                 {"max_subspace_iters", config.max_subspace_iters},
                 {"iter_tol", config.iter_tol},
                 {"mode_tol", config.mode_tol},
                 {"seed", config.seed},
                 {"quad_points", config.quad_points}};
  j["lift_modes"] = lift_modes;
  j["modes_used"] = modes_used;
  auto modes_json = nlohmann::ordered_json::array();
  for (const auto& m : modes) {
    modes_json.push_back({{"iterations", m.iterations},
                          {"changes", m.changes},
                          {"energy_increment", m.energy_increment},
                          {"converged", m.converged},
                          {"accepted", m.accepted}});
  }
  j["modes"] = std::move(modes_json);
  j["warnings"] = warnings;
  j["wall_time_s"] = wall_time_s;
  return j.dump(2);
}

GalerkinSystem::GalerkinSystem(FieldSpacePtr space, const SeparableOperator& op,
                               const SeparableFunction& source, int quad_points)
    : space_(std::move(space)) {
  if (!space_) throw InvalidArgument("system needs a space");
  const std::size_t dims = space_->num_dims();
  if (op.terms.empty()) throw ConfigError("operator has no terms");
  unique_.resize(dims);
  // Unweighted kinds are shared between terms; weighted ones are per term.
  std::vector<std::vector<int>> unique_kind(dims);
  for (std::size_t t = 0; t < op.terms.size(); ++t) {
    const auto& term = op.terms[t];
    if (term.factors.size() != dims)
      throw ConfigError("operator term " + std::to_string(t) + " has " +
                        std::to_string(term.factors.size()) + " factors for " +
                        std::to_string(dims) + " dimensions");
    if (!std::isfinite(term.coeff)) throw ConfigError("operator coefficient is not finite");
    coeffs_.push_back(term.coeff);
    std::vector<std::size_t> idx(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      const Op1D& f = term.factors[d];
      if (is_unweighted(f.kind)) {
        const int key = static_cast<int>(f.kind);
        auto it = std::find(unique_kind[d].begin(), unique_kind[d].end(), key);
        if (it != unique_kind[d].end()) {
          idx[d] = static_cast<std::size_t>(it - unique_kind[d].begin());
          continue;
        }
        unique_kind[d].push_back(key);
      } else {
        unique_kind[d].push_back(-1);
      }
      unique_[d].push_back(assemble_matrix(space_->shape(d), f, quad_points));
      idx[d] = unique_[d].size() - 1;
    }
    term_matrix_.push_back(std::move(idx));
  }
  for (std::size_t s = 0; s < source.terms.size(); ++s) {
    const auto& term = source.terms[s];
    if (term.factors.size() != dims)
      throw ConfigError("source term " + std::to_string(s) + " has wrong factor count");
    if (term.coeff == 0.0) continue;
    src_coeffs_.push_back(term.coeff);
    std::vector<std::vector<double>> per_dim;
    for (std::size_t d = 0; d < dims; ++d)
      per_dim.push_back(assemble_load(space_->shape(d), term.factors[d], quad_points));
    loads_.push_back(std::move(per_dim));
  }
}

const BandedMatrix& GalerkinSystem::matrix(std::size_t term, std::size_t d) const {
  return unique_.at(d).at(term_matrix_.at(term).at(d));
}

std::span<const double> GalerkinSystem::load(std::size_t src_term, std::size_t d) const {
  return loads_.at(src_term).at(d);
}

void GalerkinSystem::push_mode(std::span<const double> concatenated) {
  if (concatenated.size() != space_->mode_size())
    throw InvalidArgument("mode has wrong parameter count");
  std::vector<std::vector<std::vector<double>>> action(space_->num_dims());
  for (std::size_t d = 0; d < space_->num_dims(); ++d) {
    auto u = concatenated.subspan(space_->offset(d), space_->num_nodes(d));
    for (const auto& k : unique_[d]) action[d].push_back(k.multiply(u));
  }
  history_.push_back(std::move(action));
}

DimSystem build_dim_system(const GalerkinSystem& system,
                           std::span<const std::vector<double>> current, std::size_t d) {
  const FieldSpace& space = *system.space_;
  const std::size_t dims = space.num_dims();
  if (d >= dims) throw InvalidArgument("dimension index out of range");
  if (current.size() != dims) throw InvalidArgument("current mode needs one vector per dimension");
  for (std::size_t e = 0; e < dims; ++e)
    if (current[e].size() != space.num_nodes(e))
      throw InvalidArgument("current mode vector has wrong length");

  // Self contractions u^T K u for every cached matrix.
  std::vector<std::vector<double>> self(dims);
  for (std::size_t e = 0; e < dims; ++e) {
    if (e == d) continue;
    for (const auto& k : system.unique_[e]) self[e].push_back(k.bilinear(current[e], current[e]));
  }

  const std::size_t n = space.num_nodes(d);
  std::size_t hb = 0;
  for (const auto& k : system.unique_[d]) hb = std::max(hb, k.half_bandwidth());
  DimSystem out{BandedMatrix(n, hb), std::vector<double>(n, 0.0)};

  for (std::size_t t = 0; t < system.coeffs_.size(); ++t) {
    double c = system.coeffs_[t];
    for (std::size_t e = 0; e < dims && c != 0.0; ++e)
      if (e != d) c *= self[e][system.term_matrix_[t][e]];
    if (c != 0.0) out.a.add_scaled(system.unique_[d][system.term_matrix_[t][d]], c);
  }

  for (std::size_t s = 0; s < system.loads_.size(); ++s) {
    double c = system.src_coeffs_[s];
    for (std::size_t e = 0; e < dims && c != 0.0; ++e)
      if (e != d) c *= dot(current[e], system.loads_[s][e]);
    if (c == 0.0) continue;
    const auto& f = system.loads_[s][d];
    for (std::size_t i = 0; i < n; ++i) out.q[i] += c * f[i];
  }

  for (const auto& action : system.history_) {
    std::vector<std::vector<double>> cross(dims);
    for (std::size_t e = 0; e < dims; ++e) {
      if (e == d) continue;
      for (const auto& ku : action[e]) cross[e].push_back(dot(current[e], ku));
    }
    for (std::size_t t = 0; t < system.coeffs_.size(); ++t) {
      double c = system.coeffs_[t];
      for (std::size_t e = 0; e < dims && c != 0.0; ++e)
        if (e != d) c *= cross[e][system.term_matrix_[t][e]];
      if (c == 0.0) continue;
      const auto& ku = action[d][system.term_matrix_[t][d]];
      for (std::size_t i = 0; i < n; ++i) out.q[i] -= c * ku[i];
    }
  }
  return out;
}

void apply_dirichlet(BandedMatrix& a, std::vector<double>& q,
                     std::span<const std::size_t> constrained) {
  const std::size_t n = a.size();
  if (q.size() != n) throw InvalidArgument("right-hand side length does not match matrix");
  std::vector<char> mask(n, 0);
  for (std::size_t i : constrained) {
    if (i >= n) throw ConfigError("constrained node " + std::to_string(i) + " out of range");
    mask[i] = 1;
  }
  if (n > 0 && static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)) == n)
    throw ConfigError("every degree of freedom is constrained");
  double diag = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (!mask[i]) diag = std::max(diag, std::abs(a(i, i)));
  if (diag == 0.0) diag = 1.0;
  const std::size_t hb = a.half_bandwidth();
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    const std::size_t lo = i > hb ? i - hb : 0;
    const std::size_t hi = std::min(n - 1, i + hb);
    for (std::size_t j = lo; j <= hi; ++j) {
      a.at(i, j) = 0.0;
      a.at(j, i) = 0.0;
    }
    a.at(i, i) = diag;
    q[i] = 0.0;
  }
}

SeparableField make_lift_for_separable_boundary(FieldSpacePtr space,
                                                const SeparableFunction& data) {
  SeparableField lift(space);
  const std::size_t dims = space->num_dims();
  for (const auto& term : data.terms) {
    if (term.factors.size() != dims)
      throw UnsupportedError("boundary data term is not a product over all dimensions");
    if (term.coeff == 0.0) continue;
    std::vector<std::vector<double>> vectors(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      if (!term.factors[d]) throw UnsupportedError("boundary data factor is empty");
      const auto nodes = space->dim(d).mesh.nodes();
      vectors[d].reserve(nodes.size());
      for (double x : nodes) vectors[d].push_back(term.factors[d](x));
    }
    for (double& v : vectors[0]) v *= term.coeff;
    lift.add_mode(vectors);
  }
  return lift;
}

SolveResult solve(FieldSpacePtr space, const SeparableOperator& op,
                  const SeparableFunction& source, const DirichletSpec& bc,
                  const SolverConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (!space) throw InvalidArgument("solve needs a space");
  if (cfg.max_subspace_iters == 0) throw ConfigError("max_subspace_iters must be positive");
  if (!(cfg.iter_tol > 0.0) || !(cfg.mode_tol > 0.0))
    throw ConfigError("solver tolerances must be positive");
  const std::size_t dims = space->num_dims();
  std::vector<std::vector<std::size_t>> constrained(dims);
  if (!bc.constrained.empty()) {
    if (bc.constrained.size() != dims)
      throw ConfigError("Dirichlet spec needs one index set per dimension");
    constrained = bc.constrained;
  }
  for (std::size_t d = 0; d < dims; ++d) {
    std::sort(constrained[d].begin(), constrained[d].end());
    constrained[d].erase(std::unique(constrained[d].begin(), constrained[d].end()),
                         constrained[d].end());
    if (!constrained[d].empty() && constrained[d].back() >= space->num_nodes(d))
      throw ConfigError("constrained node out of range in dimension '" + space->dim(d).name + "'");
    if (constrained[d].size() >= space->num_nodes(d))
      throw ConfigError("dimension '" + space->dim(d).name + "' has no free degree of freedom");
  }

  GalerkinSystem system(space, op, source, cfg.quad_points);
  SolveResult result{SeparableField(space), SolveReport{}};
  SolveReport& report = result.report;
  report.config = cfg;
  SeparableField& field = result.field;
  if (bc.lift) {
    if (!bc.lift->space().same_as(*space)) throw ConfigError("lift does not share the dimensions");
    for (std::size_t m = 0; m < bc.lift->num_modes(); ++m) {
      field.add_mode_flat(bc.lift->mode(m));
      system.push_mode(bc.lift->mode(m));
    }
    report.lift_modes = bc.lift->num_modes();
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  for (std::size_t m = 0; m < cfg.max_modes; ++m) {
    std::vector<std::vector<double>> u(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      u[d].resize(space->num_nodes(d));
      for (double& v : u[d]) v = uniform(rng);
      for (std::size_t i : constrained[d]) u[d][i] = 0.0;
      const double nrm = norm2(u[d]);
      for (double& v : u[d]) v /= nrm;
    }

    auto mode_norm_of = [&](const std::vector<std::vector<double>>& v) {
      double n = 1.0;
      for (std::size_t d = 0; d < dims; ++d)
        n *= std::sqrt(std::max(0.0, space->gram(d).bilinear(v[d], v[d])));
      return n;
    };
    const double field_norm = field.num_modes() > 0 ? norm_l2(field) : 0.0;

    ModeRecord rec;
    bool zero_mode = false;
    for (std::size_t it = 0; it < cfg.max_subspace_iters && !zero_mode; ++it) {
      const auto old = u;
      for (std::size_t d = 0; d < dims; ++d) {
        DimSystem sys = build_dim_system(system, u, d);
        apply_dirichlet(sys.a, sys.q, constrained[d]);
        try {
          u[d] = banded_lu_solve(std::move(sys.a), sys.q);
        } catch (const SingularMatrix& err) {
          throw SolverError("singular system in dimension '" + space->dim(d).name + "' for mode " +
                            std::to_string(m) + ": " + err.what());
        }
        const double nrm = norm2(u[d]);
        if (!std::isfinite(nrm))
          throw SolverError("non-finite solution in dimension '" + space->dim(d).name +
                            "' for mode " + std::to_string(m));
        if (nrm == 0.0) {
          zero_mode = true;
          break;
        }
        if (d + 1 < dims)
          for (double& v : u[d]) v /= nrm;
      }
      ++rec.iterations;
      if (zero_mode) break;
      // A negligible correction leaves the next sweep without information.
      if (field_norm > 0.0 && mode_norm_of(u) < 1e-3 * cfg.mode_tol * field_norm) {
        zero_mode = true;
        break;
      }
      double change = 0.0;
      for (std::size_t d = 0; d < dims; ++d)
        change = std::max(change, direction_change(u[d], old[d]));
      rec.changes.push_back(change);
      if (change < cfg.iter_tol) {
        rec.converged = true;
        break;
      }
    }

    if (zero_mode) {
      rec.converged = true;
      report.modes.push_back(std::move(rec));
      break;
    }
    if (!rec.converged)
      report.warnings.push_back("mode " + std::to_string(m) + " stopped after " +
                                std::to_string(rec.iterations) + " sweeps with change " +
                                std::to_string(rec.changes.back()));

    const double mode_norm = mode_norm_of(u);
    const SeparableField candidate = field.with_mode(u);
    const double total = norm_l2(candidate);
    rec.energy_increment = total > 0.0 ? mode_norm / total : 0.0;
    if (mode_norm == 0.0 || rec.energy_increment < cfg.mode_tol) {
      report.modes.push_back(std::move(rec));
      break;
    }
    rec.accepted = true;
    field = candidate;
    system.push_mode(field.mode(field.num_modes() - 1));
    ++report.modes_used;
    report.modes.push_back(std::move(rec));
  }

  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace septensor
