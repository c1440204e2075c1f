#include "septensor/assembly.hpp"
#include "septensor/error.hpp"

namespace septensor {
namespace {

std::vector<Op1D> all_mass(std::size_t dims) { return std::vector<Op1D>(dims, Op1D::mass()); }

std::vector<std::size_t> space_dims(const FieldSpace& space) {
  std::vector<std::size_t> out;
  for (std::size_t d = 0; d < space.num_dims(); ++d)
    if (space.dim(d).kind == DimKind::Space) out.push_back(d);
  if (out.empty()) throw ConfigError("operator needs at least one space dimension");
  return out;
}

std::size_t time_dim(const FieldSpace& space) {
  std::size_t found = space.num_dims();
  for (std::size_t d = 0; d < space.num_dims(); ++d) {
    if (space.dim(d).kind != DimKind::Time) continue;
    if (found != space.num_dims()) throw ConfigError("heat operator needs exactly one time dimension");
    found = d;
  }
  if (found == space.num_dims()) throw ConfigError("heat operator needs a time dimension");
  return found;
}

}  // namespace

SeparableOperator make_poisson_operator(const FieldSpace& space) {
  SeparableOperator op;
  for (std::size_t i : space_dims(space)) {
    OperatorTerm term{-1.0, all_mass(space.num_dims())};
    term.factors[i] = Op1D::stiffness();
    op.terms.push_back(std::move(term));
  }
  return op;
}

SeparableOperator make_helmholtz_operator(const FieldSpace& space, double wavenumber) {
  SeparableOperator op = make_poisson_operator(space);
  op.terms.push_back(OperatorTerm{wavenumber * wavenumber, all_mass(space.num_dims())});
  return op;
}

SeparableOperator make_heat_operator(const FieldSpace& space, const std::string& conductivity_dim,
                                     double constant_conductivity) {
  const std::size_t t = time_dim(space);
  const auto spatial = space_dims(space);
  std::size_t k_dim = space.num_dims();
  if (!conductivity_dim.empty()) {
    k_dim = space.index_of(conductivity_dim);
    if (space.dim(k_dim).kind != DimKind::Param)
      throw ConfigError("conductivity dimension '" + conductivity_dim + "' must be a param dimension");
  }
  SeparableOperator op;
  OperatorTerm time_term{1.0, all_mass(space.num_dims())};
  time_term.factors[t] = Op1D::convection();
  op.terms.push_back(std::move(time_term));
  for (std::size_t i : spatial) {
    OperatorTerm term{k_dim == space.num_dims() ? constant_conductivity : 1.0,
                      all_mass(space.num_dims())};
    term.factors[i] = Op1D::stiffness();
    if (k_dim != space.num_dims())
      term.factors[k_dim] = Op1D::weighted_mass([](double k) { return k; }, "weighted_mass(k)");
    op.terms.push_back(std::move(term));
  }
  return op;
}

}  // namespace septensor
