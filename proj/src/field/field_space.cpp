#include <set>

#include "septensor/assembly.hpp"
#include "septensor/error.hpp"
#include "septensor/field.hpp"

namespace septensor {

std::string to_string(DimKind kind) {
  switch (kind) {
    case DimKind::Space:
      return "space";
    case DimKind::Time:
      return "time";
    case DimKind::Param:
      return "param";
  }
  return "space";
}

DimKind dim_kind_from_string(const std::string& name) {
  if (name == "space") return DimKind::Space;
  if (name == "time") return DimKind::Time;
  if (name == "param") return DimKind::Param;
  throw ConfigError("unknown dimension kind '" + name + "' (expected space, time or param)");
}

FieldSpace::FieldSpace(std::vector<DimensionSpec> dims) : dims_(std::move(dims)) {
  std::set<std::string> names;
  shapes_.reserve(dims_.size());
  for (const auto& d : dims_) {
    if (d.name.empty()) throw ConfigError("dimension name must not be empty");
    if (!names.insert(d.name).second) throw ConfigError("duplicate dimension name '" + d.name + "'");
    offsets_.push_back(mode_size_);
    shapes_.emplace_back(d.mesh, d.patch);
    mode_size_ += d.mesh.num_nodes();
  }
  for (const auto& shape : shapes_)
    gram_.push_back(std::make_unique<BandedMatrix>(assemble_matrix(shape, Op1D::mass(), 10)));
}

FieldSpace::~FieldSpace() = default;

std::size_t FieldSpace::index_of(const std::string& name) const {
  for (std::size_t d = 0; d < dims_.size(); ++d)
    if (dims_[d].name == name) return d;
  throw ConfigError("no dimension named '" + name + "'");
}

bool FieldSpace::has_dim(const std::string& name) const noexcept {
  for (const auto& d : dims_)
    if (d.name == name) return true;
  return false;
}

const BandedMatrix& FieldSpace::gram(std::size_t d) const { return *gram_.at(d); }

bool FieldSpace::same_as(const FieldSpace& other) const noexcept {
  return this == &other || dims_ == other.dims_;
}

FieldSpacePtr make_space(std::vector<DimensionSpec> dims) {
  return std::make_shared<const FieldSpace>(std::move(dims));
}

}  // namespace septensor
