#pragma once

// Rank-M separable fields: u(x) = sum_m prod_d N~_d(x_d) u_d^(m).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "septensor/basis.hpp"

namespace septensor {

class BandedMatrix;

enum class DimKind { Space, Time, Param };

std::string to_string(DimKind kind);
DimKind dim_kind_from_string(const std::string& name);

struct DimensionSpec {
  std::string name;
  Mesh1D mesh;
  PatchConfig patch;
  DimKind kind = DimKind::Space;

  bool operator==(const DimensionSpec&) const = default;
};

/// The tensor-product discretization shared by fields, operators and solvers:
/// validated dimension specs with their shape functions and 1D Gram matrices.
class FieldSpace {
 public:
  explicit FieldSpace(std::vector<DimensionSpec> dims);
  ~FieldSpace();

  std::size_t num_dims() const noexcept { return dims_.size(); }
  const DimensionSpec& dim(std::size_t d) const { return dims_.at(d); }
  const std::vector<DimensionSpec>& dims() const noexcept { return dims_; }
  const ShapeFunctions& shape(std::size_t d) const { return shapes_.at(d); }
  std::size_t num_nodes(std::size_t d) const { return shapes_.at(d).num_nodes(); }
  /// Sum of node counts over dimensions: the parameter count of one mode.
  std::size_t mode_size() const noexcept { return mode_size_; }
  std::size_t offset(std::size_t d) const { return offsets_.at(d); }

  /// Index of the dimension with this name; throws ConfigError if absent.
  std::size_t index_of(const std::string& name) const;
  bool has_dim(const std::string& name) const noexcept;

  /// L2 Gram matrix of dimension d, integrated with 10-point Gauss rules.
  const BandedMatrix& gram(std::size_t d) const;

  bool same_as(const FieldSpace& other) const noexcept;

 private:
  std::vector<DimensionSpec> dims_;
  std::vector<ShapeFunctions> shapes_;
  std::vector<std::size_t> offsets_;
  std::size_t mode_size_ = 0;
  std::vector<std::unique_ptr<BandedMatrix>> gram_;
};

using FieldSpacePtr = std::shared_ptr<const FieldSpace>;

FieldSpacePtr make_space(std::vector<DimensionSpec> dims);

class SeparableField {
 public:
  explicit SeparableField(FieldSpacePtr space);

  const FieldSpacePtr& space_ptr() const noexcept { return space_; }
  const FieldSpace& space() const noexcept { return *space_; }
  std::size_t num_dims() const noexcept { return space_->num_dims(); }
  std::size_t num_modes() const noexcept { return modes_.size(); }
  std::size_t num_parameters() const noexcept { return modes_.size() * space_->mode_size(); }

  std::span<const double> coeffs(std::size_t m, std::size_t d) const;
  std::span<double> coeffs(std::size_t m, std::size_t d);
  /// All D nodal vectors of one mode, concatenated in dimension order.
  std::span<const double> mode(std::size_t m) const { return modes_.at(m); }
  std::span<double> mode(std::size_t m) { return modes_.at(m); }

  double evaluate(std::span<const double> point) const;
  std::vector<double> evaluate_batch(std::span<const std::vector<double>> points) const;
  /// Value of a single mode at a point.
  double evaluate_mode(std::size_t m, std::span<const double> point) const;

  /// Appends one rank-1 mode; vector lengths must match the meshes.
  void add_mode(std::span<const std::vector<double>> vectors);
  void add_mode_flat(std::span<const double> concatenated);
  SeparableField with_mode(std::span<const std::vector<double>> vectors) const;
  void remove_last_mode();

  /// Rescales each mode so every dimension except the first has unit norm.
  void normalize_modes();

  /// Field holding only mode m.
  SeparableField single_mode(std::size_t m) const;

 private:
  FieldSpacePtr space_;
  std::vector<std::vector<double>> modes_;
};

/// <f, g> in L2 over the box, computed from per-dimension Gram contractions.
double inner_product_l2(const SeparableField& f, const SeparableField& g);
double norm_l2(const SeparableField& f);

/// Metadata from a field container, available before coefficients are read.
struct FieldHeader {
  int version = 1;
  std::vector<DimensionSpec> dims;
  std::size_t num_modes = 0;
};

void save_field(const SeparableField& field, const std::string& path);
SeparableField load_field(const std::string& path);
FieldHeader read_field_header(const std::string& path);

}  // namespace septensor
