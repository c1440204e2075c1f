#pragma once

// One-dimensional meshes, convolution-patch shape functions and Gauss rules.
//
// A shape function evaluated at x lives on the elemental patch of the element
// containing x: the element's two nodes plus up to s neighbours on each side.
// It is the linear hat interpolation of two node-centred patch functions,
//
//   N~_k(x) = sum_{i in element} N_i(x) W_i^(k)(x),
//
// where W_i reproduces polynomials up to degree p over the patch of node i.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace septensor {

class Mesh1D {
 public:
  /// Nodes must be finite and strictly increasing, at least two of them.
  explicit Mesh1D(std::vector<double> nodes);

  std::size_t num_elements() const noexcept { return nodes_.size() - 1; }
  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::span<const double> nodes() const noexcept { return nodes_; }
  double node(std::size_t i) const { return nodes_[i]; }
  double x_min() const noexcept { return nodes_.front(); }
  double x_max() const noexcept { return nodes_.back(); }
  double length() const noexcept { return nodes_.back() - nodes_.front(); }
  double element_length(std::size_t e) const { return nodes_[e + 1] - nodes_[e]; }

  /// True when x lies inside [x_min, x_max] up to 1e-12 of the domain length.
  bool contains(double x) const noexcept;

  bool operator==(const Mesh1D& other) const = default;

 private:
  std::vector<double> nodes_;
};

Mesh1D make_uniform_mesh(double x_min, double x_max, std::size_t n_elem);

struct GradedSegment {
  double begin = 0.0;
  double end = 1.0;
  std::size_t n_elem = 1;
};

/// Concatenates uniformly subdivided contiguous segments.
Mesh1D make_graded_mesh(std::span<const GradedSegment> segments);

/// Element index e with nodes[e] <= x <= nodes[e+1]. The right end of the
/// domain maps to the last element. Throws OutOfDomain beyond tolerance.
std::size_t locate_element(const Mesh1D& mesh, double x);

enum class KernelKind { Lagrange, InterpMls };

std::string to_string(KernelKind kind);
KernelKind kernel_from_string(const std::string& name);

struct PatchConfig {
  int s = 1;        ///< neighbour layers joined to each node's patch
  double a = 20.0;  ///< dilation of the Gaussian window (InterpMls only)
  int p = 1;        ///< reproducing order
  KernelKind kernel = KernelKind::InterpMls;

  bool operator==(const PatchConfig&) const = default;
};

/// Throws ConfigError for negative s/p, non-positive a, or p > 2s when s > 0.
void validate(const PatchConfig& cfg);

/// Default Gauss points per element: max(p + 1, 2).
int default_quadrature_points(const PatchConfig& cfg);

struct BasisEval {
  std::size_t first_node = 0;  ///< patch nodes are contiguous from here
  std::vector<double> values;
  std::vector<double> derivs;

  std::size_t size() const noexcept { return values.size(); }
  std::size_t node_index(std::size_t k) const noexcept { return first_node + k; }

  /// Dot product of the shape values with a nodal vector.
  double interpolate(std::span<const double> nodal) const;
  double interpolate_derivative(std::span<const double> nodal) const;
};

/// Shape functions of one mesh and patch configuration. Immutable after
/// construction; eval() is safe to call concurrently.
class ShapeFunctions {
 public:
  ShapeFunctions(Mesh1D mesh, PatchConfig cfg);

  const Mesh1D& mesh() const noexcept { return mesh_; }
  const PatchConfig& config() const noexcept { return cfg_; }
  std::size_t num_nodes() const noexcept { return mesh_.num_nodes(); }

  BasisEval eval(double x) const;
  /// Evaluates inside a known element; x is clamped to that element.
  BasisEval eval_in_element(std::size_t e, double x) const;

  /// Largest |k - l| over node pairs sharing an elemental patch.
  std::size_t half_bandwidth() const noexcept;

  /// Reproducing order actually used by the patch of node i.
  int effective_order(std::size_t node) const;

 private:
  struct NodePatch {
    std::size_t first = 0;
    std::size_t count = 0;
    double center = 0.0;
    double half_width = 1.0;
    double mean_spacing = 1.0;
    int order = 0;
  };

  void patch_weights(const NodePatch& patch, double x, std::span<double> w,
                     std::span<double> dw) const;
  void mls_weights(const NodePatch& patch, double x, std::span<double> w,
                   std::span<double> dw) const;
  void lagrange_weights(const NodePatch& patch, double x, std::span<double> w,
                        std::span<double> dw) const;

  Mesh1D mesh_;
  PatchConfig cfg_;
  std::vector<NodePatch> patches_;
};

/// Convenience wrapper building ShapeFunctions for a single evaluation.
BasisEval eval_basis(const Mesh1D& mesh, const PatchConfig& cfg, double x);

struct QuadratureRule {
  std::vector<double> points;   ///< abscissae on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre rule with 1 <= g <= 10 points.
const QuadratureRule& gauss_rule(int g);

}  // namespace septensor
