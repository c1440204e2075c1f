#include <algorithm>
#include <cmath>

#include "septensor/assembly.hpp"
#include "septensor/error.hpp"

namespace septensor {

std::string to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Mass:
      return "mass";
    case OpKind::Stiffness:
      return "stiffness";
    case OpKind::Convection:
      return "convection";
    case OpKind::WeightedMass:
      return "weighted_mass";
    case OpKind::WeightedStiffness:
      return "weighted_stiffness";
  }
  return "mass";
}

int quadrature_points_for(const PatchConfig& cfg, OpKind kind) {
  const bool weighted = kind == OpKind::WeightedMass || kind == OpKind::WeightedStiffness;
  return std::min(10, weighted ? cfg.p + 3 : default_quadrature_points(cfg));
}

namespace {

int resolve_points(int preferred, int override_points) {
  return std::clamp(std::max(preferred, override_points), 1, 10);
}

}  // namespace

BandedMatrix assemble_matrix(const ShapeFunctions& shape, const Op1D& op, int quad_points) {
  const bool weighted = op.kind == OpKind::WeightedMass || op.kind == OpKind::WeightedStiffness;
  if (weighted && !op.weight) throw InvalidArgument("weighted operator kind needs a weight function");
  const Mesh1D& mesh = shape.mesh();
  const QuadratureRule& rule =
      gauss_rule(resolve_points(quadrature_points_for(shape.config(), op.kind), quad_points));
  BandedMatrix out(mesh.num_nodes(), shape.half_bandwidth());

  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const double xl = mesh.node(e);
    const double h = mesh.element_length(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double x = xl + 0.5 * h * (rule.points[q] + 1.0);
      const double wval = weighted ? op.weight(x) : 1.0;
      if (!std::isfinite(wval)) throw AssemblyError("non-finite operator weight", e);
      const double c = 0.5 * h * rule.weights[q] * wval;
      const BasisEval be = shape.eval_in_element(e, x);
      const std::size_t count = be.size();
      for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t l = 0; l < count; ++l) {
          double v = 0.0;
          switch (op.kind) {
            case OpKind::Mass:
            case OpKind::WeightedMass:
              v = be.values[k] * be.values[l];
              break;
            case OpKind::Stiffness:
            case OpKind::WeightedStiffness:
              v = be.derivs[k] * be.derivs[l];
              break;
            case OpKind::Convection:
              v = be.values[k] * be.derivs[l];
              break;
          }
          out.at(be.node_index(k), be.node_index(l)) += c * v;
        }
      }
    }
  }
  return out;
}

BandedMatrix assemble_matrix(const Mesh1D& mesh, const PatchConfig& cfg, const Op1D& op,
                             int quad_points) {
  return assemble_matrix(ShapeFunctions(mesh, cfg), op, quad_points);
}

std::vector<double> assemble_load(const ShapeFunctions& shape, const Function1D& g,
                                  int quad_points) {
  if (!g) throw InvalidArgument("load function is empty");
  const Mesh1D& mesh = shape.mesh();
  const QuadratureRule& rule = gauss_rule(
      resolve_points(quadrature_points_for(shape.config(), OpKind::WeightedMass), quad_points));
  std::vector<double> out(mesh.num_nodes(), 0.0);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const double xl = mesh.node(e);
    const double h = mesh.element_length(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double x = xl + 0.5 * h * (rule.points[q] + 1.0);
      const double gval = g(x);
      if (!std::isfinite(gval)) throw AssemblyError("non-finite load function value", e);
      const double c = 0.5 * h * rule.weights[q] * gval;
      const BasisEval be = shape.eval_in_element(e, x);
      for (std::size_t k = 0; k < be.size(); ++k) out[be.node_index(k)] += c * be.values[k];
    }
  }
  return out;
}

std::vector<double> assemble_load(const Mesh1D& mesh, const PatchConfig& cfg,
                                  const Function1D& g, int quad_points) {
  return assemble_load(ShapeFunctions(mesh, cfg), g, quad_points);
}

double SeparableFunction::evaluate(std::span<const double> point) const {
  double sum = 0.0;
  for (const auto& term : terms) {
    if (term.factors.size() != point.size())
      throw InvalidArgument("separable function term has wrong dimension count");
    double prod = term.coeff;
    for (std::size_t d = 0; d < point.size(); ++d) prod *= term.factors[d](point[d]);
    sum += prod;
  }
  return sum;
}

}  // namespace septensor
