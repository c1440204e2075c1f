#include <cmath>

#include "septensor/error.hpp"
#include "septensor/oracle.hpp"

namespace septensor {

double rel_l2_pointwise(std::span<const double> pred, std::span<const double> exact) {
  if (pred.size() != exact.size()) throw InvalidArgument("error metric: length mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    num += (pred[i] - exact[i]) * (pred[i] - exact[i]);
    den += exact[i] * exact[i];
  }
  if (den == 0.0) throw UndefinedMetric("relative error undefined for a zero reference");
  return std::sqrt(num / den);
}

double rel_l2_integral(const SeparableField& f, const SeparableField& g) {
  if (!f.space().same_as(g.space())) throw InvalidArgument("fields have different dimensions");
  const double den = norm_l2(g);
  if (den == 0.0) throw UndefinedMetric("relative error undefined for a zero reference");
  SeparableField diff = f;
  for (std::size_t m = 0; m < g.num_modes(); ++m) {
    std::vector<double> flat(g.mode(m).begin(), g.mode(m).end());
    const std::size_t n0 = g.space().num_nodes(0);
    for (std::size_t i = 0; i < n0; ++i) flat[i] = -flat[i];
    diff.add_mode_flat(flat);
  }
  return norm_l2(diff) / den;
}

double rel_l2_integral(const SeparableField& f, const SeparableFunction& g, int quad_points) {
  const FieldSpace& space = f.space();
  const std::size_t dims = space.num_dims();
  for (const auto& term : g.terms)
    if (term.factors.size() != dims) throw InvalidArgument("reference has wrong factor count");
  const QuadratureRule& rule = gauss_rule(quad_points);

  // Every rank-1 piece sampled at the quadrature points of each dimension.
  const std::size_t nf = f.num_modes();
  const std::size_t pieces = nf + g.terms.size();
  std::vector<std::vector<std::vector<double>>> samples(dims);  // [d][piece][q]
  std::vector<std::vector<double>> weights(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    const ShapeFunctions& shape = space.shape(d);
    const Mesh1D& mesh = shape.mesh();
    samples[d].assign(pieces, {});
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      const double x0 = mesh.node(e);
      const double h = mesh.element_length(e);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double x = x0 + 0.5 * h * (rule.points[q] + 1.0);
        weights[d].push_back(0.5 * h * rule.weights[q]);
        const BasisEval ev = shape.eval_in_element(e, x);
        for (std::size_t m = 0; m < nf; ++m) samples[d][m].push_back(ev.interpolate(f.coeffs(m, d)));
        for (std::size_t r = 0; r < g.terms.size(); ++r)
          samples[d][nf + r].push_back(g.terms[r].factors[d](x));
      }
    }
  }
  std::vector<double> sign(pieces, 1.0);
  for (std::size_t r = 0; r < g.terms.size(); ++r) sign[nf + r] = -g.terms[r].coeff;

  auto gram = [&](std::size_t a, std::size_t b) {
    double prod = sign[a] * sign[b];
    for (std::size_t d = 0; d < dims && prod != 0.0; ++d) {
      double s = 0.0;
      const auto& wa = samples[d][a];
      const auto& wb = samples[d][b];
      for (std::size_t q = 0; q < wa.size(); ++q) s += weights[d][q] * wa[q] * wb[q];
      prod *= s;
    }
    return prod;
  };
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t a = 0; a < pieces; ++a)
    for (std::size_t b = 0; b < pieces; ++b) {
      const double v = gram(a, b);
      diff += v;
      if (a >= nf && b >= nf) ref += v;
    }
  if (ref <= 0.0) throw UndefinedMetric("relative error undefined for a zero reference");
  return std::sqrt(std::max(0.0, diff) / ref);
}

}  // namespace septensor
