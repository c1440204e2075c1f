#include <array>
#include <cmath>
#include <numbers>

#include "septensor/basis.hpp"
#include "septensor/error.hpp"

namespace septensor {
namespace {

// Newton iteration on the Legendre recurrence; converges to round-off for
// the small orders tabulated here.
QuadratureRule build_gauss_legendre(int g) {
  QuadratureRule rule;
  rule.points.resize(static_cast<std::size_t>(g));
  rule.weights.resize(static_cast<std::size_t>(g));
  for (int i = 0; i < (g + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (g + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= g; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = g * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= g; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = g * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(g - 1 - i);
    rule.points[lo] = -x;
    rule.points[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (g % 2 == 1) rule.points[static_cast<std::size_t>(g / 2)] = 0.0;
  return rule;
}

}  // namespace

const QuadratureRule& gauss_rule(int g) {
  if (g < 1 || g > 10) throw InvalidArgument("gauss_rule supports 1..10 points");
  static const std::array<QuadratureRule, 10> rules = [] {
    std::array<QuadratureRule, 10> out;
    out[0] = QuadratureRule{{0.0}, {2.0}};
    for (int k = 2; k <= 10; ++k) out[static_cast<std::size_t>(k - 1)] = build_gauss_legendre(k);
    return out;
  }();
  return rules[static_cast<std::size_t>(g - 1)];
}

}  // namespace septensor
