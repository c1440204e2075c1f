#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "../detail/small_lu.hpp"
#include "septensor/basis.hpp"
#include "septensor/error.hpp"

namespace septensor {
namespace {

// Node patches hold at most 2s+1 <= 15 nodes; bordered systems at most 30 rows.
constexpr std::size_t kMaxPatch = 16;
constexpr std::size_t kMaxSystem = 2 * kMaxPatch;

}  // namespace

std::string to_string(KernelKind kind) {
  return kind == KernelKind::Lagrange ? "lagrange" : "interp_mls";
}

KernelKind kernel_from_string(const std::string& name) {
  if (name == "lagrange") return KernelKind::Lagrange;
  if (name == "interp_mls") return KernelKind::InterpMls;
  throw ConfigError("unknown kernel '" + name + "' (expected lagrange or interp_mls)");
}

void validate(const PatchConfig& cfg) {
  if (cfg.s < 0) throw ConfigError("patch size s must be non-negative");
  if (cfg.p < 0) throw ConfigError("reproducing order p must be non-negative");
  if (!(cfg.a > 0.0) || !std::isfinite(cfg.a)) throw ConfigError("dilation a must be positive");
  if (cfg.s > 0 && cfg.p > 2 * cfg.s) {
    std::ostringstream msg;
    msg << "reproducing order p=" << cfg.p << " exceeds patch capacity " << 2 * cfg.s
        << " for s=" << cfg.s;
    throw ConfigError(msg.str());
  }
  if (2 * static_cast<std::size_t>(cfg.s) + 1 > kMaxPatch) throw ConfigError("patch size s above 7 is not supported");
}

int default_quadrature_points(const PatchConfig& cfg) { return std::max(cfg.p + 1, 2); }

double BasisEval::interpolate(std::span<const double> nodal) const {
  double v = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) v += values[k] * nodal[first_node + k];
  return v;
}

double BasisEval::interpolate_derivative(std::span<const double> nodal) const {
  double v = 0.0;
  for (std::size_t k = 0; k < derivs.size(); ++k) v += derivs[k] * nodal[first_node + k];
  return v;
}

ShapeFunctions::ShapeFunctions(Mesh1D mesh, PatchConfig cfg)
    : mesh_(std::move(mesh)), cfg_(cfg) {
  validate(cfg_);
  const std::size_t n = mesh_.num_elements();
  const auto s = static_cast<std::size_t>(cfg_.s);
  patches_.resize(mesh_.num_nodes());
  for (std::size_t i = 0; i <= n; ++i) {
    NodePatch& patch = patches_[i];
    patch.first = i >= s ? i - s : 0;
    const std::size_t last = std::min(n, i + s);
    patch.count = last - patch.first + 1;
    const double lo = mesh_.node(patch.first);
    const double hi = mesh_.node(last);
    patch.center = 0.5 * (lo + hi);
    patch.half_width = patch.count > 1 ? 0.5 * (hi - lo) : 1.0;
    patch.mean_spacing = patch.count > 1 ? (hi - lo) / static_cast<double>(patch.count - 1) : 1.0;
    if (cfg_.kernel == KernelKind::Lagrange) {
      patch.order = static_cast<int>(patch.count) - 1;
    } else {
      patch.order = std::min(cfg_.p, static_cast<int>(patch.count) - 1);
    }
    if (s > 0 && cfg_.kernel == KernelKind::InterpMls) {
      // Unweighted moment Gram matrix in shifted/scaled patch coordinates.
      const auto q = static_cast<std::size_t>(patch.order) + 1;
      std::vector<double> gram(q * q, 0.0);
      for (std::size_t j = 0; j < patch.count; ++j) {
        const double xi = (mesh_.node(patch.first + j) - patch.center) / patch.half_width;
        std::array<double, kMaxPatch> mono{};
        mono[0] = 1.0;
        for (std::size_t k = 1; k < q; ++k) mono[k] = mono[k - 1] * xi;
        for (std::size_t a = 0; a < q; ++a)
          for (std::size_t b = 0; b < q; ++b) gram[a * q + b] += mono[a] * mono[b];
      }
      const double cond = detail::condition_1norm(gram, q);
      if (!(cond <= 1e12)) {
        std::ostringstream msg;
        msg << "moment system of node " << i << " has condition estimate " << cond;
        throw ConditioningError(msg.str());
      }
    }
  }
}

std::size_t ShapeFunctions::half_bandwidth() const noexcept {
  return std::min<std::size_t>(2 * static_cast<std::size_t>(cfg_.s) + 1, mesh_.num_elements());
}

int ShapeFunctions::effective_order(std::size_t node) const {
  if (cfg_.s == 0) return 1;
  return patches_.at(node).order;
}

void ShapeFunctions::lagrange_weights(const NodePatch& patch, double x, std::span<double> w,
                                      std::span<double> dw) const {
  const std::size_t c = patch.count;
  std::array<double, kMaxPatch> xi{};
  for (std::size_t j = 0; j < c; ++j)
    xi[j] = (mesh_.node(patch.first + j) - patch.center) / patch.half_width;
  const double t = (x - patch.center) / patch.half_width;
  for (std::size_t j = 0; j < c; ++j) {
    double value = 1.0;
    for (std::size_t k = 0; k < c; ++k)
      if (k != j) value *= (t - xi[k]) / (xi[j] - xi[k]);
    w[j] = value;
    double deriv = 0.0;
    for (std::size_t m = 0; m < c; ++m) {
      if (m == j) continue;
      double term = 1.0 / (xi[j] - xi[m]);
      for (std::size_t k = 0; k < c; ++k)
        if (k != j && k != m) term *= (t - xi[k]) / (xi[j] - xi[k]);
      deriv += term;
    }
    dw[j] = deriv / patch.half_width;
  }
}

// Interpolating moving least squares: minimize sum_j v_j W_j^2 subject to
// exact reproduction of monomials up to the patch order. The inverse weights
// v_j = r_j^2 exp((r_j/a)^2) vanish at node j, so W = e_j there and the
// bordered system stays nonsingular everywhere.
void ShapeFunctions::mls_weights(const NodePatch& patch, double x, std::span<double> w,
                                 std::span<double> dw) const {
  const std::size_t c = patch.count;
  const auto q = static_cast<std::size_t>(patch.order) + 1;
  const std::size_t m = c + q;
  std::array<double, kMaxSystem * kMaxSystem> buf;
  std::span<double> kkt(buf.data(), m * m);
  std::fill(kkt.begin(), kkt.end(), 0.0);
  std::array<double, kMaxPatch> v{};
  std::array<double, kMaxPatch> dv{};
  const double a = cfg_.a;
  for (std::size_t j = 0; j < c; ++j) {
    const double xj = mesh_.node(patch.first + j);
    const double r = (x - xj) / patch.mean_spacing;
    const double g = std::exp((r / a) * (r / a));
    v[j] = r * r * g;
    dv[j] = (2.0 * r + 2.0 * r * r * r / (a * a)) * g / patch.mean_spacing;
    kkt[j * m + j] = v[j];
    const double xi = (xj - patch.center) / patch.half_width;
    double mono = 1.0;
    for (std::size_t k = 0; k < q; ++k) {
      kkt[j * m + c + k] = mono;
      kkt[(c + k) * m + j] = mono;
      mono *= xi;
    }
  }
  detail::SmallLu lu;
  if (!lu.factor(kkt, m)) throw ConditioningError("singular patch moment system");

  const double t = (x - patch.center) / patch.half_width;
  std::array<double, kMaxSystem> rhs{};
  std::span<double> sol(rhs.data(), m);
  double mono = 1.0;
  for (std::size_t k = 0; k < q; ++k) {
    sol[c + k] = mono;
    mono *= t;
  }
  lu.solve(sol);
  for (std::size_t j = 0; j < c; ++j) w[j] = sol[j];

  std::array<double, kMaxSystem> drhs{};
  std::span<double> dsol(drhs.data(), m);
  for (std::size_t j = 0; j < c; ++j) dsol[j] = -dv[j] * w[j];
  double pw = 1.0;
  for (std::size_t k = 1; k < q; ++k) {
    dsol[c + k] = static_cast<double>(k) * pw / patch.half_width;
    pw *= t;
  }
  lu.solve(dsol);
  for (std::size_t j = 0; j < c; ++j) dw[j] = dsol[j];
}

void ShapeFunctions::patch_weights(const NodePatch& patch, double x, std::span<double> w,
                                   std::span<double> dw) const {
  if (patch.count == 1) {
    w[0] = 1.0;
    dw[0] = 0.0;
    return;
  }
  if (cfg_.kernel == KernelKind::Lagrange) {
    lagrange_weights(patch, x, w, dw);
  } else {
    mls_weights(patch, x, w, dw);
  }
}

BasisEval ShapeFunctions::eval(double x) const {
  const std::size_t e = locate_element(mesh_, x);
  return eval_in_element(e, x);
}

BasisEval ShapeFunctions::eval_in_element(std::size_t e, double x) const {
  const double xl = mesh_.node(e);
  const double xr = mesh_.node(e + 1);
  x = std::clamp(x, xl, xr);
  const double h = xr - xl;
  const double hat_l = (xr - x) / h;
  const double hat_r = (x - xl) / h;

  BasisEval out;
  if (cfg_.s == 0) {
    out.first_node = e;
    out.values = {hat_l, hat_r};
    out.derivs = {-1.0 / h, 1.0 / h};
    return out;
  }

  const auto s = static_cast<std::size_t>(cfg_.s);
  const std::size_t first = e >= s ? e - s : 0;
  const std::size_t last = std::min(mesh_.num_elements(), e + 1 + s);
  out.first_node = first;
  out.values.assign(last - first + 1, 0.0);
  out.derivs.assign(last - first + 1, 0.0);

  std::array<double, kMaxPatch> w{};
  std::array<double, kMaxPatch> dw{};
  const std::array<std::size_t, 2> element_nodes{e, e + 1};
  const std::array<double, 2> hat{hat_l, hat_r};
  const std::array<double, 2> dhat{-1.0 / h, 1.0 / h};
  for (int side = 0; side < 2; ++side) {
    const NodePatch& patch = patches_[element_nodes[static_cast<std::size_t>(side)]];
    patch_weights(patch, x, std::span<double>(w.data(), patch.count),
                  std::span<double>(dw.data(), patch.count));
    const std::size_t offset = patch.first - first;
    const double n = hat[static_cast<std::size_t>(side)];
    const double dn = dhat[static_cast<std::size_t>(side)];
    for (std::size_t j = 0; j < patch.count; ++j) {
      out.values[offset + j] += n * w[j];
      out.derivs[offset + j] += dn * w[j] + n * dw[j];
    }
  }
  return out;
}

BasisEval eval_basis(const Mesh1D& mesh, const PatchConfig& cfg, double x) {
  return ShapeFunctions(mesh, cfg).eval(x);
}

}  // namespace septensor
