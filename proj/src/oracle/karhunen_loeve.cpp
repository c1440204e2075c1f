#include <algorithm>
#include <cmath>
#include <numeric>

#include "septensor/error.hpp"
#include "septensor/oracle.hpp"

namespace septensor {

SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t n, int max_sweeps) {
  if (a.size() != n * n) throw InvalidArgument("eigensolver: size mismatch");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a[i * n + j] - a[j * n + i]) > 1e-12 * (std::abs(a[i * n + j]) + 1e-300))
        throw InvalidArgument("eigensolver: matrix is not symmetric");
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  double fro = 0.0;
  for (double x : a) fro += x * x;
  fro = std::sqrt(fro);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a[i * n + j] * a[i * n + j];
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > 1e-12 * fro) {
    if (sweep++ >= max_sweeps) throw OracleError("Jacobi eigensolver did not converge");
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a[order[j] * n + order[j]];
    for (std::size_t i = 0; i < n; ++i) out.vectors[i * n + j] = v[i * n + order[j]];
  }
  return out;
}

double KLExpansion::mode_function(std::size_t j, double x) const {
  const BasisEval ev = shape->eval(x);
  double s = 0.0;
  for (std::size_t k = 0; k < ev.size(); ++k) s += ev.values[k] * phi(ev.node_index(k), j);
  return s;
}

KLExpansion kl_build(double k_mu, double sigma, double ell, const Mesh1D& mesh,
                     const PatchConfig& patch, std::size_t n_e) {
  if (!(sigma >= 0.0) || !(ell > 0.0)) throw InvalidArgument("KL: sigma >= 0 and ell > 0 required");
  const auto nodes = mesh.nodes();
  const std::size_t n = nodes.size();
  if (n_e > n) throw InvalidArgument("KL: more retained modes than nodes");
  std::vector<double> c(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = nodes[i] - nodes[j];
      c[i * n + j] = sigma * sigma * std::exp(-dx * dx / (2.0 * ell * ell));
    }
  SymmetricEigen eig = jacobi_eigen(std::move(c), n);
  KLExpansion kl;
  kl.k_mu = k_mu;
  kl.sigma = sigma;
  kl.ell = ell;
  kl.n_e = n_e;
  kl.eigenvalues = std::move(eig.values);
  kl.eigenvectors = std::move(eig.vectors);
  kl.shape = std::make_shared<const ShapeFunctions>(mesh, patch);
  return kl;
}

double kl_sample(const KLExpansion& kl, std::span<const double> zeta, double x) {
  if (zeta.size() != kl.n_e) throw InvalidArgument("KL: zeta length must equal n_e");
  const BasisEval ev = kl.shape->eval(x);
  double k = kl.k_mu;
  for (std::size_t j = 0; j < kl.n_e; ++j) {
    const double amp = std::sqrt(std::max(0.0, kl.eigenvalues[j])) * zeta[j];
    if (amp == 0.0) continue;
    double phi = 0.0;
    for (std::size_t i = 0; i < ev.size(); ++i) phi += ev.values[i] * kl.phi(ev.node_index(i), j);
    k += amp * phi;
  }
  return k;
}

}  // namespace septensor
