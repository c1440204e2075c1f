#include <algorithm>
#include <cmath>

#include "septensor/error.hpp"
#include "septensor/oracle.hpp"

namespace septensor {

std::vector<double> dense_lu_solve(std::vector<double> a, std::vector<double> b, std::size_t n) {
  if (a.size() != n * n || b.size() != n) throw InvalidArgument("dense solve: size mismatch");
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(a[i * n + j]);
    scale = std::max(scale, row);
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
    if (std::abs(a[piv * n + k]) <= 1e-14 * scale)
      throw OracleError("dense solve: singular matrix at column " + std::to_string(k));
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      std::swap(b[k], b[piv]);
    }
    const double inv = 1.0 / a[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = a[i * n + k] * inv;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= l * a[k * n + j];
      b[i] -= l * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a[ii * n + j] * x[j];
    x[ii] = s / a[ii * n + ii];
  }
  return x;
}

SeparableField dense_galerkin_solve(FieldSpacePtr space, const SeparableOperator& op,
                                    const SeparableFunction& source, const DirichletSpec& bc,
                                    int quad_points) {
  const std::size_t dims = space->num_dims();
  std::vector<std::size_t> n(dims);
  std::size_t total = 1;
  for (std::size_t d = 0; d < dims; ++d) {
    n[d] = space->num_nodes(d);
    total *= n[d];
  }
  if (total > 4096) throw OracleError("dense Galerkin oracle limited to 4096 unknowns");

  auto unravel = [&](std::size_t flat, std::vector<std::size_t>& idx) {
    for (std::size_t d = dims; d-- > 0;) {
      idx[d] = flat % n[d];
      flat /= n[d];
    }
  };

  std::vector<double> a(total * total, 0.0);
  std::vector<std::size_t> ii(dims);
  std::vector<std::size_t> jj(dims);
  for (const auto& term : op.terms) {
    if (term.factors.size() != dims) throw ConfigError("operator term has wrong factor count");
    std::vector<std::vector<double>> k(dims);
    for (std::size_t d = 0; d < dims; ++d)
      k[d] = assemble_matrix(space->shape(d), term.factors[d], quad_points).to_dense();
    for (std::size_t i = 0; i < total; ++i) {
      unravel(i, ii);
      for (std::size_t j = 0; j < total; ++j) {
        unravel(j, jj);
        double v = term.coeff;
        for (std::size_t d = 0; d < dims && v != 0.0; ++d) v *= k[d][ii[d] * n[d] + jj[d]];
        a[i * total + j] += v;
      }
    }
  }

  std::vector<double> rhs(total, 0.0);
  for (const auto& term : source.terms) {
    if (term.factors.size() != dims) throw ConfigError("source term has wrong factor count");
    std::vector<std::vector<double>> f(dims);
    for (std::size_t d = 0; d < dims; ++d)
      f[d] = assemble_load(space->shape(d), term.factors[d], quad_points);
    for (std::size_t i = 0; i < total; ++i) {
      unravel(i, ii);
      double v = term.coeff;
      for (std::size_t d = 0; d < dims; ++d) v *= f[d][ii[d]];
      rhs[i] += v;
    }
  }

  std::vector<double> lift(total, 0.0);
  if (bc.lift) {
    for (std::size_t m = 0; m < bc.lift->num_modes(); ++m)
      for (std::size_t i = 0; i < total; ++i) {
        unravel(i, ii);
        double v = 1.0;
        for (std::size_t d = 0; d < dims; ++d) v *= bc.lift->coeffs(m, d)[ii[d]];
        lift[i] += v;
      }
    for (std::size_t i = 0; i < total; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < total; ++j) s += a[i * total + j] * lift[j];
      rhs[i] -= s;
    }
  }

  std::vector<std::vector<char>> mask(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    mask[d].assign(n[d], 0);
    if (d < bc.constrained.size())
      for (std::size_t c : bc.constrained[d]) mask[d].at(c) = 1;
  }
  for (std::size_t i = 0; i < total; ++i) {
    unravel(i, ii);
    bool fixed = false;
    for (std::size_t d = 0; d < dims; ++d) fixed = fixed || mask[d][ii[d]];
    if (!fixed) continue;
    for (std::size_t j = 0; j < total; ++j) {
      a[i * total + j] = 0.0;
      a[j * total + i] = 0.0;
    }
    a[i * total + i] = 1.0;
    rhs[i] = 0.0;
  }

  std::vector<double> u = dense_lu_solve(std::move(a), std::move(rhs), total);
  for (std::size_t i = 0; i < total; ++i) u[i] += lift[i];

  SeparableField out(space);
  const std::size_t trailing = total / n[0];
  std::vector<std::vector<double>> vectors(dims);
  for (std::size_t t = 0; t < trailing; ++t) {
    vectors[0].assign(n[0], 0.0);
    for (std::size_t i0 = 0; i0 < n[0]; ++i0) vectors[0][i0] = u[i0 * trailing + t];
    std::size_t rest = t;
    for (std::size_t d = dims; d-- > 1;) {
      vectors[d].assign(n[d], 0.0);
      vectors[d][rest % n[d]] = 1.0;
      rest /= n[d];
    }
    out.add_mode(vectors);
  }
  return out;
}

}  // namespace septensor
