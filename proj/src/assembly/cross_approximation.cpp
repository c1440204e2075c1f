#include <algorithm>
#include <cmath>
#include <memory>

#include "septensor/assembly.hpp"
#include "septensor/error.hpp"

namespace septensor {

CrossApproximation cross_approximate(const std::function<double(double, double)>& f,
                                     std::span<const double> samples_a,
                                     std::span<const double> samples_b, double rel_tol,
                                     std::size_t max_rank) {
  const std::size_t na = samples_a.size();
  const std::size_t nb = samples_b.size();
  if (na == 0 || nb == 0) throw InvalidArgument("cross approximation needs sample points");
  std::vector<double> residual(na * nb);
  double scale = 0.0;
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      const double v = f(samples_a[i], samples_b[j]);
      if (!std::isfinite(v)) throw InvalidArgument("cross approximation: non-finite sample");
      residual[i * nb + j] = v;
      scale = std::max(scale, std::abs(v));
    }

  // Recursive factors: u_k(a) = R_{k-1}(a, b_k) / piv_k, v_k(b) = R_{k-1}(a_k, b),
  // where R_{k-1} = f - sum_{j<k} u_j v_j. Unlike the skeleton form with an
  // inverted pivot block, every coefficient stays bounded by the data.
  struct Factors {
    std::function<double(double, double)> f;
    std::vector<double> a, b, piv;
    std::vector<std::vector<double>> u_at_a;  // u_j(a_k), j < k
    std::vector<std::vector<double>> v_at_b;  // v_j(b_k), j < k
  };
  auto st = std::make_shared<Factors>();
  st->f = f;
  std::vector<std::vector<double>> cols;  // u_j on the a grid
  std::vector<std::vector<double>> rows;  // v_j on the b grid
  std::vector<std::size_t> piv_i;
  std::vector<std::size_t> piv_j;
  double err = scale;
  while (st->a.size() < max_rank) {
    std::size_t bi = 0;
    std::size_t bj = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < na; ++i)
      for (std::size_t j = 0; j < nb; ++j)
        if (std::abs(residual[i * nb + j]) > best) {
          best = std::abs(residual[i * nb + j]);
          bi = i;
          bj = j;
        }
    err = best;
    if (best <= rel_tol * scale || best == 0.0) break;
    const double piv = residual[bi * nb + bj];
    std::vector<double> col(na);
    std::vector<double> row(nb);
    for (std::size_t i = 0; i < na; ++i) col[i] = residual[i * nb + bj] / piv;
    for (std::size_t j = 0; j < nb; ++j) row[j] = residual[bi * nb + j];
    for (std::size_t i = 0; i < na; ++i)
      for (std::size_t j = 0; j < nb; ++j) residual[i * nb + j] -= col[i] * row[j];
    std::vector<double> ua;
    std::vector<double> vb;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      ua.push_back(cols[k][bi]);
      vb.push_back(rows[k][bj]);
    }
    st->a.push_back(samples_a[bi]);
    st->b.push_back(samples_b[bj]);
    st->piv.push_back(piv);
    st->u_at_a.push_back(std::move(ua));
    st->v_at_b.push_back(std::move(vb));
    cols.push_back(std::move(col));
    rows.push_back(std::move(row));
  }
  if (st->a.size() == max_rank) {
    err = 0.0;
    for (double v : residual) err = std::max(err, std::abs(v));
  }

  CrossApproximation out;
  out.estimated_error = err;
  for (std::size_t c = 0; c < st->a.size(); ++c) {
    out.first.push_back([st, c](double x) {
      std::vector<double> u(c + 1);
      for (std::size_t k = 0; k <= c; ++k) {
        double r = st->f(x, st->b[k]);
        for (std::size_t j = 0; j < k; ++j) r -= u[j] * st->v_at_b[k][j];
        u[k] = r / st->piv[k];
      }
      return u[c];
    });
    out.second.push_back([st, c](double y) {
      std::vector<double> v(c + 1);
      for (std::size_t k = 0; k <= c; ++k) {
        double r = st->f(st->a[k], y);
        for (std::size_t j = 0; j < k; ++j) r -= st->u_at_a[k][j] * v[j];
        v[k] = r;
      }
      return v[c];
    });
  }
  return out;
}

}  // namespace septensor
