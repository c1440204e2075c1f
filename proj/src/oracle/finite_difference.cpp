#include <algorithm>
#include <cmath>

#include "septensor/error.hpp"
#include "septensor/oracle.hpp"

namespace septensor {
namespace {

using Apply = std::function<void(const std::vector<double>&, std::vector<double>&)>;

// Conjugate gradients for SPD operators; x holds the initial guess.
void conjugate_gradient(const Apply& apply, const std::vector<double>& b, std::vector<double>& x,
                        double rel_tol = 1e-13) {
  const std::size_t n = b.size();
  std::vector<double> r(n);
  std::vector<double> p(n);
  std::vector<double> ap(n);
  apply(x, ap);
  double bnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = b[i] - ap[i];
    bnorm += b[i] * b[i];
  }
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return;
  }
  p = r;
  double rr = 0.0;
  for (double v : r) rr += v * v;
  const std::size_t max_iter = 20 * n + 100;
  for (std::size_t it = 0; it < max_iter; ++it) {
    if (std::sqrt(rr) <= rel_tol * bnorm) return;
    apply(p, ap);
    double pap = 0.0;
    for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    if (!(pap > 0.0)) throw OracleError("conjugate gradients: operator not positive definite");
    const double alpha = rr / pap;
    double rr_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rr_new += r[i] * r[i];
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  if (std::sqrt(rr) > 1e3 * rel_tol * bnorm) throw OracleError("conjugate gradients did not converge");
}

std::vector<double> unit_axis(std::size_t n) {
  std::vector<double> axis(n);
  for (std::size_t i = 0; i < n; ++i) axis[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  return axis;
}

// Negative Laplacian on the interior of a cube of m^dim unknowns, zero
// Dirichlet outside, uniform spacing h.
void neg_laplace(const std::vector<double>& u, std::vector<double>& out, std::size_t m,
                 std::size_t dim, double h) {
  const double inv = 1.0 / (h * h);
  std::size_t stride[3] = {1, m, m * m};
  const std::size_t total = u.size();
  for (std::size_t i = 0; i < total; ++i) {
    double s = 2.0 * static_cast<double>(dim) * u[i];
    for (std::size_t d = 0; d < dim; ++d) {
      const std::size_t c = (i / stride[d]) % m;
      if (c > 0) s -= u[i - stride[d]];
      if (c + 1 < m) s -= u[i + stride[d]];
    }
    out[i] = s * inv;
  }
}

HeatTrajectory heat_cube(std::size_t n, std::size_t dim, std::size_t steps, double t_end,
                         double k, const std::vector<double>& source, std::size_t stride) {
  if (n < 3 || steps == 0 || stride == 0 || !(t_end > 0.0) || !(k > 0.0))
    throw InvalidArgument("heat oracle: invalid grid or parameters");
  const std::size_t m = n - 2;
  const double h = 1.0 / static_cast<double>(n - 1);
  const double dt = t_end / static_cast<double>(steps);
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) total *= m;

  HeatTrajectory out;
  out.axis = unit_axis(n);
  auto embed = [&](const std::vector<double>& interior) {
    std::size_t full = 1;
    for (std::size_t d = 0; d < dim; ++d) full *= n;
    std::vector<double> v(full, 0.0);
    for (std::size_t i = 0; i < total; ++i) {
      std::size_t rest = i;
      std::size_t flat = 0;
      std::size_t mul = 1;
      for (std::size_t d = 0; d < dim; ++d) {
        flat += (rest % m + 1) * mul;
        rest /= m;
        mul *= n;
      }
      v[flat] = interior[i];
    }
    return v;
  };

  std::vector<double> u(total, 0.0);
  std::vector<double> rhs(total);
  std::vector<double> lu(total);
  out.times.push_back(0.0);
  out.values.push_back(embed(u));
  const Apply lhs = [&](const std::vector<double>& x, std::vector<double>& y) {
    neg_laplace(x, y, m, dim, h);
    for (std::size_t i = 0; i < total; ++i) y[i] = x[i] + 0.5 * dt * k * y[i];
  };
  for (std::size_t s = 1; s <= steps; ++s) {
    neg_laplace(u, lu, m, dim, h);
    for (std::size_t i = 0; i < total; ++i) rhs[i] = u[i] - 0.5 * dt * k * lu[i] + dt * source[i];
    conjugate_gradient(lhs, rhs, u);
    if (s % stride == 0 || s == steps) {
      out.times.push_back(dt * static_cast<double>(s));
      out.values.push_back(embed(u));
    }
  }
  return out;
}

}  // namespace

Grid2D fd_poisson_2d(std::size_t n, double x_min, double x_max, double y_min, double y_max,
                     const std::function<double(double, double)>& f,
                     const std::function<double(double, double)>& boundary) {
  if (n < 3 || n > 257) throw InvalidArgument("fd_poisson_2d: n must lie in [3, 257]");
  if (!(x_min < x_max) || !(y_min < y_max)) throw InvalidArgument("fd_poisson_2d: empty box");
  Grid2D g;
  g.x.resize(n);
  g.y.resize(n);
  const double hx = (x_max - x_min) / static_cast<double>(n - 1);
  const double hy = (y_max - y_min) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    g.x[i] = x_min + hx * static_cast<double>(i);
    g.y[i] = y_min + hy * static_cast<double>(i);
  }
  g.x.back() = x_max;
  g.y.back() = y_max;
  g.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    g.values[i * n] = boundary(g.x[i], g.y[0]);
    g.values[i * n + n - 1] = boundary(g.x[i], g.y[n - 1]);
    g.values[i] = boundary(g.x[0], g.y[i]);
    g.values[(n - 1) * n + i] = boundary(g.x[n - 1], g.y[i]);
  }

  const std::size_t m = n - 2;
  const double ax = 1.0 / (hx * hx);
  const double ay = 1.0 / (hy * hy);
  std::vector<double> rhs(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t gi = i + 1;
      const std::size_t gj = j + 1;
      double r = -f(g.x[gi], g.y[gj]);
      if (gi == 1) r += ax * g.values[gj];
      if (gi == n - 2) r += ax * g.values[(n - 1) * n + gj];
      if (gj == 1) r += ay * g.values[gi * n];
      if (gj == n - 2) r += ay * g.values[gi * n + n - 1];
      rhs[i * m + j] = r;
    }
  const Apply apply = [&](const std::vector<double>& u, std::vector<double>& out) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double c = u[i * m + j];
        double s = 2.0 * (ax + ay) * c;
        if (i > 0) s -= ax * u[(i - 1) * m + j];
        if (i + 1 < m) s -= ax * u[(i + 1) * m + j];
        if (j > 0) s -= ay * u[i * m + j - 1];
        if (j + 1 < m) s -= ay * u[i * m + j + 1];
        out[i * m + j] = s;
      }
  };
  std::vector<double> u(m * m, 0.0);
  conjugate_gradient(apply, rhs, u);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) g.values[(i + 1) * n + j + 1] = u[i * m + j];
  return g;
}

HeatSources HeatSources::grid16() {
  HeatSources s;
  const double c[4] = {0.125, 0.375, 0.625, 0.875};
  for (double a : c)
    for (double b : c) {
      s.cx.push_back(a);
      s.cy.push_back(b);
    }
  return s;
}

double HeatSources::gauss_1d(double x, double c) const {
  return std::exp(-2.0 * (x - c) * (x - c) / (r0 * r0));
}

double HeatSources::plane(double x, double y) const {
  double s = 0.0;
  for (std::size_t i = 0; i < cx.size(); ++i) s += gauss_1d(x, cx[i]) * gauss_1d(y, cy[i]);
  return s;
}

HeatTrajectory fd_heat_2d_param(std::size_t n, std::size_t steps, double t_end, double k,
                                double power, const HeatSources& sources, std::size_t stride) {
  if (n < 3) throw InvalidArgument("heat oracle: grid needs at least 3 nodes");
  const std::size_t m = n - 2;
  const auto axis = unit_axis(n);
  std::vector<double> b(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) b[j * m + i] = power * sources.plane(axis[i + 1], axis[j + 1]);
  // Interior index is x fastest in heat_cube; transpose so y is fastest.
  HeatTrajectory raw = heat_cube(n, 2, steps, t_end, k, b, stride);
  for (auto& snap : raw.values) {
    std::vector<double> t(snap.size());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) t[i * n + j] = snap[j * n + i];
    snap = std::move(t);
  }
  return raw;
}

HeatTrajectory fd_heat_3d_param(std::size_t n, std::size_t steps, double t_end, double k,
                                double power, const HeatSources& sources, std::size_t stride) {
  if (n < 3) throw InvalidArgument("heat oracle: grid needs at least 3 nodes");
  const std::size_t m = n - 2;
  const auto axis = unit_axis(n);
  const double tol = 1e-12;
  std::vector<double> b(m * m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double plane = power * sources.plane(axis[i + 1], axis[j + 1]);
      for (std::size_t l = 0; l < m; ++l) {
        const double z = axis[l + 1];
        double ind = z > sources.depth + tol ? 1.0 : 0.0;
        if (std::abs(z - sources.depth) <= tol) ind = 0.5;
        b[(l * m + j) * m + i] = plane * ind;
      }
    }
  HeatTrajectory raw = heat_cube(n, 3, steps, t_end, k, b, stride);
  for (auto& snap : raw.values) {
    std::vector<double> t(snap.size());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < n; ++l) t[(i * n + j) * n + l] = snap[(l * n + j) * n + i];
    snap = std::move(t);
  }
  return raw;
}

HeatTrajectory fd_heat_1d_variable(std::size_t n, std::size_t steps, double t_end,
                                   const std::function<double(double)>& k,
                                   const std::function<double(double)>& f, std::size_t stride) {
  if (n < 3 || steps == 0 || stride == 0 || !(t_end > 0.0))
    throw InvalidArgument("heat oracle: invalid grid or parameters");
  const std::size_t m = n - 2;
  const double h = 1.0 / static_cast<double>(n - 1);
  const double dt = t_end / static_cast<double>(steps);
  HeatTrajectory out;
  out.axis = unit_axis(n);
  std::vector<double> kh(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    kh[i] = k(0.5 * (out.axis[i] + out.axis[i + 1]));
    if (!(kh[i] > 0.0)) throw OracleError("heat oracle: conductivity must stay positive");
  }
  // Interior node i+1 couples through kh[i] (left) and kh[i+1] (right).
  std::vector<double> lo(m);
  std::vector<double> di(m);
  std::vector<double> up(m);
  const double c = 0.5 * dt / (h * h);
  for (std::size_t i = 0; i < m; ++i) {
    lo[i] = -c * kh[i];
    up[i] = -c * kh[i + 1];
    di[i] = 1.0 + c * (kh[i] + kh[i + 1]);
  }
  std::vector<double> src(m);
  for (std::size_t i = 0; i < m; ++i) src[i] = f(out.axis[i + 1]);

  std::vector<double> u(m, 0.0);
  std::vector<double> rhs(m);
  std::vector<double> cp(m);
  std::vector<double> dp(m);
  auto snapshot = [&](double t) {
    std::vector<double> v(n, 0.0);
    std::copy(u.begin(), u.end(), v.begin() + 1);
    out.times.push_back(t);
    out.values.push_back(std::move(v));
  };
  snapshot(0.0);
  for (std::size_t s = 1; s <= steps; ++s) {
    for (std::size_t i = 0; i < m; ++i) {
      const double left = i > 0 ? u[i - 1] : 0.0;
      const double right = i + 1 < m ? u[i + 1] : 0.0;
      rhs[i] = u[i] + c * (kh[i] * (left - u[i]) + kh[i + 1] * (right - u[i])) + dt * src[i];
    }
    // Thomas algorithm.
    cp[0] = up[0] / di[0];
    dp[0] = rhs[0] / di[0];
    for (std::size_t i = 1; i < m; ++i) {
      const double den = di[i] - lo[i] * cp[i - 1];
      cp[i] = up[i] / den;
      dp[i] = (rhs[i] - lo[i] * dp[i - 1]) / den;
    }
    u[m - 1] = dp[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) u[i] = dp[i] - cp[i] * u[i + 1];
    if (s % stride == 0 || s == steps) snapshot(dt * static_cast<double>(s));
  }
  return out;
}

}  // namespace septensor
