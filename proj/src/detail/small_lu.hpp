#pragma once

// Dense LU with partial pivoting for the tiny systems built per evaluation
// point (patch moment systems, at most a dozen unknowns).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace septensor::detail {

class SmallLu {
 public:
  /// Factorizes the n x n row-major matrix a in place. Returns false when a
  /// pivot is exactly zero.
  bool factor(std::span<double> a, std::size_t n) {
    a_ = a;
    n_ = n;
    piv_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t best = k;
      double best_abs = std::abs(a[k * n + k]);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double v = std::abs(a[i * n + k]);
        if (v > best_abs) {
          best_abs = v;
          best = i;
        }
      }
      piv_[k] = best;
      if (best_abs == 0.0) return false;
      if (best != k)
        for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[best * n + j]);
      const double inv = 1.0 / a[k * n + k];
      for (std::size_t i = k + 1; i < n; ++i) {
        const double l = a[i * n + k] * inv;
        a[i * n + k] = l;
        if (l == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= l * a[k * n + j];
      }
    }
    return true;
  }

  void solve(std::span<double> b) const {
    const std::size_t n = n_;
    for (std::size_t k = 0; k < n; ++k)
      if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
    for (std::size_t i = 1; i < n; ++i) {
      double s = b[i];
      for (std::size_t j = 0; j < i; ++j) s -= a_[i * n + j] * b[j];
      b[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = b[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= a_[i * n + j] * b[j];
      b[i] = s / a_[i * n + i];
    }
  }

 private:
  std::span<double> a_;
  std::size_t n_ = 0;
  std::vector<std::size_t> piv_;
};

/// 1-norm condition number of a small symmetric matrix via its explicit inverse.
inline double condition_1norm(const std::vector<double>& m, std::size_t n) {
  std::vector<double> a = m;
  SmallLu lu;
  if (!lu.factor(a, n)) return INFINITY;
  double norm = 0.0;
  double inv_norm = 0.0;
  std::vector<double> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(m[i * n + j]);
    norm = std::max(norm, s);
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0;
    lu.solve(col);
    double t = 0.0;
    for (double v : col) t += std::abs(v);
    inv_norm = std::max(inv_norm, t);
  }
  return norm * inv_norm;
}

}  // namespace septensor::detail
