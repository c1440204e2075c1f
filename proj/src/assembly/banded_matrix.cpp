#include <algorithm>
#include <cmath>
#include <sstream>

#include "septensor/assembly.hpp"
#include "septensor/error.hpp"

namespace septensor {

BandedMatrix::BandedMatrix(std::size_t size, std::size_t half_bandwidth)
    : n_(size), hb_(std::min(half_bandwidth, size == 0 ? 0 : size - 1)),
      data_(size * (3 * hb_ + 1), 0.0) {}

bool BandedMatrix::in_band(std::size_t i, std::size_t j) const noexcept {
  return i < n_ && j < n_ && (i > j ? i - j : j - i) <= hb_;
}

double BandedMatrix::operator()(std::size_t i, std::size_t j) const {
  if (!in_band(i, j)) return 0.0;
  return data_[i * width() + (j + hb_ - i)];
}

double& BandedMatrix::at(std::size_t i, std::size_t j) {
  if (!in_band(i, j)) {
    std::ostringstream msg;
    msg << "entry (" << i << ", " << j << ") outside band of half-width " << hb_;
    throw InvalidArgument(msg.str());
  }
  return data_[i * width() + (j + hb_ - i)];
}

void BandedMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_) throw InvalidArgument("banded multiply size mismatch");
  const std::size_t w = width();
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j0 = i >= hb_ ? i - hb_ : 0;
    const std::size_t j1 = std::min(n_ - 1, i + hb_);
    const double* row = data_.data() + i * w + hb_ - i;
    double s = 0.0;
    for (std::size_t j = j0; j <= j1; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

std::vector<double> BandedMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

double BandedMatrix::bilinear(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != n_ || y.size() != n_) throw InvalidArgument("banded bilinear size mismatch");
  const std::size_t w = width();
  double total = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    if (x[i] == 0.0) continue;
    const std::size_t j0 = i >= hb_ ? i - hb_ : 0;
    const std::size_t j1 = std::min(n_ - 1, i + hb_);
    const double* row = data_.data() + i * w + hb_ - i;
    double s = 0.0;
    for (std::size_t j = j0; j <= j1; ++j) s += row[j] * y[j];
    total += x[i] * s;
  }
  return total;
}

void BandedMatrix::add_scaled(const BandedMatrix& other, double alpha) {
  if (other.n_ != n_) throw InvalidArgument("banded add size mismatch");
  if (other.hb_ > hb_) throw InvalidArgument("banded add: band of addend too wide");
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j0 = i >= other.hb_ ? i - other.hb_ : 0;
    const std::size_t j1 = std::min(n_ - 1, i + other.hb_);
    for (std::size_t j = j0; j <= j1; ++j) at(i, j) += alpha * other(i, j);
  }
}

void BandedMatrix::scale(double alpha) {
  for (double& v : data_) v *= alpha;
}

void BandedMatrix::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

double BandedMatrix::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < width(); ++k) s += std::abs(data_[i * width() + k]);
    best = std::max(best, s);
  }
  return best;
}

std::vector<double> BandedMatrix::to_dense() const {
  std::vector<double> out(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out[i * n_ + j] = (*this)(i, j);
  return out;
}

std::vector<double> banded_lu_solve(BandedMatrix a, std::span<const double> q) {
  const std::size_t n = a.n_;
  if (q.size() != n) throw InvalidArgument("right-hand side length does not match matrix");
  std::vector<double> x(q.begin(), q.end());
  if (n == 0) return x;
  const std::size_t hb = a.hb_;
  const std::size_t w = a.width();
  const double tol = 1e-14 * a.norm_inf();
  auto entry = [&](std::size_t i, std::size_t j) -> double& {
    return a.data_[i * w + (j + hb - i)];
  };
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t last_row = std::min(n - 1, k + hb);
    const std::size_t last_col = std::min(n - 1, k + 2 * hb);
    std::size_t piv = k;
    double best = std::abs(entry(k, k));
    for (std::size_t i = k + 1; i <= last_row; ++i) {
      const double v = std::abs(entry(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (!(best > tol)) {
      std::ostringstream msg;
      msg << "singular matrix: pivot " << best << " at row " << k << " below " << tol;
      throw SingularMatrix(msg.str());
    }
    if (piv != k) {
      for (std::size_t j = k; j <= last_col; ++j) std::swap(entry(k, j), entry(piv, j));
      std::swap(x[k], x[piv]);
    }
    const double inv = 1.0 / entry(k, k);
    for (std::size_t i = k + 1; i <= last_row; ++i) {
      const double l = entry(i, k) * inv;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j <= last_col; ++j) entry(i, j) -= l * entry(k, j);
      x[i] -= l * x[k];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t last_col = std::min(n - 1, i + 2 * hb);
    double s = x[i];
    for (std::size_t j = i + 1; j <= last_col; ++j) s -= entry(i, j) * x[j];
    x[i] = s / entry(i, i);
  }
  return x;
}

}  // namespace septensor
