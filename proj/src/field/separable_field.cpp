#include <algorithm>
#include <cmath>
#include <sstream>

#include "septensor/assembly.hpp"
#include "septensor/error.hpp"
#include "septensor/field.hpp"

namespace septensor {

SeparableField::SeparableField(FieldSpacePtr space) : space_(std::move(space)) {
  if (!space_) throw InvalidArgument("field needs a space");
}

std::span<const double> SeparableField::coeffs(std::size_t m, std::size_t d) const {
  const auto& mode = modes_.at(m);
  return std::span<const double>(mode).subspan(space_->offset(d), space_->num_nodes(d));
}

std::span<double> SeparableField::coeffs(std::size_t m, std::size_t d) {
  auto& mode = modes_.at(m);
  return std::span<double>(mode).subspan(space_->offset(d), space_->num_nodes(d));
}

double SeparableField::evaluate(std::span<const double> point) const {
  const std::size_t dims = num_dims();
  if (point.size() != dims) throw InvalidArgument("point dimension does not match field");
  if (modes_.empty()) {
    for (std::size_t d = 0; d < dims; ++d) locate_element(space_->dim(d).mesh, point[d]);
    return 0.0;
  }
  std::vector<BasisEval> evals;
  evals.reserve(dims);
  for (std::size_t d = 0; d < dims; ++d) evals.push_back(space_->shape(d).eval(point[d]));
  double sum = 0.0;
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    double prod = 1.0;
    for (std::size_t d = 0; d < dims; ++d) prod *= evals[d].interpolate(coeffs(m, d));
    sum += prod;
  }
  return sum;
}

double SeparableField::evaluate_mode(std::size_t m, std::span<const double> point) const {
  if (point.size() != num_dims()) throw InvalidArgument("point dimension does not match field");
  double prod = 1.0;
  for (std::size_t d = 0; d < num_dims(); ++d)
    prod *= space_->shape(d).eval(point[d]).interpolate(coeffs(m, d));
  return prod;
}

std::vector<double> SeparableField::evaluate_batch(
    std::span<const std::vector<double>> points) const {
  std::vector<double> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      out.push_back(evaluate(points[i]));
    } catch (const OutOfDomain& err) {
      throw OutOfDomain("point " + std::to_string(i) + ": " + err.what());
    } catch (const InvalidArgument& err) {
      throw InvalidArgument("point " + std::to_string(i) + ": " + err.what());
    }
  }
  return out;
}

void SeparableField::add_mode(std::span<const std::vector<double>> vectors) {
  if (vectors.size() != num_dims()) throw InvalidArgument("mode needs one vector per dimension");
  std::vector<double> flat;
  flat.reserve(space_->mode_size());
  for (std::size_t d = 0; d < vectors.size(); ++d) {
    if (vectors[d].size() != space_->num_nodes(d)) {
      std::ostringstream msg;
      msg << "mode vector for dimension '" << space_->dim(d).name << "' has length "
          << vectors[d].size() << ", expected " << space_->num_nodes(d);
      throw InvalidArgument(msg.str());
    }
    flat.insert(flat.end(), vectors[d].begin(), vectors[d].end());
  }
  modes_.push_back(std::move(flat));
}

void SeparableField::add_mode_flat(std::span<const double> concatenated) {
  if (concatenated.size() != space_->mode_size())
    throw InvalidArgument("concatenated mode has the wrong length");
  modes_.emplace_back(concatenated.begin(), concatenated.end());
}

SeparableField SeparableField::with_mode(std::span<const std::vector<double>> vectors) const {
  SeparableField out = *this;
  out.add_mode(vectors);
  return out;
}

void SeparableField::remove_last_mode() {
  if (!modes_.empty()) modes_.pop_back();
}

void SeparableField::normalize_modes() {
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    double scale = 1.0;
    for (std::size_t d = 1; d < num_dims(); ++d) {
      auto v = coeffs(m, d);
      double nrm = 0.0;
      for (double x : v) nrm += x * x;
      nrm = std::sqrt(nrm);
      if (nrm == 0.0) continue;
      for (double& x : v) x /= nrm;
      scale *= nrm;
    }
    for (double& x : coeffs(m, 0)) x *= scale;
  }
}

SeparableField SeparableField::single_mode(std::size_t m) const {
  SeparableField out(space_);
  out.add_mode_flat(mode(m));
  return out;
}

double inner_product_l2(const SeparableField& f, const SeparableField& g) {
  if (!f.space().same_as(g.space()))
    throw InvalidArgument("inner product needs fields on identical dimensions");
  const FieldSpace& space = f.space();
  double sum = 0.0;
  for (std::size_t m = 0; m < f.num_modes(); ++m) {
    for (std::size_t k = 0; k < g.num_modes(); ++k) {
      double prod = 1.0;
      for (std::size_t d = 0; d < space.num_dims() && prod != 0.0; ++d)
        prod *= space.gram(d).bilinear(f.coeffs(m, d), g.coeffs(k, d));
      sum += prod;
    }
  }
  return sum;
}

double norm_l2(const SeparableField& f) { return std::sqrt(std::max(0.0, inner_product_l2(f, f))); }

}  // namespace septensor
