#include "septensor/basis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "septensor/error.hpp"

namespace septensor {

Mesh1D::Mesh1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw InvalidArgument("mesh needs at least one element");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!std::isfinite(nodes_[i])) throw InvalidArgument("mesh node is not finite");
    if (i > 0 && !(nodes_[i] > nodes_[i - 1]))
      throw InvalidArgument("mesh nodes must be strictly increasing");
  }
}

bool Mesh1D::contains(double x) const noexcept {
  const double tol = 1e-12 * length();
  return x >= x_min() - tol && x <= x_max() + tol;
}

Mesh1D make_uniform_mesh(double x_min, double x_max, std::size_t n_elem) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max))
    throw InvalidArgument("mesh bounds must be finite");
  if (n_elem == 0) throw InvalidArgument("mesh needs at least one element");
  if (!(x_min < x_max)) throw InvalidArgument("mesh bounds must satisfy x_min < x_max");
  std::vector<double> nodes(n_elem + 1);
  const double h = (x_max - x_min) / static_cast<double>(n_elem);
  for (std::size_t i = 0; i <= n_elem; ++i) nodes[i] = x_min + h * static_cast<double>(i);
  nodes.back() = x_max;
  return Mesh1D(std::move(nodes));
}

Mesh1D make_graded_mesh(std::span<const GradedSegment> segments) {
  if (segments.empty()) throw InvalidArgument("graded mesh needs at least one segment");
  std::vector<double> nodes;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& seg = segments[k];
    if (seg.n_elem == 0) throw InvalidArgument("graded segment with zero elements");
    if (!std::isfinite(seg.begin) || !std::isfinite(seg.end) || !(seg.begin < seg.end))
      throw InvalidArgument("graded segment bounds must be finite and increasing");
    if (k > 0) {
      const double joint = segments[k - 1].end;
      const double scale = std::max({1.0, std::abs(joint), std::abs(seg.begin)});
      if (std::abs(seg.begin - joint) > 1e-12 * scale) {
        std::ostringstream msg;
        msg << "graded segments are not contiguous at segment " << k << " (" << joint
            << " vs " << seg.begin << ")";
        throw InvalidArgument(msg.str());
      }
    }
    const double h = (seg.end - seg.begin) / static_cast<double>(seg.n_elem);
    const std::size_t start = (k == 0) ? 0 : 1;
    for (std::size_t i = start; i <= seg.n_elem; ++i) {
      nodes.push_back(i == seg.n_elem ? seg.end : seg.begin + h * static_cast<double>(i));
    }
  }
  return Mesh1D(std::move(nodes));
}

std::size_t locate_element(const Mesh1D& mesh, double x) {
  if (!std::isfinite(x) || !mesh.contains(x)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "coordinate " << x << " outside [" << mesh.x_min() << ", " << mesh.x_max() << "]";
    throw OutOfDomain(msg.str());
  }
  const auto nodes = mesh.nodes();
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  if (it == nodes.begin()) return 0;
  const auto e = static_cast<std::size_t>(it - nodes.begin()) - 1;
  return std::min(e, mesh.num_elements() - 1);
}

}  // namespace septensor
