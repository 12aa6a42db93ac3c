#include "kcosym/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace kcosym {

double Axis::spacing() const {
  return boundary == Boundary::periodic ? (stop - start) / nodes : (stop - start) / (nodes - 1);
}

double Axis::coordinate(int i) const { return start + i * spacing(); }

BaseGrid::BaseGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw std::invalid_argument("BaseGrid: at least one axis required");
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const Axis& ax = axes_[a];
    if (ax.nodes < 3) {
      throw std::invalid_argument("BaseGrid: axis " + std::to_string(a + 1) +
                                  " needs at least 3 nodes");
    }
    if (!(std::isfinite(ax.start) && std::isfinite(ax.stop) && ax.stop > ax.start)) {
      throw std::invalid_argument("BaseGrid: axis " + std::to_string(a + 1) +
                                  " needs finite start < stop");
    }
  }
  strides_.assign(axes_.size(), 1);
  for (std::size_t a = axes_.size() - 1; a > 0; --a) {
    strides_[a - 1] = strides_[a] * static_cast<std::size_t>(axes_[a].nodes);
  }
  node_count_ = strides_[0] * static_cast<std::size_t>(axes_[0].nodes);
}

std::vector<int> BaseGrid::multi_index(std::size_t node) const {
  std::vector<int> idx(axes_.size());
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    idx[a] = static_cast<int>(node / strides_[a]);
    node %= strides_[a];
  }
  return idx;
}

std::size_t BaseGrid::node_at(const std::vector<int>& index) const {
  std::size_t node = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    node += static_cast<std::size_t>(index.at(a)) * strides_[a];
  }
  return node;
}

Vec BaseGrid::coordinates(std::size_t node) const {
  const auto idx = multi_index(node);
  Vec t(k());
  for (int a = 0; a < k(); ++a) t(a) = axes_[static_cast<std::size_t>(a)].coordinate(idx[static_cast<std::size_t>(a)]);
  return t;
}

std::optional<std::size_t> BaseGrid::shifted(std::size_t node, int a, int offset) const {
  const auto& ax = axis(a);
  const std::size_t s = stride(a);
  const int i = static_cast<int>((node / s) % static_cast<std::size_t>(ax.nodes));
  int j = i + offset;
  if (ax.boundary == Boundary::periodic) {
    j = ((j % ax.nodes) + ax.nodes) % ax.nodes;
  } else if (j < 0 || j >= ax.nodes) {
    return std::nullopt;
  }
  return node + static_cast<std::size_t>(j) * s - static_cast<std::size_t>(i) * s;
}

int BaseGrid::boundary_distance(std::size_t node) const {
  int dist = std::numeric_limits<int>::max();
  const auto idx = multi_index(node);
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    if (axes_[a].boundary == Boundary::periodic) continue;
    dist = std::min({dist, idx[a], axes_[a].nodes - 1 - idx[a]});
  }
  return dist;
}

Mat axis_derivative(const BaseGrid& grid, const Mat& field, int a) {
  if (static_cast<std::size_t>(field.rows()) != grid.node_count()) {
    throw std::invalid_argument("axis_derivative: field rows differ from node count");
  }
  const double h = grid.axis(a).spacing();
  Mat d(field.rows(), field.cols());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const auto e = static_cast<Eigen::Index>(node);
    const auto fwd = grid.shifted(node, a, 1);
    const auto bwd = grid.shifted(node, a, -1);
    if (fwd && bwd) {
      d.row(e) = (field.row(static_cast<Eigen::Index>(*fwd)) -
                  field.row(static_cast<Eigen::Index>(*bwd))) / (2.0 * h);
    } else {
      // Central difference against a ghost node extrapolated to fourth order:
      // its leading error matches the interior stencil, so nested
      // derivatives stay second order up to the boundary.
      const int dir = fwd ? 1 : -1;
      auto at = [&](int j) { return field.row(static_cast<Eigen::Index>(*grid.shifted(node, a, dir * j))); };
      if (grid.axis(a).nodes >= 4) {
        d.row(e) = dir * (-4.0 * field.row(e) + 7.0 * at(1) - 4.0 * at(2) + at(3)) / (2.0 * h);
      } else {
        d.row(e) = dir * (-3.0 * field.row(e) + 4.0 * at(1) - at(2)) / (2.0 * h);
      }
    }
  }
  return d;
}

SectionGrid::SectionGrid(BaseGrid grid, int n)
    : grid_(std::move(grid)),
      n_(n),
      psi_(Mat::Zero(static_cast<Eigen::Index>(grid_.node_count()), n)),
      momenta_(Mat::Zero(static_cast<Eigen::Index>(grid_.node_count()), grid_.k() * n)) {
  if (n < 1) throw std::invalid_argument("SectionGrid: n must be >= 1");
}

SectionGrid::SectionGrid(BaseGrid grid, Mat psi, Mat momenta)
    : grid_(std::move(grid)), n_(static_cast<int>(psi.cols())), psi_(std::move(psi)), momenta_(std::move(momenta)) {
  const auto nodes = static_cast<Eigen::Index>(grid_.node_count());
  if (n_ < 1 || psi_.rows() != nodes || momenta_.rows() != nodes ||
      momenta_.cols() != grid_.k() * n_) {
    throw std::invalid_argument("SectionGrid: field shapes inconsistent with grid");
  }
}

ChartPoint SectionGrid::point(std::size_t node) const {
  const auto e = static_cast<Eigen::Index>(node);
  ChartPoint x = ChartPoint::zero(dims());
  x.t = grid_.coordinates(node);
  x.q = psi_.row(e).transpose();
  for (int a = 0; a < grid_.k(); ++a) x.p.row(a) = momenta_.block(e, a * n_, 1, n_);
  return x;
}

}  // namespace kcosym
