#pragma once

// Rectangular sampling of the base R^k and sections sampled on it.

#include <cstddef>
#include <optional>
#include <vector>

#include "kcosym/chart.hpp"

namespace kcosym {

enum class Boundary { periodic, dirichlet };

/// One base axis. Periodic axes sample [start, stop) with spacing
/// (stop - start) / nodes; dirichlet axes include both ends.
struct Axis {
  double start = 0.0;
  double stop = 1.0;
  int nodes = 3;
  Boundary boundary = Boundary::dirichlet;

  double spacing() const;
  double coordinate(int i) const;
};

/// Tensor-product grid; node order is row-major with axis 0 outermost.
class BaseGrid {
 public:
  explicit BaseGrid(std::vector<Axis> axes);

  int k() const { return static_cast<int>(axes_.size()); }
  const Axis& axis(int a) const { return axes_.at(static_cast<std::size_t>(a)); }
  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t node_count() const { return node_count_; }
  std::size_t stride(int a) const { return strides_.at(static_cast<std::size_t>(a)); }

  std::vector<int> multi_index(std::size_t node) const;
  std::size_t node_at(const std::vector<int>& index) const;
  Vec coordinates(std::size_t node) const;

  /// Node displaced by `offset` along axis a, wrapping on periodic axes.
  std::optional<std::size_t> shifted(std::size_t node, int a, int offset) const;
  /// Distance (in nodes) to the nearest non-periodic boundary; large if none.
  int boundary_distance(std::size_t node) const;
  bool interior(std::size_t node) const { return boundary_distance(node) >= 1; }

 private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t node_count_ = 0;
};

/// Second-order derivative of a nodal field (nodes x m) along axis a. Central
/// stencil where available; at dirichlet ends (-4 f0 + 7 f1 - 4 f2 + f3) / 2h,
/// whose leading error equals the central one (3-point stencil on 3-node axes).
Mat axis_derivative(const BaseGrid& grid, const Mat& field, int a);

/// Sampled section t -> (t, psi^i(t), psi^A_i(t)).
class SectionGrid {
 public:
  SectionGrid(BaseGrid grid, int n);
  SectionGrid(BaseGrid grid, Mat psi, Mat momenta);

  const BaseGrid& grid() const { return grid_; }
  Dimensions dims() const { return {grid_.k(), n_}; }
  int n() const { return n_; }

  /// nodes x n.
  const Mat& psi() const { return psi_; }
  Mat& psi() { return psi_; }
  /// nodes x (k n); column A*n + i holds psi^A_i.
  const Mat& momenta() const { return momenta_; }
  Mat& momenta() { return momenta_; }

  ChartPoint point(std::size_t node) const;

 private:
  BaseGrid grid_;
  int n_;
  Mat psi_;
  Mat momenta_;
};

}  // namespace kcosym
