#pragma once

#include <cstdint>
#include <vector>

#include "kcosym/chart.hpp"

namespace kcosym {

/// `count` quasi-random points in the box [lo, hi]: a Halton sequence shifted
/// modulo 1 by a seeded random offset (Cranley-Patterson rotation).
std::vector<Vec> sample_box(const Vec& lo, const Vec& hi, std::size_t count, std::uint64_t seed);

/// Chart points with every flat coordinate in [-half_width, half_width].
std::vector<ChartPoint> sample_chart(const Dimensions& dims, double half_width, std::size_t count,
                                     std::uint64_t seed);

}  // namespace kcosym
