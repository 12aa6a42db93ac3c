#include "kcosym/sampling.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace kcosym {

namespace {

int nth_prime(int i) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59,
                               61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};
  constexpr int count = sizeof(primes) / sizeof(primes[0]);
  if (i >= count) throw std::invalid_argument("sample_box: dimension too large for the Halton sequence");
  return primes[i];
}

double radical_inverse(std::size_t index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % static_cast<std::size_t>(base));
    index /= static_cast<std::size_t>(base);
    f /= base;
  }
  return result;
}

}  // namespace

std::vector<Vec> sample_box(const Vec& lo, const Vec& hi, std::size_t count, std::uint64_t seed) {
  if (lo.size() != hi.size()) throw std::invalid_argument("sample_box: bound dimensions differ");
  if (((hi - lo).array() < 0.0).any()) throw std::invalid_argument("sample_box: hi < lo");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec shift(lo.size());
  for (Eigen::Index d = 0; d < lo.size(); ++d) shift(d) = unit(rng);

  std::vector<Vec> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec x(lo.size());
    for (Eigen::Index d = 0; d < lo.size(); ++d) {
      double u = radical_inverse(i + 1, nth_prime(static_cast<int>(d))) + shift(d);
      u -= std::floor(u);
      x(d) = lo(d) + u * (hi(d) - lo(d));
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<ChartPoint> sample_chart(const Dimensions& dims, double half_width, std::size_t count,
                                     std::uint64_t seed) {
  const Vec hi = Vec::Constant(dims.phase(), half_width);
  std::vector<ChartPoint> out;
  out.reserve(count);
  for (const Vec& v : sample_box(-hi, hi, count, seed)) out.push_back(ChartPoint::from_flat(dims, v));
  return out;
}

}  // namespace kcosym
