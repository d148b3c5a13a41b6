#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace litesr {

// std::uniform_real_distribution and std::shuffle are implementation-defined,
// so everything that must reproduce bit-for-bit across toolchains (weight
// fixtures, dataset splits) uses the explicit mappings below on top of the
// fully specified mt19937 stream.

inline float uniform01(std::mt19937& g) {
  return float(g() >> 8) * (1.0f / 16777216.0f);  // 24-bit mantissa, [0, 1)
}

inline float uniform_range(std::mt19937& g, float lo, float hi) {
  return lo + (hi - lo) * uniform01(g);
}

inline std::uint32_t bounded(std::mt19937& g, std::uint32_t n) {
  return g() % n;  // modulo bias is irrelevant at these ranges; frozen as-is
}

template <typename T>
void fisher_yates(std::vector<T>& v, std::mt19937& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[bounded(g, std::uint32_t(i))]);
  }
}

}  // namespace litesr
