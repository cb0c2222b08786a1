#include <bit>
#include <cstddef>
#include <cstdint>

#include "assaygen/kernels.hpp"

namespace assaygen::kernels::detail {

double dot_f32_scalar(const float* a, const float* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double norm_sqr_f32_scalar(const float* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(a[i]);
  }
  return acc;
}

std::uint64_t popcount_and_scalar(const std::uint64_t* a,
                                  const std::uint64_t* b,
                                  std::size_t nwords) {
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < nwords; ++i) {
    count += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
  }
  return count;
}

AndOrCount popcount_and_or_scalar(const std::uint64_t* a,
                                  const std::uint64_t* b,
                                  std::size_t nwords) {
  AndOrCount out;
  for (std::size_t i = 0; i < nwords; ++i) {
    out.both += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
    out.either += static_cast<std::uint64_t>(std::popcount(a[i] | b[i]));
  }
  return out;
}

}  // namespace assaygen::kernels::detail
