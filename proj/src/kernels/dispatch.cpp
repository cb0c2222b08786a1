#include <atomic>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include "assaygen/kernels.hpp"

namespace assaygen::kernels {

namespace detail {

bool cpu_has_avx2() {
#if defined(ASSAYGEN_HAVE_AVX2_TU) && defined(__x86_64__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

}  // namespace detail

namespace {

std::atomic<bool> g_force_scalar{false};

bool use_avx2() {
  if (g_force_scalar.load(std::memory_order_relaxed)) return false;
  static const bool available = detail::cpu_has_avx2();
  return available;
}

}  // namespace

void force_scalar_kernels(bool force) {
  g_force_scalar.store(force, std::memory_order_relaxed);
}

std::string_view active_kernel_set() { return use_avx2() ? "avx2" : "scalar"; }

double dot_f32(const float* a, const float* b, std::size_t n) {
#if defined(ASSAYGEN_HAVE_AVX2_TU)
  if (use_avx2()) return detail::dot_f32_avx2(a, b, n);
#endif
  return detail::dot_f32_scalar(a, b, n);
}

double norm_sqr_f32(const float* a, std::size_t n) {
#if defined(ASSAYGEN_HAVE_AVX2_TU)
  if (use_avx2()) return detail::norm_sqr_f32_avx2(a, n);
#endif
  return detail::norm_sqr_f32_scalar(a, n);
}

std::uint64_t popcount_and(const std::uint64_t* a, const std::uint64_t* b,
                           std::size_t nwords) {
#if defined(ASSAYGEN_HAVE_AVX2_TU)
  if (use_avx2()) return detail::popcount_and_avx2(a, b, nwords);
#endif
  return detail::popcount_and_scalar(a, b, nwords);
}

AndOrCount popcount_and_or(const std::uint64_t* a, const std::uint64_t* b,
                           std::size_t nwords) {
#if defined(ASSAYGEN_HAVE_AVX2_TU)
  if (use_avx2()) return detail::popcount_and_or_avx2(a, b, nwords);
#endif
  return detail::popcount_and_or_scalar(a, b, nwords);
}

}  // namespace assaygen::kernels
