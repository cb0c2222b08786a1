// AVX2 variants of the inner-loop kernels. Compiled with -mavx2 in its own
// translation unit; only reached after runtime CPU detection.

#include <cstddef>
#include <cstdint>

#include "assaygen/kernels.hpp"

#if defined(ASSAYGEN_HAVE_AVX2_TU)

#include <immintrin.h>

namespace assaygen::kernels::detail {

namespace {

inline double hsum_pd(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

// Per-byte popcount of a 256-bit lane via the nibble lookup table.
inline __m256i popcount_bytes(__m256i v) {
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2,
                                       3, 3, 4, 0, 1, 1, 2, 1, 2, 2, 3, 1, 2,
                                       2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  __m256i lo = _mm256_and_si256(v, low_mask);
  __m256i hi = _mm256_and_si256(_mm256_srli_epi32(v, 4), low_mask);
  return _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo),
                         _mm256_shuffle_epi8(lut, hi));
}

inline std::uint64_t hsum_epu64(__m256i v) {
  __m128i lo = _mm256_castsi256_si128(v);
  __m128i hi = _mm256_extracti128_si256(v, 1);
  lo = _mm_add_epi64(lo, hi);
  return static_cast<std::uint64_t>(_mm_extract_epi64(lo, 0)) +
         static_cast<std::uint64_t>(_mm_extract_epi64(lo, 1));
}

}  // namespace

double dot_f32_avx2(const float* a, const float* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 va = _mm256_loadu_ps(a + i);
    __m256 vb = _mm256_loadu_ps(b + i);
    __m256d a_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(va));
    __m256d a_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(va, 1));
    __m256d b_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(vb));
    __m256d b_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(a_lo, b_lo));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(a_hi, b_hi));
  }
  double acc = hsum_pd(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double norm_sqr_f32_avx2(const float* a, std::size_t n) {
  return dot_f32_avx2(a, a, n);
}

std::uint64_t popcount_and_avx2(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t nwords) {
  __m256i total = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= nwords; i += 4) {
    __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    __m256i bytes = popcount_bytes(_mm256_and_si256(va, vb));
    total = _mm256_add_epi64(total,
                             _mm256_sad_epu8(bytes, _mm256_setzero_si256()));
  }
  std::uint64_t count = hsum_epu64(total);
  for (; i < nwords; ++i) {
    count += static_cast<std::uint64_t>(__builtin_popcountll(a[i] & b[i]));
  }
  return count;
}

AndOrCount popcount_and_or_avx2(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t nwords) {
  __m256i total_and = _mm256_setzero_si256();
  __m256i total_or = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= nwords; i += 4) {
    __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    __m256i and_bytes = popcount_bytes(_mm256_and_si256(va, vb));
    __m256i or_bytes = popcount_bytes(_mm256_or_si256(va, vb));
    __m256i zero = _mm256_setzero_si256();
    total_and = _mm256_add_epi64(total_and, _mm256_sad_epu8(and_bytes, zero));
    total_or = _mm256_add_epi64(total_or, _mm256_sad_epu8(or_bytes, zero));
  }
  AndOrCount out;
  out.both = hsum_epu64(total_and);
  out.either = hsum_epu64(total_or);
  for (; i < nwords; ++i) {
    out.both += static_cast<std::uint64_t>(__builtin_popcountll(a[i] & b[i]));
    out.either += static_cast<std::uint64_t>(__builtin_popcountll(a[i] | b[i]));
  }
  return out;
}

}  // namespace assaygen::kernels::detail

#endif  // ASSAYGEN_HAVE_AVX2_TU
